#!/usr/bin/env python3
"""Independent GraphML manifest: count <node> and <edge> elements by a raw
XML scan, with no dependency on the streetvis package.

Usage: python tools/scan_graphml.py FILE.graphml
Prints a JSON manifest {"nodes": N, "edges": E, "attribute_keys": [...]}.
"""

from __future__ import annotations

import json
import sys
import xml.etree.ElementTree as ET


def scan(path: str) -> dict:
    nodes = 0
    edges = 0
    keys: set[str] = set()
    for _, element in ET.iterparse(path, events=("end",)):
        tag = element.tag.rsplit("}", 1)[-1]
        if tag == "node":
            nodes += 1
            element.clear()
        elif tag == "edge":
            edges += 1
            element.clear()
        elif tag == "key":
            name = element.get("attr.name")
            if name:
                keys.add(name)
    return {"nodes": nodes, "edges": edges, "attribute_keys": sorted(keys)}


if __name__ == "__main__":
    print(json.dumps(scan(sys.argv[1])))
