"""Loaders for OSMnx-flavored GraphML and the JSON interchange format.

GraphML ingest preserves every node/edge attribute in the record's data map.
Attribute values arrive as strings; anything that parses as a number becomes
one, everything else stays a string. Edge polylines come from an optional
``geometry`` attribute holding a WKT LINESTRING in (lon lat) order, matching
how OSMnx stores x=lon, y=lat; edges without geometry get the straight line
between their endpoint nodes.
"""

from __future__ import annotations

import io
import json
import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field

from .errors import (
    MalformedWkt,
    MalformedXml,
    MissingCoordinateAttribute,
    SchemaViolation,
)
from .model import EdgeRecord, MarkerRecord, NodeRecord, Scalar, StreetNetwork

_WKT_LINESTRING = re.compile(r"^\s*LINESTRING\s*\((.*)\)\s*$", re.IGNORECASE | re.DOTALL)


@dataclass
class IngestReport:
    node_count: int = 0
    edge_count: int = 0
    warnings: list[str] = field(default_factory=list)
    attribute_keys_seen: set[str] = field(default_factory=set)


def _parse_scalar(text: str) -> Scalar:
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def _strip_ns(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def parse_wkt_linestring(text: str, edge_id: str) -> tuple[tuple[float, float], ...]:
    """Parse 'LINESTRING (lon lat, ...)' into a (lat, lon) polyline."""
    m = _WKT_LINESTRING.match(text)
    if not m:
        raise MalformedWkt(edge_id, text)
    points: list[tuple[float, float]] = []
    for chunk in m.group(1).split(","):
        parts = chunk.split()
        if len(parts) != 2:
            raise MalformedWkt(edge_id, text)
        try:
            lon, lat = float(parts[0]), float(parts[1])
        except ValueError:
            raise MalformedWkt(edge_id, text) from None
        points.append((lat, lon))
    if len(points) < 2:
        raise MalformedWkt(edge_id, text)
    return tuple(points)


def load_osmnx_graphml(
    document: bytes | io.IOBase,
) -> tuple[list[NodeRecord], list[EdgeRecord], IngestReport]:
    """Parse OSMnx-exported GraphML into node and edge records.

    Multigraph keys (networkx writes them as the edge element's ``id``
    attribute) disambiguate parallel edges; the record id is always
    "source-target-key", with a per-pair running index when no id attribute
    is present.
    """
    raw = document if isinstance(document, bytes) else document.read()
    if isinstance(raw, str):
        raw = raw.encode("utf-8")
    try:
        root = ET.fromstring(raw)
    except ET.ParseError as exc:
        raise MalformedXml(str(exc)) from exc

    # <key> declarations map opaque key ids to attribute names.
    key_names: dict[str, str] = {}
    for el in root.iter():
        if _strip_ns(el.tag) == "key":
            kid = el.get("id")
            name = el.get("attr.name") or kid
            if kid is not None:
                key_names[kid] = name

    report = IngestReport()

    def data_map(element: ET.Element) -> dict[str, Scalar]:
        out: dict[str, Scalar] = {}
        for child in element:
            if _strip_ns(child.tag) != "data":
                continue
            name = key_names.get(child.get("key", ""), child.get("key", ""))
            out[name] = _parse_scalar(child.text or "")
            report.attribute_keys_seen.add(name)
        return out

    nodes: list[NodeRecord] = []
    node_coords: dict[str, tuple[float, float]] = {}
    edges: list[EdgeRecord] = []
    pair_counters: dict[tuple[str, str], int] = {}

    for el in root.iter():
        tag = _strip_ns(el.tag)
        if tag == "node":
            node_id = el.get("id", "")
            data = data_map(el)
            x = data.get("x")
            y = data.get("y")
            if not isinstance(x, (int, float)) or not isinstance(y, (int, float)) or isinstance(x, bool) or isinstance(y, bool):
                raise MissingCoordinateAttribute(node_id)
            lat, lon = float(y), float(x)
            node_coords[node_id] = (lat, lon)
            nodes.append(NodeRecord(id=node_id, lat=lat, lon=lon, data=data))
        elif tag == "edge":
            source = el.get("source", "")
            target = el.get("target", "")
            key = el.get("id")
            if key is None:
                key = str(pair_counters.get((source, target), 0))
            pair_counters[(source, target)] = pair_counters.get((source, target), 0) + 1
            edge_id = f"{source}-{target}-{key}"
            data = data_map(el)
            geometry = data.get("geometry")
            if isinstance(geometry, str):
                coords = parse_wkt_linestring(geometry, edge_id)
            else:
                try:
                    coords = (node_coords[source], node_coords[target])
                except KeyError as exc:
                    raise MalformedXml(
                        f"edge {edge_id} references undeclared node {exc.args[0]!r}"
                    ) from None
            edges.append(
                EdgeRecord(id=edge_id, source=source, target=target, coordinates=coords, data=data)
            )

    report.node_count = len(nodes)
    report.edge_count = len(edges)
    return nodes, edges, report


# -- JSON interchange --------------------------------------------------------------


def _require(obj, path: str, key: str, types, allow_none: bool = False):
    if key not in obj:
        if allow_none:
            return None
        raise SchemaViolation(f"{path}.{key}", "missing required field")
    value = obj[key]
    if value is None and allow_none:
        return None
    if isinstance(value, bool) and bool not in (types if isinstance(types, tuple) else (types,)):
        raise SchemaViolation(f"{path}.{key}", f"expected {types}, got bool")
    if not isinstance(value, types):
        raise SchemaViolation(f"{path}.{key}", f"expected {types}, got {type(value).__name__}")
    return value


def _check_data(obj, path: str) -> dict[str, Scalar]:
    data = obj.get("data", {})
    if not isinstance(data, dict):
        raise SchemaViolation(f"{path}.data", "expected an object")
    for k, v in data.items():
        if not isinstance(v, (bool, int, float, str)):
            raise SchemaViolation(f"{path}.data.{k}", "values must be scalars")
    return dict(data)


def node_from_dict(obj: dict, path: str = "node") -> NodeRecord:
    if not isinstance(obj, dict):
        raise SchemaViolation(path, "expected an object")
    return NodeRecord(
        id=str(_require(obj, path, "id", (str, int))),
        lat=float(_require(obj, path, "lat", (int, float))),
        lon=float(_require(obj, path, "lon", (int, float))),
        data=_check_data(obj, path),
    )


def edge_from_dict(obj: dict, path: str = "edge") -> EdgeRecord:
    if not isinstance(obj, dict):
        raise SchemaViolation(path, "expected an object")
    coords = _require(obj, path, "coordinates", list)
    if len(coords) < 2:
        raise SchemaViolation(f"{path}.coordinates", "polyline needs at least 2 points")
    parsed = []
    for i, pt in enumerate(coords):
        if (
            not isinstance(pt, (list, tuple))
            or len(pt) != 2
            or not all(isinstance(c, (int, float)) and not isinstance(c, bool) for c in pt)
        ):
            raise SchemaViolation(f"{path}.coordinates[{i}]", "expected [lat, lon]")
        parsed.append((float(pt[0]), float(pt[1])))
    return EdgeRecord(
        id=str(_require(obj, path, "id", (str, int))),
        source=str(_require(obj, path, "source", (str, int))),
        target=str(_require(obj, path, "target", (str, int))),
        coordinates=tuple(parsed),
        data=_check_data(obj, path),
    )


def marker_from_dict(obj: dict, path: str = "marker") -> MarkerRecord:
    if not isinstance(obj, dict):
        raise SchemaViolation(path, "expected an object")
    popup = _require(obj, path, "popup_text", str, allow_none=True)
    icon = _require(obj, path, "icon_id", str, allow_none=True)
    return MarkerRecord(
        id=str(_require(obj, path, "id", (str, int))),
        lat=float(_require(obj, path, "lat", (int, float))),
        lon=float(_require(obj, path, "lon", (int, float))),
        popup_text=popup,
        icon_id=icon,
        data=_check_data(obj, path),
    )


def load_network_json(
    document: bytes | str | io.IOBase,
) -> tuple[list[NodeRecord], list[EdgeRecord], list[MarkerRecord]]:
    """Parse the JSON interchange document into record sequences."""
    raw = document if isinstance(document, (bytes, str)) else document.read()
    try:
        obj = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise SchemaViolation("$", f"invalid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise SchemaViolation("$", "top level must be an object")
    for section in ("nodes", "edges", "markers"):
        if section not in obj or not isinstance(obj[section], list):
            raise SchemaViolation(f"$.{section}", "expected an array")
    nodes = [node_from_dict(o, f"$.nodes[{i}]") for i, o in enumerate(obj["nodes"])]
    edges = [edge_from_dict(o, f"$.edges[{i}]") for i, o in enumerate(obj["edges"])]
    markers = [marker_from_dict(o, f"$.markers[{i}]") for i, o in enumerate(obj["markers"])]
    return nodes, edges, markers


def node_to_dict(n: NodeRecord) -> dict:
    return {"id": n.id, "lat": n.lat, "lon": n.lon, "data": dict(n.data)}


def edge_to_dict(e: EdgeRecord) -> dict:
    return {
        "id": e.id,
        "source": e.source,
        "target": e.target,
        "coordinates": [[lat, lon] for lat, lon in e.coordinates],
        "data": dict(e.data),
    }


def marker_to_dict(m: MarkerRecord) -> dict:
    out = {"id": m.id, "lat": m.lat, "lon": m.lon, "data": dict(m.data)}
    if m.popup_text is not None:
        out["popup_text"] = m.popup_text
    if m.icon_id is not None:
        out["icon_id"] = m.icon_id
    return out


def emit_network_json(net: StreetNetwork) -> bytes:
    """Inverse writer for load_network_json; round-trips exactly."""
    doc = {
        "nodes": [node_to_dict(n) for n in net.nodes],
        "edges": [edge_to_dict(e) for e in net.edges],
        "markers": [marker_to_dict(m) for m in net.markers],
    }
    return json.dumps(doc, ensure_ascii=False).encode("utf-8")
