#!/usr/bin/env python3
"""Generate the pinned Queretaro-class GraphML fixture.

Writes an OSMnx-flavored GraphML street network with exactly 20,385 nodes
and 49,137 edges, centered on (20.6025256, -100.3886302). Output is fully
deterministic (fixed RNG seed, fixed insertion order), so the fixture is
reproducible byte-for-byte in a given environment without committing a
multi-megabyte blob.

Usage: python tools/make_queretaro_fixture.py [OUT.graphml]
"""

from __future__ import annotations

import math
import sys
from pathlib import Path

import networkx as nx
import numpy as np

NODE_TARGET = 20_385
EDGE_TARGET = 49_137
CENTER = (20.6025256, -100.3886302)
SPACING_DEG = 0.0012
SEED = 20_385


def build_graph() -> nx.MultiDiGraph:
    rng = np.random.default_rng(SEED)
    side = math.isqrt(NODE_TARGET) + 1  # 143; first NODE_TARGET cells kept
    lat0, lon0 = CENTER
    half = (side - 1) * SPACING_DEG / 2.0

    g = nx.MultiDiGraph()
    g.graph["crs"] = "epsg:4326"

    coords: dict[int, tuple[float, float]] = {}
    jitter = rng.normal(0.0, SPACING_DEG / 12.0, size=(NODE_TARGET, 2))
    for i in range(NODE_TARGET):
        r, c = divmod(i, side)
        lat = lat0 - half + r * SPACING_DEG + jitter[i, 0]
        lon = lon0 - half + c * SPACING_DEG + jitter[i, 1]
        coords[i] = (lat, lon)
        g.add_node(
            str(100_000 + i),
            y=round(lat, 7),
            x=round(lon, 7),
            street_count=int(rng.integers(1, 5)),
        )

    # ensure the published city center lies strictly inside the bbox
    assert coords[0][0] < CENTER[0] < coords[NODE_TARGET - 1][0]

    base_pairs: list[tuple[int, int]] = []
    for i in range(NODE_TARGET):
        r, c = divmod(i, side)
        if c + 1 < side and i + 1 < NODE_TARGET:
            base_pairs.append((i, i + 1))
        if i + side < NODE_TARGET:
            base_pairs.append((i, i + side))

    extra_needed = EDGE_TARGET - len(base_pairs)
    if extra_needed < 0:
        raise SystemExit(f"grid produced too many base edges: {len(base_pairs)}")
    n_parallel = min(100, extra_needed)
    pairs = (
        [(u, v, 0) for u, v in base_pairs]
        + [(u, v, 1) for u, v in base_pairs[:n_parallel]]
        + [(v, u, 0) for u, v in base_pairs[: extra_needed - n_parallel]]
    )
    assert len(pairs) == EDGE_TARGET

    highways = ("residential", "secondary", "tertiary", "primary")
    for seq, (u, v, key) in enumerate(pairs):
        (lat_u, lon_u) = coords[u]
        (lat_v, lon_v) = coords[v]
        length = math.hypot(lat_v - lat_u, lon_v - lon_u) * 111_320.0
        attrs = {
            "osmid": 10_000_000 + seq,
            "length": round(length, 3),
            "highway": highways[seq % len(highways)],
            "oneway": "True" if seq % 5 == 0 else "False",
        }
        if seq % 3 == 0:
            # curved street: exact endpoints plus one bulged midpoint, (lon lat) order
            mid_lat = (lat_u + lat_v) / 2.0 + float(rng.normal(0.0, SPACING_DEG / 20.0))
            mid_lon = (lon_u + lon_v) / 2.0 + float(rng.normal(0.0, SPACING_DEG / 20.0))
            attrs["geometry"] = (
                f"LINESTRING ({g.nodes[str(100_000 + u)]['x']} {g.nodes[str(100_000 + u)]['y']}, "
                f"{round(mid_lon, 7)} {round(mid_lat, 7)}, "
                f"{g.nodes[str(100_000 + v)]['x']} {g.nodes[str(100_000 + v)]['y']})"
            )
        if seq % 7 == 0:
            attrs["name"] = f"Calle {seq}"
        g.add_edge(str(100_000 + u), str(100_000 + v), key=key, **attrs)
    return g


def main() -> None:
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("tests/fixtures/queretaro.graphml")
    out.parent.mkdir(parents=True, exist_ok=True)
    g = build_graph()
    nx.write_graphml(g, out)
    print(f"{out}: {g.number_of_nodes()} nodes, {g.number_of_edges()} edges")


if __name__ == "__main__":
    main()
