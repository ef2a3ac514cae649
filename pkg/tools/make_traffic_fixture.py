#!/usr/bin/env python3
"""Generate a synthetic traffic replay fixture: vehicles random-walking a
street grid, aggregated into the three replay CSVs plus the network itself
as interchange JSON.

Usage: python tools/make_traffic_fixture.py OUT_DIR [--timesteps 100]
       [--vehicles 40] [--grid-nodes 400] [--seed 7]
"""

from __future__ import annotations

import argparse
from pathlib import Path

import numpy as np

from streetvis.bench import synthesize_grid
from streetvis.ingest import emit_network_json


def main() -> None:
    parser = argparse.ArgumentParser()
    parser.add_argument("out_dir", type=Path)
    parser.add_argument("--timesteps", type=int, default=100)
    parser.add_argument("--vehicles", type=int, default=40)
    parser.add_argument("--grid-nodes", type=int, default=400)
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    net = synthesize_grid(args.grid_nodes)
    edge_ids = [e.id for e in net.edges]

    args.out_dir.mkdir(parents=True, exist_ok=True)
    (args.out_dir / "network.json").write_bytes(emit_network_json(net))

    counts_rows = ["timestep,edge_id,count"]
    vehicle_rows = ["timestep,vehicle_id,speed,lat,lon"]
    totals_rows = ["timestep,active_vehicles,mean_speed"]

    # each vehicle walks edge to edge; a vehicle may idle (speed 0)
    positions = rng.integers(0, len(edge_ids), size=args.vehicles)
    for t in range(args.timesteps):
        active = max(1, int(args.vehicles * (0.5 + 0.5 * min(1.0, t / 20.0))))
        speeds = np.round(np.abs(rng.normal(8.0, 4.0, size=active)), 3)
        speeds[rng.random(active) < 0.05] = 0.0
        moving = speeds > 0
        positions[:active][moving] = (
            positions[:active][moving] + rng.integers(1, 4, size=int(moving.sum()))
        ) % len(edge_ids)

        per_edge: dict[str, int] = {}
        mean_speed = float(np.mean(speeds)) if active else 0.0
        for v in range(active):
            edge = net.edges[positions[v]]
            per_edge[edge.id] = per_edge.get(edge.id, 0) + 1
            frac = float(rng.random())
            (lat0, lon0), (lat1, lon1) = edge.coordinates[0], edge.coordinates[-1]
            vehicle_rows.append(
                f"{t},v{v},{speeds[v]},{round(lat0 + frac * (lat1 - lat0), 7)},"
                f"{round(lon0 + frac * (lon1 - lon0), 7)}"
            )
        for edge_id in sorted(per_edge):
            counts_rows.append(f"{t},{edge_id},{per_edge[edge_id]}")
        totals_rows.append(f"{t},{active},{round(mean_speed, 3)}")

    (args.out_dir / "edge_counts.csv").write_text("\n".join(counts_rows) + "\n", encoding="utf-8")
    (args.out_dir / "vehicles.csv").write_text("\n".join(vehicle_rows) + "\n", encoding="utf-8")
    (args.out_dir / "totals.csv").write_text("\n".join(totals_rows) + "\n", encoding="utf-8")
    print(f"{args.out_dir}: {args.timesteps} timesteps, {args.vehicles} vehicles, "
          f"{len(edge_ids)}-edge grid")


if __name__ == "__main__":
    main()
