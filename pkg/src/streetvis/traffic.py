"""Traffic simulation replay: per-timestep edge counts, vehicle speeds,
top-k extracts, and the patches that drive a session through a timeline.

Input is three CSV files derived from floating car data:

    edge_counts.csv  timestep,edge_id,count
    vehicles.csv     timestep,vehicle_id,speed,lat,lon
    totals.csv       timestep,active_vehicles,mean_speed

totals.csv defines the timestep range, which must be contiguous from 0.
Each vehicle occupies exactly one edge per timestep, so the edge counts of a
timestep must sum to its vehicle record count.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Iterable

from .errors import (
    ConservationViolation,
    NonContiguousTimesteps,
    SchemaViolation,
    TimestepOutOfRange,
)
from .geo import unproject
from .kernels import polyline_midpoints
from .model import MarkerRecord, StreetNetwork
from .ingest import edge_to_dict, marker_to_dict
from .tessellate import project_network

MODES = ("busiest_edges", "slowest_vehicles")


@dataclass(frozen=True)
class VehicleState:
    speed: float
    lat: float
    lon: float


@dataclass(frozen=True)
class TrafficSeries:
    timestep_count: int
    edge_counts: tuple[dict[str, int], ...]
    vehicles: tuple[dict[str, VehicleState], ...]
    totals: tuple[tuple[int, float], ...]  # (active_vehicles, mean_speed)

    def check_timestep(self, t: int) -> None:
        if not (0 <= t < self.timestep_count):
            raise TimestepOutOfRange(t, self.timestep_count)


def _rows(stream, name: str, columns: tuple[str, ...]) -> Iterable[dict[str, str]]:
    raw = stream.read() if hasattr(stream, "read") else stream
    if isinstance(raw, bytes):
        raw = raw.decode("utf-8")
    reader = csv.DictReader(io.StringIO(raw))
    if reader.fieldnames is None or tuple(reader.fieldnames) != columns:
        raise SchemaViolation(name, f"expected header {','.join(columns)}")
    for i, row in enumerate(reader, start=2):
        if any(v is None or v == "" for v in row.values()):
            raise SchemaViolation(f"{name}:{i}", "missing value")
        yield row


def _to_int(value: str, path: str) -> int:
    try:
        return int(value)
    except ValueError:
        raise SchemaViolation(path, f"expected an integer, got {value!r}") from None


def _to_float(value: str, path: str) -> float:
    try:
        return float(value)
    except ValueError:
        raise SchemaViolation(path, f"expected a number, got {value!r}") from None


def load_fcd_csv(edge_counts_stream, vehicles_stream, totals_stream) -> TrafficSeries:
    """Build a TrafficSeries, verifying contiguity and count conservation."""
    totals_by_t: dict[int, tuple[int, float]] = {}
    for i, row in enumerate(_rows(totals_stream, "totals.csv", ("timestep", "active_vehicles", "mean_speed")), start=2):
        t = _to_int(row["timestep"], f"totals.csv:{i}.timestep")
        if t in totals_by_t:
            raise SchemaViolation(f"totals.csv:{i}", f"duplicate timestep {t}")
        totals_by_t[t] = (
            _to_int(row["active_vehicles"], f"totals.csv:{i}.active_vehicles"),
            _to_float(row["mean_speed"], f"totals.csv:{i}.mean_speed"),
        )
    if not totals_by_t:
        raise SchemaViolation("totals.csv", "no timesteps")
    count = max(totals_by_t) + 1
    missing = [t for t in range(count) if t not in totals_by_t]
    if missing:
        raise NonContiguousTimesteps(missing)

    edge_counts: list[dict[str, int]] = [{} for _ in range(count)]
    for i, row in enumerate(_rows(edge_counts_stream, "edge_counts.csv", ("timestep", "edge_id", "count")), start=2):
        t = _to_int(row["timestep"], f"edge_counts.csv:{i}.timestep")
        if not (0 <= t < count):
            raise SchemaViolation(f"edge_counts.csv:{i}", f"timestep {t} outside totals range")
        edge_counts[t][row["edge_id"]] = _to_int(row["count"], f"edge_counts.csv:{i}.count")

    vehicles: list[dict[str, VehicleState]] = [{} for _ in range(count)]
    for i, row in enumerate(_rows(vehicles_stream, "vehicles.csv", ("timestep", "vehicle_id", "speed", "lat", "lon")), start=2):
        t = _to_int(row["timestep"], f"vehicles.csv:{i}.timestep")
        if not (0 <= t < count):
            raise SchemaViolation(f"vehicles.csv:{i}", f"timestep {t} outside totals range")
        vid = row["vehicle_id"]
        if vid in vehicles[t]:
            raise SchemaViolation(f"vehicles.csv:{i}", f"duplicate vehicle {vid!r} at t={t}")
        vehicles[t][vid] = VehicleState(
            speed=_to_float(row["speed"], f"vehicles.csv:{i}.speed"),
            lat=_to_float(row["lat"], f"vehicles.csv:{i}.lat"),
            lon=_to_float(row["lon"], f"vehicles.csv:{i}.lon"),
        )

    violations = [
        t for t in range(count) if sum(edge_counts[t].values()) != len(vehicles[t])
    ]
    if violations:
        raise ConservationViolation(violations)

    return TrafficSeries(
        timestep_count=count,
        edge_counts=tuple(edge_counts),
        vehicles=tuple(vehicles),
        totals=tuple(totals_by_t[t] for t in range(count)),
    )


def top_k_edges(series: TrafficSeries, t: int, k: int = 10) -> list[tuple[str, int]]:
    """Busiest edges at t, descending by count, ties by id; zero counts drop."""
    series.check_timestep(t)
    busy = [(eid, c) for eid, c in series.edge_counts[t].items() if c > 0]
    busy.sort(key=lambda item: (-item[1], item[0]))
    return busy[: max(k, 0)]


def top_k_slowest(series: TrafficSeries, t: int, k: int = 10) -> list[tuple[str, float, float, float]]:
    """Slowest vehicles at t, ascending by speed, ties by id. Stopped
    vehicles (speed 0) count as slowest."""
    series.check_timestep(t)
    rows = [(vid, v.speed, v.lat, v.lon) for vid, v in series.vehicles[t].items()]
    rows.sort(key=lambda item: (item[1], item[0]))
    return rows[: max(k, 0)]


def markers_for(
    series: TrafficSeries,
    net: StreetNetwork,
    t: int,
    mode: str = "busiest_edges",
    k: int = 10,
) -> list[MarkerRecord]:
    """Markers at the arc-length midpoints of the busiest edges, or atop the
    slowest vehicles."""
    series.check_timestep(t)
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    markers: list[MarkerRecord] = []
    if mode == "busiest_edges":
        geometry = project_network(net)
        mids, _ = polyline_midpoints(geometry.edge_coords, geometry.edge_offsets)
        for eid, count in top_k_edges(series, t, k):
            if eid not in net.edge_index:
                continue
            i = net.edge_index[eid]
            lat, lon = unproject((mids[i, 0], mids[i, 1]))
            markers.append(
                MarkerRecord(
                    id=f"top-edge-{eid}",
                    lat=lat,
                    lon=lon,
                    popup_text=f"edge {eid}: {count} vehicles",
                    icon_id="pin",
                    data={"edge_id": eid, "count": count},
                )
            )
    else:
        for vid, speed, lat, lon in top_k_slowest(series, t, k):
            markers.append(
                MarkerRecord(
                    id=f"vehicle-{vid}",
                    lat=lat,
                    lon=lon,
                    popup_text=f"vehicle {vid}: {speed} m/s",
                    icon_id="pin",
                    data={"vehicle_id": vid, "speed": speed},
                )
            )
    return markers


def timestep_patch(
    series: TrafficSeries,
    net: StreetNetwork,
    t: int,
    mode: str = "busiest_edges",
    k: int = 10,
) -> dict:
    """Session patch replaying timestep t: every edge's weight becomes its
    vehicle count (zeros written explicitly so SCALE styling fades quiet
    streets) and the marker set becomes markers_for(...)."""
    series.check_timestep(t)
    counts = series.edge_counts[t]
    edges_data = []
    for e in net.edges:
        d = edge_to_dict(e)
        d["data"]["weight"] = counts.get(e.id, 0)
        edges_data.append(d)
    return {
        "edges_data": edges_data,
        "markers_data": [marker_to_dict(m) for m in markers_for(series, net, t, mode, k)],
    }
