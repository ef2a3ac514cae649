"""Headless animation benchmark: circular pan over a synthetic street grid.

Per frame the viewport center moves along a circle (angle step 2*pi/frames)
and the configured CPU work runs: ``transform_only`` recomputes the screen
transform and visibility bounds of every bundle vertex, mimicking what a
client does while panning; ``restyle_and_retessellate`` additionally reruns
style resolution and edge tessellation. Wall times come from a monotonic
clock; absolute FPS is hardware-bound context, the comparable quantity is
CPU cost per frame.
"""

from __future__ import annotations

import math
import platform
import time
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .geo import Viewport, project, unproject, world_scale
from .model import EdgeRecord, NodeRecord, StreetNetwork, build_network
from .style import StyleOptions, resolve_styles
from .tessellate import build_bundle, encode_bundle, project_network, tessellate_edges

GRID_CENTER = (20.6025256, -100.3886302)
GRID_SPACING_DEG = 0.001

PER_FRAME_MODES = ("transform_only", "restyle_and_retessellate")


def synthesize_grid(approx_nodes: int) -> StreetNetwork:
    """Deterministic sqrt(n) x sqrt(n) lattice with 4-neighbor 2-point edges.

    A side-s lattice has s*s nodes and 2*s*(s-1) directed edges (right and
    down per cell). Edge weights are the edge's own index, giving SCALE
    styling something monotone to chew on.
    """
    if approx_nodes < 4:
        raise ValueError("approx_nodes must be >= 4")
    side = max(2, round(math.sqrt(approx_nodes)))
    lat0, lon0 = GRID_CENTER
    half = (side - 1) * GRID_SPACING_DEG / 2.0

    nodes = []
    for r in range(side):
        for c in range(side):
            nodes.append(
                NodeRecord(
                    id=f"n{r}-{c}",
                    lat=lat0 - half + r * GRID_SPACING_DEG,
                    lon=lon0 - half + c * GRID_SPACING_DEG,
                    data={},
                )
            )

    def node_at(r: int, c: int) -> NodeRecord:
        return nodes[r * side + c]

    edges = []
    for r in range(side):
        for c in range(side):
            for dr, dc in ((0, 1), (1, 0)):
                rr, cc = r + dr, c + dc
                if rr >= side or cc >= side:
                    continue
                a, b = node_at(r, c), node_at(rr, cc)
                idx = len(edges)
                edges.append(
                    EdgeRecord(
                        id=f"e{idx}",
                        source=a.id,
                        target=b.id,
                        coordinates=((a.lat, a.lon), (b.lat, b.lon)),
                        data={"weight": idx},
                    )
                )
    return build_network(nodes, edges, ())


@dataclass(frozen=True)
class FrameSample:
    duration_ms: float
    cpu_ms: float
    fps_equivalent: float


@dataclass(frozen=True)
class RepetitionSummary:
    duration_sum_ms: float
    fps_mean: float
    cpu_mean_ms: float


@dataclass
class BenchReport:
    frames: int
    reps: int
    mode: str
    radius_px: float
    samples: list[list[FrameSample]]
    repetitions: list[RepetitionSummary]
    machine: str
    config: dict = field(default_factory=dict)

    @property
    def grand_duration_sum_ms(self) -> float:
        return sum(r.duration_sum_ms for r in self.repetitions) / len(self.repetitions)

    @property
    def grand_fps_mean(self) -> float:
        return sum(r.fps_mean for r in self.repetitions) / len(self.repetitions)

    @property
    def grand_cpu_mean_ms(self) -> float:
        return sum(r.cpu_mean_ms for r in self.repetitions) / len(self.repetitions)


def pan_centers(
    viewport: Viewport, frames: int, radius_px: float
) -> list[tuple[float, float]]:
    """Mercator centers visited by the circular pan; identical every call."""
    cx, cy = project(*viewport.center)
    ws = world_scale(viewport.zoom)
    out = []
    for f in range(frames):
        angle = 2.0 * math.pi * f / frames
        out.append((cx + radius_px * math.cos(angle) / ws, cy + radius_px * math.sin(angle) / ws))
    return out


def run_pan_benchmark(
    net: StreetNetwork,
    viewport: Viewport,
    frames: int = 31,
    reps: int = 10,
    radius_px: float = 200.0,
    per_frame_work: str = "transform_only",
    options: dict[str, StyleOptions] | None = None,
) -> BenchReport:
    if frames < 1 or reps < 1:
        raise ValueError("frames and reps must be >= 1")
    if per_frame_work not in PER_FRAME_MODES:
        raise ValueError(f"per_frame_work must be one of {PER_FRAME_MODES}")

    geometry = project_network(net)
    styles = resolve_styles(net, options)
    bundle = build_bundle(net, styles, viewport.zoom, version=1, geometry=geometry)
    positions = np.concatenate(
        [
            bundle.edge_mesh.positions,
            bundle.node_sprites.centers.ravel(),
            bundle.arrow_sprites.centers.ravel(),
            bundle.marker_sprites.centers.ravel(),
        ]
    ).astype(np.float32)
    centers = pan_centers(viewport, frames, radius_px)
    ws = world_scale(viewport.zoom)

    def frame_work(cx: float, cy: float) -> None:
        kernels.transform_bounds(positions, cx, cy, ws, viewport.width_px, viewport.height_px)
        if per_frame_work == "restyle_and_retessellate":
            new_styles = resolve_styles(net, options)
            tessellate_edges(net, new_styles["edge"], viewport.zoom, geometry)

    kernels.warmup()
    frame_work(*centers[0])  # untimed warmup

    all_samples: list[list[FrameSample]] = []
    repetitions: list[RepetitionSummary] = []
    for _ in range(reps):
        rep_samples: list[FrameSample] = []
        for f in range(frames):
            t0 = time.perf_counter()
            cx, cy = centers[f]
            t1 = time.perf_counter()
            frame_work(cx, cy)
            t2 = time.perf_counter()
            duration_ms = (t2 - t0) * 1000.0
            rep_samples.append(
                FrameSample(
                    duration_ms=duration_ms,
                    cpu_ms=(t2 - t1) * 1000.0,
                    fps_equivalent=1000.0 / duration_ms,
                )
            )
        all_samples.append(rep_samples)
        repetitions.append(
            RepetitionSummary(
                duration_sum_ms=sum(s.duration_ms for s in rep_samples),
                fps_mean=sum(s.fps_equivalent for s in rep_samples) / frames,
                cpu_mean_ms=sum(s.cpu_ms for s in rep_samples) / frames,
            )
        )

    return BenchReport(
        frames=frames,
        reps=reps,
        mode=per_frame_work,
        radius_px=radius_px,
        samples=all_samples,
        repetitions=repetitions,
        machine=f"{platform.platform()} / python {platform.python_version()} / "
        f"kernels {kernels.active_backend()}",
        config={
            "nodes": len(net.nodes),
            "edges": len(net.edges),
            "zoom": viewport.zoom,
            "viewport_px": [viewport.width_px, viewport.height_px],
        },
    )


def write_report_csv(report: BenchReport, path) -> None:
    """One row per repetition plus an average row, full float precision."""
    if not report.repetitions:
        raise ValueError("report has no repetitions")
    lines = ["rep,duration_sum_ms,fps_mean,cpu_mean_ms"]
    for i, rep in enumerate(report.repetitions, start=1):
        lines.append(f"{i},{rep.duration_sum_ms!r},{rep.fps_mean!r},{rep.cpu_mean_ms!r}")
    lines.append(
        f"average,{report.grand_duration_sum_ms!r},{report.grand_fps_mean!r},"
        f"{report.grand_cpu_mean_ms!r}"
    )
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def full_rebuild_once(net: StreetNetwork, viewport: Viewport) -> float:
    """Wall ms for one restyle + retessellate + encode of the whole bundle."""
    geometry = project_network(net)
    kernels.warmup()
    # warm path once so jit compilation stays out of the measurement
    styles = resolve_styles(net)
    encode_bundle(build_bundle(net, styles, viewport.zoom, version=1, geometry=geometry))
    t0 = time.perf_counter()
    styles = resolve_styles(net)
    encode_bundle(build_bundle(net, styles, viewport.zoom, version=2, geometry=geometry))
    return (time.perf_counter() - t0) * 1000.0


def run_kernel_benchmark(approx_nodes: int = 20000, repeats: int = 5) -> list[dict]:
    """Best-of-N timings of each hot kernel under every available backend."""
    net = synthesize_grid(approx_nodes)
    geometry = project_network(net)
    styles = resolve_styles(net)

    coords = geometry.edge_coords
    offsets = geometry.edge_offsets
    ax = coords[offsets[:-1], 0]
    ay = coords[offsets[:-1], 1]
    bx = coords[offsets[1:] - 1, 0]
    by = coords[offsets[1:] - 1, 1]
    half_w = np.full(ax.shape[0], 1e-6)
    rgba = styles["edge"].color
    elem = np.arange(ax.shape[0], dtype=np.uint32)
    positions = np.repeat(coords.ravel(), 2).astype(np.float32)
    px, py = float(coords[0, 0]), float(coords[0, 1])

    calls = {
        "extrude_quads": lambda impl: impl(ax, ay, bx, by, half_w, rgba, elem),
        "point_to_segments": lambda impl: impl(px, py, ax, ay, bx, by),
        "polyline_midpoints": lambda impl: impl(coords, offsets),
        "transform_bounds": lambda impl: impl(positions, px, py, 2.0**20, 1280.0, 720.0),
    }

    rows = []
    for kernel_name, call in calls.items():
        for backend, impls in sorted(kernels.IMPLEMENTATIONS.items()):
            impl = impls[kernel_name]
            call(impl)  # warmup / jit
            best = math.inf
            for _ in range(repeats):
                t0 = time.perf_counter()
                call(impl)
                best = min(best, time.perf_counter() - t0)
            rows.append({"kernel": kernel_name, "backend": backend, "best_ms": best * 1000.0})
    return rows
