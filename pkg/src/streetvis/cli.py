"""Command line entry points: serve, bench, kernel-bench, demo serve."""

from __future__ import annotations

import logging
import sys
from pathlib import Path

import click


@click.group()
def cli():
    """Street network visualization engine."""


@cli.command()
@click.option("--port", default=8000, envvar="STREETVIS_PORT", show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--fixtures", "fixtures_dir", default=None, type=click.Path(file_okay=False))
@click.option("--ui", "ui_dir", default=None, type=click.Path(file_okay=False),
              help="Directory of built frontend assets to serve at /.")
@click.option("--log-level", default="info", envvar="STREETVIS_LOG_LEVEL", show_default=True)
def serve(port, host, fixtures_dir, ui_dir, log_level):
    """Run the session service."""
    import uvicorn

    from .server import create_app

    logging.basicConfig(level=log_level.upper())
    app = create_app(fixtures_dir=fixtures_dir, ui_dir=ui_dir)
    uvicorn.run(app, host=host, port=port, log_level=log_level)


@cli.command()
@click.option("--nodes", default=20000, show_default=True)
@click.option("--frames", default=31, show_default=True)
@click.option("--reps", default=10, show_default=True)
@click.option("--radius", default=200.0, show_default=True)
@click.option("--mode", default="transform_only", show_default=True,
              type=click.Choice(["transform_only", "restyle_and_retessellate"]))
@click.option("--zoom", default=12.0, show_default=True)
@click.option("--out", default="report.csv", show_default=True, type=click.Path(dir_okay=False))
def bench(nodes, frames, reps, radius, mode, zoom, out):
    """Circular-pan benchmark over a synthetic grid; writes a CSV report."""
    from .bench import run_pan_benchmark, synthesize_grid, write_report_csv
    from .geo import Viewport
    from .model import network_bbox

    net = synthesize_grid(nodes)
    bbox = network_bbox(net)
    viewport = Viewport(
        center=((bbox[0] + bbox[2]) / 2, (bbox[1] + bbox[3]) / 2),
        zoom=zoom,
        width_px=1280.0,
        height_px=720.0,
    )
    click.echo(f"grid: {len(net.nodes)} nodes, {len(net.edges)} edges; mode={mode}")
    report = run_pan_benchmark(
        net, viewport, frames=frames, reps=reps, radius_px=radius, per_frame_work=mode
    )
    write_report_csv(report, out)
    click.echo(f"machine: {report.machine}")
    for i, rep in enumerate(report.repetitions, 1):
        click.echo(
            f"rep {i:2d}: duration_sum={rep.duration_sum_ms:9.2f} ms  "
            f"fps_mean={rep.fps_mean:8.1f}  cpu_mean={rep.cpu_mean_ms:7.3f} ms"
        )
    click.echo(
        f"average: duration_sum={report.grand_duration_sum_ms:9.2f} ms  "
        f"fps_mean={report.grand_fps_mean:8.1f}  cpu_mean={report.grand_cpu_mean_ms:7.3f} ms"
    )
    click.echo(f"report written to {out}")


@cli.command("kernel-bench")
@click.option("--nodes", default=20000, show_default=True)
@click.option("--repeats", default=5, show_default=True)
def kernel_bench(nodes, repeats):
    """Compare the numba and numpy kernel backends on identical inputs."""
    from . import kernels
    from .bench import run_kernel_benchmark

    click.echo(f"active backend: {kernels.active_backend()} "
               f"(set STREETVIS_NO_NUMBA=1 to force numpy)")
    rows = run_kernel_benchmark(nodes, repeats)
    by_kernel: dict[str, dict[str, float]] = {}
    for row in rows:
        by_kernel.setdefault(row["kernel"], {})[row["backend"]] = row["best_ms"]
    click.echo(f"{'kernel':<22} {'numpy ms':>10} {'numba ms':>10} {'speedup':>8}")
    for kernel_name, timings in by_kernel.items():
        np_ms = timings.get("numpy", float("nan"))
        nb_ms = timings.get("numba")
        speedup = f"{np_ms / nb_ms:7.2f}x" if nb_ms else "     n/a"
        nb_text = f"{nb_ms:10.3f}" if nb_ms else "       n/a"
        click.echo(f"{kernel_name:<22} {np_ms:10.3f} {nb_text} {speedup}")


@cli.group()
def demo():
    """Traffic replay demo."""


@demo.command("serve")
@click.option("--network", "network_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--traffic", "traffic_dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--port", default=8000, envvar="STREETVIS_PORT", show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--ui", "ui_dir", default=None, type=click.Path(file_okay=False))
@click.option("--log-level", default="info", envvar="STREETVIS_LOG_LEVEL", show_default=True)
def demo_serve(network_path, traffic_dir, port, host, ui_dir, log_level):
    """Serve a session preloaded with a traffic series; WebSocket clients may
    send {"time": t, "mode": m} frames to replay timesteps."""
    import uvicorn

    from .server import SessionManager, create_app
    from .traffic import load_fcd_csv

    logging.basicConfig(level=log_level.upper())
    traffic = Path(traffic_dir)
    try:
        series = load_fcd_csv(
            (traffic / "edge_counts.csv").read_text(encoding="utf-8"),
            (traffic / "vehicles.csv").read_text(encoding="utf-8"),
            (traffic / "totals.csv").read_text(encoding="utf-8"),
        )
    except FileNotFoundError as exc:
        click.echo(f"missing traffic CSV: {exc}", err=True)
        sys.exit(1)

    manager = SessionManager()
    session_id = manager.create_session(Path(network_path).read_bytes())
    session = manager.get(session_id)
    session.traffic = series
    click.echo(f"session {session_id}: {series.timestep_count} timesteps loaded")
    app = create_app(manager=manager, ui_dir=ui_dir)
    uvicorn.run(app, host=host, port=port, log_level=log_level)


if __name__ == "__main__":
    cli()
