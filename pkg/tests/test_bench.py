import csv

import pytest

from streetvis.bench import (
    pan_centers,
    run_pan_benchmark,
    synthesize_grid,
    write_report_csv,
)
from streetvis.geo import Viewport
from streetvis.model import network_bbox


def grid_viewport(net, zoom=12.0):
    lo_lat, lo_lon, hi_lat, hi_lon = network_bbox(net)
    return Viewport(
        center=((lo_lat + hi_lat) / 2, (lo_lon + hi_lon) / 2),
        zoom=zoom,
        width_px=800.0,
        height_px=600.0,
    )


class TestSynthesizeGrid:
    def test_smallest_lattice(self):
        net = synthesize_grid(4)
        assert len(net.nodes) == 4
        assert len(net.edges) == 4

    def test_queretaro_class_lattice(self):
        net = synthesize_grid(20_164)  # 142^2
        assert len(net.nodes) == 20_164
        assert len(net.edges) == 2 * 142 * 141  # 40,044

    def test_determinism(self):
        assert synthesize_grid(25) == synthesize_grid(25)

    def test_weights_are_edge_indices(self):
        net = synthesize_grid(9)
        assert [e.data["weight"] for e in net.edges] == list(range(len(net.edges)))

    def test_too_small_rejected(self):
        with pytest.raises(ValueError):
            synthesize_grid(3)


class TestPanBenchmark:
    def test_report_shape(self):
        net = synthesize_grid(25)
        report = run_pan_benchmark(net, grid_viewport(net), frames=5, reps=3, radius_px=100.0)
        assert len(report.repetitions) == 3
        assert all(len(rep) == 5 for rep in report.samples)
        assert report.mode == "transform_only"

    def test_sample_invariants(self):
        net = synthesize_grid(25)
        report = run_pan_benchmark(net, grid_viewport(net), frames=4, reps=2)
        for rep in report.samples:
            for s in rep:
                assert s.duration_ms > 0
                assert s.cpu_ms <= s.duration_ms
                assert s.fps_equivalent == pytest.approx(1000.0 / s.duration_ms)

    def test_zero_radius_still_positive_durations(self):
        net = synthesize_grid(16)
        report = run_pan_benchmark(net, grid_viewport(net), frames=3, reps=1, radius_px=0.0)
        assert all(s.duration_ms > 0 for s in report.samples[0])

    def test_report_arithmetic_recomputable(self):
        net = synthesize_grid(25)
        report = run_pan_benchmark(net, grid_viewport(net), frames=6, reps=2)
        for rep_samples, summary in zip(report.samples, report.repetitions):
            assert summary.duration_sum_ms == sum(s.duration_ms for s in rep_samples)
            assert summary.fps_mean == sum(s.fps_equivalent for s in rep_samples) / 6
            assert summary.cpu_mean_ms == sum(s.cpu_ms for s in rep_samples) / 6
        assert report.grand_fps_mean == sum(r.fps_mean for r in report.repetitions) / 2

    def test_centers_identical_across_repetitions(self):
        net = synthesize_grid(16)
        vp = grid_viewport(net)
        assert pan_centers(vp, 31, 200.0) == pan_centers(vp, 31, 200.0)

    def test_restyle_mode_at_least_as_expensive(self):
        net = synthesize_grid(400)
        vp = grid_viewport(net)
        cheap = []
        costly = []
        for _ in range(3):
            cheap.append(
                run_pan_benchmark(net, vp, frames=5, reps=1, per_frame_work="transform_only")
                .grand_cpu_mean_ms
            )
            costly.append(
                run_pan_benchmark(
                    net, vp, frames=5, reps=1, per_frame_work="restyle_and_retessellate"
                ).grand_cpu_mean_ms
            )
        assert sum(costly) / 3 >= sum(cheap) / 3

    def test_unknown_mode_rejected(self):
        net = synthesize_grid(16)
        with pytest.raises(ValueError):
            run_pan_benchmark(net, grid_viewport(net), per_frame_work="all_of_it")


class TestReportCsv:
    def test_row_count_and_round_trip(self, tmp_path):
        net = synthesize_grid(16)
        report = run_pan_benchmark(net, grid_viewport(net), frames=3, reps=10)
        path = tmp_path / "report.csv"
        write_report_csv(report, path)
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 11
        assert rows[-1]["rep"] == "average"
        assert float(rows[-1]["fps_mean"]) == pytest.approx(report.grand_fps_mean, abs=1e-9)
        assert float(rows[-1]["cpu_mean_ms"]) == pytest.approx(report.grand_cpu_mean_ms, abs=1e-9)
        recomputed = sum(float(r["duration_sum_ms"]) for r in rows[:-1]) / 10
        assert recomputed == pytest.approx(float(rows[-1]["duration_sum_ms"]), abs=1e-9)
