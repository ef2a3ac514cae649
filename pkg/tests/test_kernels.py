import os
import subprocess
import sys

import numpy as np
import pytest

from streetvis import kernels


def random_segments(rng, n):
    ax, ay, bx, by = rng.uniform(0.0, 1.0, size=(4, n))
    # keep a few exact zero-length segments in the mix
    zero = rng.random(n) < 0.1
    bx[zero] = ax[zero]
    by[zero] = ay[zero]
    return ax, ay, bx, by


needs_numba = pytest.mark.skipif(
    "numba" not in kernels.IMPLEMENTATIONS, reason="numba backend unavailable"
)


@needs_numba
class TestBackendEquivalence:
    """The numba and numpy backends must agree bit for bit."""

    def test_extrude_quads(self):
        rng = np.random.default_rng(1)
        n = 500
        ax, ay, bx, by = rng.uniform(0.0, 1.0, size=(4, n))
        half_w = rng.uniform(1e-7, 1e-4, size=n)
        rgba = rng.integers(0, 256, size=(n, 4), dtype=np.uint8)
        elem = np.arange(n, dtype=np.uint32)
        outs = {
            name: impls["extrude_quads"](ax, ay, bx, by, half_w, rgba, elem)
            for name, impls in kernels.IMPLEMENTATIONS.items()
        }
        for a, b in zip(outs["numpy"], outs["numba"]):
            assert a.dtype == b.dtype
            assert np.array_equal(a, b)

    def test_point_to_segments(self):
        rng = np.random.default_rng(2)
        ax, ay, bx, by = random_segments(rng, 1000)
        px, py = 0.25, 0.75
        d_np = kernels.IMPLEMENTATIONS["numpy"]["point_to_segments"](px, py, ax, ay, bx, by)
        d_nb = kernels.IMPLEMENTATIONS["numba"]["point_to_segments"](px, py, ax, ay, bx, by)
        assert np.array_equal(d_np, d_nb)

    def test_polyline_midpoints(self):
        rng = np.random.default_rng(3)
        counts = rng.integers(2, 8, size=200)
        offsets = np.zeros(201, dtype=np.int64)
        np.cumsum(counts, out=offsets[1:])
        coords = rng.uniform(0.0, 1.0, size=(offsets[-1], 2))
        # a degenerate polyline: all points identical
        coords[offsets[0] : offsets[1]] = 0.5
        m_np = kernels.IMPLEMENTATIONS["numpy"]["polyline_midpoints"](coords, offsets)
        m_nb = kernels.IMPLEMENTATIONS["numba"]["polyline_midpoints"](coords, offsets)
        assert np.array_equal(m_np[0], m_nb[0])
        assert np.array_equal(m_np[1], m_nb[1])

    def test_transform_bounds(self):
        rng = np.random.default_rng(4)
        positions = rng.uniform(0.0, 1.0, size=3000).astype(np.float32)
        args = (positions, 0.5, 0.5, 2.0**18, 1280.0, 720.0)
        assert kernels.IMPLEMENTATIONS["numpy"]["transform_bounds"](*args) == tuple(
            kernels.IMPLEMENTATIONS["numba"]["transform_bounds"](*args)
        )


class TestNumpyBackendBehavior:
    def test_zero_length_segment_distance_is_to_endpoint(self):
        impl = kernels.IMPLEMENTATIONS["numpy"]["point_to_segments"]
        d = impl(
            3.0,
            4.0,
            np.array([0.0]),
            np.array([0.0]),
            np.array([0.0]),
            np.array([0.0]),
        )
        assert d[0] == 5.0

    def test_midpoint_of_uneven_polyline(self):
        # segment lengths 1 and 3: midpoint sits 1/3 into the second segment
        coords = np.array([[0.0, 0.0], [1.0, 0.0], [4.0, 0.0]])
        offsets = np.array([0, 3], dtype=np.int64)
        mid, heading = kernels.IMPLEMENTATIONS["numpy"]["polyline_midpoints"](coords, offsets)
        assert mid[0].tolist() == [2.0, 0.0]
        assert heading[0] == 0.0

    def test_empty_inputs(self):
        impl = kernels.IMPLEMENTATIONS["numpy"]["extrude_quads"]
        empty = np.empty(0)
        pos, col, elem, idx = impl(
            empty, empty, empty, empty, empty,
            np.empty((0, 4), dtype=np.uint8), np.empty(0, dtype=np.uint32),
        )
        assert pos.shape == (0,) and col.shape == (0, 4) and idx.shape == (0,)


def test_env_flag_forces_numpy_backend():
    env = dict(os.environ, STREETVIS_NO_NUMBA="1")
    out = subprocess.run(
        [sys.executable, "-c", "from streetvis import kernels; print(kernels.active_backend())"],
        capture_output=True,
        text=True,
        env=env,
        check=True,
    )
    assert out.stdout.strip() == "numpy"


def test_default_backend_prefers_numba():
    env = {k: v for k, v in os.environ.items() if k != "STREETVIS_NO_NUMBA"}
    out = subprocess.run(
        [sys.executable, "-c", "from streetvis import kernels; print(kernels.active_backend())"],
        capture_output=True,
        text=True,
        env=env,
        check=True,
    )
    expected = "numba" if "numba" in kernels.IMPLEMENTATIONS else "numpy"
    assert out.stdout.strip() == expected
