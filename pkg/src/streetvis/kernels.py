"""Hot numeric kernels: quad extrusion, point-segment distances, arc-length
midpoints, and screen transforms.

Two interchangeable backends produce bit-identical outputs:

* ``numba`` - @njit loops, the default when numba imports cleanly.
* ``numpy`` - vectorized fallback, forced with ``STREETVIS_NO_NUMBA=1``.

All arithmetic runs in float64 and is written with the same operation order
in both backends, so outputs (including the float32 casts done on store)
match exactly. ``streetvis kernel-bench`` times one backend against the other.
"""

from __future__ import annotations

import math
import os

import numpy as np

_FLAG = os.environ.get("STREETVIS_NO_NUMBA", "").strip()
_FORCED_OFF = _FLAG not in ("", "0")

try:
    from numba import njit

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - depends on environment
    NUMBA_AVAILABLE = False

    def njit(*args, **kwargs):
        def wrap(func):
            return func

        return wrap if not (args and callable(args[0])) else args[0]


# -- numpy backend --------------------------------------------------------------


def _extrude_quads_numpy(ax, ay, bx, by, half_w, rgba, elem):
    n = ax.shape[0]
    positions = np.empty(8 * n, dtype=np.float32)
    colors = np.empty((4 * n, 4), dtype=np.uint8)
    element_index = np.empty(4 * n, dtype=np.uint32)
    indices = np.empty(6 * n, dtype=np.uint32)
    if n == 0:
        return positions, colors, element_index, indices

    dx = bx - ax
    dy = by - ay
    length = np.sqrt(dx * dx + dy * dy)
    ox = (-dy / length) * half_w
    oy = (dx / length) * half_w

    quads = positions.reshape(n, 4, 2)
    quads[:, 0, 0] = (ax + ox).astype(np.float32)
    quads[:, 0, 1] = (ay + oy).astype(np.float32)
    quads[:, 1, 0] = (ax - ox).astype(np.float32)
    quads[:, 1, 1] = (ay - oy).astype(np.float32)
    quads[:, 2, 0] = (bx + ox).astype(np.float32)
    quads[:, 2, 1] = (by + oy).astype(np.float32)
    quads[:, 3, 0] = (bx - ox).astype(np.float32)
    quads[:, 3, 1] = (by - oy).astype(np.float32)

    colors.reshape(n, 4, 4)[:] = rgba[:, None, :]
    element_index.reshape(n, 4)[:] = elem[:, None]

    base = (np.arange(n, dtype=np.uint32) * 4)[:, None]
    indices.reshape(n, 6)[:] = base + np.array([0, 1, 2, 2, 1, 3], dtype=np.uint32)
    return positions, colors, element_index, indices


def _point_to_segments_numpy(px, py, ax, ay, bx, by):
    dx = bx - ax
    dy = by - ay
    l2 = dx * dx + dy * dy
    tnum = (px - ax) * dx + (py - ay) * dy
    t = np.zeros_like(l2)
    np.divide(tnum, l2, out=t, where=l2 > 0.0)
    np.clip(t, 0.0, 1.0, out=t)
    cx = ax + t * dx
    cy = ay + t * dy
    ux = px - cx
    uy = py - cy
    return np.sqrt(ux * ux + uy * uy)


def _polyline_midpoints_numpy(coords, offsets):
    # Per-edge Python loop with sequential accumulation, mirroring the jit
    # loop exactly so both backends agree to the last bit.
    n_edges = offsets.shape[0] - 1
    mid = np.empty((n_edges, 2), dtype=np.float64)
    heading = np.empty(n_edges, dtype=np.float64)
    xs = coords[:, 0]
    ys = coords[:, 1]
    for e in range(n_edges):
        start = offsets[e]
        stop = offsets[e + 1]
        total = 0.0
        for i in range(start, stop - 1):
            ddx = xs[i + 1] - xs[i]
            ddy = ys[i + 1] - ys[i]
            total += math.sqrt(ddx * ddx + ddy * ddy)
        if total == 0.0:
            mid[e, 0] = xs[start]
            mid[e, 1] = ys[start]
            heading[e] = 0.0
            continue
        half = total * 0.5
        acc = 0.0
        for i in range(start, stop - 1):
            ddx = xs[i + 1] - xs[i]
            ddy = ys[i + 1] - ys[i]
            seg = math.sqrt(ddx * ddx + ddy * ddy)
            if seg > 0.0 and acc + seg >= half:
                local = (half - acc) / seg
                mid[e, 0] = xs[i] + local * ddx
                mid[e, 1] = ys[i] + local * ddy
                heading[e] = math.atan2(ddy, ddx)
                break
            acc += seg
    return mid, heading


def _transform_bounds_numpy(positions, cx, cy, scale, width_px, height_px):
    n = positions.shape[0] // 2
    if n == 0:
        return 0, 0.0, 0.0, 0.0, 0.0
    x = positions[0::2].astype(np.float64)
    y = positions[1::2].astype(np.float64)
    sx = (x - cx) * scale + width_px * 0.5
    sy = (y - cy) * scale + height_px * 0.5
    in_view = (sx >= 0.0) & (sx <= width_px) & (sy >= 0.0) & (sy <= height_px)
    return (
        int(np.count_nonzero(in_view)),
        float(sx.min()),
        float(sy.min()),
        float(sx.max()),
        float(sy.max()),
    )


# -- numba backend ---------------------------------------------------------------


def _extrude_quads_loop(ax, ay, bx, by, half_w, rgba, elem):
    n = ax.shape[0]
    positions = np.empty(8 * n, dtype=np.float32)
    colors = np.empty((4 * n, 4), dtype=np.uint8)
    element_index = np.empty(4 * n, dtype=np.uint32)
    indices = np.empty(6 * n, dtype=np.uint32)
    for i in range(n):
        dx = bx[i] - ax[i]
        dy = by[i] - ay[i]
        length = math.sqrt(dx * dx + dy * dy)
        ox = (-dy / length) * half_w[i]
        oy = (dx / length) * half_w[i]
        p = 8 * i
        positions[p + 0] = ax[i] + ox
        positions[p + 1] = ay[i] + oy
        positions[p + 2] = ax[i] - ox
        positions[p + 3] = ay[i] - oy
        positions[p + 4] = bx[i] + ox
        positions[p + 5] = by[i] + oy
        positions[p + 6] = bx[i] - ox
        positions[p + 7] = by[i] - oy
        v = 4 * i
        for j in range(4):
            colors[v + j, 0] = rgba[i, 0]
            colors[v + j, 1] = rgba[i, 1]
            colors[v + j, 2] = rgba[i, 2]
            colors[v + j, 3] = rgba[i, 3]
            element_index[v + j] = elem[i]
        q = 6 * i
        indices[q + 0] = v
        indices[q + 1] = v + 1
        indices[q + 2] = v + 2
        indices[q + 3] = v + 2
        indices[q + 4] = v + 1
        indices[q + 5] = v + 3
    return positions, colors, element_index, indices


def _point_to_segments_loop(px, py, ax, ay, bx, by):
    n = ax.shape[0]
    out = np.empty(n, dtype=np.float64)
    for i in range(n):
        dx = bx[i] - ax[i]
        dy = by[i] - ay[i]
        l2 = dx * dx + dy * dy
        if l2 > 0.0:
            t = ((px - ax[i]) * dx + (py - ay[i]) * dy) / l2
            if t < 0.0:
                t = 0.0
            elif t > 1.0:
                t = 1.0
        else:
            t = 0.0
        cx = ax[i] + t * dx
        cy = ay[i] + t * dy
        ux = px - cx
        uy = py - cy
        out[i] = math.sqrt(ux * ux + uy * uy)
    return out


def _polyline_midpoints_loop(coords, offsets):
    n_edges = offsets.shape[0] - 1
    mid = np.empty((n_edges, 2), dtype=np.float64)
    heading = np.empty(n_edges, dtype=np.float64)
    xs = coords[:, 0]
    ys = coords[:, 1]
    for e in range(n_edges):
        start = offsets[e]
        stop = offsets[e + 1]
        total = 0.0
        for i in range(start, stop - 1):
            ddx = xs[i + 1] - xs[i]
            ddy = ys[i + 1] - ys[i]
            total += math.sqrt(ddx * ddx + ddy * ddy)
        if total == 0.0:
            mid[e, 0] = xs[start]
            mid[e, 1] = ys[start]
            heading[e] = 0.0
            continue
        half = total * 0.5
        acc = 0.0
        for i in range(start, stop - 1):
            ddx = xs[i + 1] - xs[i]
            ddy = ys[i + 1] - ys[i]
            seg = math.sqrt(ddx * ddx + ddy * ddy)
            if seg > 0.0 and acc + seg >= half:
                local = (half - acc) / seg
                mid[e, 0] = xs[i] + local * ddx
                mid[e, 1] = ys[i] + local * ddy
                heading[e] = math.atan2(ddy, ddx)
                break
            acc += seg
    return mid, heading


def _transform_bounds_loop(positions, cx, cy, scale, width_px, height_px):
    n = positions.shape[0] // 2
    if n == 0:
        return 0, 0.0, 0.0, 0.0, 0.0
    count = 0
    min_sx = math.inf
    min_sy = math.inf
    max_sx = -math.inf
    max_sy = -math.inf
    for i in range(n):
        sx = (float(positions[2 * i]) - cx) * scale + width_px * 0.5
        sy = (float(positions[2 * i + 1]) - cy) * scale + height_px * 0.5
        if 0.0 <= sx <= width_px and 0.0 <= sy <= height_px:
            count += 1
        if sx < min_sx:
            min_sx = sx
        if sy < min_sy:
            min_sy = sy
        if sx > max_sx:
            max_sx = sx
        if sy > max_sy:
            max_sy = sy
    return count, min_sx, min_sy, max_sx, max_sy


IMPLEMENTATIONS: dict[str, dict[str, object]] = {
    "numpy": {
        "extrude_quads": _extrude_quads_numpy,
        "point_to_segments": _point_to_segments_numpy,
        "polyline_midpoints": _polyline_midpoints_numpy,
        "transform_bounds": _transform_bounds_numpy,
    }
}

if NUMBA_AVAILABLE:
    IMPLEMENTATIONS["numba"] = {
        "extrude_quads": njit(cache=True)(_extrude_quads_loop),
        "point_to_segments": njit(cache=True)(_point_to_segments_loop),
        "polyline_midpoints": njit(cache=True)(_polyline_midpoints_loop),
        "transform_bounds": njit(cache=True)(_transform_bounds_loop),
    }

_ACTIVE = "numba" if (NUMBA_AVAILABLE and not _FORCED_OFF) else "numpy"

extrude_quads = IMPLEMENTATIONS[_ACTIVE]["extrude_quads"]
point_to_segments = IMPLEMENTATIONS[_ACTIVE]["point_to_segments"]
polyline_midpoints = IMPLEMENTATIONS[_ACTIVE]["polyline_midpoints"]
transform_bounds = IMPLEMENTATIONS[_ACTIVE]["transform_bounds"]


def active_backend() -> str:
    return _ACTIVE


def warmup() -> None:
    """Force jit compilation on tiny inputs so timing loops see steady state."""
    coords = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]], dtype=np.float64)
    offsets = np.array([0, 3], dtype=np.int64)
    one = np.array([0.0], dtype=np.float64)
    extrude_quads(
        one,
        one,
        one + 1.0,
        one,
        np.array([0.5]),
        np.array([[0, 0, 0, 255]], dtype=np.uint8),
        np.array([0], dtype=np.uint32),
    )
    point_to_segments(0.5, 0.5, one, one, one + 1.0, one)
    polyline_midpoints(coords, offsets)
    transform_bounds(np.zeros(4, dtype=np.float32), 0.0, 0.0, 256.0, 100.0, 100.0)
