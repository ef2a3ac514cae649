"""Spatially indexed click resolution.

Hit regions live in pixel space: an edge is hittable within
max(width_px / 2, 6) of its centerline, nodes and markers within
max(size_px / 2, 8) of their centers, so click tolerance feels constant at
every zoom. The R-tree stores Mercator boxes inflated by each element's
pixel radius at the session's minimum zoom, which is the worst case; exact
pixel distances are then computed at the query's zoom.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from . import kernels
from .errors import StaleIndex
from .geo import Viewport, from_screen, world_scale
from .model import StreetNetwork
from .style import ResolvedStyle
from .tessellate import ProjectedGeometry, project_network

EDGE_MIN_HALF_WIDTH_PX = 6.0
DISC_MIN_RADIUS_PX = 8.0

#: Query priority: lower wins across kinds (markers draw on top).
_KIND_PRIORITY = {"marker": 0, "node": 1, "edge": 2}


class PackedRTree:
    """Static R-tree over axis-aligned boxes, bulk-loaded with
    sort-tile-recursive packing. Query cost is O(log n + hits)."""

    def __init__(self, boxes: np.ndarray, leaf_size: int = 16):
        boxes = np.asarray(boxes, dtype=np.float64).reshape(-1, 4)
        self.leaf_size = int(leaf_size)
        self.size = boxes.shape[0]
        if self.size == 0:
            self.order = np.empty(0, dtype=np.int64)
            self.levels: list[np.ndarray] = []
            return

        cx = (boxes[:, 0] + boxes[:, 2]) * 0.5
        cy = (boxes[:, 1] + boxes[:, 3]) * 0.5
        n_leaves = -(-self.size // self.leaf_size)
        n_slabs = math.isqrt(n_leaves - 1) + 1
        slab_cap = n_slabs * self.leaf_size

        by_x = np.argsort(cx, kind="stable")
        order = np.empty(self.size, dtype=np.int64)
        for s in range(0, self.size, slab_cap):
            slab = by_x[s : s + slab_cap]
            order[s : s + len(slab)] = slab[np.argsort(cy[slab], kind="stable")]
        self.order = order

        levels = [boxes[order]]
        while levels[-1].shape[0] > 1:
            child = levels[-1]
            starts = np.arange(0, child.shape[0], self.leaf_size)
            parent = np.empty((starts.shape[0], 4), dtype=np.float64)
            parent[:, 0] = np.minimum.reduceat(child[:, 0], starts)
            parent[:, 1] = np.minimum.reduceat(child[:, 1], starts)
            parent[:, 2] = np.maximum.reduceat(child[:, 2], starts)
            parent[:, 3] = np.maximum.reduceat(child[:, 3], starts)
            levels.append(parent)
        self.levels = levels

    def query_point(self, x: float, y: float) -> np.ndarray:
        """Indices (into the original box order) whose box contains (x, y)."""
        if self.size == 0:
            return np.empty(0, dtype=np.int64)
        top = self.levels[-1]
        hit_top = (top[:, 0] <= x) & (x <= top[:, 2]) & (top[:, 1] <= y) & (y <= top[:, 3])
        nodes = np.nonzero(hit_top)[0].astype(np.int64)
        for level in range(len(self.levels) - 1, 0, -1):
            if nodes.size == 0:
                return np.empty(0, dtype=np.int64)
            child_count = self.levels[level - 1].shape[0]
            starts = nodes * self.leaf_size
            ends = np.minimum(starts + self.leaf_size, child_count)
            children = np.concatenate(
                [np.arange(s, e, dtype=np.int64) for s, e in zip(starts, ends)]
            )
            b = self.levels[level - 1][children]
            inside = (b[:, 0] <= x) & (x <= b[:, 2]) & (b[:, 1] <= y) & (y <= b[:, 3])
            nodes = children[inside]
            if nodes.size == 0:
                return np.empty(0, dtype=np.int64)
        return self.order[nodes]


@dataclass(frozen=True)
class Hit:
    kind: str  # node | edge | marker | none
    element_id: str | None = None
    element_index: int | None = None
    distance_px: float | None = None
    data: Mapping | None = None


NO_HIT = Hit(kind="none")


@dataclass
class HitIndex:
    version: int
    min_zoom: float
    rtree: PackedRTree
    entry_kind: np.ndarray  # (n,) uint8: 0 marker, 1 node, 2 edge
    entry_element: np.ndarray  # (n,) int64 element index within its kind
    entry_radius_px: np.ndarray  # (n,) float64 hit radius / half-width
    # edge centerlines, restricted to indexed (visible) edges
    seg_ax: np.ndarray
    seg_ay: np.ndarray
    seg_bx: np.ndarray
    seg_by: np.ndarray
    seg_entry: np.ndarray  # (segments,) int64 -> entry row
    point_x: np.ndarray  # disc entries (node/marker centers)
    point_y: np.ndarray
    point_entry: np.ndarray
    net: StreetNetwork

    @property
    def entry_count(self) -> int:
        return int(self.entry_kind.shape[0])


def edge_hit_half_width_px(width_px: np.ndarray | float) -> np.ndarray | float:
    return np.maximum(width_px * 0.5, EDGE_MIN_HALF_WIDTH_PX)


def disc_hit_radius_px(size_px: np.ndarray | float) -> np.ndarray | float:
    return np.maximum(size_px * 0.5, DISC_MIN_RADIUS_PX)


def build_hit_index(
    net: StreetNetwork,
    styles: Mapping[str, ResolvedStyle],
    version: int = 0,
    min_zoom: float = 3.0,
    show_nodes: bool = True,
    show_edges: bool = True,
    show_markers: bool = True,
    geometry: ProjectedGeometry | None = None,
) -> HitIndex:
    """Index every visible element; hidden elements get no entry at all."""
    if geometry is None:
        geometry = project_network(net)
    inflate_scale = world_scale(min_zoom)

    boxes: list[np.ndarray] = []
    entry_kind: list[int] = []
    entry_element: list[int] = []
    entry_radius: list[float] = []

    seg_ax: list[float] = []
    seg_ay: list[float] = []
    seg_bx: list[float] = []
    seg_by: list[float] = []
    seg_entry: list[int] = []
    point_x: list[float] = []
    point_y: list[float] = []
    point_entry: list[int] = []

    def add_disc(kind_code: int, element: int, x: float, y: float, radius_px: float) -> None:
        entry = len(entry_kind)
        r = radius_px / inflate_scale
        boxes.append(np.array([x - r, y - r, x + r, y + r]))
        entry_kind.append(kind_code)
        entry_element.append(element)
        entry_radius.append(radius_px)
        point_x.append(x)
        point_y.append(y)
        point_entry.append(entry)

    if show_markers and len(net.markers):
        st = styles["marker"]
        radii = disc_hit_radius_px(st.size_px)
        for i in np.nonzero(st.visible)[0]:
            x, y = geometry.marker_xy[i]
            add_disc(0, int(i), x, y, float(radii[i]))

    if show_nodes and len(net.nodes):
        st = styles["node"]
        radii = disc_hit_radius_px(st.size_px)
        for i in np.nonzero(st.visible)[0]:
            x, y = geometry.node_xy[i]
            add_disc(1, int(i), x, y, float(radii[i]))

    if show_edges and len(net.edges):
        st = styles["edge"]
        half_widths = edge_hit_half_width_px(st.width_px)
        offsets = geometry.edge_offsets
        coords = geometry.edge_coords
        for i in np.nonzero(st.visible)[0]:
            entry = len(entry_kind)
            start, stop = offsets[i], offsets[i + 1]
            xs = coords[start:stop, 0]
            ys = coords[start:stop, 1]
            r = float(half_widths[i]) / inflate_scale
            boxes.append(np.array([xs.min() - r, ys.min() - r, xs.max() + r, ys.max() + r]))
            entry_kind.append(2)
            entry_element.append(int(i))
            entry_radius.append(float(half_widths[i]))
            for j in range(len(xs) - 1):
                seg_ax.append(xs[j])
                seg_ay.append(ys[j])
                seg_bx.append(xs[j + 1])
                seg_by.append(ys[j + 1])
                seg_entry.append(entry)

    box_array = np.array(boxes).reshape(-1, 4) if boxes else np.empty((0, 4))
    return HitIndex(
        version=version,
        min_zoom=min_zoom,
        rtree=PackedRTree(box_array),
        entry_kind=np.array(entry_kind, dtype=np.uint8),
        entry_element=np.array(entry_element, dtype=np.int64),
        entry_radius_px=np.array(entry_radius, dtype=np.float64),
        seg_ax=np.array(seg_ax, dtype=np.float64),
        seg_ay=np.array(seg_ay, dtype=np.float64),
        seg_bx=np.array(seg_bx, dtype=np.float64),
        seg_by=np.array(seg_by, dtype=np.float64),
        seg_entry=np.array(seg_entry, dtype=np.int64),
        point_x=np.array(point_x, dtype=np.float64),
        point_y=np.array(point_y, dtype=np.float64),
        point_entry=np.array(point_entry, dtype=np.int64),
        net=net,
    )


def _element_of(index: HitIndex, entry: int) -> tuple[str, str, int, Mapping]:
    kind_code = int(index.entry_kind[entry])
    element = int(index.entry_element[entry])
    if kind_code == 0:
        record = index.net.markers[element]
        return "marker", record.id, element, record.data
    if kind_code == 1:
        record = index.net.nodes[element]
        return "node", record.id, element, record.data
    record = index.net.edges[element]
    return "edge", record.id, element, record.data


def query_point(
    index: HitIndex,
    screen_point: tuple[float, float],
    viewport: Viewport,
    bundle_version: int | None = None,
) -> Hit:
    """Resolve a click to the best hit, or kind='none'.

    Ranking: markers beat nodes beat edges; within a kind the smallest pixel
    distance wins; exact distance ties break on the lexicographically
    smallest element id.
    """
    if bundle_version is not None and bundle_version != index.version:
        raise StaleIndex(index.version, bundle_version)

    mx, my = from_screen(screen_point, viewport)
    candidates = index.rtree.query_point(mx, my)
    if candidates.size == 0:
        return NO_HIT
    scale = world_scale(viewport.zoom)
    candidate_set = set(int(c) for c in candidates)

    # entry -> exact pixel distance at the query zoom
    distances: dict[int, float] = {}

    if index.point_entry.size:
        keep = np.isin(index.point_entry, candidates)
        if keep.any():
            dx = (index.point_x[keep] - mx) * scale
            dy = (index.point_y[keep] - my) * scale
            dist = np.sqrt(dx * dx + dy * dy)
            for entry, d in zip(index.point_entry[keep], dist):
                distances[int(entry)] = float(d)

    if index.seg_entry.size:
        keep = np.isin(index.seg_entry, candidates)
        if keep.any():
            dist = (
                kernels.point_to_segments(
                    mx,
                    my,
                    index.seg_ax[keep],
                    index.seg_ay[keep],
                    index.seg_bx[keep],
                    index.seg_by[keep],
                )
                * scale
            )
            for entry, d in zip(index.seg_entry[keep], dist):
                e = int(entry)
                if e not in distances or d < distances[e]:
                    distances[e] = float(d)

    best: tuple[int, float, str] | None = None
    best_entry = -1
    for entry in candidate_set:
        d = distances.get(entry)
        if d is None or d > index.entry_radius_px[entry]:
            continue
        kind, element_id, _, _ = _element_of(index, entry)
        key = (_KIND_PRIORITY[kind], d, element_id)
        if best is None or key < best:
            best = key
            best_entry = entry

    if best is None:
        return NO_HIT
    kind, element_id, element, data = _element_of(index, best_entry)
    return Hit(
        kind=kind,
        element_id=element_id,
        element_index=element,
        distance_px=best[1],
        data=dict(data),
    )
