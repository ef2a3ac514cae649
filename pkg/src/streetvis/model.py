"""Primal street graph model: nodes, polyline edges, markers, validation.

A network is a directed multigraph. Loops and parallel edges are allowed;
element ids are caller-supplied strings, and the zero-based position of an
element in its input sequence is its stable index, used as the join key by
styling, tessellation, and hit testing.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .errors import (
    DanglingEndpoint,
    DegeneratePolyline,
    DuplicateId,
    EmptyNetwork,
    OutOfRangeCoordinate,
)

Scalar = bool | int | float | str

# First/last polyline coordinates may drift from their endpoint nodes by up
# to this many degrees (per axis) before a warning is recorded.
ENDPOINT_SNAP_TOLERANCE_DEG = 1e-6


@dataclass(frozen=True)
class NodeRecord:
    id: str
    lat: float
    lon: float
    data: Mapping[str, Scalar] = field(default_factory=dict)


@dataclass(frozen=True)
class EdgeRecord:
    id: str
    source: str
    target: str
    coordinates: tuple[tuple[float, float], ...]
    data: Mapping[str, Scalar] = field(default_factory=dict)


@dataclass(frozen=True)
class MarkerRecord:
    id: str
    lat: float
    lon: float
    popup_text: str | None = None
    icon_id: str | None = None
    data: Mapping[str, Scalar] = field(default_factory=dict)


@dataclass(frozen=True)
class StreetNetwork:
    """Validated, immutable street network.

    ``nodes``, ``edges``, ``markers`` preserve input order; ``bbox`` is the
    tight (min_lat, min_lon, max_lat, max_lon) bound over node and polyline
    coordinates, or None for a network without geometry.
    """

    nodes: tuple[NodeRecord, ...]
    edges: tuple[EdgeRecord, ...]
    markers: tuple[MarkerRecord, ...]
    bbox: tuple[float, float, float, float] | None
    warnings: tuple[str, ...]
    node_index: Mapping[str, int]
    edge_index: Mapping[str, int]
    marker_index: Mapping[str, int]

    def node_by_id(self, node_id: str) -> NodeRecord:
        return self.nodes[self.node_index[node_id]]

    def edge_by_id(self, edge_id: str) -> EdgeRecord:
        return self.edges[self.edge_index[edge_id]]

    def marker_by_id(self, marker_id: str) -> MarkerRecord:
        return self.markers[self.marker_index[marker_id]]


def _check_range(kind: str, element_id: str, lat: float, lon: float) -> None:
    if not (-90.0 <= lat <= 90.0 and -180.0 <= lon <= 180.0):
        raise OutOfRangeCoordinate(kind, element_id, lat, lon)


def build_network(
    nodes: Iterable[NodeRecord],
    edges: Iterable[EdgeRecord],
    markers: Iterable[MarkerRecord] = (),
) -> StreetNetwork:
    """Validate records and assemble a StreetNetwork.

    Raises DuplicateId, DanglingEndpoint, DegeneratePolyline, or
    OutOfRangeCoordinate on hard violations. Endpoint-snap drift (polyline
    ends more than ENDPOINT_SNAP_TOLERANCE_DEG from their node) only records
    a warning: OSM exports routinely carry sub-meter drift.
    """
    node_list = tuple(nodes)
    edge_list = tuple(edges)
    marker_list = tuple(markers)
    warnings: list[str] = []

    node_index: dict[str, int] = {}
    for i, n in enumerate(node_list):
        if n.id in node_index:
            raise DuplicateId("node", n.id)
        _check_range("node", n.id, n.lat, n.lon)
        node_index[n.id] = i

    edge_index: dict[str, int] = {}
    for i, e in enumerate(edge_list):
        if e.id in edge_index:
            raise DuplicateId("edge", e.id)
        edge_index[e.id] = i
        if len(e.coordinates) < 2:
            raise DegeneratePolyline(e.id)
        for endpoint in (e.source, e.target):
            if endpoint not in node_index:
                raise DanglingEndpoint(e.id, endpoint)
        for lat, lon in e.coordinates:
            _check_range("edge", e.id, lat, lon)
        src = node_list[node_index[e.source]]
        dst = node_list[node_index[e.target]]
        for label, node, coord in (("first", src, e.coordinates[0]), ("last", dst, e.coordinates[-1])):
            drift = max(abs(coord[0] - node.lat), abs(coord[1] - node.lon))
            if drift > ENDPOINT_SNAP_TOLERANCE_DEG:
                warnings.append(
                    f"edge {e.id}: {label} coordinate is {drift:.3g} deg from node {node.id}"
                )

    marker_index: dict[str, int] = {}
    for i, m in enumerate(marker_list):
        if m.id in marker_index:
            raise DuplicateId("marker", m.id)
        _check_range("marker", m.id, m.lat, m.lon)
        marker_index[m.id] = i

    bbox = None
    lats = [n.lat for n in node_list]
    lons = [n.lon for n in node_list]
    for e in edge_list:
        for lat, lon in e.coordinates:
            lats.append(lat)
            lons.append(lon)
    if lats:
        bbox = (min(lats), min(lons), max(lats), max(lons))

    return StreetNetwork(
        nodes=node_list,
        edges=edge_list,
        markers=marker_list,
        bbox=bbox,
        warnings=tuple(warnings),
        node_index=node_index,
        edge_index=edge_index,
        marker_index=marker_index,
    )


def network_bbox(net: StreetNetwork) -> tuple[float, float, float, float]:
    """Tight (min_lat, min_lon, max_lat, max_lon) bound; EmptyNetwork if none."""
    if net.bbox is None:
        raise EmptyNetwork("network has no node or polyline coordinates")
    return net.bbox


def element_weight(
    record: NodeRecord | EdgeRecord | MarkerRecord, weight_field: str
) -> float | None:
    """Numeric value of data[weight_field], or None when absent or non-numeric.

    Booleans do not count as numeric; absence is a value, not an error.
    """
    value = record.data.get(weight_field)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        return None
    return float(value)
