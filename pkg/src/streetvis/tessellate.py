"""Render geometry generation and the binary bundle wire format.

Edges become per-segment quads (two triangles) extruded around the projected
centerline; nodes, direction arrows, and markers become sprite instances.
Widths are frozen in Mercator units at a reference zoom; a client rescales
them by 2**(zoom - reference_zoom) in its vertex stage so pan/zoom never
needs re-tessellation.

The binary layout (little-endian) is:

    magic "SYRB" | format u16 | reserved u16 | bundle version u64 |
    reference zoom f64 | edge vertex count u32 | edge index count u32 |
    node count u32 | arrow count u32 | marker count u32 | icon bytes u32 |
    edge positions f32*2/vertex | edge colors u8*4 | edge element u32 |
    edge indices u32 | per sprite kind (nodes, arrows, markers):
    centers f32*2, size f32, rotation f32, color u8*4, icon u16, element u32 |
    icon table (u16 length + utf-8 bytes per string)
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import BadMagic, TruncatedSection, UnknownIcon, UnsupportedFormatVersion
from .geo import project_many, world_scale
from .model import StreetNetwork
from .style import ResolvedStyle

MAGIC = b"SYRB"
FORMAT_VERSION = 1
HEADER = struct.Struct("<4sHHQdIIIIII")

#: Icon slots every bundle carries; nodes draw icon 0.
DEFAULT_ICON_TABLE = ("disc", "arrow", "pin")

ARROW_SIZE_FACTOR = 3.0
ARROW_MIN_PX = 6.0
ARROW_MAX_PX = 24.0


@dataclass(frozen=True)
class ProjectedGeometry:
    """Mercator-projected network geometry, computed once per network."""

    edge_coords: np.ndarray  # (M, 2) float64
    edge_offsets: np.ndarray  # (E + 1,) int64
    node_xy: np.ndarray  # (N, 2) float64
    marker_xy: np.ndarray  # (K, 2) float64


def project_network(net: StreetNetwork) -> ProjectedGeometry:
    counts = [len(e.coordinates) for e in net.edges]
    offsets = np.zeros(len(net.edges) + 1, dtype=np.int64)
    np.cumsum(counts, out=offsets[1:])
    lats = np.empty(offsets[-1], dtype=np.float64)
    lons = np.empty(offsets[-1], dtype=np.float64)
    pos = 0
    for e in net.edges:
        for lat, lon in e.coordinates:
            lats[pos] = lat
            lons[pos] = lon
            pos += 1
    return ProjectedGeometry(
        edge_coords=project_many(lats, lons),
        edge_offsets=offsets,
        node_xy=project_many(
            np.array([n.lat for n in net.nodes]), np.array([n.lon for n in net.nodes])
        ),
        marker_xy=project_many(
            np.array([m.lat for m in net.markers]), np.array([m.lon for m in net.markers])
        ),
    )


@dataclass(eq=False)
class EdgeMesh:
    positions: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.float32))
    colors: np.ndarray = field(default_factory=lambda: np.empty((0, 4), dtype=np.uint8))
    element_index: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.uint32))
    indices: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.uint32))

    @property
    def vertex_count(self) -> int:
        return self.positions.shape[0] // 2

    def __eq__(self, other) -> bool:
        return isinstance(other, EdgeMesh) and all(
            np.array_equal(getattr(self, f), getattr(other, f))
            for f in ("positions", "colors", "element_index", "indices")
        )


@dataclass(eq=False)
class SpriteInstances:
    centers: np.ndarray = field(default_factory=lambda: np.empty((0, 2), dtype=np.float32))
    sizes_px: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.float32))
    rotations_rad: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.float32))
    colors: np.ndarray = field(default_factory=lambda: np.empty((0, 4), dtype=np.uint8))
    icons: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.uint16))
    element_index: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.uint32))

    def __len__(self) -> int:
        return self.centers.shape[0]

    def __eq__(self, other) -> bool:
        return isinstance(other, SpriteInstances) and all(
            np.array_equal(getattr(self, f), getattr(other, f))
            for f in ("centers", "sizes_px", "rotations_rad", "colors", "icons", "element_index")
        )


@dataclass(eq=False)
class RenderBundle:
    edge_mesh: EdgeMesh = field(default_factory=EdgeMesh)
    node_sprites: SpriteInstances = field(default_factory=SpriteInstances)
    arrow_sprites: SpriteInstances = field(default_factory=SpriteInstances)
    marker_sprites: SpriteInstances = field(default_factory=SpriteInstances)
    version: int = 0
    reference_zoom: float = 0.0
    icon_table: tuple[str, ...] = DEFAULT_ICON_TABLE

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, RenderBundle)
            and self.version == other.version
            and self.reference_zoom == other.reference_zoom
            and self.icon_table == other.icon_table
            and self.edge_mesh == other.edge_mesh
            and self.node_sprites == other.node_sprites
            and self.arrow_sprites == other.arrow_sprites
            and self.marker_sprites == other.marker_sprites
        )


def fold_alpha(colors: np.ndarray, alpha: np.ndarray) -> np.ndarray:
    """Multiply the [0,1] alpha into the RGBA alpha byte (round half-up)."""
    out = np.array(colors, dtype=np.uint8, copy=True)
    out[:, 3] = np.floor(colors[:, 3].astype(np.float64) * alpha + 0.5).astype(np.uint8)
    return out


def tessellate_edges(
    net: StreetNetwork,
    styles: ResolvedStyle,
    reference_zoom: float,
    geometry: ProjectedGeometry | None = None,
) -> EdgeMesh:
    """One quad per visible polyline segment, extruded +/- width/2 along the
    segment normal. Zero-length segments and hidden edges contribute nothing."""
    if geometry is None:
        geometry = project_network(net)
    offsets = geometry.edge_offsets
    coords = geometry.edge_coords
    total = coords.shape[0]
    if total == 0 or not styles.visible.any():
        return EdgeMesh()

    seg_mask = np.ones(max(total - 1, 0), dtype=bool)
    last_positions = offsets[1:] - 1
    seg_mask[last_positions[last_positions < total - 1]] = False
    seg_starts = np.nonzero(seg_mask)[0]
    seg_edge = np.searchsorted(offsets, seg_starts, side="right") - 1

    keep = styles.visible[seg_edge]
    seg_starts = seg_starts[keep]
    seg_edge = seg_edge[keep]

    ax = coords[seg_starts, 0]
    ay = coords[seg_starts, 1]
    bx = coords[seg_starts + 1, 0]
    by = coords[seg_starts + 1, 1]
    nonzero = (ax != bx) | (ay != by)
    ax, ay, bx, by = ax[nonzero], ay[nonzero], bx[nonzero], by[nonzero]
    seg_edge = seg_edge[nonzero]

    half_w_merc = (styles.width_px[seg_edge] / world_scale(reference_zoom)) * 0.5
    rgba = fold_alpha(styles.color, styles.alpha)[seg_edge]
    positions, colors, element_index, indices = kernels.extrude_quads(
        ax, ay, bx, by, half_w_merc, rgba, seg_edge.astype(np.uint32)
    )
    return EdgeMesh(positions=positions, colors=colors, element_index=element_index, indices=indices)


def place_arrows(
    net: StreetNetwork,
    styles: ResolvedStyle,
    reference_zoom: float,
    geometry: ProjectedGeometry | None = None,
    show_arrows: bool = True,
    icon_table: tuple[str, ...] = DEFAULT_ICON_TABLE,
) -> SpriteInstances:
    """One direction arrow per visible edge at its arc-length midpoint,
    rotated to the heading of the segment containing that midpoint."""
    if not show_arrows or len(net.edges) == 0 or not styles.visible.any():
        return SpriteInstances()
    if geometry is None:
        geometry = project_network(net)
    mid, heading = kernels.polyline_midpoints(geometry.edge_coords, geometry.edge_offsets)
    visible = styles.visible
    idx = np.nonzero(visible)[0]
    sizes = np.clip(styles.width_px[idx] * ARROW_SIZE_FACTOR, ARROW_MIN_PX, ARROW_MAX_PX)
    return SpriteInstances(
        centers=mid[idx].astype(np.float32),
        sizes_px=sizes.astype(np.float32),
        rotations_rad=heading[idx].astype(np.float32),
        colors=fold_alpha(styles.color, styles.alpha)[idx],
        icons=np.full(len(idx), icon_table.index("arrow"), dtype=np.uint16),
        element_index=idx.astype(np.uint32),
    )


def build_sprites(
    kind: str,
    net: StreetNetwork,
    styles: ResolvedStyle,
    geometry: ProjectedGeometry | None = None,
    icon_table: tuple[str, ...] = DEFAULT_ICON_TABLE,
) -> SpriteInstances:
    """Sprite instances for visible nodes or markers, in element order."""
    if geometry is None:
        geometry = project_network(net)
    if kind == "node":
        xy = geometry.node_xy
    elif kind == "marker":
        xy = geometry.marker_xy
    else:
        raise ValueError(f"build_sprites handles node|marker, not {kind!r}")
    idx = np.nonzero(styles.visible)[0]
    if len(idx) == 0:
        return SpriteInstances()

    if kind == "node":
        icons = np.zeros(len(idx), dtype=np.uint16)  # icon 0: filled disc
    else:
        lookup = {name: slot for slot, name in enumerate(icon_table)}
        icons = np.empty(len(idx), dtype=np.uint16)
        for j, i in enumerate(idx):
            name = styles.icon_id[i]
            if name not in lookup:
                raise UnknownIcon(name)
            icons[j] = lookup[name]

    return SpriteInstances(
        centers=xy[idx].astype(np.float32),
        sizes_px=styles.size_px[idx].astype(np.float32),
        rotations_rad=np.zeros(len(idx), dtype=np.float32),
        colors=fold_alpha(styles.color, styles.alpha)[idx],
        icons=icons,
        element_index=idx.astype(np.uint32),
    )


def assemble_icon_table(styles: dict[str, ResolvedStyle]) -> tuple[str, ...]:
    """Default icons plus any extra marker icons, in sorted order."""
    extra = set(styles["marker"].icon_id or ()) - set(DEFAULT_ICON_TABLE)
    return DEFAULT_ICON_TABLE + tuple(sorted(extra))


def build_bundle(
    net: StreetNetwork,
    styles: dict[str, ResolvedStyle],
    reference_zoom: float,
    version: int,
    show_nodes: bool = True,
    show_edges: bool = True,
    show_arrows: bool = True,
    show_markers: bool = True,
    geometry: ProjectedGeometry | None = None,
    icon_table: tuple[str, ...] | None = None,
) -> RenderBundle:
    """Assemble all layers into one versioned bundle, honoring show flags.

    Hiding the edge layer also removes its arrows; arrows mark edge
    directions and have nothing to point along without their edges.
    """
    if geometry is None:
        geometry = project_network(net)
    if icon_table is None:
        icon_table = assemble_icon_table(styles)
    edges_on = show_edges and len(net.edges) > 0
    return RenderBundle(
        edge_mesh=(
            tessellate_edges(net, styles["edge"], reference_zoom, geometry)
            if edges_on
            else EdgeMesh()
        ),
        node_sprites=(
            build_sprites("node", net, styles["node"], geometry, icon_table)
            if show_nodes and len(net.nodes)
            else SpriteInstances()
        ),
        arrow_sprites=(
            place_arrows(net, styles["edge"], reference_zoom, geometry, True, icon_table)
            if edges_on and show_arrows
            else SpriteInstances()
        ),
        marker_sprites=(
            build_sprites("marker", net, styles["marker"], geometry, icon_table)
            if show_markers and len(net.markers)
            else SpriteInstances()
        ),
        version=version,
        reference_zoom=reference_zoom,
        icon_table=icon_table,
    )


# -- binary codec ------------------------------------------------------------------


def _encode_icon_table(icon_table: tuple[str, ...]) -> bytes:
    parts = []
    for name in icon_table:
        raw = name.encode("utf-8")
        parts.append(struct.pack("<H", len(raw)))
        parts.append(raw)
    return b"".join(parts)


def _sprite_bytes(s: SpriteInstances) -> list[bytes]:
    return [
        s.centers.astype(np.float32, copy=False).tobytes(),
        s.sizes_px.astype(np.float32, copy=False).tobytes(),
        s.rotations_rad.astype(np.float32, copy=False).tobytes(),
        s.colors.astype(np.uint8, copy=False).tobytes(),
        s.icons.astype(np.uint16, copy=False).tobytes(),
        s.element_index.astype(np.uint32, copy=False).tobytes(),
    ]


def encode_bundle(bundle: RenderBundle) -> bytes:
    icon_bytes = _encode_icon_table(bundle.icon_table)
    mesh = bundle.edge_mesh
    header = HEADER.pack(
        MAGIC,
        FORMAT_VERSION,
        0,
        bundle.version,
        bundle.reference_zoom,
        mesh.vertex_count,
        mesh.indices.shape[0],
        len(bundle.node_sprites),
        len(bundle.arrow_sprites),
        len(bundle.marker_sprites),
        len(icon_bytes),
    )
    parts = [
        header,
        mesh.positions.astype(np.float32, copy=False).tobytes(),
        mesh.colors.astype(np.uint8, copy=False).tobytes(),
        mesh.element_index.astype(np.uint32, copy=False).tobytes(),
        mesh.indices.astype(np.uint32, copy=False).tobytes(),
    ]
    for sprites in (bundle.node_sprites, bundle.arrow_sprites, bundle.marker_sprites):
        parts.extend(_sprite_bytes(sprites))
    parts.append(icon_bytes)
    return b"".join(parts)


class _Reader:
    def __init__(self, data: bytes, offset: int):
        self.data = data
        self.offset = offset

    def take(self, nbytes: int, section: str) -> bytes:
        if self.offset + nbytes > len(self.data):
            raise TruncatedSection(section, nbytes, len(self.data) - self.offset)
        chunk = self.data[self.offset : self.offset + nbytes]
        self.offset += nbytes
        return chunk

    def array(self, dtype, count: int, section: str, columns: int = 0) -> np.ndarray:
        dtype = np.dtype(dtype)
        width = columns if columns else 1
        arr = np.frombuffer(self.take(dtype.itemsize * count * width, section), dtype=dtype).copy()
        return arr.reshape(count, columns) if columns else arr


def _read_sprites(r: _Reader, count: int, section: str) -> SpriteInstances:
    return SpriteInstances(
        centers=r.array(np.float32, count, f"{section}.centers", columns=2),
        sizes_px=r.array(np.float32, count, f"{section}.sizes"),
        rotations_rad=r.array(np.float32, count, f"{section}.rotations"),
        colors=r.array(np.uint8, count, f"{section}.colors", columns=4),
        icons=r.array(np.uint16, count, f"{section}.icons"),
        element_index=r.array(np.uint32, count, f"{section}.element_index"),
    )


def decode_bundle(data: bytes) -> RenderBundle:
    if len(data) < HEADER.size:
        raise TruncatedSection("header", HEADER.size, len(data))
    (
        magic,
        format_version,
        _reserved,
        version,
        reference_zoom,
        n_vertices,
        n_indices,
        n_nodes,
        n_arrows,
        n_markers,
        icon_len,
    ) = HEADER.unpack_from(data)
    if magic != MAGIC:
        raise BadMagic(f"expected {MAGIC!r}, got {magic!r}")
    if format_version != FORMAT_VERSION:
        raise UnsupportedFormatVersion(format_version)

    r = _Reader(data, HEADER.size)
    mesh = EdgeMesh(
        positions=r.array(np.float32, 2 * n_vertices, "edge.positions"),
        colors=r.array(np.uint8, n_vertices, "edge.colors", columns=4),
        element_index=r.array(np.uint32, n_vertices, "edge.element_index"),
        indices=r.array(np.uint32, n_indices, "edge.indices"),
    )
    nodes = _read_sprites(r, n_nodes, "nodes")
    arrows = _read_sprites(r, n_arrows, "arrows")
    markers = _read_sprites(r, n_markers, "markers")

    icon_blob = r.take(icon_len, "icon_table")
    icons: list[str] = []
    pos = 0
    while pos < len(icon_blob):
        if pos + 2 > len(icon_blob):
            raise TruncatedSection("icon_table", pos + 2, len(icon_blob))
        (length,) = struct.unpack_from("<H", icon_blob, pos)
        pos += 2
        if pos + length > len(icon_blob):
            raise TruncatedSection("icon_table", pos + length, len(icon_blob))
        icons.append(icon_blob[pos : pos + length].decode("utf-8"))
        pos += length

    if r.offset != len(data):
        raise TruncatedSection("trailing", r.offset, len(data))

    return RenderBundle(
        edge_mesh=mesh,
        node_sprites=nodes,
        arrow_sprites=arrows,
        marker_sprites=markers,
        version=version,
        reference_zoom=reference_zoom,
        icon_table=tuple(icons),
    )
