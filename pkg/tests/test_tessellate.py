import math

import numpy as np
import pytest

from streetvis.errors import BadMagic, TruncatedSection, UnknownIcon, UnsupportedFormatVersion
from streetvis.geo import project, world_scale
from streetvis.model import EdgeRecord, MarkerRecord, NodeRecord, build_network
from streetvis.style import Method, default_options, resolve_styles
from streetvis.tessellate import (
    DEFAULT_ICON_TABLE,
    FORMAT_VERSION,
    HEADER,
    EdgeMesh,
    RenderBundle,
    SpriteInstances,
    assemble_icon_table,
    build_bundle,
    build_sprites,
    decode_bundle,
    encode_bundle,
    place_arrows,
    project_network,
    tessellate_edges,
)

ZOOM = 12.0


def one_edge_net(coords, **edge_data):
    nodes = [
        NodeRecord("a", coords[0][0], coords[0][1]),
        NodeRecord("b", coords[-1][0], coords[-1][1]),
    ]
    return build_network(nodes, [EdgeRecord("e", "a", "b", tuple(coords), edge_data)], [])


class TestTessellateEdges:
    def test_one_segment_is_one_quad(self):
        net = one_edge_net([(0.0, 0.0), (0.0, 0.01)])
        mesh = tessellate_edges(net, resolve_styles(net)["edge"], ZOOM)
        assert mesh.vertex_count == 4
        assert mesh.indices.shape[0] == 6

    def test_vertex_and_index_accounting(self, small_net):
        # edges have 1, 1, and 2 segments -> 4 quads
        mesh = tessellate_edges(small_net, resolve_styles(small_net)["edge"], ZOOM)
        assert mesh.vertex_count == 4 * 4
        assert mesh.indices.shape[0] == 6 * 4
        assert mesh.element_index.shape[0] == mesh.vertex_count

    def test_horizontal_segment_offsets_only_y(self):
        # constant latitude means constant mercator y: the normal is (0, +/-1)
        net = one_edge_net([(10.0, 0.0), (10.0, 0.02)])
        styles = resolve_styles(net)["edge"]
        mesh = tessellate_edges(net, styles, ZOOM)
        half_merc = (styles.width_px[0] / world_scale(ZOOM)) / 2.0
        a = project(10.0, 0.0)
        b = project(10.0, 0.02)
        quads = mesh.positions.reshape(4, 2).astype(np.float64)
        # x matches the endpoints; y differs from them by exactly +/- half width
        # (tolerances allow for the float32 storage of vertex positions)
        assert quads[0, 0] == pytest.approx(a.x, abs=1e-7)
        assert quads[1, 0] == pytest.approx(a.x, abs=1e-7)
        assert quads[2, 0] == pytest.approx(b.x, abs=1e-7)
        assert sorted(quads[:2, 1]) == pytest.approx(
            [a.y - half_merc, a.y + half_merc], abs=1e-7
        )
        assert sorted(quads[2:, 1]) == pytest.approx(
            [a.y - half_merc, a.y + half_merc], abs=1e-7
        )

    def test_hidden_edge_contributes_nothing(self):
        net = one_edge_net([(0.0, 0.0), (0.0, 0.01)], visible=False)
        opts = default_options("edge")
        opts.visibility = Method.CUSTOM
        mesh = tessellate_edges(net, resolve_styles(net, {"edge": opts})["edge"], ZOOM)
        assert mesh.vertex_count == 0
        assert mesh.indices.shape[0] == 0

    def test_zero_length_segment_skipped(self):
        net = one_edge_net([(0.0, 0.0), (0.0, 0.0), (0.0, 0.01)])
        mesh = tessellate_edges(net, resolve_styles(net)["edge"], ZOOM)
        assert mesh.vertex_count == 4

    def test_no_degenerate_triangles(self, small_net):
        mesh = tessellate_edges(small_net, resolve_styles(small_net)["edge"], ZOOM)
        pos = mesh.positions.reshape(-1, 2).astype(np.float64)
        tri = mesh.indices.reshape(-1, 3)
        v0, v1, v2 = pos[tri[:, 0]], pos[tri[:, 1]], pos[tri[:, 2]]
        area2 = np.abs(
            (v1[:, 0] - v0[:, 0]) * (v2[:, 1] - v0[:, 1])
            - (v1[:, 1] - v0[:, 1]) * (v2[:, 0] - v0[:, 0])
        )
        assert np.all(area2 > 0)

    def test_alpha_folds_into_color_byte(self, small_net):
        opts = default_options("edge")
        opts.default_alpha = 0.5
        mesh = tessellate_edges(small_net, resolve_styles(small_net, {"edge": opts})["edge"], ZOOM)
        assert np.all(mesh.colors[:, 3] == 128)  # 255 * 0.5 rounds half-up

    def test_element_index_traceability(self, small_net):
        styles = resolve_styles(small_net)["edge"]
        mesh = tessellate_edges(small_net, styles, ZOOM)
        assert set(mesh.element_index.tolist()) == set(np.nonzero(styles.visible)[0].tolist())


class TestPlaceArrows:
    def test_straight_edge_midpoint_and_heading(self):
        net = one_edge_net([(0.0, 0.0), (0.0, 0.01)])
        arrows = place_arrows(net, resolve_styles(net)["edge"], ZOOM)
        a = project(0.0, 0.0)
        b = project(0.0, 0.01)
        assert len(arrows) == 1
        assert arrows.centers[0, 0] == pytest.approx((a.x + b.x) / 2, abs=1e-6)
        assert arrows.centers[0, 1] == pytest.approx(a.y, abs=1e-6)
        assert arrows.rotations_rad[0] == pytest.approx(0.0, abs=1e-7)

    def test_arc_length_midpoint_on_uneven_polyline(self):
        # projected segment lengths 1:3 -> midpoint 1/3 into the second segment
        net = one_edge_net([(0.0, 0.0), (0.0, 1.0), (0.0, 4.0)])
        arrows = place_arrows(net, resolve_styles(net)["edge"], ZOOM)
        # independent arc-length oracle over the projected polyline
        pts = [project(0.0, lon) for lon in (0.0, 1.0, 4.0)]
        lengths = [
            math.hypot(pts[i + 1].x - pts[i].x, pts[i + 1].y - pts[i].y) for i in range(2)
        ]
        half = sum(lengths) / 2
        frac = (half - lengths[0]) / lengths[1]
        expected_x = pts[1].x + frac * (pts[2].x - pts[1].x)
        assert arrows.centers[0, 0] == pytest.approx(expected_x, abs=1e-6)

    def test_show_arrows_false_is_empty(self, small_net):
        arrows = place_arrows(small_net, resolve_styles(small_net)["edge"], ZOOM, show_arrows=False)
        assert len(arrows) == 0

    def test_arrow_size_clamped(self, small_net):
        opts = default_options("edge")
        opts.default_width_px = 1.0  # 3x = 3 -> clamped up to 6
        arrows = place_arrows(small_net, resolve_styles(small_net, {"edge": opts})["edge"], ZOOM)
        assert np.all(arrows.sizes_px == 6.0)
        opts.default_width_px = 10.0  # 3x = 30 -> clamped down to 24
        arrows = place_arrows(small_net, resolve_styles(small_net, {"edge": opts})["edge"], ZOOM)
        assert np.all(arrows.sizes_px == 24.0)

    def test_rotation_within_pi(self, small_net):
        arrows = place_arrows(small_net, resolve_styles(small_net)["edge"], ZOOM)
        assert np.all(np.abs(arrows.rotations_rad) <= np.float32(np.pi))


class TestBuildSprites:
    def test_three_visible_nodes_in_element_order(self, small_net):
        sprites = build_sprites("node", small_net, resolve_styles(small_net)["node"])
        assert len(sprites) == 3
        assert sprites.element_index.tolist() == [0, 1, 2]
        assert np.all(sprites.icons == 0)

    def test_marker_icon_table_lookup(self, small_net):
        styles = resolve_styles(small_net)
        table = DEFAULT_ICON_TABLE + ("warning",)
        sprites = build_sprites("marker", small_net, styles["marker"], icon_table=table)
        assert np.all(sprites.icons == table.index("pin"))

    def test_unknown_icon_raises(self):
        net = build_network([], [], [MarkerRecord("m", 0, 0, icon_id="ufo")])
        styles = resolve_styles(net)
        with pytest.raises(UnknownIcon):
            build_sprites("marker", net, styles["marker"], icon_table=DEFAULT_ICON_TABLE)

    def test_assemble_icon_table_registers_extras(self):
        net = build_network([], [], [MarkerRecord("m", 0, 0, icon_id="ufo")])
        styles = resolve_styles(net)
        table = assemble_icon_table(styles)
        assert table == DEFAULT_ICON_TABLE + ("ufo",)
        sprites = build_sprites("marker", net, styles["marker"], icon_table=table)
        assert sprites.icons[0] == table.index("ufo")


class TestBuildBundle:
    def test_show_edges_false_empties_edges_and_arrows(self, small_net):
        styles = resolve_styles(small_net)
        bundle = build_bundle(small_net, styles, ZOOM, version=1, show_edges=False)
        assert bundle.edge_mesh.vertex_count == 0
        assert len(bundle.arrow_sprites) == 0
        assert len(bundle.node_sprites) == 3

    def test_show_arrows_false_keeps_edges(self, small_net):
        styles = resolve_styles(small_net)
        bundle = build_bundle(small_net, styles, ZOOM, version=1, show_arrows=False)
        assert bundle.edge_mesh.vertex_count > 0
        assert len(bundle.arrow_sprites) == 0


def random_bundle(rng) -> RenderBundle:
    nv = int(rng.integers(0, 12)) * 4
    mesh = EdgeMesh(
        positions=rng.random(2 * nv).astype(np.float32),
        colors=rng.integers(0, 256, size=(nv, 4), dtype=np.uint8),
        element_index=rng.integers(0, 50, size=nv, dtype=np.uint32),
        indices=rng.integers(0, max(nv, 1), size=(nv // 4) * 6, dtype=np.uint32),
    )

    def sprites():
        k = int(rng.integers(0, 8))
        return SpriteInstances(
            centers=rng.random((k, 2)).astype(np.float32),
            sizes_px=rng.uniform(1, 30, size=k).astype(np.float32),
            rotations_rad=rng.uniform(-np.pi, np.pi, size=k).astype(np.float32),
            colors=rng.integers(0, 256, size=(k, 4), dtype=np.uint8),
            icons=rng.integers(0, 4, size=k, dtype=np.uint16),
            element_index=rng.integers(0, 50, size=k, dtype=np.uint32),
        )

    names = ["disc", "arrow", "pin", "warning", "snowflake"]
    k_icons = int(rng.integers(0, len(names)))
    return RenderBundle(
        edge_mesh=mesh,
        node_sprites=sprites(),
        arrow_sprites=sprites(),
        marker_sprites=sprites(),
        version=int(rng.integers(0, 2**40)),
        reference_zoom=float(rng.uniform(0, 20)),
        icon_table=tuple(names[:k_icons]),
    )


class TestBundleCodec:
    def test_empty_bundle_is_exactly_the_fixed_header(self):
        blob = encode_bundle(RenderBundle(icon_table=()))
        assert len(blob) == HEADER.size

    def test_header_is_48_bytes(self):
        # 4 magic + 2 format + 2 reserved + 8 version + 8 zoom + 6 * 4 counts
        assert HEADER.size == 48

    def test_round_trip_small(self, small_net):
        styles = resolve_styles(small_net)
        bundle = build_bundle(small_net, styles, ZOOM, version=7)
        assert decode_bundle(encode_bundle(bundle)) == bundle

    def test_round_trip_randomized(self):
        rng = np.random.default_rng(99)
        for _ in range(200):
            bundle = random_bundle(rng)
            assert decode_bundle(encode_bundle(bundle)) == bundle

    def test_bad_magic(self):
        blob = bytearray(encode_bundle(RenderBundle()))
        blob[0] ^= 0xFF
        with pytest.raises(BadMagic):
            decode_bundle(bytes(blob))

    def test_unsupported_format_version(self):
        blob = bytearray(encode_bundle(RenderBundle()))
        blob[4] = FORMAT_VERSION + 1
        with pytest.raises(UnsupportedFormatVersion):
            decode_bundle(bytes(blob))

    def test_truncated_section(self, small_net):
        styles = resolve_styles(small_net)
        blob = encode_bundle(build_bundle(small_net, styles, ZOOM, version=1))
        with pytest.raises(TruncatedSection):
            decode_bundle(blob[:-3])

    def test_trailing_bytes_rejected(self):
        blob = encode_bundle(RenderBundle(icon_table=()))
        with pytest.raises(TruncatedSection):
            decode_bundle(blob + b"\x00")

    def test_version_and_zoom_survive(self):
        bundle = RenderBundle(version=123456789, reference_zoom=13.25, icon_table=("a",))
        decoded = decode_bundle(encode_bundle(bundle))
        assert decoded.version == 123456789
        assert decoded.reference_zoom == 13.25
        assert decoded.icon_table == ("a",)
