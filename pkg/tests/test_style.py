import numpy as np
import pytest
from hypothesis import given, strategies as st

from streetvis.errors import InapplicableChannel, SchemaViolation
from streetvis.model import NodeRecord, build_network
from streetvis.style import (
    ColorScale,
    Method,
    StyleOptions,
    default_options,
    eval_color_scale,
    normalize_weights,
    options_from_json,
    options_to_json,
    parse_color,
    resolve_kind,
    resolve_styles,
)


class TestDefaults:
    def test_edge_width_default(self):
        opts = default_options("edge")
        assert opts.width == Method.DEFAULT
        assert opts.default_width_px == 2.0

    def test_node_size_bounds(self):
        opts = default_options("node")
        assert (opts.min_size_px, opts.max_size_px) == (2.0, 14.0)

    def test_documented_colors(self):
        assert default_options("node").default_color == parse_color("#1E90FF")
        assert default_options("edge").default_color == parse_color("#3273DC")
        assert default_options("marker").default_color == parse_color("#E53935")
        assert default_options("node").color_stops == (
            parse_color("#FFF5C0"),
            parse_color("#D7301F"),
        )

    def test_marker_defaults(self):
        opts = default_options("marker")
        assert opts.default_size_px == 24.0
        assert opts.default_icon == "pin"
        assert opts.icon == Method.DEFAULT

    def test_weight_field_default(self):
        assert default_options("edge").weight_field == "weight"

    def test_icon_channel_rejected_for_edges(self):
        with pytest.raises(InapplicableChannel):
            StyleOptions(kind="edge", icon=Method.DEFAULT)

    def test_width_channel_rejected_for_nodes(self):
        with pytest.raises(InapplicableChannel):
            StyleOptions(kind="node", width=Method.SCALE)

    def test_original_rejected_for_nodes(self):
        with pytest.raises(InapplicableChannel):
            StyleOptions(kind="node", color=Method.ORIGINAL)


class TestNormalizeWeights:
    def test_affine(self):
        assert normalize_weights([1, 2, 3]).tolist() == [0.0, 0.5, 1.0]

    def test_all_equal_maps_to_half(self):
        assert normalize_weights([7, 7, 7]).tolist() == [0.5, 0.5, 0.5]

    def test_absent_maps_to_zero(self):
        assert normalize_weights([None, 0, 10]).tolist() == [0.0, 0.0, 1.0]

    def test_all_absent(self):
        assert normalize_weights([None, None]).tolist() == [0.0, 0.0]

    def test_single_present_value(self):
        assert normalize_weights([None, 5.0]).tolist() == [0.0, 0.5]


class TestColorScale:
    def test_boundaries(self):
        scale = ColorScale((parse_color("#000000"), parse_color("#FFFFFF")))
        assert eval_color_scale(scale, 0.0) == (0, 0, 0, 255)
        assert eval_color_scale(scale, 1.0) == (255, 255, 255, 255)

    def test_midpoint_rounds_half_up(self):
        scale = ColorScale(((0, 0, 0, 255), (255, 255, 255, 255)))
        assert eval_color_scale(scale, 0.5) == (128, 128, 128, 255)

    def test_t_clamped(self):
        scale = ColorScale(((0, 0, 0, 255), (255, 255, 255, 255)))
        assert eval_color_scale(scale, -1.0) == (0, 0, 0, 255)
        assert eval_color_scale(scale, 2.0) == (255, 255, 255, 255)

    def test_three_stops_hit_middle_exactly(self):
        scale = ColorScale(((0, 0, 0, 255), (10, 20, 30, 255), (255, 255, 255, 255)))
        assert eval_color_scale(scale, 0.5) == (10, 20, 30, 255)

    def test_continuity_under_fine_sampling(self):
        scale = ColorScale((parse_color("#FFF5C0"), parse_color("#D7301F")))
        prev = np.array(eval_color_scale(scale, 0.0), dtype=int)
        for t in np.linspace(0, 1, 512):
            cur = np.array(eval_color_scale(scale, float(t)), dtype=int)
            assert np.abs(cur - prev).max() <= 1
            prev = cur

    def test_fewer_than_two_stops_rejected(self):
        with pytest.raises(ValueError):
            ColorScale(((0, 0, 0, 255),))


def net_with_weights(weights):
    nodes = [
        NodeRecord(f"n{i}", 0.0, float(i) * 1e-3, {} if w is None else {"weight": w})
        for i, w in enumerate(weights)
    ]
    return build_network(nodes, [], [])


class TestResolve:
    def test_all_default_is_uniform(self, small_net):
        styles = resolve_styles(small_net)
        node = styles["node"]
        assert np.all(node.color == np.array(parse_color("#1E90FF"), dtype=np.uint8))
        assert np.all(node.size_px == 6.0)
        assert np.all(node.alpha == 1.0)
        assert node.visible.all()

    def test_edge_width_scale_oracle_values(self, small_net):
        opts = default_options("edge")
        opts.width = Method.SCALE
        styles = resolve_styles(small_net, {"edge": opts})
        # weights are [10, 20, 40] -> t = [0, 1/3, 1] over bounds (1, 10)
        assert styles["edge"].width_px.tolist() == [1.0, 4.0, 10.0]

    def test_scale_color_uses_stops(self, small_net):
        opts = default_options("edge")
        opts.color = Method.SCALE
        styles = resolve_styles(small_net, {"edge": opts})
        assert tuple(styles["edge"].color[0]) == parse_color("#FFF5C0")
        assert tuple(styles["edge"].color[2]) == parse_color("#D7301F")

    def test_custom_visibility(self):
        nodes = [
            NodeRecord("a", 0, 0, {"visible": False}),
            NodeRecord("b", 0, 1e-3, {"visible": True}),
        ]
        net = build_network(nodes, [], [])
        opts = default_options("node")
        opts.visibility = Method.CUSTOM
        resolved = resolve_styles(net, {"node": opts})["node"]
        assert resolved.visible.tolist() == [False, True]

    def test_custom_fallback_warns(self):
        nodes = [NodeRecord("a", 0, 0, {"color": "#10203040"}), NodeRecord("b", 0, 1e-3, {})]
        net = build_network(nodes, [], [])
        opts = default_options("node")
        opts.color = Method.CUSTOM
        resolved = resolve_styles(net, {"node": opts})["node"]
        assert tuple(resolved.color[0]) == (0x10, 0x20, 0x30, 0x40)
        assert tuple(resolved.color[1]) == parse_color("#1E90FF")
        assert len(resolved.warnings) == 1 and "b" in resolved.warnings[0]

    def test_marker_original_color_is_neutral_tint(self, small_net):
        opts = default_options("marker")
        opts.color = Method.ORIGINAL
        resolved = resolve_styles(small_net, {"marker": opts})["marker"]
        assert np.all(resolved.color == 255)
        assert resolved.color_original.all()

    def test_custom_numeric_clamped_to_bounds(self):
        nodes = [NodeRecord("a", 0, 0, {"size": 100.0}), NodeRecord("b", 0, 1e-3, {"size": -3.0})]
        net = build_network(nodes, [], [])
        opts = default_options("node")
        opts.size = Method.CUSTOM
        resolved = resolve_styles(net, {"node": opts})["node"]
        assert resolved.size_px.tolist() == [opts.max_size_px, opts.min_size_px]

    def test_hidden_elements_keep_their_slot(self):
        nodes = [NodeRecord("a", 0, 0, {"visible": False}), NodeRecord("b", 0, 1e-3, {})]
        net = build_network(nodes, [], [])
        opts = default_options("node")
        opts.visibility = Method.CUSTOM
        resolved = resolve_styles(net, {"node": opts})["node"]
        assert len(resolved) == 2
        assert not resolved.visible[0]

    def test_determinism(self, small_net):
        opts = default_options("edge")
        opts.width = Method.SCALE
        a = resolve_styles(small_net, {"edge": opts})["edge"]
        b = resolve_styles(small_net, {"edge": opts})["edge"]
        assert np.array_equal(a.width_px, b.width_px)
        assert np.array_equal(a.color, b.color)

    @given(
        st.lists(
            st.one_of(st.none(), st.floats(min_value=-1e6, max_value=1e6)),
            min_size=1,
            max_size=40,
        )
    )
    def test_scale_monotone_and_argmax_hits_max(self, weights):
        records = [
            NodeRecord(f"n{i}", 0, 0, {} if w is None else {"weight": float(w)})
            for i, w in enumerate(weights)
        ]
        opts = default_options("node")
        opts.size = Method.SCALE
        resolved = resolve_kind(records, opts)
        sizes = resolved.size_px
        numeric = [(w, s) for w, s in zip(weights, sizes) if w is not None]
        for (wa, sa) in numeric:
            for (wb, sb) in numeric:
                if wa <= wb:
                    assert sa <= sb
        if numeric:
            assert max(s for _, s in numeric) == (
                opts.max_size_px if len({w for w, _ in numeric}) > 1 else pytest.approx(8.0)
            )
        assert np.all((sizes >= opts.min_size_px) & (sizes <= opts.max_size_px))

    def test_alpha_clamped_to_unit_interval(self):
        nodes = [NodeRecord("a", 0, 0, {"alpha": 7.0})]
        net = build_network(nodes, [], [])
        opts = default_options("node")
        opts.alpha = Method.CUSTOM
        resolved = resolve_styles(net, {"node": opts})["node"]
        assert resolved.alpha.tolist() == [1.0]


class TestOptionsJson:
    def test_round_trip(self):
        opts = default_options("edge")
        opts.width = Method.SCALE
        opts.weight_field = "count"
        rebuilt = options_from_json("edge", options_to_json(opts))
        assert rebuilt == opts

    def test_marker_round_trip(self):
        opts = default_options("marker")
        opts.color = Method.ORIGINAL
        rebuilt = options_from_json("marker", options_to_json(opts))
        assert rebuilt == opts

    def test_unknown_field_rejected(self):
        with pytest.raises(SchemaViolation):
            options_from_json("edge", {"glow": True})

    def test_inapplicable_channel_rejected(self):
        with pytest.raises(InapplicableChannel):
            options_from_json("edge", {"icon": "CUSTOM"})

    def test_bad_method_name(self):
        with pytest.raises(SchemaViolation):
            options_from_json("edge", {"width": "HUGE"})

    def test_bounds_violation_rejected(self):
        with pytest.raises(ValueError):
            options_from_json("edge", {"min_width_px": 9, "max_width_px": 1})
