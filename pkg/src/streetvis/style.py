"""Per-element style resolution.

Each visual channel of a kind (node, edge, marker) is driven by a method:

* DEFAULT   - the configured constant.
* SCALE     - interpolate between the channel's min and max in proportion to
              a numeric weight field, min-max normalized across the elements.
* CUSTOM    - read the value from a configurable field of the element's data,
              falling back to the default (with a warning) when missing or
              unparseable.
* ALWAYS    - visibility only: every element visible.
* ORIGINAL  - marker color only: keep the icon's native colors, emitted as a
              neutral white tint.

Channels that do not exist for a kind (width for nodes, icon for edges, ...)
are rejected with InapplicableChannel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Sequence

import numpy as np

from .errors import InapplicableChannel, SchemaViolation
from .model import EdgeRecord, MarkerRecord, NodeRecord, StreetNetwork, element_weight

RGBA = tuple[int, int, int, int]

KINDS = ("node", "edge", "marker")

# Warnings from CUSTOM fallbacks are capped per resolution so one bad column
# in a 150k-edge table cannot balloon memory.
MAX_WARNINGS = 200


class Method(str, Enum):
    DEFAULT = "DEFAULT"
    SCALE = "SCALE"
    CUSTOM = "CUSTOM"
    ORIGINAL = "ORIGINAL"
    ALWAYS = "ALWAYS"


#: Methods allowed per (kind, channel); absent pairs are inapplicable.
ALLOWED_METHODS: dict[tuple[str, str], frozenset[Method]] = {
    ("node", "color"): frozenset({Method.DEFAULT, Method.SCALE, Method.CUSTOM}),
    ("node", "size"): frozenset({Method.DEFAULT, Method.SCALE, Method.CUSTOM}),
    ("node", "alpha"): frozenset({Method.DEFAULT, Method.SCALE, Method.CUSTOM}),
    ("node", "visibility"): frozenset({Method.ALWAYS, Method.CUSTOM}),
    ("edge", "color"): frozenset({Method.DEFAULT, Method.SCALE, Method.CUSTOM}),
    ("edge", "alpha"): frozenset({Method.DEFAULT, Method.SCALE, Method.CUSTOM}),
    ("edge", "visibility"): frozenset({Method.ALWAYS, Method.CUSTOM}),
    ("edge", "width"): frozenset({Method.DEFAULT, Method.SCALE, Method.CUSTOM}),
    ("marker", "color"): frozenset(
        {Method.DEFAULT, Method.SCALE, Method.CUSTOM, Method.ORIGINAL}
    ),
    ("marker", "size"): frozenset({Method.DEFAULT, Method.SCALE, Method.CUSTOM}),
    ("marker", "alpha"): frozenset({Method.DEFAULT, Method.SCALE, Method.CUSTOM}),
    ("marker", "visibility"): frozenset({Method.ALWAYS, Method.CUSTOM}),
    ("marker", "icon"): frozenset({Method.DEFAULT, Method.CUSTOM}),
}

_METHOD_CHANNELS = ("color", "size", "alpha", "visibility", "width", "icon")


def parse_color(text: str) -> RGBA:
    """Parse '#RRGGBB' or '#RRGGBBAA' into an RGBA byte tuple."""
    if not isinstance(text, str) or not text.startswith("#") or len(text) not in (7, 9):
        raise ValueError(f"not a #RRGGBB[AA] color: {text!r}")
    value = int(text[1:], 16)
    if len(text) == 7:
        return ((value >> 16) & 0xFF, (value >> 8) & 0xFF, value & 0xFF, 255)
    return ((value >> 24) & 0xFF, (value >> 16) & 0xFF, (value >> 8) & 0xFF, value & 0xFF)


def format_color(rgba: RGBA) -> str:
    r, g, b, a = rgba
    if a == 255:
        return f"#{r:02X}{g:02X}{b:02X}"
    return f"#{r:02X}{g:02X}{b:02X}{a:02X}"


@dataclass(frozen=True)
class ColorScale:
    """Evenly spaced RGBA stops interpolated linearly in RGB space over [0, 1]."""

    stops: tuple[RGBA, ...]

    def __post_init__(self):
        if len(self.stops) < 2:
            raise ValueError("a color scale needs at least 2 stops")


def eval_color_scale(scale: ColorScale, t: float) -> RGBA:
    """Evaluate the scale at t (clamped to [0, 1]); channels round half-up."""
    t = min(max(float(t), 0.0), 1.0)
    k = len(scale.stops)
    scaled = t * (k - 1)
    i = min(int(scaled), k - 2)
    frac = scaled - i
    lo = scale.stops[i]
    hi = scale.stops[i + 1]
    return tuple(
        int(min(255.0, math.floor(lo[c] + frac * (hi[c] - lo[c]) + 0.5))) for c in range(4)
    )  # type: ignore[return-value]


def _eval_color_scale_array(scale: ColorScale, ts: np.ndarray) -> np.ndarray:
    """Vectorized eval_color_scale; same arithmetic, (n, 4) uint8 output."""
    ts = np.clip(np.asarray(ts, dtype=np.float64), 0.0, 1.0)
    k = len(scale.stops)
    scaled = ts * (k - 1)
    idx = np.minimum(scaled.astype(np.int64), k - 2)
    frac = scaled - idx
    stops = np.asarray(scale.stops, dtype=np.float64)
    lo = stops[idx]
    hi = stops[idx + 1]
    mixed = np.minimum(255.0, np.floor(lo + frac[:, None] * (hi - lo) + 0.5))
    return mixed.astype(np.uint8)


def normalize_weights(values: Sequence[float | None]) -> np.ndarray:
    """Min-max normalize optional weights to [0, 1].

    Absent values map to 0.0; when all present values are equal, each present
    value maps to 0.5.
    """
    n = len(values)
    out = np.zeros(n, dtype=np.float64)
    present = [(i, v) for i, v in enumerate(values) if v is not None]
    if not present:
        return out
    vmin = min(v for _, v in present)
    vmax = max(v for _, v in present)
    if vmin == vmax:
        for i, _ in present:
            out[i] = 0.5
        return out
    span = vmax - vmin
    for i, v in enumerate(values):
        if v is not None:
            out[i] = (v - vmin) / span
    return out


@dataclass
class StyleOptions:
    """Per-channel method selection plus the constants each method needs."""

    kind: str
    color: Method | None = None
    alpha: Method | None = None
    visibility: Method | None = None
    size: Method | None = None
    width: Method | None = None
    icon: Method | None = None
    default_color: RGBA = (30, 144, 255, 255)
    color_stops: tuple[RGBA, ...] = ((255, 245, 192, 255), (215, 48, 31, 255))
    default_size_px: float = 6.0
    min_size_px: float = 2.0
    max_size_px: float = 14.0
    default_alpha: float = 1.0
    min_alpha: float = 0.1
    max_alpha: float = 1.0
    default_width_px: float = 2.0
    min_width_px: float = 1.0
    max_width_px: float = 10.0
    default_icon: str = "pin"
    weight_field: str = "weight"
    color_field: str = "color"
    size_field: str = "size"
    alpha_field: str = "alpha"
    width_field: str = "width"
    visible_field: str = "visible"
    icon_field: str = "icon"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown element kind {self.kind!r}")
        for channel in _METHOD_CHANNELS:
            method = getattr(self, channel)
            allowed = ALLOWED_METHODS.get((self.kind, channel))
            if allowed is None:
                if method is not None:
                    raise InapplicableChannel(self.kind, channel)
                continue
            if method is None:
                method = Method.ALWAYS if channel == "visibility" else Method.DEFAULT
                setattr(self, channel, method)
            elif Method(method) not in allowed:
                raise InapplicableChannel(self.kind, channel)
            else:
                setattr(self, channel, Method(method))
        if not (self.min_size_px <= self.max_size_px):
            raise ValueError("min_size_px must be <= max_size_px")
        if not (self.min_width_px <= self.max_width_px):
            raise ValueError("min_width_px must be <= max_width_px")
        if not (0.0 <= self.min_alpha <= self.max_alpha <= 1.0):
            raise ValueError("alpha bounds must satisfy 0 <= min <= max <= 1")
        if len(self.color_stops) < 2:
            raise ValueError("color_stops needs at least 2 entries")


def default_options(kind: str) -> StyleOptions:
    """Documented defaults: dodger-blue 6 px nodes, steel-blue 2 px edges,
    red 24 px pin markers; scale bounds 2-14 px size (2-24 for markers so the
    default size respects clamping), 1-10 px width, 0.1-1.0 alpha."""
    if kind == "node":
        return StyleOptions(kind="node", default_color=parse_color("#1E90FF"))
    if kind == "edge":
        return StyleOptions(kind="edge", default_color=parse_color("#3273DC"))
    if kind == "marker":
        return StyleOptions(
            kind="marker",
            default_color=parse_color("#E53935"),
            default_size_px=24.0,
            max_size_px=24.0,
        )
    raise ValueError(f"unknown element kind {kind!r}")


@dataclass
class ResolvedStyle:
    """Concrete per-element visual values, one slot per element index.

    Hidden elements keep their slot with visible=False. color_original marks
    markers whose tint must not override the icon's own colors.
    """

    kind: str
    color: np.ndarray
    alpha: np.ndarray
    visible: np.ndarray
    size_px: np.ndarray | None = None
    width_px: np.ndarray | None = None
    icon_id: tuple[str, ...] | None = None
    color_original: np.ndarray | None = None
    warnings: tuple[str, ...] = ()

    def __len__(self) -> int:
        return len(self.visible)


class _WarningSink:
    def __init__(self):
        self.items: list[str] = []
        self.dropped = 0

    def add(self, message: str) -> None:
        if len(self.items) < MAX_WARNINGS:
            self.items.append(message)
        else:
            self.dropped += 1

    def freeze(self) -> tuple[str, ...]:
        if self.dropped:
            return tuple(self.items + [f"... {self.dropped} further warnings suppressed"])
        return tuple(self.items)


def _scaled(lo: float, hi: float, ts: np.ndarray) -> np.ndarray:
    # Convex combination: exact lo at t=0 and exact hi at t=1.
    return lo * (1.0 - ts) + hi * ts


def _resolve_numeric(
    records, method: Method, ts, default: float, lo: float, hi: float,
    field_name: str, clamp_lo: float, clamp_hi: float, kind: str, channel: str,
    warn: _WarningSink,
) -> np.ndarray:
    n = len(records)
    if method == Method.SCALE:
        values = _scaled(lo, hi, ts)
    elif method == Method.CUSTOM:
        values = np.full(n, default, dtype=np.float64)
        for i, r in enumerate(records):
            raw = r.data.get(field_name)
            if isinstance(raw, (int, float)) and not isinstance(raw, bool):
                values[i] = float(raw)
            else:
                warn.add(f"{kind} {r.id}: {channel} field {field_name!r} missing or non-numeric")
    else:
        values = np.full(n, default, dtype=np.float64)
    return np.clip(values, clamp_lo, clamp_hi)


def _resolve_colors(
    records, opts: StyleOptions, ts, warn: _WarningSink
) -> tuple[np.ndarray, np.ndarray]:
    n = len(records)
    original = np.zeros(n, dtype=bool)
    if opts.color == Method.SCALE:
        colors = _eval_color_scale_array(ColorScale(opts.color_stops), ts)
    elif opts.color == Method.CUSTOM:
        colors = np.empty((n, 4), dtype=np.uint8)
        colors[:] = np.array(opts.default_color, dtype=np.uint8)
        for i, r in enumerate(records):
            raw = r.data.get(opts.color_field)
            try:
                colors[i] = parse_color(raw)
            except (ValueError, TypeError):
                warn.add(
                    f"{opts.kind} {r.id}: color field {opts.color_field!r} missing or unparseable"
                )
    elif opts.color == Method.ORIGINAL:
        colors = np.full((n, 4), 255, dtype=np.uint8)
        original[:] = True
    else:
        colors = np.empty((n, 4), dtype=np.uint8)
        colors[:] = np.array(opts.default_color, dtype=np.uint8)
    return colors, original


def _resolve_visibility(records, opts: StyleOptions, warn: _WarningSink) -> np.ndarray:
    n = len(records)
    visible = np.ones(n, dtype=bool)
    if opts.visibility == Method.CUSTOM:
        for i, r in enumerate(records):
            raw = r.data.get(opts.visible_field)
            if isinstance(raw, bool):
                visible[i] = raw
            else:
                warn.add(
                    f"{opts.kind} {r.id}: visibility field {opts.visible_field!r} missing or non-boolean"
                )
    return visible


def _resolve_icons(records, opts: StyleOptions, warn: _WarningSink) -> tuple[str, ...]:
    icons = []
    for r in records:
        if opts.icon == Method.CUSTOM:
            raw = r.data.get(opts.icon_field)
            if isinstance(raw, str) and raw:
                icons.append(raw)
                continue
            warn.add(f"marker {r.id}: icon field {opts.icon_field!r} missing or not a string")
        # Explicit marker icon_id beats the configured default.
        icons.append(r.icon_id if r.icon_id else opts.default_icon)
    return tuple(icons)


def resolve_kind(
    records: Sequence[NodeRecord | EdgeRecord | MarkerRecord],
    options: StyleOptions,
) -> ResolvedStyle:
    """Resolve one kind's options against its records (pure, deterministic)."""
    warn = _WarningSink()
    needs_ts = Method.SCALE in (options.color, options.size, options.alpha, options.width)
    ts = (
        normalize_weights([element_weight(r, options.weight_field) for r in records])
        if needs_ts
        else np.zeros(len(records), dtype=np.float64)
    )

    colors, original = _resolve_colors(records, options, ts, warn)
    alpha = _resolve_numeric(
        records, options.alpha, ts, options.default_alpha, options.min_alpha,
        options.max_alpha, options.alpha_field, 0.0, 1.0, options.kind, "alpha", warn,
    )
    visible = _resolve_visibility(records, options, warn)

    size_px = width_px = None
    icon_ids = None
    if options.kind in ("node", "marker"):
        size_px = _resolve_numeric(
            records, options.size, ts, options.default_size_px, options.min_size_px,
            options.max_size_px, options.size_field, options.min_size_px,
            options.max_size_px, options.kind, "size", warn,
        )
    if options.kind == "edge":
        width_px = _resolve_numeric(
            records, options.width, ts, options.default_width_px, options.min_width_px,
            options.max_width_px, options.width_field, options.min_width_px,
            options.max_width_px, options.kind, "width", warn,
        )
    if options.kind == "marker":
        icon_ids = _resolve_icons(records, options, warn)

    return ResolvedStyle(
        kind=options.kind,
        color=colors,
        alpha=alpha,
        visible=visible,
        size_px=size_px,
        width_px=width_px,
        icon_id=icon_ids,
        color_original=original if options.kind == "marker" else None,
        warnings=warn.freeze(),
    )


def resolve_styles(
    net: StreetNetwork, options: Mapping[str, StyleOptions] | None = None
) -> dict[str, ResolvedStyle]:
    """Resolve styles for every kind; kinds missing from options use defaults."""
    options = dict(options or {})
    for kind, records in (("node", net.nodes), ("edge", net.edges), ("marker", net.markers)):
        opts = options.get(kind) or default_options(kind)
        if opts.kind != kind:
            raise InapplicableChannel(kind, f"options built for kind {opts.kind!r}")
        options[kind] = opts
    return {
        "node": resolve_kind(net.nodes, options["node"]),
        "edge": resolve_kind(net.edges, options["edge"]),
        "marker": resolve_kind(net.markers, options["marker"]),
    }


# -- JSON form -----------------------------------------------------------------------

_COMMON_FIELDS = (
    "weight_field", "color_field", "size_field", "alpha_field",
    "width_field", "visible_field", "icon_field",
)


def options_to_json(opts: StyleOptions) -> dict:
    """Flat JSON mirror of the option fields applicable to the kind."""
    out: dict = {
        "color": opts.color.value,
        "alpha": opts.alpha.value,
        "visibility": opts.visibility.value,
        "default_color": format_color(opts.default_color),
        "color_stops": [format_color(c) for c in opts.color_stops],
        "default_alpha": opts.default_alpha,
        "min_alpha": opts.min_alpha,
        "max_alpha": opts.max_alpha,
    }
    if opts.kind in ("node", "marker"):
        out["size"] = opts.size.value
        out["default_size_px"] = opts.default_size_px
        out["min_size_px"] = opts.min_size_px
        out["max_size_px"] = opts.max_size_px
    if opts.kind == "edge":
        out["width"] = opts.width.value
        out["default_width_px"] = opts.default_width_px
        out["min_width_px"] = opts.min_width_px
        out["max_width_px"] = opts.max_width_px
    if opts.kind == "marker":
        out["icon"] = opts.icon.value
        out["default_icon"] = opts.default_icon
    for name in _COMMON_FIELDS:
        out[name] = getattr(opts, name)
    return out


def options_from_json(kind: str, obj: dict) -> StyleOptions:
    """Parse the flat JSON form, starting from the kind's defaults."""
    if not isinstance(obj, dict):
        raise SchemaViolation(f"{kind}_options", "expected an object")
    opts = default_options(kind)
    known_methods = {c for (k, c) in ALLOWED_METHODS if k == kind}
    for key, value in obj.items():
        if key in _METHOD_CHANNELS:
            if key not in known_methods:
                raise InapplicableChannel(kind, key)
            try:
                setattr(opts, key, Method(value))
            except ValueError:
                raise SchemaViolation(f"{kind}_options.{key}", f"unknown method {value!r}") from None
        elif key == "default_color":
            opts.default_color = _color_or_schema_error(value, f"{kind}_options.{key}")
        elif key == "color_stops":
            if not isinstance(value, list) or len(value) < 2:
                raise SchemaViolation(f"{kind}_options.{key}", "expected >= 2 colors")
            opts.color_stops = tuple(
                _color_or_schema_error(v, f"{kind}_options.{key}[{i}]") for i, v in enumerate(value)
            )
        elif key == "default_icon":
            if kind != "marker":
                raise InapplicableChannel(kind, "icon")
            opts.default_icon = str(value)
        elif key in (
            "default_size_px", "min_size_px", "max_size_px",
            "default_alpha", "min_alpha", "max_alpha",
            "default_width_px", "min_width_px", "max_width_px",
        ):
            if key.endswith(("size_px",)) and kind == "edge":
                raise InapplicableChannel(kind, "size")
            if key.endswith(("width_px",)) and kind != "edge":
                raise InapplicableChannel(kind, "width")
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                raise SchemaViolation(f"{kind}_options.{key}", "expected a number")
            setattr(opts, key, float(value))
        elif key in _COMMON_FIELDS:
            if not isinstance(value, str) or not value:
                raise SchemaViolation(f"{kind}_options.{key}", "expected a field name")
            setattr(opts, key, value)
        else:
            raise SchemaViolation(f"{kind}_options.{key}", "unknown option field")
    opts.__post_init__()
    return opts


def _color_or_schema_error(value, path: str) -> RGBA:
    try:
        return parse_color(value)
    except (ValueError, TypeError):
        raise SchemaViolation(path, f"expected #RRGGBB[AA], got {value!r}") from None
