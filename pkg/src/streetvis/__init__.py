"""streetvis: interactive visualization engine for large street networks."""

from .model import (
    EdgeRecord,
    MarkerRecord,
    NodeRecord,
    StreetNetwork,
    build_network,
    element_weight,
    network_bbox,
)
from .geo import MercatorPoint, Viewport, project, tile_url, to_screen, unproject, world_scale
from .style import (
    ColorScale,
    Method,
    ResolvedStyle,
    StyleOptions,
    default_options,
    eval_color_scale,
    normalize_weights,
    resolve_styles,
)
from .tessellate import (
    EdgeMesh,
    RenderBundle,
    SpriteInstances,
    build_bundle,
    build_sprites,
    decode_bundle,
    encode_bundle,
    place_arrows,
    tessellate_edges,
)
from .hittest import Hit, HitIndex, build_hit_index, query_point
from .server import Event, Session, SessionManager, apply_patch, create_app, get_bundle, handle_click
from .bench import BenchReport, run_pan_benchmark, synthesize_grid, write_report_csv
from .traffic import TrafficSeries, load_fcd_csv, markers_for, timestep_patch, top_k_edges, top_k_slowest
from .ingest import IngestReport, emit_network_json, load_network_json, load_osmnx_graphml

__version__ = "0.1.0"

__all__ = [
    "BenchReport",
    "ColorScale",
    "EdgeMesh",
    "EdgeRecord",
    "Event",
    "Hit",
    "HitIndex",
    "IngestReport",
    "MarkerRecord",
    "MercatorPoint",
    "Method",
    "NodeRecord",
    "RenderBundle",
    "ResolvedStyle",
    "Session",
    "SessionManager",
    "SpriteInstances",
    "StreetNetwork",
    "StyleOptions",
    "TrafficSeries",
    "Viewport",
    "apply_patch",
    "build_bundle",
    "build_hit_index",
    "build_network",
    "build_sprites",
    "create_app",
    "decode_bundle",
    "default_options",
    "element_weight",
    "emit_network_json",
    "encode_bundle",
    "eval_color_scale",
    "get_bundle",
    "handle_click",
    "load_fcd_csv",
    "load_network_json",
    "load_osmnx_graphml",
    "markers_for",
    "network_bbox",
    "normalize_weights",
    "place_arrows",
    "project",
    "query_point",
    "resolve_styles",
    "run_pan_benchmark",
    "synthesize_grid",
    "tessellate_edges",
    "tile_url",
    "timestep_patch",
    "to_screen",
    "top_k_edges",
    "top_k_slowest",
    "unproject",
    "world_scale",
    "write_report_csv",
]
