"""Session service: a property model over the rendering pipeline.

Clients set properties through patches; the server recomputes the minimal
pipeline suffix (network -> styles -> buffers -> hit index), bumps the bundle
version when any layer regenerates, and emits events. Click resolution is
server-side so the priority and tie rules live in exactly one place.

Property categories:

* settable   - data, options, show/hide, map, and tile-layer properties.
* server-written - clicked_node / clicked_edge / clicked_marker, updated by
  handle_click only; patching them is invalid.
* pass-through - map_style and tile_layer_* go straight to clients.
"""

from __future__ import annotations

import asyncio
import json
import threading
import uuid
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping

from fastapi import (
    FastAPI,
    File,
    Form,
    HTTPException,
    UploadFile,
    WebSocket,
    WebSocketDisconnect,
)
from fastapi.responses import JSONResponse, Response
from starlette.concurrency import run_in_threadpool

from .errors import InvalidPatch, StaleIndex, StreetVisError, UnknownSession
from .geo import Viewport
from .hittest import HitIndex, build_hit_index, query_point
from .ingest import (
    edge_from_dict,
    edge_to_dict,
    load_network_json,
    load_osmnx_graphml,
    marker_from_dict,
    marker_to_dict,
    node_from_dict,
    node_to_dict,
)
from .model import StreetNetwork, build_network
from .style import StyleOptions, default_options, options_from_json, options_to_json, resolve_styles
from .tessellate import (
    ProjectedGeometry,
    RenderBundle,
    build_bundle,
    encode_bundle,
    project_network,
)

DEFAULT_ZOOM = 12.0
DEFAULT_MIN_ZOOM = 3.0
DEFAULT_MAX_ZOOM = 19.0
DEFAULT_TILE_URL = "https://{s}.tile.openstreetmap.org/{z}/{x}/{y}.png"
DEFAULT_TILE_SUBDOMAINS = ("a", "b", "c")
DEFAULT_TILE_ATTRIBUTION = "&copy; OpenStreetMap contributors"

DATA_PROPERTIES = ("nodes_data", "edges_data", "markers_data")
OPTION_PROPERTIES = ("node_options", "edge_options", "marker_options")
SHOW_PROPERTIES = ("show_nodes", "show_edges", "show_arrows", "show_markers")
MAP_PROPERTIES = ("map_center", "map_zoom", "map_min_zoom", "map_max_zoom", "map_style")
TILE_PROPERTIES = (
    "tile_layer_url",
    "tile_layer_subdomains",
    "tile_layer_attribution",
    "tile_layer_opacity",
)
SETTABLE_PROPERTIES = (
    DATA_PROPERTIES + OPTION_PROPERTIES + SHOW_PROPERTIES + MAP_PROPERTIES + TILE_PROPERTIES
)
SERVER_WRITTEN_PROPERTIES = ("clicked_node", "clicked_edge", "clicked_marker")
PASS_THROUGH_PROPERTIES = ("map_style",) + TILE_PROPERTIES
ALL_PROPERTIES = SETTABLE_PROPERTIES + SERVER_WRITTEN_PROPERTIES

LAYERS = ("edges", "arrows", "nodes", "markers")

_AFFECTED_LAYERS = {
    "nodes_data": LAYERS,
    "edges_data": LAYERS,
    "markers_data": LAYERS,
    "node_options": ("nodes",),
    "edge_options": ("edges", "arrows"),
    "marker_options": ("markers",),
    "show_nodes": ("nodes",),
    "show_edges": ("edges", "arrows"),
    "show_arrows": ("arrows",),
    "show_markers": ("markers",),
}


@dataclass(frozen=True)
class Event:
    type: str  # buffers_updated | property_changed | clicked_node | clicked_edge | clicked_marker | error
    payload: Any

    def to_json(self) -> dict:
        return {"event": self.type, "payload": self.payload}


@dataclass
class _Derived:
    network: StreetNetwork
    geometry: ProjectedGeometry
    styles: dict
    bundle: RenderBundle
    encoded: bytes
    hit_index: HitIndex


class Session:
    """One visualization session. Patch application is serialized by a lock;
    reads serve the immutable snapshot current at arrival."""

    def __init__(self, session_id: str, network: StreetNetwork):
        self.id = session_id
        self.lock = threading.Lock()
        self.bundle_version = 0
        self.traffic = None  # optional TrafficSeries for timeline replay
        bbox = network.bbox
        center = ((bbox[0] + bbox[2]) / 2.0, (bbox[1] + bbox[3]) / 2.0) if bbox else (0.0, 0.0)
        self.properties: dict[str, Any] = {
            "node_options": default_options("node"),
            "edge_options": default_options("edge"),
            "marker_options": default_options("marker"),
            "show_nodes": True,
            "show_edges": True,
            "show_arrows": True,
            "show_markers": True,
            "map_center": center,
            "map_zoom": DEFAULT_ZOOM,
            "map_min_zoom": DEFAULT_MIN_ZOOM,
            "map_max_zoom": DEFAULT_MAX_ZOOM,
            "map_style": {},
            "tile_layer_url": DEFAULT_TILE_URL,
            "tile_layer_subdomains": list(DEFAULT_TILE_SUBDOMAINS),
            "tile_layer_attribution": DEFAULT_TILE_ATTRIBUTION,
            "tile_layer_opacity": 1.0,
            "clicked_node": None,
            "clicked_edge": None,
            "clicked_marker": None,
        }
        self.derived = self._build_derived(network)
        self.subscribers: set[asyncio.Queue] = set()

    # -- derived state -------------------------------------------------------

    def _build_derived(self, network: StreetNetwork, bump: bool = True) -> _Derived:
        if bump:
            self.bundle_version += 1
        geometry = project_network(network)
        styles = resolve_styles(
            network,
            {
                "node": self.properties["node_options"],
                "edge": self.properties["edge_options"],
                "marker": self.properties["marker_options"],
            },
        )
        return self._rebuild_buffers(network, geometry, styles, bumped=True)

    def _rebuild_buffers(self, network, geometry, styles, bumped: bool = False) -> _Derived:
        if not bumped:
            self.bundle_version += 1
        bundle = build_bundle(
            network,
            styles,
            reference_zoom=self.properties["map_zoom"],
            version=self.bundle_version,
            show_nodes=self.properties["show_nodes"],
            show_edges=self.properties["show_edges"],
            show_arrows=self.properties["show_arrows"],
            show_markers=self.properties["show_markers"],
            geometry=geometry,
        )
        hit_index = build_hit_index(
            network,
            styles,
            version=self.bundle_version,
            min_zoom=self.properties["map_min_zoom"],
            show_nodes=self.properties["show_nodes"],
            show_edges=self.properties["show_edges"],
            show_markers=self.properties["show_markers"],
            geometry=geometry,
        )
        return _Derived(
            network=network,
            geometry=geometry,
            styles=styles,
            bundle=bundle,
            encoded=encode_bundle(bundle),
            hit_index=hit_index,
        )

    # -- state snapshot -------------------------------------------------------

    def state_json(self) -> dict:
        p = self.properties
        net = self.derived.network
        return {
            "nodes_data": [node_to_dict(n) for n in net.nodes],
            "edges_data": [edge_to_dict(e) for e in net.edges],
            "markers_data": [marker_to_dict(m) for m in net.markers],
            "node_options": options_to_json(p["node_options"]),
            "edge_options": options_to_json(p["edge_options"]),
            "marker_options": options_to_json(p["marker_options"]),
            "show_nodes": p["show_nodes"],
            "show_edges": p["show_edges"],
            "show_arrows": p["show_arrows"],
            "show_markers": p["show_markers"],
            "map_center": list(p["map_center"]),
            "map_zoom": p["map_zoom"],
            "map_min_zoom": p["map_min_zoom"],
            "map_max_zoom": p["map_max_zoom"],
            "map_style": dict(p["map_style"]),
            "tile_layer_url": p["tile_layer_url"],
            "tile_layer_subdomains": list(p["tile_layer_subdomains"]),
            "tile_layer_attribution": p["tile_layer_attribution"],
            "tile_layer_opacity": p["tile_layer_opacity"],
            "clicked_node": p["clicked_node"],
            "clicked_edge": p["clicked_edge"],
            "clicked_marker": p["clicked_marker"],
            "bundle_version": self.bundle_version,
            "network_warnings": list(net.warnings),
            "has_traffic": self.traffic is not None,
        }


def _expect_bool(field_name: str, value) -> bool:
    if not isinstance(value, bool):
        raise InvalidPatch(field_name, f"expected a boolean, got {type(value).__name__}")
    return value


def _expect_number(field_name: str, value) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise InvalidPatch(field_name, f"expected a number, got {type(value).__name__}")
    return float(value)


def _validate_value(field_name: str, value) -> Any:
    """Normalize one patch entry; raises InvalidPatch on any problem."""
    if field_name in SERVER_WRITTEN_PROPERTIES:
        raise InvalidPatch(field_name, "server-owned property, set by clicks only")
    if field_name not in SETTABLE_PROPERTIES:
        raise InvalidPatch(field_name, "unknown property")
    try:
        if field_name == "nodes_data":
            return [node_from_dict(o, f"nodes_data[{i}]") for i, o in enumerate(_expect_list(field_name, value))]
        if field_name == "edges_data":
            return [edge_from_dict(o, f"edges_data[{i}]") for i, o in enumerate(_expect_list(field_name, value))]
        if field_name == "markers_data":
            return [marker_from_dict(o, f"markers_data[{i}]") for i, o in enumerate(_expect_list(field_name, value))]
        if field_name in OPTION_PROPERTIES:
            return options_from_json(field_name.split("_")[0], value)
    except StreetVisError as exc:
        raise InvalidPatch(field_name, str(exc)) from exc
    if field_name in SHOW_PROPERTIES:
        return _expect_bool(field_name, value)
    if field_name == "map_center":
        if (
            not isinstance(value, (list, tuple))
            or len(value) != 2
            or any(isinstance(c, bool) or not isinstance(c, (int, float)) for c in value)
        ):
            raise InvalidPatch(field_name, "expected [lat, lon]")
        lat, lon = float(value[0]), float(value[1])
        if not (-90.0 <= lat <= 90.0 and -180.0 <= lon <= 180.0):
            raise InvalidPatch(field_name, f"({lat}, {lon}) outside WGS84 bounds")
        return (lat, lon)
    if field_name in ("map_zoom", "map_min_zoom", "map_max_zoom"):
        return _expect_number(field_name, value)
    if field_name == "map_style":
        if not isinstance(value, dict) or any(
            not isinstance(k, str) or not isinstance(v, str) for k, v in value.items()
        ):
            raise InvalidPatch(field_name, "expected {style: value} strings")
        return dict(value)
    if field_name == "tile_layer_url":
        if not isinstance(value, str):
            raise InvalidPatch(field_name, "expected a string")
        return value
    if field_name == "tile_layer_subdomains":
        if not isinstance(value, list) or any(not isinstance(s, str) for s in value):
            raise InvalidPatch(field_name, "expected a list of strings")
        return list(value)
    if field_name == "tile_layer_attribution":
        if not isinstance(value, str):
            raise InvalidPatch(field_name, "expected a string")
        return value
    if field_name == "tile_layer_opacity":
        opacity = _expect_number(field_name, value)
        if not (0.0 <= opacity <= 1.0):
            raise InvalidPatch(field_name, "opacity must lie in [0, 1]")
        return opacity
    raise InvalidPatch(field_name, "unhandled property")


def _expect_list(field_name: str, value) -> list:
    if not isinstance(value, list):
        raise InvalidPatch(field_name, f"expected an array, got {type(value).__name__}")
    return value


def _echo_value(field_name: str, value) -> Any:
    if field_name == "nodes_data":
        return [node_to_dict(n) for n in value]
    if field_name == "edges_data":
        return [edge_to_dict(e) for e in value]
    if field_name == "markers_data":
        return [marker_to_dict(m) for m in value]
    if field_name in OPTION_PROPERTIES:
        return options_to_json(value)
    if field_name == "map_center":
        return list(value)
    return value


def apply_patch(session: Session, patch: Mapping[str, Any]) -> list[Event]:
    """Apply a property patch atomically and return the resulting events.

    Recomputation follows the dependency map: data properties rebuild the
    network and everything after it; option and show properties rebuild the
    styles/buffers of the kinds they touch; map and tile properties change no
    buffers at all. property_changed events precede the buffers_updated they
    caused; on InvalidPatch the session is untouched.
    """
    if not isinstance(patch, Mapping):
        raise InvalidPatch("patch", "expected an object")
    with session.lock:
        normalized = {k: _validate_value(k, v) for k, v in patch.items()}

        props = dict(session.properties)
        props.update(normalized)
        if not (props["map_min_zoom"] <= props["map_zoom"] <= props["map_max_zoom"]):
            offender = next(
                (f for f in ("map_zoom", "map_min_zoom", "map_max_zoom") if f in normalized),
                "map_zoom",
            )
            raise InvalidPatch(
                offender,
                f"zoom {props['map_zoom']} outside [{props['map_min_zoom']}, {props['map_max_zoom']}]",
            )

        data_changed = any(k in normalized for k in DATA_PROPERTIES)
        layers: list[str] = []
        for k in normalized:
            for layer in _AFFECTED_LAYERS.get(k, ()):
                if layer not in layers:
                    layers.append(layer)

        old_properties = session.properties
        old_derived = session.derived
        old_version = session.bundle_version
        session.properties = props
        try:
            if data_changed:
                net = old_derived.network
                nodes = normalized.get("nodes_data", list(net.nodes))
                edges = normalized.get("edges_data", list(net.edges))
                markers = normalized.get("markers_data", list(net.markers))
                try:
                    network = build_network(nodes, edges, markers)
                except StreetVisError as exc:
                    offender = next(k for k in DATA_PROPERTIES if k in normalized)
                    raise InvalidPatch(offender, str(exc)) from exc
                session.derived = session._build_derived(network)
            elif layers:
                styles = dict(old_derived.styles)
                for kind in ("node", "edge", "marker"):
                    if f"{kind}_options" in normalized:
                        styles = resolve_styles(
                            old_derived.network,
                            {
                                "node": props["node_options"],
                                "edge": props["edge_options"],
                                "marker": props["marker_options"],
                            },
                        )
                        break
                session.derived = session._rebuild_buffers(
                    old_derived.network, old_derived.geometry, styles
                )
        except InvalidPatch:
            session.properties = old_properties
            session.derived = old_derived
            session.bundle_version = old_version
            raise

        events = [
            Event("property_changed", {"property": k, "value": _echo_value(k, normalized[k])})
            for k in patch
        ]
        if layers:
            ordered = [layer for layer in LAYERS if layer in layers]
            events.append(
                Event("buffers_updated", {"layers": ordered, "version": session.bundle_version})
            )
        return events


def handle_click(
    session: Session, screen_point: tuple[float, float], viewport: Viewport
) -> list[Event]:
    """Resolve a click; on a hit write clicked_<kind> and emit its event."""
    with session.lock:
        derived = session.derived
        try:
            hit = query_point(
                derived.hit_index, screen_point, viewport, bundle_version=session.bundle_version
            )
        except StaleIndex as exc:
            return [
                Event(
                    "error",
                    {"error": "stale_index", "detail": str(exc), "retryable": True},
                )
            ]
        if hit.kind == "none":
            return []
        payload = {
            "kind": hit.kind,
            "id": hit.element_id,
            "index": hit.element_index,
            "distance_px": hit.distance_px,
            "data": dict(hit.data),
        }
        net = derived.network
        if hit.kind == "node":
            record = net.nodes[hit.element_index]
            payload["lat"], payload["lon"] = record.lat, record.lon
        elif hit.kind == "marker":
            record = net.markers[hit.element_index]
            payload["lat"], payload["lon"] = record.lat, record.lon
            payload["popup_text"] = record.popup_text
            payload["icon_id"] = record.icon_id
        else:
            record = net.edges[hit.element_index]
            payload["source"] = record.source
            payload["target"] = record.target
            payload["coordinates"] = [[lat, lon] for lat, lon in record.coordinates]
        session.properties[f"clicked_{hit.kind}"] = payload
        return [Event(f"clicked_{hit.kind}", payload)]


def get_bundle(session: Session, since_version: int) -> bytes | None:
    """Encoded bundle when newer than since_version, else None (not modified)."""
    if session.bundle_version > since_version:
        return session.derived.encoded
    return None


class SessionManager:
    def __init__(self):
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()

    def create_session(
        self, network_source: bytes, initial_patch: Mapping[str, Any] | None = None
    ) -> str:
        """Parse a GraphML or interchange JSON source, build the session with
        documented defaults, then apply the initial patch."""
        stripped = network_source.lstrip()
        if stripped.startswith(b"<"):
            nodes, edges, _report = load_osmnx_graphml(network_source)
            markers = []
        else:
            nodes, edges, markers = load_network_json(network_source)
        network = build_network(nodes, edges, markers)
        session = Session(uuid.uuid4().hex, network)
        if initial_patch:
            apply_patch(session, initial_patch)
        with self._lock:
            self._sessions[session.id] = session
        return session.id

    def get(self, session_id: str) -> Session:
        try:
            return self._sessions[session_id]
        except KeyError:
            raise UnknownSession(session_id) from None

    def ids(self) -> list[str]:
        return list(self._sessions)


# -- HTTP / WebSocket front -----------------------------------------------------


def create_app(manager: SessionManager | None = None, fixtures_dir: str | None = None,
               ui_dir: str | None = None) -> FastAPI:
    manager = manager or SessionManager()
    app = FastAPI(title="streetvis")
    app.state.manager = manager

    @app.get("/healthz")
    def healthz():
        return {"status": "ok"}

    @app.get("/sessions")
    def list_sessions():
        return {"sessions": manager.ids()}

    @app.post("/sessions")
    async def create_session(
        network: UploadFile | None = File(default=None),
        patch: str = Form(default=""),
        fixture: str = Form(default=""),
    ):
        if network is not None:
            source = await network.read()
        elif fixture and fixtures_dir:
            path = Path(fixtures_dir) / fixture
            if not path.is_file() or path.parent.resolve() != Path(fixtures_dir).resolve():
                raise HTTPException(404, f"fixture {fixture!r} not found")
            source = path.read_bytes()
        else:
            raise HTTPException(400, "provide a network file or a fixture name")
        try:
            initial_patch = json.loads(patch) if patch else None
        except json.JSONDecodeError as exc:
            raise HTTPException(400, f"patch is not valid JSON: {exc}")
        try:
            session_id = await run_in_threadpool(manager.create_session, source, initial_patch)
        except StreetVisError as exc:
            raise HTTPException(400, str(exc))
        return {"session_id": session_id}

    def _session_or_404(session_id: str) -> Session:
        try:
            return manager.get(session_id)
        except UnknownSession as exc:
            raise HTTPException(404, str(exc))

    @app.get("/sessions/{session_id}/state")
    def state(session_id: str):
        return JSONResponse(_session_or_404(session_id).state_json())

    @app.get("/sessions/{session_id}/bundle")
    def bundle(session_id: str, since: int = 0):
        payload = get_bundle(_session_or_404(session_id), since)
        if payload is None:
            return Response(status_code=304)
        return Response(content=payload, media_type="application/octet-stream")

    @app.get("/sessions/{session_id}/traffic")
    def traffic_summary(session_id: str):
        session = _session_or_404(session_id)
        if session.traffic is None:
            raise HTTPException(404, "session has no traffic series")
        series = session.traffic
        return {
            "timesteps": series.timestep_count,
            "totals": [[active, mean] for active, mean in series.totals],
        }

    @app.get("/sessions/{session_id}/traffic/view")
    def traffic_view(session_id: str, t: int, mode: str = "busiest_edges", k: int = 10):
        from .traffic import top_k_edges, top_k_slowest

        session = _session_or_404(session_id)
        if session.traffic is None:
            raise HTTPException(404, "session has no traffic series")
        series = session.traffic
        try:
            series.check_timestep(t)
        except StreetVisError as exc:
            raise HTTPException(400, str(exc))
        active, mean_speed = series.totals[t]
        return {
            "t": t,
            "mode": mode,
            "top_edges": top_k_edges(series, t, k),
            "top_vehicles": top_k_slowest(series, t, k),
            "totals": {"active_vehicles": active, "mean_speed": mean_speed},
        }

    def _broadcast(session: Session, events: list[Event]) -> None:
        for event in events:
            message = event.to_json()
            for queue in list(session.subscribers):
                queue.put_nowait(message)

    def _dispatch_frame(session: Session, frame: dict) -> list[Event]:
        if "patch" in frame:
            return apply_patch(session, frame["patch"])
        if "click" in frame:
            click = frame["click"]
            vp = click.get("viewport") or {}
            viewport = Viewport(
                center=tuple(vp.get("center", (0.0, 0.0))),
                zoom=float(vp.get("zoom", session.properties["map_zoom"])),
                width_px=float(vp.get("width_px", 0.0)),
                height_px=float(vp.get("height_px", 0.0)),
            )
            return handle_click(session, (float(click["x"]), float(click["y"])), viewport)
        if "time" in frame:
            if session.traffic is None:
                raise InvalidPatch("time", "session has no traffic series")
            from .traffic import timestep_patch

            patch = timestep_patch(
                session.traffic,
                session.derived.network,
                int(frame["time"]),
                mode=frame.get("mode", "busiest_edges"),
                k=int(frame.get("k", 10)),
            )
            return apply_patch(session, patch)
        raise InvalidPatch("frame", "expected a patch, click, or time frame")

    @app.websocket("/sessions/{session_id}/events")
    async def events(websocket: WebSocket, session_id: str):
        await websocket.accept()
        try:
            session = manager.get(session_id)
        except UnknownSession:
            await websocket.close(code=1008)
            return
        queue: asyncio.Queue = asyncio.Queue()
        session.subscribers.add(queue)

        async def pump():
            while True:
                await websocket.send_json(await queue.get())

        pump_task = asyncio.create_task(pump())
        try:
            while True:
                frame = await websocket.receive_json()
                try:
                    emitted = await run_in_threadpool(_dispatch_frame, session, frame)
                except StreetVisError as exc:
                    queue.put_nowait(
                        Event(
                            "error",
                            {"error": type(exc).__name__, "detail": str(exc), "retryable": False},
                        ).to_json()
                    )
                    continue
                _broadcast(session, emitted)
        except WebSocketDisconnect:
            pass
        finally:
            session.subscribers.discard(queue)
            pump_task.cancel()

    if ui_dir and Path(ui_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
