"""Exception types shared across the engine."""

from __future__ import annotations


class StreetVisError(Exception):
    """Base class for all engine errors."""


# -- network model ------------------------------------------------------------


class DuplicateId(StreetVisError):
    def __init__(self, kind: str, element_id: str):
        super().__init__(f"duplicate {kind} id {element_id!r}")
        self.kind = kind
        self.element_id = element_id


class DanglingEndpoint(StreetVisError):
    def __init__(self, edge_id: str, node_id: str):
        super().__init__(f"edge {edge_id!r} references missing node {node_id!r}")
        self.edge_id = edge_id
        self.node_id = node_id


class DegeneratePolyline(StreetVisError):
    def __init__(self, edge_id: str):
        super().__init__(f"edge {edge_id!r} has fewer than 2 coordinates")
        self.edge_id = edge_id


class OutOfRangeCoordinate(StreetVisError):
    def __init__(self, kind: str, element_id: str, lat: float, lon: float):
        super().__init__(
            f"{kind} {element_id!r} coordinate ({lat}, {lon}) outside WGS84 bounds"
        )
        self.kind = kind
        self.element_id = element_id
        self.lat = lat
        self.lon = lon


class EmptyNetwork(StreetVisError):
    pass


# -- ingest --------------------------------------------------------------------


class MalformedXml(StreetVisError):
    pass


class MissingCoordinateAttribute(StreetVisError):
    def __init__(self, node_id: str):
        super().__init__(f"node {node_id!r} lacks the x/y coordinate attributes")
        self.node_id = node_id


class MalformedWkt(StreetVisError):
    def __init__(self, edge_id: str, text: str):
        super().__init__(f"edge {edge_id!r} has unparseable geometry {text[:60]!r}")
        self.edge_id = edge_id
        self.text = text


class SchemaViolation(StreetVisError):
    def __init__(self, path: str, reason: str):
        super().__init__(f"{path}: {reason}")
        self.path = path
        self.reason = reason


# -- geo -----------------------------------------------------------------------


class MissingPlaceholder(StreetVisError):
    def __init__(self, placeholder: str):
        super().__init__(f"tile URL template lacks {{{placeholder}}}")
        self.placeholder = placeholder


# -- style ---------------------------------------------------------------------


class InapplicableChannel(StreetVisError):
    def __init__(self, kind: str, channel: str):
        super().__init__(f"channel {channel!r} is not applicable to kind {kind!r}")
        self.kind = kind
        self.channel = channel


# -- tessellation / bundle encoding ---------------------------------------------


class UnknownIcon(StreetVisError):
    def __init__(self, icon_id: str):
        super().__init__(f"icon {icon_id!r} is not registered in the icon table")
        self.icon_id = icon_id


class BadMagic(StreetVisError):
    pass


class UnsupportedFormatVersion(StreetVisError):
    def __init__(self, version: int):
        super().__init__(f"unsupported bundle format version {version}")
        self.version = version


class TruncatedSection(StreetVisError):
    def __init__(self, section: str, expected: int, available: int):
        super().__init__(
            f"bundle section {section!r} needs {expected} bytes, {available} available"
        )
        self.section = section
        self.expected = expected
        self.available = available


# -- hit testing ----------------------------------------------------------------


class StaleIndex(StreetVisError):
    def __init__(self, index_version: int, bundle_version: int):
        super().__init__(
            f"hit index version {index_version} does not match bundle version {bundle_version}"
        )
        self.index_version = index_version
        self.bundle_version = bundle_version


# -- server ----------------------------------------------------------------------


class InvalidPatch(StreetVisError):
    def __init__(self, field: str, reason: str):
        super().__init__(f"invalid patch for {field!r}: {reason}")
        self.field = field
        self.reason = reason


class UnknownSession(StreetVisError):
    def __init__(self, session_id: str):
        super().__init__(f"unknown session {session_id!r}")
        self.session_id = session_id


# -- traffic replay ---------------------------------------------------------------


class TimestepOutOfRange(StreetVisError):
    def __init__(self, t: int, count: int):
        super().__init__(f"timestep {t} outside [0, {count})")
        self.t = t
        self.count = count


class NonContiguousTimesteps(StreetVisError):
    def __init__(self, missing: list[int]):
        super().__init__(f"timesteps not contiguous from 0; first gaps: {missing[:5]}")
        self.missing = missing


class ConservationViolation(StreetVisError):
    def __init__(self, timesteps: list[int]):
        super().__init__(
            "edge count sum does not match vehicle records at timesteps "
            f"{timesteps[:5]}{'...' if len(timesteps) > 5 else ''}"
        )
        self.timesteps = timesteps
