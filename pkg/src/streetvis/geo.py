"""Web Mercator projection, zoom scaling, screen transforms, and tile URLs.

World coordinates are spherical Mercator normalized to [0, 1] x [0, 1]:
x = (lon + 180) / 360 and y = (1 - asinh(tan(lat)) / pi) / 2, with latitude
clamped to the slippy-map limit of +/-85.0511287798 degrees. y grows
southward, matching tile row numbering.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .errors import MissingPlaceholder

MAX_MERCATOR_LAT = 85.0511287798
TILE_SIZE_PX = 256.0


class MercatorPoint(NamedTuple):
    x: float
    y: float


@dataclass(frozen=True)
class Viewport:
    """Screen window onto the map: center in degrees, slippy zoom, size in px."""

    center: tuple[float, float]
    zoom: float
    width_px: float
    height_px: float


def project(lat: float, lon: float) -> MercatorPoint:
    """Project (lat, lon) degrees to normalized world coordinates."""
    lat = min(max(lat, -MAX_MERCATOR_LAT), MAX_MERCATOR_LAT)
    x = (lon + 180.0) / 360.0
    y = (1.0 - math.asinh(math.tan(math.radians(lat))) / math.pi) / 2.0
    return MercatorPoint(x, y)


def unproject(p: MercatorPoint | tuple[float, float]) -> tuple[float, float]:
    """Inverse of project, returning (lat, lon) degrees."""
    x, y = p
    lat = math.degrees(math.atan(math.sinh(math.pi * (1.0 - 2.0 * y))))
    lon = x * 360.0 - 180.0
    return lat, lon


def project_many(lats: np.ndarray, lons: np.ndarray) -> np.ndarray:
    """Vectorized project: returns an (n, 2) float64 array of world coordinates."""
    lats = np.clip(np.asarray(lats, dtype=np.float64), -MAX_MERCATOR_LAT, MAX_MERCATOR_LAT)
    lons = np.asarray(lons, dtype=np.float64)
    out = np.empty((lats.shape[0], 2), dtype=np.float64)
    out[:, 0] = (lons + 180.0) / 360.0
    out[:, 1] = (1.0 - np.arcsinh(np.tan(np.radians(lats))) / np.pi) / 2.0
    return out


def world_scale(zoom: float) -> float:
    """World width in pixels at a zoom level: 256 * 2**zoom."""
    return TILE_SIZE_PX * 2.0**zoom


def to_screen(p: MercatorPoint | tuple[float, float], v: Viewport) -> tuple[float, float]:
    """Map a world point to viewport pixel coordinates (origin top-left)."""
    cx, cy = project(*v.center)
    ws = world_scale(v.zoom)
    return (
        (p[0] - cx) * ws + v.width_px / 2.0,
        (p[1] - cy) * ws + v.height_px / 2.0,
    )


def from_screen(screen: tuple[float, float], v: Viewport) -> MercatorPoint:
    """Inverse of to_screen: pixel coordinates back to world coordinates."""
    cx, cy = project(*v.center)
    ws = world_scale(v.zoom)
    return MercatorPoint(
        (screen[0] - v.width_px / 2.0) / ws + cx,
        (screen[1] - v.height_px / 2.0) / ws + cy,
    )


def tile_url(template: str, subdomains: Sequence[str], x: int, y: int, z: int) -> str:
    """Expand a slippy tile URL template.

    {s} picks subdomains[(x + y) mod len(subdomains)] so that repeated calls
    hit the same mirror for the same tile.
    """
    for placeholder in ("x", "y", "z"):
        if "{%s}" % placeholder not in template:
            raise MissingPlaceholder(placeholder)
    url = template.replace("{x}", str(x)).replace("{y}", str(y)).replace("{z}", str(z))
    if "{s}" in url:
        if not subdomains:
            raise ValueError("template uses {s} but no subdomains were given")
        url = url.replace("{s}", str(subdomains[(x + y) % len(subdomains)]))
    return url
