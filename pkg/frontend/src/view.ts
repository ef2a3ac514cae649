/** Pannable, zoomable view state with session-bound clamping. */

import {
  MAX_MERCATOR_LAT,
  fromScreen,
  project,
  unproject,
  worldScale,
  type View,
} from "./mercator.js";

export class ViewState {
  lat = 0;
  lon = 0;
  zoom = 12;
  minZoom = 3;
  maxZoom = 19;
  widthPx: number;
  heightPx: number;

  constructor(widthPx: number, heightPx: number) {
    this.widthPx = widthPx;
    this.heightPx = heightPx;
  }

  get view(): View {
    return {
      lat: this.lat,
      lon: this.lon,
      zoom: this.zoom,
      widthPx: this.widthPx,
      heightPx: this.heightPx,
    };
  }

  setCenter(lat: number, lon: number): void {
    this.lat = Math.min(Math.max(lat, -MAX_MERCATOR_LAT), MAX_MERCATOR_LAT);
    this.lon = Math.min(Math.max(lon, -180), 180);
  }

  setZoomBounds(minZoom: number, maxZoom: number): void {
    this.minZoom = minZoom;
    this.maxZoom = maxZoom;
    this.zoom = Math.min(Math.max(this.zoom, minZoom), maxZoom);
  }

  setZoom(zoom: number): void {
    this.zoom = Math.min(Math.max(zoom, this.minZoom), this.maxZoom);
  }

  /** Shift the center so content follows a drag of (dxPx, dyPx). */
  panByPixels(dxPx: number, dyPx: number): void {
    const ws = worldScale(this.zoom);
    const [cx, cy] = project(this.lat, this.lon);
    const [lat, lon] = unproject(cx - dxPx / ws, cy - dyPx / ws);
    this.setCenter(lat, lon);
  }

  /** Zoom by dz keeping the geographic point under (sx, sy) fixed. */
  zoomAround(sx: number, sy: number, dz: number): void {
    const before = fromScreen(sx, sy, this.view);
    this.setZoom(this.zoom + dz);
    const after = fromScreen(sx, sy, this.view);
    const [cx, cy] = project(this.lat, this.lon);
    const [lat, lon] = unproject(cx + (before[0] - after[0]), cy + (before[1] - after[1]));
    this.setCenter(lat, lon);
  }
}
