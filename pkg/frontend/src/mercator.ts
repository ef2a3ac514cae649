/** Spherical Mercator math, mirroring the server's normalized [0,1] world. */

export const MAX_MERCATOR_LAT = 85.0511287798;
export const TILE_SIZE_PX = 256;

export interface View {
  lat: number;
  lon: number;
  zoom: number;
  widthPx: number;
  heightPx: number;
}

export function project(lat: number, lon: number): [number, number] {
  const clamped = Math.min(Math.max(lat, -MAX_MERCATOR_LAT), MAX_MERCATOR_LAT);
  const x = (lon + 180) / 360;
  const y = (1 - Math.asinh(Math.tan((clamped * Math.PI) / 180)) / Math.PI) / 2;
  return [x, y];
}

export function unproject(x: number, y: number): [number, number] {
  const lat = (Math.atan(Math.sinh(Math.PI * (1 - 2 * y))) * 180) / Math.PI;
  return [lat, x * 360 - 180];
}

export function worldScale(zoom: number): number {
  return TILE_SIZE_PX * 2 ** zoom;
}

export function toScreen(x: number, y: number, view: View): [number, number] {
  const [cx, cy] = project(view.lat, view.lon);
  const ws = worldScale(view.zoom);
  return [(x - cx) * ws + view.widthPx / 2, (y - cy) * ws + view.heightPx / 2];
}

export function fromScreen(sx: number, sy: number, view: View): [number, number] {
  const [cx, cy] = project(view.lat, view.lon);
  const ws = worldScale(view.zoom);
  return [(sx - view.widthPx / 2) / ws + cx, (sy - view.heightPx / 2) / ws + cy];
}

/** Expand a slippy tile URL template; {s} rotates by (x + y) mod n. */
export function tileUrl(
  template: string,
  subdomains: readonly string[],
  x: number,
  y: number,
  z: number,
): string {
  let url = template
    .replace("{x}", String(x))
    .replace("{y}", String(y))
    .replace("{z}", String(z));
  if (url.includes("{s}") && subdomains.length > 0) {
    url = url.replace("{s}", subdomains[(x + y) % subdomains.length]);
  }
  return url;
}
