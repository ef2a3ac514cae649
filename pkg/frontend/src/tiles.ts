/** Raster tile layer painted on a 2D canvas beneath the WebGL overlay. */

import { TILE_SIZE_PX, project, tileUrl, worldScale, type View } from "./mercator.js";

export interface TileConfig {
  urlTemplate: string;
  subdomains: string[];
  opacity: number;
  attribution: string;
}

export class TileLayer {
  visible = true;
  config: TileConfig = {
    urlTemplate: "https://{s}.tile.openstreetmap.org/{z}/{x}/{y}.png",
    subdomains: ["a", "b", "c"],
    opacity: 1,
    attribution: "",
  };
  private cache = new Map<string, HTMLImageElement>();

  constructor(
    private ctx: CanvasRenderingContext2D,
    private requestRedraw: () => void,
  ) {}

  draw(view: View): void {
    const { ctx } = this;
    ctx.clearRect(0, 0, ctx.canvas.width, ctx.canvas.height);
    if (!this.visible || this.config.opacity <= 0) return;

    const z = Math.min(Math.max(Math.round(view.zoom), 0), 19);
    const n = 2 ** z;
    // fractional zoom: tiles scale by the ratio of continuous to snapped zoom
    const tileScreenPx = (TILE_SIZE_PX * worldScale(view.zoom)) / worldScale(z);
    const [cx, cy] = project(view.lat, view.lon);
    const originX = view.widthPx / 2 - cx * n * tileScreenPx;
    const originY = view.heightPx / 2 - cy * n * tileScreenPx;

    const x0 = Math.floor(-originX / tileScreenPx);
    const y0 = Math.floor(-originY / tileScreenPx);
    const x1 = Math.ceil((view.widthPx - originX) / tileScreenPx);
    const y1 = Math.ceil((view.heightPx - originY) / tileScreenPx);

    ctx.globalAlpha = this.config.opacity;
    for (let ty = Math.max(0, y0); ty < Math.min(n, y1); ty++) {
      for (let tx = Math.max(0, x0); tx < Math.min(n, x1); tx++) {
        const img = this.tile(tx, ty, z);
        if (img) {
          ctx.drawImage(
            img,
            originX + tx * tileScreenPx,
            originY + ty * tileScreenPx,
            tileScreenPx + 0.5,
            tileScreenPx + 0.5,
          );
        }
      }
    }
    ctx.globalAlpha = 1;
  }

  private tile(x: number, y: number, z: number): HTMLImageElement | null {
    const url = tileUrl(this.config.urlTemplate, this.config.subdomains, x, y, z);
    const cached = this.cache.get(url);
    if (cached) return cached.complete && cached.naturalWidth > 0 ? cached : null;
    const img = new Image();
    img.crossOrigin = "anonymous";
    img.onload = () => this.requestRedraw();
    img.src = url;
    this.cache.set(url, img);
    return null;
  }
}
