/** Dashboard assembly: map canvases, controls, charts, session wiring. */

import { decodeBundle } from "./bundle.js";
import { SessionClient, createSession, firstSession, type SessionState, type TrafficSummary, type TrafficView } from "./client.js";
import { drawBarChart, drawLineChart } from "./charts.js";
import { GlRenderer } from "./gl.js";
import { clickFrame, layerPatch, scaleByPatch, timeFrame, type MarkersMode, type ServerEvent } from "./protocol.js";
import { TileLayer } from "./tiles.js";
import { ViewState } from "./view.js";

const FPS_WINDOW = 310; // frames per logged FPS average

function el<T extends HTMLElement>(id: string): T {
  const found = document.getElementById(id);
  if (!found) throw new Error(`missing element #${id}`);
  return found as T;
}

class Dashboard {
  private view: ViewState;
  private tiles: TileLayer;
  private gl: GlRenderer;
  private client!: SessionClient;
  private layerBoxes: Record<string, HTMLInputElement>;
  private frameTimes: number[] = [];
  private lastFrame = 0;
  private markersMode: MarkersMode = "busiest_edges";
  private totals: TrafficSummary | null = null;
  private currentT = 0;

  constructor(private baseUrl: string) {
    const tileCanvas = el<HTMLCanvasElement>("tiles");
    const glCanvas = el<HTMLCanvasElement>("gl");
    const wrap = el<HTMLDivElement>("map-wrap");
    const dpr = window.devicePixelRatio || 1;
    const w = wrap.clientWidth;
    const h = wrap.clientHeight;
    for (const canvas of [tileCanvas, glCanvas]) {
      canvas.width = w * dpr;
      canvas.height = h * dpr;
      canvas.style.width = `${w}px`;
      canvas.style.height = `${h}px`;
    }
    const ctx = tileCanvas.getContext("2d")!;
    ctx.scale(dpr, dpr);

    this.view = new ViewState(w, h);
    this.tiles = new TileLayer(ctx, () => {});
    this.gl = new GlRenderer(glCanvas);
    this.layerBoxes = {
      tiles: el<HTMLInputElement>("layer-tiles"),
      edges: el<HTMLInputElement>("layer-edges"),
      arrows: el<HTMLInputElement>("layer-arrows"),
      nodes: el<HTMLInputElement>("layer-nodes"),
      markers: el<HTMLInputElement>("layer-markers"),
    };
    this.bindMapInput(glCanvas);
    this.bindControls();
  }

  async start(): Promise<void> {
    const params = new URLSearchParams(location.search);
    let sessionId = params.get("session") ?? (await firstSession(this.baseUrl));
    if (!sessionId) {
      this.setStatus("no session; choose a network file", true);
      sessionId = await this.sessionFromPicker();
    }
    this.client = new SessionClient(this.baseUrl, sessionId, {
      onState: (state) => this.applyState(state),
      onBundle: (bundle) => this.gl.setBundle(bundle),
      onEvent: (event) => this.onEvent(event),
      onStatus: (text, bad) => this.setStatus(text, bad),
    });
    await this.client.start();
    requestAnimationFrame((t) => this.frame(t));
  }

  private sessionFromPicker(): Promise<string> {
    const picker = el<HTMLInputElement>("network-file");
    picker.hidden = false;
    return new Promise((resolve) => {
      picker.onchange = async () => {
        if (picker.files?.length) {
          picker.disabled = true;
          resolve(await createSession(this.baseUrl, picker.files[0]));
        }
      };
    });
  }

  // -- server -> ui ----------------------------------------------------------

  private applyState(state: SessionState): void {
    this.view.setZoomBounds(state.map_min_zoom, state.map_max_zoom);
    this.view.setCenter(state.map_center[0], state.map_center[1]);
    this.view.setZoom(state.map_zoom);
    this.tiles.config = {
      urlTemplate: state.tile_layer_url,
      subdomains: state.tile_layer_subdomains,
      opacity: state.tile_layer_opacity,
      attribution: state.tile_layer_attribution,
    };
    el("attribution").innerHTML = state.tile_layer_attribution;
    for (const layer of ["edges", "arrows", "nodes", "markers"] as const) {
      this.layerBoxes[layer].checked = Boolean(state[`show_${layer}`]);
    }
    const edgeOptions = state.edge_options as { alpha?: string; width?: string };
    el<HTMLInputElement>("scale-alpha").checked = edgeOptions.alpha === "SCALE";
    el<HTMLInputElement>("scale-width").checked = edgeOptions.width === "SCALE";
    if (state.has_traffic && this.totals === null) {
      void this.loadTraffic();
    }
  }

  private onEvent(event: ServerEvent): void {
    if (event.event === "property_changed") {
      const name = event.payload.property as string;
      const value = event.payload.value;
      // echoed server state wins over whatever the control shows
      if (name.startsWith("show_")) {
        const box = this.layerBoxes[name.slice(5)];
        if (box) box.checked = Boolean(value);
      } else if (name === "edge_options") {
        const options = value as { alpha?: string; width?: string };
        el<HTMLInputElement>("scale-alpha").checked = options.alpha === "SCALE";
        el<HTMLInputElement>("scale-width").checked = options.width === "SCALE";
      } else if (name === "tile_layer_opacity") {
        this.tiles.config.opacity = Number(value);
      }
    } else if (event.event.startsWith("clicked_")) {
      this.showClicked(event.event.slice(8), event.payload);
    } else if (event.event === "error") {
      this.setStatus(`server: ${String(event.payload.detail)}`, true);
    }
  }

  private showClicked(kind: string, payload: Record<string, unknown>): void {
    const lines = [`${kind} ${String(payload.id)}`];
    if (kind === "edge") lines.push(`${String(payload.source)} → ${String(payload.target)}`);
    if (payload.popup_text) lines.push(String(payload.popup_text));
    if (payload.lat !== undefined) lines.push(`(${payload.lat}, ${payload.lon})`);
    lines.push(JSON.stringify(payload.data ?? {}, null, 1));
    el<HTMLPreElement>("clicked-text").textContent = lines.join("\n");
  }

  // -- ui -> server ----------------------------------------------------------

  private bindControls(): void {
    for (const layer of ["edges", "arrows", "nodes", "markers"] as const) {
      this.layerBoxes[layer].onchange = () =>
        this.client.send(layerPatch(layer, this.layerBoxes[layer].checked));
    }
    this.layerBoxes.tiles.onchange = () => {
      this.tiles.visible = this.layerBoxes.tiles.checked; // client-side layer
    };
    const sendScaleBy = () =>
      this.client.send(
        scaleByPatch(
          el<HTMLInputElement>("scale-alpha").checked,
          el<HTMLInputElement>("scale-width").checked,
        ),
      );
    el<HTMLInputElement>("scale-alpha").onchange = sendScaleBy;
    el<HTMLInputElement>("scale-width").onchange = sendScaleBy;

    el<HTMLSelectElement>("markers-at").onchange = () => {
      this.markersMode = el<HTMLSelectElement>("markers-at").value as MarkersMode;
      this.sendTime(this.currentT);
    };
    el<HTMLInputElement>("time-slider").oninput = () => {
      this.sendTime(Number(el<HTMLInputElement>("time-slider").value));
    };
  }

  private bindMapInput(canvas: HTMLCanvasElement): void {
    let dragging = false;
    let moved = 0;
    let last: [number, number] = [0, 0];
    canvas.addEventListener("pointerdown", (e) => {
      dragging = true;
      moved = 0;
      last = [e.offsetX, e.offsetY];
      canvas.setPointerCapture(e.pointerId);
    });
    canvas.addEventListener("pointermove", (e) => {
      if (!dragging) return;
      const dx = e.offsetX - last[0];
      const dy = e.offsetY - last[1];
      moved += Math.abs(dx) + Math.abs(dy);
      last = [e.offsetX, e.offsetY];
      this.view.panByPixels(dx, dy);
    });
    canvas.addEventListener("pointerup", (e) => {
      dragging = false;
      if (moved < 4) {
        this.client.send(clickFrame(e.offsetX, e.offsetY, this.view.view));
      }
    });
    canvas.addEventListener("wheel", (e) => {
      e.preventDefault();
      this.view.zoomAround(e.offsetX, e.offsetY, e.deltaY < 0 ? 0.5 : -0.5);
    });
  }

  // -- traffic timeline -------------------------------------------------------

  private async loadTraffic(): Promise<void> {
    this.totals = (await this.client.getJson(
      `/sessions/${this.client.sessionId}/traffic`,
    )) as TrafficSummary;
    el("traffic-controls").hidden = false;
    const slider = el<HTMLInputElement>("time-slider");
    slider.max = String(this.totals.timesteps - 1);
    this.drawTotals();
    await this.sendTime(0);
  }

  private async sendTime(t: number): Promise<void> {
    this.currentT = t;
    el("time-label").textContent = String(t);
    this.client.send(timeFrame(t, this.markersMode));
    const view = (await this.client.getJson(
      `/sessions/${this.client.sessionId}/traffic/view?t=${t}&mode=${this.markersMode}`,
    )) as TrafficView;
    drawBarChart(
      el<HTMLCanvasElement>("top-edges").getContext("2d")!,
      `top ${view.top_edges.length} busiest edges (t=${t})`,
      view.top_edges.map(([id]) => id),
      view.top_edges.map(([, count]) => count),
    );
    drawBarChart(
      el<HTMLCanvasElement>("top-vehicles").getContext("2d")!,
      `top ${view.top_vehicles.length} slowest vehicles, m/s (t=${t})`,
      view.top_vehicles.map(([id]) => id),
      view.top_vehicles.map(([, speed]) => speed),
      "#d07be0",
    );
    this.drawTotals();
  }

  private drawTotals(): void {
    if (!this.totals) return;
    drawLineChart(
      el<HTMLCanvasElement>("total-vehicles").getContext("2d")!,
      "active vehicles over time",
      this.totals.totals.map(([active]) => active),
      this.currentT,
    );
    drawLineChart(
      el<HTMLCanvasElement>("mean-speed").getContext("2d")!,
      "mean speed over time (m/s)",
      this.totals.totals.map(([, speed]) => speed),
      this.currentT,
      "#e0b45f",
    );
  }

  // -- render loop -------------------------------------------------------------

  private frame(now: number): void {
    if (this.lastFrame > 0) {
      this.frameTimes.push(now - this.lastFrame);
      if (this.frameTimes.length >= FPS_WINDOW) {
        const mean = this.frameTimes.reduce((a, b) => a + b, 0) / this.frameTimes.length;
        const fps = 1000 / mean;
        el("fps").textContent = `${fps.toFixed(1)} fps`;
        console.log(
          `frame timing over ${this.frameTimes.length} frames: ` +
            `${mean.toFixed(2)} ms mean, ${fps.toFixed(1)} fps, ` +
            `${this.gl.uploads} buffer uploads so far`,
        );
        this.frameTimes = [];
      }
    }
    this.lastFrame = now;

    this.tiles.draw(this.view.view);
    this.gl.render(this.view.view, {
      edges: this.layerBoxes.edges.checked,
      arrows: this.layerBoxes.arrows.checked,
      nodes: this.layerBoxes.nodes.checked,
      markers: this.layerBoxes.markers.checked,
    });
    requestAnimationFrame((t) => this.frame(t));
  }

  private setStatus(text: string, bad: boolean): void {
    const status = el("status");
    status.textContent = text;
    status.className = bad ? "bad" : "ok";
  }
}

const base = location.origin.startsWith("http")
  ? location.origin
  : "http://127.0.0.1:8000";
new Dashboard(base).start().catch((err) => {
  document.getElementById("status")!.textContent = String(err);
});

export { decodeBundle };
