/** Session client: state fetch, bundle fetch-on-version, event stream with
 * reconnect. State changes flow server -> client; the UI sends frames and
 * trusts the echoed property_changed events over its own optimistic state. */

import { reconnectDelayMs } from "./backoff.js";
import { decodeBundle, type RenderBundle } from "./bundle.js";
import { isServerEvent, type ServerEvent } from "./protocol.js";

export interface SessionState {
  show_nodes: boolean;
  show_edges: boolean;
  show_arrows: boolean;
  show_markers: boolean;
  map_center: [number, number];
  map_zoom: number;
  map_min_zoom: number;
  map_max_zoom: number;
  tile_layer_url: string;
  tile_layer_subdomains: string[];
  tile_layer_attribution: string;
  tile_layer_opacity: number;
  edge_options: Record<string, unknown>;
  bundle_version: number;
  has_traffic: boolean;
  [key: string]: unknown;
}

export interface TrafficSummary {
  timesteps: number;
  totals: [number, number][];
}

export interface TrafficView {
  t: number;
  mode: string;
  top_edges: [string, number][];
  top_vehicles: [string, number, number, number][];
  totals: { active_vehicles: number; mean_speed: number };
}

export interface ClientHandlers {
  onState: (state: SessionState) => void;
  onBundle: (bundle: RenderBundle) => void;
  onEvent: (event: ServerEvent) => void;
  onStatus: (text: string, bad: boolean) => void;
}

export class SessionClient {
  private ws: WebSocket | null = null;
  private attempts = 0;
  private closed = false;
  bundleVersion = 0;

  constructor(
    readonly baseUrl: string,
    readonly sessionId: string,
    private handlers: ClientHandlers,
  ) {}

  async start(): Promise<void> {
    await this.sync();
    this.connect();
  }

  stop(): void {
    this.closed = true;
    this.ws?.close();
  }

  /** Full re-sync: state plus any bundle newer than what we hold. */
  async sync(): Promise<void> {
    const state = (await this.getJson(`/sessions/${this.sessionId}/state`)) as SessionState;
    this.handlers.onState(state);
    await this.fetchBundle();
  }

  async fetchBundle(): Promise<void> {
    const resp = await fetch(
      `${this.baseUrl}/sessions/${this.sessionId}/bundle?since=${this.bundleVersion}`,
    );
    if (resp.status === 304) return;
    if (!resp.ok) throw new Error(`bundle fetch failed: ${resp.status}`);
    const bundle = decodeBundle(await resp.arrayBuffer());
    this.bundleVersion = bundle.version;
    this.handlers.onBundle(bundle);
  }

  async getJson(path: string): Promise<unknown> {
    const resp = await fetch(this.baseUrl + path);
    if (!resp.ok) throw new Error(`${path}: ${resp.status}`);
    return resp.json();
  }

  send(frame: object): void {
    if (this.ws && this.ws.readyState === WebSocket.OPEN) {
      this.ws.send(JSON.stringify(frame));
    }
  }

  private connect(): void {
    if (this.closed) return;
    const wsUrl = this.baseUrl.replace(/^http/, "ws") + `/sessions/${this.sessionId}/events`;
    const ws = new WebSocket(wsUrl);
    this.ws = ws;
    ws.onopen = () => {
      this.attempts = 0;
      this.handlers.onStatus("connected", false);
      // state may have moved while we were away
      this.sync().catch((err) => this.handlers.onStatus(String(err), true));
    };
    ws.onmessage = (msg) => {
      let parsed: unknown;
      try {
        parsed = JSON.parse(msg.data as string);
      } catch {
        return;
      }
      if (!isServerEvent(parsed)) return;
      if (parsed.event === "buffers_updated") {
        this.fetchBundle().catch((err) => this.handlers.onStatus(String(err), true));
      }
      this.handlers.onEvent(parsed);
    };
    ws.onclose = () => {
      if (this.closed) return;
      const delay = reconnectDelayMs(this.attempts++);
      this.handlers.onStatus(`disconnected, retrying in ${Math.round(delay / 1000)}s`, true);
      setTimeout(() => this.connect(), delay);
    };
    ws.onerror = () => ws.close();
  }
}

export async function createSession(baseUrl: string, networkFile: File): Promise<string> {
  const form = new FormData();
  form.append("network", networkFile);
  const resp = await fetch(`${baseUrl}/sessions`, { method: "POST", body: form });
  if (!resp.ok) throw new Error(`session creation failed: ${resp.status}`);
  const body = (await resp.json()) as { session_id: string };
  return body.session_id;
}

export async function firstSession(baseUrl: string): Promise<string | null> {
  const resp = await fetch(`${baseUrl}/sessions`);
  if (!resp.ok) return null;
  const body = (await resp.json()) as { sessions: string[] };
  return body.sessions.length ? body.sessions[0] : null;
}
