/** Frame and event types of the session protocol, plus builders. */

import type { View } from "./mercator.js";

export type EventType =
  | "buffers_updated"
  | "property_changed"
  | "clicked_node"
  | "clicked_edge"
  | "clicked_marker"
  | "error";

export interface ServerEvent {
  event: EventType;
  payload: Record<string, unknown>;
}

export type MarkersMode = "busiest_edges" | "slowest_vehicles";

export interface LayerFlags {
  nodes: boolean;
  edges: boolean;
  arrows: boolean;
  markers: boolean;
}

export function clickFrame(x: number, y: number, view: View): object {
  return {
    click: {
      x,
      y,
      viewport: {
        center: [view.lat, view.lon],
        zoom: view.zoom,
        width_px: view.widthPx,
        height_px: view.heightPx,
      },
    },
  };
}

export function layerPatch(layer: keyof LayerFlags, visible: boolean): object {
  return { patch: { [`show_${layer}`]: visible } };
}

/** Full edge-option methods every time: the server rebuilds options from its
 * defaults, so omitted channels would silently reset. */
export function scaleByPatch(scaleAlpha: boolean, scaleWidth: boolean): object {
  return {
    patch: {
      edge_options: {
        alpha: scaleAlpha ? "SCALE" : "DEFAULT",
        width: scaleWidth ? "SCALE" : "DEFAULT",
      },
    },
  };
}

export function timeFrame(t: number, mode: MarkersMode, k = 10): object {
  return { time: t, mode, k };
}

export function isServerEvent(value: unknown): value is ServerEvent {
  return (
    typeof value === "object" &&
    value !== null &&
    typeof (value as { event?: unknown }).event === "string" &&
    typeof (value as { payload?: unknown }).payload === "object"
  );
}
