import { describe, expect, it } from "vitest";

import { MAX_DELAY_MS, reconnectDelayMs } from "../src/backoff.js";

describe("reconnectDelayMs", () => {
  it("doubles from 500 ms", () => {
    expect(reconnectDelayMs(0)).toBe(500);
    expect(reconnectDelayMs(1)).toBe(1000);
    expect(reconnectDelayMs(2)).toBe(2000);
    expect(reconnectDelayMs(3)).toBe(4000);
  });

  it("caps at the maximum", () => {
    expect(reconnectDelayMs(5)).toBe(MAX_DELAY_MS);
    expect(reconnectDelayMs(50)).toBe(MAX_DELAY_MS);
    expect(reconnectDelayMs(10_000)).toBe(MAX_DELAY_MS);
  });
});
