/** Reconnect backoff: exponential from 500 ms, capped at 10 s. */

export const BASE_DELAY_MS = 500;
export const MAX_DELAY_MS = 10_000;

export function reconnectDelayMs(attempt: number): number {
  const exp = Math.min(attempt, 30); // avoid overflow for pathological counters
  return Math.min(BASE_DELAY_MS * 2 ** exp, MAX_DELAY_MS);
}
