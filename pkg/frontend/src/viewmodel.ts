/** Client-side state: the latest broadcast plus connection bookkeeping.
 *
 * The model only ever changes in response to server messages; locally issued
 * commands are never echoed into it, so the screen always shows what the
 * bridge confirmed. Between broadcasts the drone is extrapolated along its
 * reported velocity for at most EXTRAPOLATE_MS, after which the picture
 * freezes; past STALE_AFTER_MS the view is flagged stale.
 */

import type { ServerMsg, StateMsg } from "./protocol.js";

export const STALE_AFTER_MS = 1000;
export const EXTRAPOLATE_MS = 200;

export type Connection = "connecting" | "open" | "closed";

export class ViewModel {
  connection: Connection = "connecting";
  role: "controller" | "observer" | null = null;
  lastState: StateMsg | null = null;
  lastStateAtMs = 0;
  lastError: string | null = null;
  lastAckAction: string | null = null;

  ingest(msg: ServerMsg, nowMs: number): void {
    if (msg.type === "state") {
      this.lastState = msg;
      this.lastStateAtMs = nowMs;
      if (msg.role === "controller" || msg.role === "observer") {
        this.role = msg.role;
      }
    } else if (msg.type === "err") {
      this.lastError = msg.error;
    } else {
      this.lastAckAction = msg.action;
    }
  }

  setConnection(state: Connection): void {
    this.connection = state;
    if (state !== "open") this.role = null;
  }

  isController(): boolean {
    return this.connection === "open" && this.role === "controller";
  }

  isStale(nowMs: number): boolean {
    return (
      this.lastState !== null && nowMs - this.lastStateAtMs > STALE_AFTER_MS
    );
  }

  /** State to draw: the last broadcast, drone advanced by its own velocity
   *  for up to EXTRAPOLATE_MS of wall time. */
  displayState(nowMs: number): StateMsg | null {
    const s = this.lastState;
    if (s === null) return null;
    const dtMs = Math.min(nowMs - this.lastStateAtMs, EXTRAPOLATE_MS);
    if (dtMs <= 0) return s;
    const dt = dtMs / 1000;
    return {
      ...s,
      drone: {
        ...s.drone,
        x: s.drone.x + s.drone.vx * dt,
        y: s.drone.y + s.drone.vy * dt,
        z: s.drone.z + s.drone.vz * dt,
      },
    };
  }
}

/** Horizontal drone-palm distance, the planner's controlling quantity. */
export function dPalm(s: StateMsg): number {
  return Math.hypot(s.drone.x - s.user.palm.x, s.drone.y - s.user.palm.y);
}

/** Horizontal drone-chest distance (the domain radius). */
export function rChest(s: StateMsg): number {
  return Math.hypot(s.drone.x - s.user.chest.x, s.drone.y - s.user.chest.y);
}

/** Which chest circle the current motion domain rides on. */
export function domainCircle(
  domain: string | null,
): "r_v" | "r_p" | "r_s" | null {
  switch (domain) {
    case "D1_FAR":
    case "D2_WEBER":
      return "r_v";
    case "D3_ARC":
      return "r_p";
    case "D4_HOLD":
      return "r_s";
    default:
      return null;
  }
}

/** Touchdown banner: committed landing with the drone over the palm. */
export function landingBanner(s: StateMsg): boolean {
  return s.phase === "LANDED" && dPalm(s) < 0.05;
}
