/** Keyboard to command stream.
 *
 * WASD / arrows walk the user (forward is +x), space toggles the arm
 * stretch, T takes off, R resets. Output is rate limited to 20 messages per
 * second: velocity updates coalesce to the newest value, discrete commands
 * queue in order. Nothing is sent while the connection lacks control; those
 * attempts only bump `warnings`.
 */

import {
  CommandMsg,
  cmdReset,
  cmdSetArm,
  cmdSetUserVelocity,
  cmdTakeoff,
} from "./protocol.js";

export const WALK_SPEED = 0.5; // m/s per held direction key
export const MIN_SEND_INTERVAL_MS = 50; // 20 msg/s

const FORWARD = new Set(["w", "arrowup"]);
const BACK = new Set(["s", "arrowdown"]);
const LEFT = new Set(["a", "arrowleft"]);
const RIGHT = new Set(["d", "arrowright"]);

export const ARM_SYNC_SETTLE_MS = 500; // tick + broadcast round trip

export class InputController {
  warnings = 0;
  private held = new Set<string>();
  private stretched = false;
  private lastToggleAtMs = -Infinity;
  private nextId = 1;
  private lastSentAtMs = -Infinity;
  private queue: CommandMsg[] = [];

  constructor(
    private canSend: () => boolean,
    private send: (cmd: CommandMsg) => void,
    private now: () => number,
  ) {}

  velocityFromKeys(): { vx: number; vy: number } {
    let vx = 0;
    let vy = 0;
    for (const key of this.held) {
      if (FORWARD.has(key)) vx += WALK_SPEED;
      else if (BACK.has(key)) vx -= WALK_SPEED;
      else if (LEFT.has(key)) vy += WALK_SPEED;
      else if (RIGHT.has(key)) vy -= WALK_SPEED;
    }
    return { vx, vy };
  }

  keyDown(key: string, repeat = false): void {
    key = key.toLowerCase();
    if (key === " " || key === "t" || key === "r") {
      if (repeat) return; // OS key repeat must not retrigger toggles
      if (key === " ") {
        if (this.enqueue(cmdSetArm(this.nextId++, !this.stretched))) {
          this.stretched = !this.stretched;
          this.lastToggleAtMs = this.now();
        }
      } else if (key === "t") {
        this.enqueue(cmdTakeoff(this.nextId++));
      } else {
        this.enqueue(cmdReset(this.nextId++));
      }
      return;
    }
    if (this.isMoveKey(key)) {
      this.held.add(key);
      this.enqueueVelocity();
    }
  }

  keyUp(key: string): void {
    key = key.toLowerCase();
    if (this.isMoveKey(key) && this.held.delete(key)) {
      this.enqueueVelocity();
    }
  }

  /** Adopt the server's arm state so the next toggle inverts reality.
   *  Ignored right after a local toggle, which the server has not had a
   *  planner tick to reflect yet. */
  syncStretched(stretched: boolean): void {
    if (this.now() - this.lastToggleAtMs >= ARM_SYNC_SETTLE_MS) {
      this.stretched = stretched;
    }
  }

  /** Releases queued commands as the rate limit allows; call every frame. */
  flush(): void {
    while (this.queue.length > 0) {
      const t = this.now();
      if (t - this.lastSentAtMs < MIN_SEND_INTERVAL_MS) return;
      this.send(this.queue.shift() as CommandMsg);
      this.lastSentAtMs = t;
    }
  }

  private isMoveKey(key: string): boolean {
    return FORWARD.has(key) || BACK.has(key) || LEFT.has(key) || RIGHT.has(key);
  }

  private enqueueVelocity(): void {
    const { vx, vy } = this.velocityFromKeys();
    // stale velocity targets are worthless; keep only the newest
    this.queue = this.queue.filter((c) => c.action !== "set_user_velocity");
    this.enqueue(cmdSetUserVelocity(this.nextId++, vx, vy));
  }

  private enqueue(cmd: CommandMsg): boolean {
    if (!this.canSend()) {
      this.warnings += 1;
      return false;
    }
    this.queue.push(cmd);
    this.flush();
    return true;
  }
}
