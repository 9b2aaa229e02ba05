import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import type { StateMsg } from "../src/protocol.js";
import {
  Ctx2D,
  gaugeFraction,
  renderScene,
  resetBadStateWarning,
  SPEED_CAP,
  SPEED_GAUGE_MAX,
} from "../src/render.js";

type Op = [string, ...unknown[]];

/** Records every drawing call so assertions can inspect the scene. */
class StubCtx implements Ctx2D {
  ops: Op[] = [];
  fillStyle: string | CanvasGradient | CanvasPattern = "";
  strokeStyle: string | CanvasGradient | CanvasPattern = "";
  lineWidth = 1;
  font = "";
  textAlign: CanvasTextAlign = "start";
  globalAlpha = 1;

  private log(name: string, ...args: unknown[]): void {
    this.ops.push([name, ...args]);
  }
  beginPath(): void {
    this.log("beginPath");
  }
  arc(x: number, y: number, r: number, a0: number, a1: number): void {
    this.log("arc", x, y, r, a0, a1);
  }
  moveTo(x: number, y: number): void {
    this.log("moveTo", x, y);
  }
  lineTo(x: number, y: number): void {
    this.log("lineTo", x, y);
  }
  closePath(): void {
    this.log("closePath");
  }
  stroke(): void {
    this.log("stroke");
  }
  fill(): void {
    this.log("fill");
  }
  clearRect(x: number, y: number, w: number, h: number): void {
    this.log("clearRect", x, y, w, h);
  }
  fillRect(x: number, y: number, w: number, h: number): void {
    this.log("fillRect", x, y, w, h);
  }
  strokeRect(x: number, y: number, w: number, h: number): void {
    this.log("strokeRect", x, y, w, h);
  }
  fillText(text: string, x: number, y: number): void {
    this.log("fillText", text, x, y);
  }
  setLineDash(segments: number[]): void {
    this.log("setLineDash", segments);
  }
  save(): void {
    this.log("save");
  }
  restore(): void {
    this.log("restore");
  }
  translate(x: number, y: number): void {
    this.log("translate", x, y);
  }
  rotate(angle: number): void {
    this.log("rotate", angle);
  }

  texts(): string[] {
    return this.ops
      .filter(([name]) => name === "fillText")
      .map((op) => op[1] as string);
  }
  arcRadii(): number[] {
    return this.ops
      .filter(([name]) => name === "arc")
      .map((op) => op[3] as number);
  }
}

const VIEW = { width: 900, height: 640, stale: false };

function makeState(over: Partial<StateMsg> = {}): StateMsg {
  return {
    v: 1,
    type: "state",
    t: 3.0,
    phase: "FLIGHT",
    domain: "D2_WEBER",
    gesture: "APPROACH",
    drone: { x: 1, y: 0.3, z: 1.2, yaw: Math.PI, vx: -0.4, vy: 0, vz: 0 },
    goal: { x: 0.9, y: 0.3, z: 1.2, yaw: Math.PI },
    cmd_speed: 0.8,
    user: {
      chest: { x: 0, y: 0, z: 1.35 },
      palm: { x: 0.65, y: 0, z: 1.15 },
      stretched: true,
    },
    params: { k_prime: 0.2, d_th: 0.3, r_v: 1.25 },
    safety_radius: 0.3,
    arm_length: 0.65,
    ...over,
  };
}

beforeEach(() => {
  resetBadStateWarning();
});

afterEach(() => {
  vi.restoreAllMocks();
});

describe("scene content", () => {
  it("draws all three interaction circles around the chest", () => {
    const ctx = new StubCtx();
    renderScene(ctx, makeState(), VIEW);
    const radii = ctx.arcRadii();
    // plan scale is 110 px/m
    for (const r of [0.3, 0.65, 1.25]) {
      expect(radii.some((px) => Math.abs(px - r * 110) < 1e-9)).toBe(true);
    }
  });

  it("marks the setpoint and skips it when absent", () => {
    const withGoal = new StubCtx();
    renderScene(withGoal, makeState(), VIEW);
    const without = new StubCtx();
    renderScene(without, makeState({ goal: null }), VIEW);
    expect(withGoal.ops.length).toBeGreaterThan(without.ops.length);
  });

  it("badges a commanded hold", () => {
    const ctx = new StubCtx();
    renderScene(ctx, makeState({ gesture: "STAY", domain: "D4_HOLD" }), VIEW);
    expect(ctx.texts()).toContain("HOLD");
    const ctx2 = new StubCtx();
    renderScene(ctx2, makeState(), VIEW);
    expect(ctx2.texts()).not.toContain("HOLD");
  });

  it("announces touchdown only on the palm", () => {
    const ctx = new StubCtx();
    renderScene(
      ctx,
      makeState({
        phase: "LANDED",
        domain: null,
        drone: { x: 0.65, y: 0, z: 1.1, yaw: Math.PI, vx: 0, vy: 0, vz: 0 },
      }),
      VIEW,
    );
    expect(ctx.texts()).toContain("LANDED ON PALM");
    const ctx2 = new StubCtx();
    renderScene(ctx2, makeState(), VIEW);
    expect(ctx2.texts()).not.toContain("LANDED ON PALM");
  });

  it("overlays a warning on stale data", () => {
    const ctx = new StubCtx();
    renderScene(ctx, makeState(), { ...VIEW, stale: true });
    expect(ctx.texts()).toContain("STALE DATA");
  });
});

describe("speed gauge", () => {
  it("scales the bar and clips at full scale", () => {
    expect(gaugeFraction(0.6)).toBeCloseTo(0.6 / SPEED_GAUGE_MAX, 12);
    expect(gaugeFraction(SPEED_GAUGE_MAX)).toBe(1);
    expect(gaugeFraction(5)).toBe(1);
    expect(gaugeFraction(-1)).toBe(0);
    expect(SPEED_CAP).toBeLessThan(SPEED_GAUGE_MAX);
  });

  it("prints the commanded speed", () => {
    const ctx = new StubCtx();
    renderScene(ctx, makeState({ cmd_speed: 0.73 }), VIEW);
    expect(ctx.texts().some((t) => t.includes("0.73"))).toBe(true);
  });
});

describe("defensive rendering", () => {
  it("draws nothing for a null state", () => {
    const ctx = new StubCtx();
    renderScene(ctx, null, VIEW);
    expect(ctx.ops.map(([n]) => n)).toEqual(["clearRect"]);
  });

  it("draws nothing for malformed state and warns exactly once", () => {
    const warn = vi.spyOn(console, "warn").mockImplementation(() => {});
    const bad = makeState();
    (bad.drone as unknown as Record<string, unknown>).yaw = "north";
    const ctx = new StubCtx();
    renderScene(ctx, bad, VIEW);
    renderScene(ctx, bad, VIEW);
    expect(ctx.ops.map(([n]) => n)).toEqual(["clearRect", "clearRect"]);
    expect(warn).toHaveBeenCalledTimes(1);
  });
});
