import { beforeEach, describe, expect, it } from "vitest";

import {
  ARM_SYNC_SETTLE_MS,
  InputController,
  MIN_SEND_INTERVAL_MS,
  WALK_SPEED,
} from "../src/input.js";
import { CommandMsg, isClientCommand } from "../src/protocol.js";

let clock = 0;
let sent: CommandMsg[] = [];
let controllable = true;

function makeInput(): InputController {
  return new InputController(
    () => controllable,
    (cmd) => sent.push(cmd),
    () => clock,
  );
}

beforeEach(() => {
  clock = 0;
  sent = [];
  controllable = true;
});

function velocities(): Array<[number, number]> {
  return sent
    .filter((c) => c.action === "set_user_velocity")
    .map((c) => [c.vx as number, c.vy as number]);
}

describe("walking keys", () => {
  it("forward key walks along +x at the fixed speed", () => {
    const input = makeInput();
    input.keyDown("w");
    expect(velocities()).toEqual([[WALK_SPEED, 0]]);
  });

  it("arrows alias WASD and diagonals sum", () => {
    const input = makeInput();
    input.keyDown("ArrowUp");
    clock += MIN_SEND_INTERVAL_MS;
    input.keyDown("ArrowLeft");
    input.flush();
    expect(velocities().at(-1)).toEqual([WALK_SPEED, WALK_SPEED]);
  });

  it("releasing the last key commands a stop", () => {
    const input = makeInput();
    input.keyDown("d");
    clock += MIN_SEND_INTERVAL_MS;
    input.keyUp("d");
    input.flush();
    expect(velocities()).toEqual([
      [0, -WALK_SPEED],
      [0, 0],
    ]);
  });

  it("ignores keyUp for keys never pressed", () => {
    const input = makeInput();
    input.keyUp("w");
    expect(sent).toHaveLength(0);
  });
});

describe("rate limiting", () => {
  it("coalesces rapid velocity changes to the newest target", () => {
    const input = makeInput();
    input.keyDown("w"); // sent immediately
    clock = 10;
    input.keyDown("a"); // inside the blackout: queued
    clock = 20;
    input.keyUp("a"); // replaces the queued target
    clock = 30;
    input.flush();
    expect(sent).toHaveLength(1);
    clock = MIN_SEND_INTERVAL_MS + 10;
    input.flush();
    expect(velocities()).toEqual([
      [WALK_SPEED, 0],
      [WALK_SPEED, 0],
    ]);
  });

  it("spaces discrete commands by the minimum interval", () => {
    const input = makeInput();
    input.keyDown("t");
    input.keyDown("r");
    expect(sent.map((c) => c.action)).toEqual(["takeoff"]);
    clock = MIN_SEND_INTERVAL_MS;
    input.flush();
    expect(sent.map((c) => c.action)).toEqual(["takeoff", "reset"]);
  });

  it("never emits faster than 20 messages per second", () => {
    const stamps: number[] = [];
    const input = new InputController(
      () => true,
      () => stamps.push(clock),
      () => clock,
    );
    for (let i = 0; i < 40; i++) {
      input.keyDown(i % 2 === 0 ? "w" : "s");
      input.keyUp(i % 2 === 0 ? "w" : "s");
      clock += 5;
      input.flush();
    }
    expect(stamps.length).toBeGreaterThan(2);
    for (let i = 1; i < stamps.length; i++) {
      expect(stamps[i] - stamps[i - 1]).toBeGreaterThanOrEqual(
        MIN_SEND_INTERVAL_MS,
      );
    }
  });
});

describe("discrete commands", () => {
  it("space toggles the arm back and forth", () => {
    const input = makeInput();
    input.keyDown(" ");
    clock = 100;
    input.keyDown(" ");
    expect(sent.map((c) => [c.action, c.stretched])).toEqual([
      ["set_arm", true],
      ["set_arm", false],
    ]);
  });

  it("OS key repeat does not retrigger toggles", () => {
    const input = makeInput();
    input.keyDown(" ");
    input.keyDown(" ", true);
    input.keyDown("t", true);
    input.keyDown("r", true);
    expect(sent).toHaveLength(1);
  });

  it("adopts the server arm state once a toggle has settled", () => {
    const input = makeInput();
    input.keyDown(" "); // local shadow: stretched
    // broadcast still shows the old pose; must not un-toggle us
    input.syncStretched(false);
    clock = 100;
    input.keyDown(" ");
    expect(sent.at(-1)?.stretched).toBe(false);
    // much later the server is authoritative again
    clock = 100 + ARM_SYNC_SETTLE_MS;
    input.syncStretched(true);
    clock += 10;
    input.keyDown(" ");
    expect(sent.at(-1)?.stretched).toBe(false);
  });
});

describe("permission handling", () => {
  it("drops everything while not in control and counts warnings", () => {
    controllable = false;
    const input = makeInput();
    input.keyDown("w");
    input.keyDown(" ");
    input.keyDown("t");
    input.flush();
    expect(sent).toHaveLength(0);
    expect(input.warnings).toBe(3);
  });

  it("a dropped toggle leaves the arm shadow unchanged", () => {
    controllable = false;
    const input = makeInput();
    input.keyDown(" ");
    expect(sent).toHaveLength(0);
    controllable = true;
    clock = 100;
    input.keyDown(" ");
    // the first press never went out, so this one still stretches
    expect(sent.at(-1)?.stretched).toBe(true);
  });
});

describe("wire discipline", () => {
  it("only schema-valid commands ever reach the socket", () => {
    const input = makeInput();
    input.keyDown("w");
    input.keyDown("a");
    input.keyDown(" ");
    input.keyDown("t");
    clock = 1000;
    input.keyDown("r");
    input.keyUp("w");
    for (let i = 0; i < 20; i++) {
      clock += MIN_SEND_INTERVAL_MS;
      input.flush();
    }
    expect(sent.length).toBeGreaterThanOrEqual(4);
    for (const cmd of sent) {
      expect(isClientCommand(cmd)).toBe(true);
    }
  });
});
