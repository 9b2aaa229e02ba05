/** Wire protocol spoken by the live bridge (schema version 1).
 *
 * The server broadcasts `state` snapshots at ~30 Hz and answers each `cmd`
 * with an `ack` or `err`. Everything here is plain data plus guards; no
 * network code.
 */

export const PROTOCOL_VERSION = 1;
export const MAX_USER_SPEED = 2.0; // server clamps too; we never exceed it

export type ParamName = "k_prime" | "d_th" | "r_v";
export const PARAM_NAMES: readonly ParamName[] = ["k_prime", "d_th", "r_v"];

export interface XYZ {
  x: number;
  y: number;
  z: number;
}

export interface StateMsg {
  v: number;
  type: "state";
  t: number;
  phase: string;
  domain: string | null;
  gesture: string;
  drone: XYZ & { yaw: number; vx: number; vy: number; vz: number };
  goal: (XYZ & { yaw: number }) | null;
  cmd_speed: number;
  user: { chest: XYZ; palm: XYZ; stretched: boolean };
  params: Record<ParamName, number>;
  safety_radius: number;
  arm_length: number;
  role?: string;
}

export interface AckMsg {
  v: number;
  type: "ack";
  id: number | null;
  action: string;
}

export interface ErrMsg {
  v: number;
  type: "err";
  id: number | null;
  error: string;
}

export type ServerMsg = StateMsg | AckMsg | ErrMsg;

export type CommandAction =
  | "takeoff"
  | "reset"
  | "set_arm"
  | "set_user_velocity"
  | "set_param";

export interface CommandMsg {
  v: number;
  type: "cmd";
  id: number;
  action: CommandAction;
  stretched?: boolean;
  vx?: number;
  vy?: number;
  name?: ParamName;
  value?: number;
}

function isRecord(x: unknown): x is Record<string, unknown> {
  return typeof x === "object" && x !== null;
}

function isXYZ(x: unknown): x is XYZ {
  return (
    isRecord(x) &&
    Number.isFinite(x.x) &&
    Number.isFinite(x.y) &&
    Number.isFinite(x.z)
  );
}

/** Parse one server frame; null for anything that is not a v1 message. */
export function parseServerMsg(text: string): ServerMsg | null {
  let raw: unknown;
  try {
    raw = JSON.parse(text);
  } catch {
    return null;
  }
  if (!isRecord(raw) || raw.v !== PROTOCOL_VERSION) return null;
  if (raw.type === "ack" && typeof raw.action === "string") {
    return raw as unknown as AckMsg;
  }
  if (raw.type === "err" && typeof raw.error === "string") {
    return raw as unknown as ErrMsg;
  }
  if (raw.type === "state" && isStateShape(raw)) {
    return raw as unknown as StateMsg;
  }
  return null;
}

export function isStateShape(raw: unknown): boolean {
  if (!isRecord(raw)) return false;
  const drone = raw.drone;
  const user = raw.user;
  return (
    Number.isFinite(raw.t) &&
    typeof raw.phase === "string" &&
    typeof raw.gesture === "string" &&
    isRecord(drone) &&
    isXYZ(drone) &&
    Number.isFinite(drone.yaw) &&
    isRecord(user) &&
    isXYZ(user.chest) &&
    isXYZ(user.palm) &&
    typeof user.stretched === "boolean" &&
    Number.isFinite(raw.cmd_speed) &&
    Number.isFinite(raw.safety_radius) &&
    Number.isFinite(raw.arm_length) &&
    isRecord(raw.params)
  );
}

/** True iff this is a message the bridge accepts from a controller. */
export function isClientCommand(x: unknown): x is CommandMsg {
  if (!isRecord(x)) return false;
  if (x.v !== PROTOCOL_VERSION || x.type !== "cmd") return false;
  if (!Number.isInteger(x.id)) return false;
  switch (x.action) {
    case "takeoff":
    case "reset":
      return true;
    case "set_arm":
      return typeof x.stretched === "boolean";
    case "set_user_velocity":
      return (
        Number.isFinite(x.vx) &&
        Number.isFinite(x.vy) &&
        Math.hypot(x.vx as number, x.vy as number) <= MAX_USER_SPEED + 1e-9
      );
    case "set_param":
      return (
        typeof x.name === "string" &&
        (PARAM_NAMES as readonly string[]).includes(x.name) &&
        Number.isFinite(x.value)
      );
    default:
      return false;
  }
}

export function cmdTakeoff(id: number): CommandMsg {
  return { v: PROTOCOL_VERSION, type: "cmd", id, action: "takeoff" };
}

export function cmdReset(id: number): CommandMsg {
  return { v: PROTOCOL_VERSION, type: "cmd", id, action: "reset" };
}

export function cmdSetArm(id: number, stretched: boolean): CommandMsg {
  return { v: PROTOCOL_VERSION, type: "cmd", id, action: "set_arm", stretched };
}

/** Velocity command; the magnitude is clamped to the protocol cap. */
export function cmdSetUserVelocity(
  id: number,
  vx: number,
  vy: number,
): CommandMsg {
  const speed = Math.hypot(vx, vy);
  if (speed > MAX_USER_SPEED) {
    vx *= MAX_USER_SPEED / speed;
    vy *= MAX_USER_SPEED / speed;
  }
  return {
    v: PROTOCOL_VERSION,
    type: "cmd",
    id,
    action: "set_user_velocity",
    vx,
    vy,
  };
}

export function cmdSetParam(
  id: number,
  name: ParamName,
  value: number,
): CommandMsg {
  return { v: PROTOCOL_VERSION, type: "cmd", id, action: "set_param", name, value };
}
