/** Canvas drawing: top-down plan view, altitude side view, speed gauge.
 *
 * The plan view is chest-centered with +x up (the user faces up the screen)
 * and +y to the left, so a drone approaching the palm flies down toward the
 * viewer's hand. The side view shares the x axis and plots altitude.
 * Malformed states draw nothing and log once.
 */

import { isStateShape, StateMsg } from "./protocol.js";
import { domainCircle, landingBanner } from "./viewmodel.js";

export const SPEED_GAUGE_MAX = 1.2; // m/s full scale
export const SPEED_CAP = 1.0; // commanded-speed hard cap shown as a line

export interface Ctx2D {
  fillStyle: string | CanvasGradient | CanvasPattern;
  strokeStyle: string | CanvasGradient | CanvasPattern;
  lineWidth: number;
  font: string;
  textAlign: CanvasTextAlign;
  globalAlpha: number;
  beginPath(): void;
  arc(
    x: number,
    y: number,
    radius: number,
    startAngle: number,
    endAngle: number,
  ): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  closePath(): void;
  stroke(): void;
  fill(): void;
  clearRect(x: number, y: number, w: number, h: number): void;
  fillRect(x: number, y: number, w: number, h: number): void;
  strokeRect(x: number, y: number, w: number, h: number): void;
  fillText(text: string, x: number, y: number): void;
  setLineDash(segments: number[]): void;
  save(): void;
  restore(): void;
  translate(x: number, y: number): void;
  rotate(angle: number): void;
}

export interface Viewport {
  width: number;
  height: number;
  stale: boolean;
}

const PLAN_SCALE = 110; // px per meter, top-down panel
const SIDE_SCALE = 90; // px per meter, side panel
const SIDE_HEIGHT = 180; // px reserved at the bottom for the side view

const CIRCLE_STYLE: Record<"r_s" | "r_p" | "r_v", string> = {
  r_s: "#d9534f",
  r_p: "#5cb85c",
  r_v: "#5bc0de",
};

let warnedBadState = false;

export function gaugeFraction(cmdSpeed: number): number {
  return Math.min(Math.max(cmdSpeed, 0) / SPEED_GAUGE_MAX, 1);
}

export function renderScene(
  ctx: Ctx2D,
  state: StateMsg | null,
  view: Viewport,
): void {
  ctx.clearRect(0, 0, view.width, view.height);
  if (state === null) return;
  if (!isStateShape(state)) {
    if (!warnedBadState) {
      console.warn("operator-ui: malformed state broadcast, not drawing");
      warnedBadState = true;
    }
    return;
  }

  const planHeight = view.height - SIDE_HEIGHT;
  drawPlanView(ctx, state, view.width, planHeight);
  drawSideView(ctx, state, view.width, planHeight, SIDE_HEIGHT);
  drawSpeedGauge(ctx, state, view.width);
  if (landingBanner(state)) {
    ctx.fillStyle = "#2e6b2e";
    ctx.font = "bold 28px sans-serif";
    ctx.textAlign = "center";
    ctx.fillText("LANDED ON PALM", view.width / 2, 44);
  }
  if (view.stale) {
    ctx.fillStyle = "#b33";
    ctx.font = "bold 20px sans-serif";
    ctx.textAlign = "center";
    ctx.fillText("STALE DATA", view.width / 2, 72);
  }
}

/** Plan-view transform: chest-centered, +x up, +y left. */
function planPoint(
  state: StateMsg,
  width: number,
  planHeight: number,
  x: number,
  y: number,
): [number, number] {
  const cx = width / 2;
  const cy = planHeight * 0.55;
  const dx = x - state.user.chest.x;
  const dy = y - state.user.chest.y;
  return [cx - dy * PLAN_SCALE, cy - dx * PLAN_SCALE];
}

function drawPlanView(
  ctx: Ctx2D,
  state: StateMsg,
  width: number,
  planHeight: number,
): void {
  const [cx, cy] = planPoint(
    state,
    width,
    planHeight,
    state.user.chest.x,
    state.user.chest.y,
  );
  const highlight = domainCircle(state.domain);
  const radii: Record<"r_s" | "r_p" | "r_v", number> = {
    r_s: state.safety_radius,
    r_p: state.arm_length,
    r_v: state.params.r_v,
  };
  for (const name of ["r_v", "r_p", "r_s"] as const) {
    ctx.beginPath();
    ctx.setLineDash(name === highlight ? [] : [6, 6]);
    ctx.lineWidth = name === highlight ? 3 : 1;
    ctx.strokeStyle = CIRCLE_STYLE[name];
    ctx.arc(cx, cy, radii[name] * PLAN_SCALE, 0, 2 * Math.PI);
    ctx.stroke();
  }
  ctx.setLineDash([]);

  // user: chest dot plus palm dot joined by the arm
  const [px, py] = planPoint(
    state,
    width,
    planHeight,
    state.user.palm.x,
    state.user.palm.y,
  );
  ctx.beginPath();
  ctx.lineWidth = 2;
  ctx.strokeStyle = "#444";
  ctx.moveTo(cx, cy);
  ctx.lineTo(px, py);
  ctx.stroke();
  dot(ctx, cx, cy, 6, "#333");
  dot(ctx, px, py, state.user.stretched ? 5 : 4, "#8a5a2b");

  // commanded setpoint
  if (state.goal !== null) {
    const [gx, gy] = planPoint(
      state,
      width,
      planHeight,
      state.goal.x,
      state.goal.y,
    );
    cross(ctx, gx, gy, 5, "#999");
  }

  // drone triangle plus heading ray toward where its nose points
  const [dxp, dyp] = planPoint(
    state,
    width,
    planHeight,
    state.drone.x,
    state.drone.y,
  );
  const screenYaw = state.drone.yaw + Math.PI / 2; // +x is up on screen
  ctx.save();
  ctx.translate(dxp, dyp);
  ctx.rotate(-screenYaw);
  ctx.beginPath();
  ctx.fillStyle = "#1f3d7a";
  ctx.moveTo(10, 0);
  ctx.lineTo(-6, 5);
  ctx.lineTo(-6, -5);
  ctx.closePath();
  ctx.fill();
  ctx.beginPath();
  ctx.strokeStyle = "#1f3d7a";
  ctx.lineWidth = 1;
  ctx.moveTo(0, 0);
  ctx.lineTo(26, 0);
  ctx.stroke();
  ctx.restore();

  if (state.gesture === "STAY") {
    ctx.fillStyle = "#b36b00";
    ctx.font = "bold 12px sans-serif";
    ctx.textAlign = "center";
    ctx.fillText("HOLD", dxp, dyp - 14);
  }
}

function drawSideView(
  ctx: Ctx2D,
  state: StateMsg,
  width: number,
  top: number,
  height: number,
): void {
  const groundY = top + height - 20;
  const xOf = (x: number): number =>
    width / 2 + (x - state.user.chest.x) * SIDE_SCALE;
  const yOf = (z: number): number => groundY - z * SIDE_SCALE;

  ctx.beginPath();
  ctx.strokeStyle = "#777";
  ctx.lineWidth = 1;
  ctx.moveTo(0, groundY);
  ctx.lineTo(width, groundY);
  ctx.stroke();

  // user: chest post and the palm platform
  ctx.beginPath();
  ctx.strokeStyle = "#333";
  ctx.lineWidth = 3;
  ctx.moveTo(xOf(state.user.chest.x), groundY);
  ctx.lineTo(xOf(state.user.chest.x), yOf(state.user.chest.z));
  ctx.stroke();
  ctx.beginPath();
  ctx.strokeStyle = "#8a5a2b";
  ctx.lineWidth = 3;
  ctx.moveTo(xOf(state.user.palm.x) - 8, yOf(state.user.palm.z));
  ctx.lineTo(xOf(state.user.palm.x) + 8, yOf(state.user.palm.z));
  ctx.stroke();

  if (state.goal !== null) {
    cross(ctx, xOf(state.goal.x), yOf(state.goal.z), 4, "#999");
  }
  dot(ctx, xOf(state.drone.x), yOf(state.drone.z), 5, "#1f3d7a");
}

function drawSpeedGauge(ctx: Ctx2D, state: StateMsg, width: number): void {
  const barW = 140;
  const barH = 10;
  const x0 = width - barW - 16;
  const y0 = 16;
  ctx.strokeStyle = "#555";
  ctx.lineWidth = 1;
  ctx.strokeRect(x0, y0, barW, barH);
  ctx.fillStyle = "#1f3d7a";
  ctx.fillRect(x0, y0, barW * gaugeFraction(state.cmd_speed), barH);
  // the hard cap
  const capX = x0 + barW * (SPEED_CAP / SPEED_GAUGE_MAX);
  ctx.beginPath();
  ctx.strokeStyle = "#d9534f";
  ctx.lineWidth = 2;
  ctx.moveTo(capX, y0 - 3);
  ctx.lineTo(capX, y0 + barH + 3);
  ctx.stroke();
  ctx.fillStyle = "#333";
  ctx.font = "11px sans-serif";
  ctx.textAlign = "left";
  ctx.fillText(
    `cmd ${state.cmd_speed.toFixed(2)} m/s`,
    x0,
    y0 + barH + 14,
  );
}

function dot(ctx: Ctx2D, x: number, y: number, r: number, color: string): void {
  ctx.beginPath();
  ctx.fillStyle = color;
  ctx.arc(x, y, r, 0, 2 * Math.PI);
  ctx.fill();
}

function cross(
  ctx: Ctx2D,
  x: number,
  y: number,
  r: number,
  color: string,
): void {
  ctx.beginPath();
  ctx.strokeStyle = color;
  ctx.lineWidth = 2;
  ctx.moveTo(x - r, y - r);
  ctx.lineTo(x + r, y + r);
  ctx.moveTo(x - r, y + r);
  ctx.lineTo(x + r, y - r);
  ctx.stroke();
}

export function resetBadStateWarning(): void {
  warnedBadState = false;
}
