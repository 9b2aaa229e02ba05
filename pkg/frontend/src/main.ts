/** Browser entry point: sockets, keyboard, param panel, render loop. */

import { InputController } from "./input.js";
import { BridgeSocket } from "./net.js";
import { cmdSetParam, PARAM_NAMES, ParamName } from "./protocol.js";
import { renderScene } from "./render.js";
import { ViewModel } from "./viewmodel.js";

function bridgeUrl(): string {
  const q = new URLSearchParams(window.location.search).get("bridge");
  return q !== null && q !== "" ? q : "ws://127.0.0.1:8765/ws";
}

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (node === null) throw new Error(`missing #${id}`);
  return node as T;
}

const canvas = el<HTMLCanvasElement>("scene");
const ctx = canvas.getContext("2d");
if (ctx === null) throw new Error("canvas 2d context unavailable");

const vm = new ViewModel();
const bridge = new BridgeSocket(bridgeUrl(), vm);
const input = new InputController(
  () => bridge.canSend(),
  (cmd) => bridge.send(cmd),
  () => performance.now(),
);

// ids sent from the param panel live far away from the keyboard ids
let paramMsgId = 100000;

const statusLine = el<HTMLDivElement>("status");
const warnLine = el<HTMLDivElement>("warnings");
let shownWarnings = 0;

function wireParamRow(name: ParamName): void {
  const field = el<HTMLInputElement>(`p-${name}`);
  const button = el<HTMLButtonElement>(`apply-${name}`);
  button.addEventListener("click", () => {
    const value = Number(field.value);
    if (!Number.isFinite(value)) return;
    if (!bridge.canSend()) {
      warnLine.textContent = "not the controller: parameter change dropped";
      return;
    }
    bridge.send(cmdSetParam(paramMsgId++, name, value));
  });
}
for (const name of PARAM_NAMES) wireParamRow(name);

const HANDLED_KEYS = new Set([
  "w",
  "a",
  "s",
  "d",
  "arrowup",
  "arrowdown",
  "arrowleft",
  "arrowright",
  " ",
  "t",
  "r",
]);

window.addEventListener("keydown", (ev) => {
  const key = ev.key.toLowerCase();
  if (!HANDLED_KEYS.has(key)) return;
  ev.preventDefault();
  input.keyDown(key, ev.repeat);
});
window.addEventListener("keyup", (ev) => {
  const key = ev.key.toLowerCase();
  if (!HANDLED_KEYS.has(key)) return;
  ev.preventDefault();
  input.keyUp(key);
});

function describe(): string {
  const s = vm.lastState;
  const role = vm.role ?? "?";
  if (s === null) return `${vm.connection} | role ${role} | waiting for state`;
  return (
    `${vm.connection} | role ${role} | t=${s.t.toFixed(1)}s | ` +
    `${s.phase} | ${s.gesture} | ${s.domain}`
  );
}

function frame(): void {
  const now = performance.now();
  input.flush();
  if (vm.lastState !== null) {
    input.syncStretched(vm.lastState.user.stretched);
  }
  renderScene(ctx as CanvasRenderingContext2D, vm.displayState(now), {
    width: canvas.width,
    height: canvas.height,
    stale: vm.isStale(now),
  });
  statusLine.textContent = describe();
  if (vm.lastError !== null) {
    warnLine.textContent = `bridge: ${vm.lastError}`;
  } else if (input.warnings > shownWarnings) {
    warnLine.textContent = "read-only connection: command not sent";
  }
  shownWarnings = input.warnings;
  requestAnimationFrame(frame);
}

bridge.connect();
requestAnimationFrame(frame);
