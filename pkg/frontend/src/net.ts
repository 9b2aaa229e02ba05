/** WebSocket plumbing between the bridge and the view model.
 *
 * Deliberately thin: every message is validated in protocol.ts and every
 * state transition lands in the ViewModel, so this file is the only part of
 * the client that cannot run under the test runner.
 */

import { CommandMsg, isClientCommand, parseServerMsg } from "./protocol.js";
import { ViewModel } from "./viewmodel.js";

const RECONNECT_DELAY_MS = 1000;

export class BridgeSocket {
  private ws: WebSocket | null = null;
  private closed = false;

  constructor(
    private readonly url: string,
    private readonly vm: ViewModel,
    private readonly now: () => number = () => performance.now(),
  ) {}

  connect(): void {
    if (this.closed) return;
    this.vm.setConnection("connecting");
    const ws = new WebSocket(this.url);
    this.ws = ws;
    ws.onopen = () => {
      this.vm.setConnection("open");
    };
    ws.onmessage = (ev: MessageEvent) => {
      if (typeof ev.data !== "string") return;
      const msg = parseServerMsg(ev.data);
      if (msg === null) {
        console.warn("operator-ui: dropped unparseable server message");
        return;
      }
      this.vm.ingest(msg, this.now());
    };
    ws.onclose = () => {
      if (this.ws !== ws) return;
      this.ws = null;
      this.vm.setConnection("closed");
      if (!this.closed) {
        setTimeout(() => this.connect(), RECONNECT_DELAY_MS);
      }
    };
    ws.onerror = () => {
      // onclose follows and owns the retry
    };
  }

  /** True when the command left the socket. */
  send(cmd: CommandMsg): boolean {
    if (!isClientCommand(cmd)) {
      console.warn("operator-ui: refusing to send off-schema command", cmd);
      return false;
    }
    if (this.ws === null || this.ws.readyState !== WebSocket.OPEN) {
      return false;
    }
    this.ws.send(JSON.stringify(cmd));
    return true;
  }

  canSend(): boolean {
    return (
      this.ws !== null &&
      this.ws.readyState === WebSocket.OPEN &&
      this.vm.isController()
    );
  }

  close(): void {
    this.closed = true;
    this.ws?.close();
    this.ws = null;
  }
}
