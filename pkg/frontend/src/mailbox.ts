// One-slot latest-frame mailbox between the socket consumer and the render
// tick. The consumer never blocks on rendering: a newer frame simply
// replaces an unrendered one (decimation, not buffering).

import type { FrameMessage } from "./protocol.js";

export class FrameMailbox {
  private slot: FrameMessage | null = null;
  received = 0;
  rendered = 0;
  decimated = 0;

  post(frame: FrameMessage): void {
    if (this.slot !== null) this.decimated += 1;
    this.slot = frame;
    this.received += 1;
  }

  take(): FrameMessage | null {
    const frame = this.slot;
    this.slot = null;
    if (frame !== null) this.rendered += 1;
    return frame;
  }

  get pending(): boolean {
    return this.slot !== null;
  }
}
