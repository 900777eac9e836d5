// Cockpit session: socket handling, handshake, frame intake, haptics,
// command pumping. Holds all displayable state so the renderer (and the
// tests) only ever read from here.

import { ControlPanel } from "./controls.js";
import { fkMismatch } from "./kinematics.js";
import { FrameMailbox } from "./mailbox.js";
import {
  ContactEventEntry,
  FrameMessage,
  PROTOCOL_VERSION,
  ServerMessage,
  WelcomeMessage,
  encodeCommand,
  encodeHello,
  parseServerMessage,
} from "./protocol.js";

// Shape shared by the browser WebSocket and the `ws` package client.
export interface SocketLike {
  onopen: ((ev?: unknown) => void) | null;
  onmessage: ((ev: { data: unknown }) => void) | null;
  onerror: ((ev?: unknown) => void) | null;
  onclose: ((ev?: unknown) => void) | null;
  send(data: string): void;
  close(): void;
}

export type SocketFactory = (url: string) => SocketLike;

export type ConnectionState =
  | "connecting"
  | "connected"
  | "hold"      // stream ended or stalled: the arm holds position
  | "closed";

export interface HapticFiring {
  t: number;         // simulation time of the event
  intensity: number;
}

export interface SessionOptions {
  role?: "control" | "observer";
  socketFactory?: SocketFactory;
  jogStep?: number;
  /** Haptic pulse decay time constant in render seconds. */
  hapticDecay?: number;
}

export class CockpitSession {
  readonly mailbox = new FrameMailbox();
  readonly url: string;

  connection: ConnectionState = "connecting";
  welcome: WelcomeMessage | null = null;
  panel: ControlPanel | null = null;
  role: "control" | "observer" | null = null;
  roleRejected = false;
  versionMismatch = false;
  lastError: string | null = null;
  lastFrame: FrameMessage | null = null;

  hapticLevel = 0;
  hapticFirings: HapticFiring[] = [];
  contactEvents: ContactEventEntry[] = [];
  worstFkMismatch = 0;
  framesSeen = 0;
  gapsSeen = 0;

  private socket: SocketLike | null = null;
  private readonly requestedRole: "control" | "observer";
  private readonly factory: SocketFactory;
  private readonly jogStep: number;
  private readonly hapticDecay: number;
  private welcomeResolve: ((w: WelcomeMessage) => void) | null = null;
  private welcomeReject: ((e: Error) => void) | null = null;
  private pump: ReturnType<typeof setInterval> | null = null;

  constructor(url: string, options: SessionOptions = {}) {
    this.url = url;
    this.requestedRole = options.role ?? "observer";
    this.factory = options.socketFactory
      ?? ((u: string) => new WebSocket(u) as unknown as SocketLike);
    this.jogStep = options.jogStep ?? 0.02;
    this.hapticDecay = options.hapticDecay ?? 0.4;
  }

  connect(): Promise<WelcomeMessage> {
    const socket = this.factory(this.url);
    this.socket = socket;
    return new Promise((resolve, reject) => {
      this.welcomeResolve = resolve;
      this.welcomeReject = reject;
      socket.onopen = () => socket.send(encodeHello(this.requestedRole));
      socket.onmessage = (ev) => this.onData(String(ev.data));
      socket.onerror = () => this.fail(new Error("socket error"));
      socket.onclose = () => {
        if (this.connection === "connecting") {
          this.fail(new Error("closed during handshake"));
        } else if (this.connection === "connected") {
          this.connection = "hold";
        } else {
          this.connection = "closed";
        }
        this.stopPump();
      };
    });
  }

  private fail(error: Error): void {
    this.lastError = error.message;
    this.connection = "closed";
    if (this.welcomeReject) {
      this.welcomeReject(error);
      this.welcomeReject = null;
      this.welcomeResolve = null;
    }
  }

  private onData(data: string): void {
    let message: ServerMessage;
    try {
      message = parseServerMessage(data);
    } catch (exc) {
      this.lastError = String(exc);
      return;
    }
    switch (message.type) {
      case "welcome":
        this.welcome = message;
        this.role = message.role;
        this.roleRejected = !message.requested_role_granted;
        this.versionMismatch = message.protocol_version !== PROTOCOL_VERSION;
        this.panel = new ControlPanel(message, this.jogStep);
        this.connection = "connected";
        if (this.welcomeResolve) {
          this.welcomeResolve(message);
          this.welcomeResolve = null;
          this.welcomeReject = null;
        }
        break;
      case "frame":
        this.onFrame(message);
        break;
      case "gap":
        this.gapsSeen += 1;
        break;
      case "error":
        this.lastError = `${message.code}: ${message.message}`;
        break;
      case "end":
        this.connection = "hold";
        this.stopPump();
        break;
    }
  }

  private onFrame(frame: FrameMessage): void {
    this.framesSeen += 1;
    this.lastFrame = frame;
    if (this.panel) this.panel.syncIfPristine(frame.joints);
    if (this.welcome) {
      const mismatch = fkMismatch(this.welcome.geometry, frame.joints,
                                  frame.grip_pose);
      if (mismatch > this.worstFkMismatch) this.worstFkMismatch = mismatch;
    }
    for (const event of frame.events) {
      if (event.kind === "haptic") {
        if (event.intensity > 0) {
          this.hapticLevel = Math.max(this.hapticLevel, event.intensity);
          this.hapticFirings.push({ t: event.t, intensity: event.intensity });
        }
      } else {
        this.contactEvents.push(event);
      }
    }
    this.mailbox.post(frame);
  }

  /** Called by the render loop; decays the haptic pulse between events. */
  decayHaptic(dtSeconds: number): void {
    this.hapticLevel *= Math.exp(-dtSeconds / this.hapticDecay);
    if (this.hapticLevel < 1e-3) this.hapticLevel = 0;
  }

  /** Start sending panel commands at the welcome's cadence (control only). */
  startPump(nowSeconds: () => number = () => Date.now() / 1000): void {
    if (this.role !== "control" || !this.panel || this.pump) return;
    const interval = 1000 / this.panel.cadenceHz;
    this.pump = setInterval(() => this.pumpOnce(nowSeconds()), interval);
  }

  stopPump(): void {
    if (this.pump !== null) {
      clearInterval(this.pump);
      this.pump = null;
    }
  }

  /** Send at most one due command; exposed for deterministic tests. */
  pumpOnce(now: number): boolean {
    if (!this.panel || !this.socket || this.connection !== "connected") {
      return false;
    }
    const body = this.panel.nextCommand(now);
    if (body === null) return false;
    this.socket.send(encodeCommand(body));
    return true;
  }

  close(): void {
    this.stopPump();
    if (this.socket) this.socket.close();
    this.connection = "closed";
  }
}
