// Message types for telemetry protocol version 1 (see ../../docs/protocol.md).
// One WebSocket text frame carries one JSON body; unknown fields are ignored.

export const PROTOCOL_VERSION = 1;

export interface JointAngles {
  theta: number;
  beta: number;
  alpha: number;
  wrist_roll: number;
}

export interface ContactEventEntry {
  kind: "contact" | "grasp" | "release" | "drop";
  t: number;
  force: number;
}

export interface HapticEventEntry {
  kind: "haptic";
  t: number;
  intensity: number;
}

export type EventEntry = ContactEventEntry | HapticEventEntry;

export interface FrameMessage {
  type: "frame";
  protocol_version: number;
  tick: number;
  t: number;
  drone: { x: number; y: number; z: number; roll: number; pitch: number; yaw: number };
  joints: JointAngles;
  grip_fraction: number;
  grip_pose: { x: number; z: number; phi: number };
  torques: { t1: number; t2: number; t3: number };
  forces: { left: number; right: number };
  events: EventEntry[];
}

export type Pair = [number, number];

export interface WelcomeMessage {
  type: "welcome";
  protocol_version: number;
  role: "control" | "observer";
  requested_role_granted: boolean;
  rate_hz: number;
  command_rate_hz: number;
  geometry: { l1: number; l2: number; l3: number; l_dis: number };
  limits: { theta: Pair; beta: Pair; alpha: Pair; wrist_roll: Pair };
  jog_max_step: number;
  object: { x: number; z: number; size: number };
  setpoint: { x: number; y: number; z: number; yaw: number };
  initial_pose: { x: number; z: number; phi: number };
}

export interface GapMessage {
  type: "gap";
  protocol_version: number;
  t: number;
  dropped: number;
}

export interface ErrorMessage {
  type: "error";
  protocol_version: number;
  code: string;
  message: string;
}

export interface EndMessage {
  type: "end";
  protocol_version: number;
  t: number;
}

export type ServerMessage =
  | FrameMessage
  | WelcomeMessage
  | GapMessage
  | ErrorMessage
  | EndMessage;

export class ProtocolError extends Error {}

const KNOWN_TYPES = new Set(["frame", "welcome", "gap", "error", "end"]);

export function parseServerMessage(data: string): ServerMessage {
  let body: unknown;
  try {
    body = JSON.parse(data);
  } catch (exc) {
    throw new ProtocolError(`not valid JSON: ${exc}`);
  }
  if (typeof body !== "object" || body === null || Array.isArray(body)) {
    throw new ProtocolError("message body must be an object");
  }
  const type = (body as { type?: unknown }).type;
  if (typeof type !== "string" || !KNOWN_TYPES.has(type)) {
    throw new ProtocolError(`unknown message type '${String(type)}'`);
  }
  return body as ServerMessage;
}

export interface CommandBody {
  type: "command";
  protocol_version: number;
  mode: "teleop" | "jog";
  timestamp: number;
  joint_targets?: JointAngles;
  cartesian_step?: { dx: number; dz: number };
  grip_fraction?: number;
}

export function encodeHello(role: "control" | "observer"): string {
  return JSON.stringify({ type: "hello", protocol_version: PROTOCOL_VERSION, role });
}

export function encodeCommand(body: Omit<CommandBody, "type" | "protocol_version">): string {
  return JSON.stringify({
    type: "command",
    protocol_version: PROTOCOL_VERSION,
    ...body,
  });
}
