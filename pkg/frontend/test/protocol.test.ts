import { readFileSync } from "node:fs";
import { fileURLToPath } from "node:url";
import { dirname, join } from "node:path";

import { describe, expect, it } from "vitest";

import {
  ProtocolError,
  encodeCommand,
  encodeHello,
  parseServerMessage,
} from "../src/protocol.js";

const HERE = dirname(fileURLToPath(import.meta.url));
const FIXTURES = join(HERE, "..", "..", "tests", "data");

function fixtureBody(name: string): string {
  // strip the raw-TCP length prefix; WebSocket transports carry the body
  const raw = readFileSync(join(FIXTURES, name));
  const newline = raw.indexOf(0x0a);
  return raw.subarray(newline + 1).toString("utf-8");
}

describe("server message parsing", () => {
  it("decodes the golden zero frame", () => {
    const message = parseServerMessage(fixtureBody("golden_zero_frame.bin"));
    expect(message.type).toBe("frame");
    if (message.type === "frame") {
      expect(message.tick).toBe(0);
      expect(message.grip_pose).toEqual({ x: 0, z: 0, phi: 0 });
      expect(message.events).toEqual([]);
    }
  });

  it("decodes the golden event frame with ordered events", () => {
    const message = parseServerMessage(fixtureBody("golden_event_frame.bin"));
    expect(message.type).toBe("frame");
    if (message.type === "frame") {
      expect(message.events.map((e) => e.kind)).toEqual([
        "contact", "grasp", "haptic",
      ]);
      expect(message.grip_fraction).toBeCloseTo(0.62, 12);
    }
  });

  it("rejects non-JSON and unknown types", () => {
    expect(() => parseServerMessage("{nope")).toThrow(ProtocolError);
    expect(() => parseServerMessage('{"type":"mystery"}')).toThrow(ProtocolError);
    expect(() => parseServerMessage("[1,2]")).toThrow(ProtocolError);
  });
});

describe("command encoding", () => {
  it("hello carries role and version", () => {
    expect(JSON.parse(encodeHello("control"))).toEqual({
      type: "hello", protocol_version: 1, role: "control",
    });
  });

  it("teleop command carries joint targets and grip", () => {
    const body = JSON.parse(encodeCommand({
      mode: "teleop",
      timestamp: 1.5,
      joint_targets: { theta: 0.1, beta: 0.9, alpha: 0.8, wrist_roll: 0 },
      grip_fraction: 0.5,
    }));
    expect(body.type).toBe("command");
    expect(body.protocol_version).toBe(1);
    expect(body.joint_targets.beta).toBe(0.9);
  });

  it("jog command carries the step", () => {
    const body = JSON.parse(encodeCommand({
      mode: "jog", timestamp: 2.0, cartesian_step: { dx: 0.02, dz: 0 },
    }));
    expect(body.cartesian_step).toEqual({ dx: 0.02, dz: 0 });
    expect(body.joint_targets).toBeUndefined();
  });
});
