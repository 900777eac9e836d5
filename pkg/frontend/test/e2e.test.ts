// End-to-end: a scripted cockpit session against a locally served
// simulation. Jogs the grip over the object, closes the grip (contact,
// grasp, haptic pulse), lifts, opens (release), then checks the server's
// session record for the full event grammar and the client-side FK match.

import { spawn, type ChildProcess } from "node:child_process";
import { mkdtempSync, readFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join, dirname } from "node:path";
import { fileURLToPath } from "node:url";

import WebSocket from "ws";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { CockpitSession } from "../src/session.js";
import type { SocketLike } from "../src/session.js";

const HERE = dirname(fileURLToPath(import.meta.url));
const REPO_ROOT = join(HERE, "..", "..");

const sleep = (ms: number) => new Promise((resolve) => setTimeout(resolve, ms));

let server: ChildProcess;
let port = 0;
let recordPath = "";

function wsFactory(url: string): SocketLike {
  return new WebSocket(url) as unknown as SocketLike;
}

async function startServer(): Promise<void> {
  recordPath = join(mkdtempSync(join(tmpdir(), "aerotwin-e2e-")), "record.jsonl");
  server = spawn(
    "python3",
    ["-m", "aerotwin.cli", "serve", "--port", "0", "--record", recordPath],
    { cwd: REPO_ROOT, stdio: ["ignore", "pipe", "pipe"] },
  );
  await new Promise<void>((resolve, reject) => {
    const timer = setTimeout(() => reject(new Error("server never announced")), 15000);
    server.stdout!.on("data", (chunk: Buffer) => {
      const match = chunk.toString().match(/serving on 127\.0\.0\.1:(\d+)/);
      if (match) {
        port = parseInt(match[1], 10);
        clearTimeout(timer);
        resolve();
      }
    });
    server.on("exit", (code) => reject(new Error(`server exited early: ${code}`)));
  });
}

async function stopServer(): Promise<number | null> {
  if (!server || server.exitCode !== null) return server?.exitCode ?? null;
  const exited = new Promise<number | null>((resolve) => {
    server.on("exit", (code) => resolve(code));
  });
  server.kill("SIGINT"); // graceful: flushes the session record
  return exited;
}

async function waitFor(
  predicate: () => boolean, timeoutMs: number, what: string,
): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (Date.now() < deadline) {
    if (predicate()) return;
    await sleep(25);
  }
  throw new Error(`timed out waiting for ${what}`);
}

async function jogTo(
  session: CockpitSession, direction: "left" | "right" | "up" | "down",
  expected: { x: number; z: number },
): Promise<void> {
  session.panel!.pressArrow(direction);
  // wait for arrival AND standstill: servos reach their targets exactly,
  // and the next jog resolves from wherever the arm actually is, so
  // returning mid-move would accumulate shortfall across steps
  let stableSince: number | null = null;
  let lastJoints = "";
  await waitFor(
    () => {
      const frame = session.lastFrame;
      if (!frame) return false;
      const pose = frame.grip_pose;
      const near =
        Math.abs(pose.x - expected.x) < 0.005 &&
        Math.abs(pose.z - expected.z) < 0.005;
      const joints = JSON.stringify(frame.joints);
      if (joints !== lastJoints) {
        lastJoints = joints;
        stableSince = null;
        return false;
      }
      if (stableSince === null) stableSince = Date.now();
      return near && Date.now() - stableSince > 100;
    },
    8000,
    `grip settled at (${expected.x}, ${expected.z})`,
  );
}

describe("cockpit end to end", () => {
  beforeAll(async () => {
    await startServer();
  }, 30000);

  afterAll(async () => {
    await stopServer();
  });

  it("runs a full pick-lift-place session through the cockpit", async () => {
    const session = new CockpitSession(`ws://127.0.0.1:${port}`, {
      role: "control",
      socketFactory: wsFactory,
      jogStep: 0.05,
    });
    const welcome = await session.connect();
    expect(welcome.role).toBe("control");
    expect(session.versionMismatch).toBe(false);
    session.startPump();

    try {
      // wait for telemetry, then steer over and down onto the object:
      // (0.50,-0.15) -> five steps down -> (0.50,-0.40) -> left -> (0.45,-0.40)
      await waitFor(() => session.lastFrame !== null, 5000, "first frame");
      let z = -0.15;
      for (let i = 0; i < 5; i++) {
        z -= 0.05;
        await jogTo(session, "down", { x: 0.5, z });
      }
      await jogTo(session, "left", { x: 0.45, z: -0.4 });

      // close the grip over the object: contact, grasp, haptic pulse
      session.panel!.setGrip(1.0);
      await waitFor(
        () => session.contactEvents.some((e) => e.kind === "grasp"),
        5000, "grasp event",
      );
      const contact = session.contactEvents.find((e) => e.kind === "contact")!;
      expect(contact).toBeDefined();
      expect(session.hapticFirings.length).toBeGreaterThan(0);
      // the haptic indicator fires with the contact, not before
      expect(session.hapticFirings[0].t).toBeGreaterThanOrEqual(contact.t);
      expect(session.hapticFirings[0].t).toBeLessThanOrEqual(contact.t + 0.2);
      expect(session.hapticLevel).toBeGreaterThan(0);

      // lift the object two steps
      await jogTo(session, "up", { x: 0.45, z: -0.35 });
      await jogTo(session, "up", { x: 0.45, z: -0.3 });

      // open the grip: release
      session.panel!.setGrip(0.0);
      await waitFor(
        () => session.contactEvents.some((e) => e.kind === "release"),
        5000, "release event",
      );

      // client-side FK agreed with the server pose on every received frame
      expect(session.framesSeen).toBeGreaterThan(100);
      expect(session.worstFkMismatch).toBeLessThanOrEqual(1e-6);

      const kinds = session.contactEvents.map((e) => e.kind);
      expect(kinds.indexOf("contact")).toBeGreaterThanOrEqual(0);
      expect(kinds.indexOf("grasp")).toBeGreaterThan(kinds.indexOf("contact") - 1);
      expect(kinds.indexOf("release")).toBeGreaterThan(kinds.indexOf("grasp"));
    } finally {
      session.close();
    }

    // the server-side record carries the full event grammar
    const code = await stopServer();
    expect(code).toBe(0);
    const lines = readFileSync(recordPath, "utf-8").trim().split("\n");
    const kinds: string[] = [];
    for (const line of lines) {
      const body = JSON.parse(line);
      if (body.type === "frame") {
        for (const event of body.events) {
          if (event.kind !== "haptic") kinds.push(event.kind);
        }
      }
    }
    const contactIndex = kinds.indexOf("contact");
    const graspIndex = kinds.indexOf("grasp");
    const releaseIndex = kinds.indexOf("release");
    expect(contactIndex).toBeGreaterThanOrEqual(0);
    expect(graspIndex).toBeGreaterThan(-1);
    expect(releaseIndex).toBeGreaterThan(graspIndex);
    expect(graspIndex).toBeGreaterThanOrEqual(contactIndex);
  }, 90000);
});
