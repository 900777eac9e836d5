import { describe, expect, it } from "vitest";

import { clamp, fkElbow, fkGrip, fkWrist, wrapAngle } from "../src/kinematics.js";

const GEOM = { l1: 0.3, l2: 0.25, l3: 0.19, l_dis: 0.05 };

function q(theta = 0, beta = 0, alpha = 0, wrist_roll = 0) {
  return { theta, beta, alpha, wrist_roll };
}

describe("client-side forward kinematics", () => {
  it("reaches 0.74 m at the zero pose", () => {
    const grip = fkGrip(GEOM, q());
    expect(grip.x).toBe(0.74);
    expect(grip.z).toBe(0.05);
    expect(grip.phi).toBe(0);
  });

  it("matches the frozen elbow oracle at theta=0.3", () => {
    const elbow = fkElbow(GEOM, q(0.3));
    expect(elbow.x).toBeCloseTo(0.2718249364046148, 15);
    expect(elbow.z).toBeCloseTo(0.13642288645468215, 15);
  });

  it("matches the frozen wrist oracle at theta=0.4, beta=0.9", () => {
    const wrist = fkWrist(GEOM, q(0.4, 0.9));
    expect(wrist.x).toBeCloseTo(0.47624302155802617, 15);
    expect(wrist.z).toBeCloseTo(0.043022167741688655, 15);
  });

  it("matches the frozen grip oracle at (0.25, 0.8, 0.4)", () => {
    const grip = fkGrip(GEOM, q(0.25, 0.8, 0.4));
    expect(grip.x).toBeCloseTo(0.6793011638731917, 15);
    expect(grip.z).toBeCloseTo(-0.036398243540759545, 15);
    expect(grip.phi).toBeCloseTo(-0.15, 12);
  });

  it("keeps segment lengths along the chain", () => {
    for (const pose of [q(0.3, 1.1, -0.5), q(-1.0, 2.0, 1.2), q(0.9, 0.4, 0.0)]) {
      const elbow = fkElbow(GEOM, pose);
      const wrist = fkWrist(GEOM, pose);
      const grip = fkGrip(GEOM, pose);
      expect(Math.hypot(wrist.x - elbow.x, wrist.z - elbow.z)).toBeCloseTo(GEOM.l2, 12);
      expect(Math.hypot(grip.x - wrist.x, grip.z - wrist.z)).toBeCloseTo(GEOM.l3, 12);
    }
  });
});

describe("angle and clamp helpers", () => {
  it("wraps to (-pi, pi]", () => {
    expect(wrapAngle(0)).toBe(0);
    expect(wrapAngle(Math.PI)).toBeCloseTo(Math.PI, 12);
    expect(wrapAngle(-Math.PI)).toBeCloseTo(Math.PI, 12);
    expect(wrapAngle(3 * Math.PI)).toBeCloseTo(Math.PI, 12);
    expect(wrapAngle(2 * Math.PI)).toBeCloseTo(0, 12);
  });

  it("clamps to bounds", () => {
    expect(clamp(5, [-1, 1])).toBe(1);
    expect(clamp(-5, [-1, 1])).toBe(-1);
    expect(clamp(0.5, [-1, 1])).toBe(0.5);
  });
});
