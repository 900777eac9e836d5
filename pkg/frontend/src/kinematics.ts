// Client-side forward kinematics of the planar arm, mirroring the server's
// chain exactly (shoulder -> elbow with the frame offset, forearm, grip
// segment). Used to draw the twin and to cross-check the server's pose.

import type { JointAngles, Pair } from "./protocol.js";

export interface Geometry {
  l1: number;
  l2: number;
  l3: number;
  l_dis: number;
}

export interface Point {
  x: number;
  z: number;
}

export function wrapAngle(a: number): number {
  let r = a % (2 * Math.PI);
  if (r <= -Math.PI) r += 2 * Math.PI;
  if (r > Math.PI) r -= 2 * Math.PI;
  return r;
}

export function fkElbow(geom: Geometry, q: JointAngles): Point {
  return {
    x: geom.l1 * Math.cos(q.theta) - geom.l_dis * Math.sin(q.theta),
    z: geom.l1 * Math.sin(q.theta) + geom.l_dis * Math.cos(q.theta),
  };
}

export function fkWrist(geom: Geometry, q: JointAngles): Point {
  const elbow = fkElbow(geom, q);
  const bend = q.beta - q.theta;
  return {
    x: elbow.x + geom.l2 * Math.cos(bend),
    z: elbow.z - geom.l2 * Math.sin(bend),
  };
}

export function fkGrip(geom: Geometry, q: JointAngles): Point & { phi: number } {
  const wrist = fkWrist(geom, q);
  const phi = q.alpha - q.beta + q.theta;
  return {
    x: wrist.x + geom.l3 * Math.cos(phi),
    z: wrist.z + geom.l3 * Math.sin(phi),
    phi: wrapAngle(phi),
  };
}

export function clamp(value: number, bounds: Pair): number {
  return Math.min(Math.max(value, bounds[0]), bounds[1]);
}

/** Largest coordinate mismatch between our FK and the server's grip pose. */
export function fkMismatch(
  geom: Geometry,
  joints: JointAngles,
  serverPose: { x: number; z: number },
): number {
  const ours = fkGrip(geom, joints);
  return Math.max(Math.abs(ours.x - serverPose.x), Math.abs(ours.z - serverPose.z));
}
