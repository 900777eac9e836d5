// Operator input state: joint sliders, grip slider, arrow-key jog queue.
// Produces command bodies at the configured cadence with strictly
// increasing timestamps; slider values are clamped to the joint limits
// client-side, mirroring the server's clamp.

import { clamp } from "./kinematics.js";
import type { CommandBody, WelcomeMessage } from "./protocol.js";

export type SliderName = "theta" | "beta" | "alpha" | "wrist_roll";

export interface JogStep {
  dx: number;
  dz: number;
}

export class ControlPanel {
  readonly limits: WelcomeMessage["limits"];
  readonly cadenceHz: number;
  jogStep: number;
  private readonly maxStep: number;
  private sliders: Record<SliderName, number>;
  private grip = 0.0;
  private jogQueue: JogStep[] = [];
  private slidersDirty = false;
  private gripDirty = false;
  private pristine = true; // no slider touched yet: sync from telemetry
  private lastSent = -Infinity;
  private lastTimestamp = -Infinity;

  constructor(welcome: WelcomeMessage, jogStep = 0.02) {
    this.limits = welcome.limits;
    this.cadenceHz = welcome.command_rate_hz;
    this.maxStep = welcome.jog_max_step;
    this.jogStep = Math.min(jogStep, this.maxStep);
    this.sliders = { theta: 0.0, beta: 0.0, alpha: 0.0, wrist_roll: 0.0 };
  }

  /** Align untouched sliders with the arm's actual joints (first frame). */
  syncIfPristine(joints: Record<SliderName, number>): void {
    if (!this.pristine) return;
    for (const name of Object.keys(this.sliders) as SliderName[]) {
      this.sliders[name] = clamp(joints[name], this.limits[name]);
    }
  }

  setSlider(name: SliderName, value: number): number {
    const clamped = clamp(value, this.limits[name]);
    this.pristine = false;
    if (clamped !== this.sliders[name]) {
      this.sliders[name] = clamped;
      this.slidersDirty = true;
    }
    return clamped;
  }

  setSliders(values: Partial<Record<SliderName, number>>): void {
    for (const [name, value] of Object.entries(values)) {
      this.setSlider(name as SliderName, value as number);
    }
  }

  setGrip(fraction: number): number {
    const clamped = Math.min(Math.max(fraction, 0), 1);
    if (clamped !== this.grip) {
      this.grip = clamped;
      this.gripDirty = true;
    }
    return clamped;
  }

  get gripFraction(): number {
    return this.grip;
  }

  sliderTargets(): Record<SliderName, number> {
    return { ...this.sliders };
  }

  /** Queue one arrow-key step: "right"/"left" move along x, "up"/"down" along z. */
  pressArrow(direction: "left" | "right" | "up" | "down"): void {
    const step = this.jogStep;
    const jog: JogStep =
      direction === "left" ? { dx: -step, dz: 0 }
      : direction === "right" ? { dx: step, dz: 0 }
      : direction === "up" ? { dx: 0, dz: step }
      : { dx: 0, dz: -step };
    this.jogQueue.push(jog);
  }

  get pendingJogs(): number {
    return this.jogQueue.length;
  }

  /**
   * The next command due at time `now` (seconds), or null when the cadence
   * interval has not elapsed or there is nothing new to say. Jog steps
   * drain first, one per command; slider changes ride a teleop command
   * with joint targets; a grip-only change is sent without joint targets
   * so it never disturbs the pose. Timestamps strictly increase.
   */
  nextCommand(now: number): Omit<CommandBody, "type" | "protocol_version"> | null {
    if (now - this.lastSent < 1 / this.cadenceHz - 1e-9) return null;
    const timestamp = Math.max(now, this.lastTimestamp + 1e-6);

    const jog = this.jogQueue.shift();
    if (jog !== undefined) {
      this.lastSent = now;
      this.lastTimestamp = timestamp;
      return {
        mode: "jog",
        timestamp,
        cartesian_step: {
          dx: clamp(jog.dx, [-this.maxStep, this.maxStep]),
          dz: clamp(jog.dz, [-this.maxStep, this.maxStep]),
        },
        grip_fraction: this.grip,
      };
    }
    if (this.slidersDirty) {
      this.slidersDirty = false;
      this.gripDirty = false;
      this.lastSent = now;
      this.lastTimestamp = timestamp;
      return {
        mode: "teleop",
        timestamp,
        joint_targets: { ...this.sliders },
        grip_fraction: this.grip,
      };
    }
    if (this.gripDirty) {
      this.gripDirty = false;
      this.lastSent = now;
      this.lastTimestamp = timestamp;
      return { mode: "teleop", timestamp, grip_fraction: this.grip };
    }
    return null;
  }
}
