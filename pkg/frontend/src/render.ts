// Canvas rendering: side-view twin (drone body + arm from client-side FK),
// roll/pitch dials, torque/force strip charts, haptic pulse.

import { fkElbow, fkGrip, fkWrist } from "./kinematics.js";
import type { FrameMessage, WelcomeMessage } from "./protocol.js";
import type { CockpitSession } from "./session.js";

const HISTORY = 600; // strip-chart samples (~6 s at 100 Hz)

interface Trace {
  label: string;
  color: string;
  values: number[];
}

export class CockpitRenderer {
  private readonly ctx: CanvasRenderingContext2D;
  private torqueTraces: Trace[] = [
    { label: "shoulder", color: "#e4572e", values: [] },
    { label: "elbow", color: "#17bebb", values: [] },
    { label: "wrist", color: "#ffc914", values: [] },
  ];
  private forceTraces: Trace[] = [
    { label: "left", color: "#76b041", values: [] },
    { label: "right", color: "#a14ebf", values: [] },
  ];
  private lastTick = -1;

  constructor(private readonly canvas: HTMLCanvasElement) {
    const ctx = canvas.getContext("2d");
    if (!ctx) throw new Error("canvas 2d context unavailable");
    this.ctx = ctx;
  }

  draw(session: CockpitSession): void {
    const { ctx, canvas } = this;
    ctx.clearRect(0, 0, canvas.width, canvas.height);
    const frame = session.mailbox.take() ?? session.lastFrame;
    const welcome = session.welcome;
    if (!frame || !welcome) {
      ctx.fillStyle = "#888";
      ctx.font = "16px sans-serif";
      ctx.fillText("waiting for telemetry...", 20, 40);
      return;
    }
    if (frame.tick !== this.lastTick) {
      this.appendHistory(frame);
      this.lastTick = frame.tick;
    }
    this.drawSideView(frame, welcome);
    this.drawDials(frame);
    this.drawStrips(frame);
    this.drawHaptic(session);
  }

  private appendHistory(frame: FrameMessage): void {
    const torques = [frame.torques.t1, frame.torques.t2, frame.torques.t3];
    this.torqueTraces.forEach((trace, i) => {
      trace.values.push(torques[i]);
      if (trace.values.length > HISTORY) trace.values.shift();
    });
    const forces = [frame.forces.left, frame.forces.right];
    this.forceTraces.forEach((trace, i) => {
      trace.values.push(forces[i]);
      if (trace.values.length > HISTORY) trace.values.shift();
    });
  }

  private drawSideView(frame: FrameMessage, welcome: WelcomeMessage): void {
    const { ctx } = this;
    const panel = { x: 10, y: 10, w: 460, h: 330 };
    const scale = 260; // px per meter
    const originX = panel.x + 90;
    const originY = panel.y + 90;
    const toPx = (x: number, z: number) => ({
      px: originX + x * scale,
      py: originY - z * scale,
    });

    ctx.strokeStyle = "#444";
    ctx.strokeRect(panel.x, panel.y, panel.w, panel.h);

    // drone body, tilted by pitch
    ctx.save();
    ctx.translate(originX, originY);
    ctx.rotate(frame.drone.pitch);
    ctx.fillStyle = "#2b2d42";
    ctx.fillRect(-60, -12, 120, 12);
    ctx.fillRect(-70, -18, 18, 6);
    ctx.fillRect(52, -18, 18, 6);
    ctx.restore();

    // arm from client-side FK (drone frame, drawn under the body)
    const geom = welcome.geometry;
    const joints = frame.joints;
    const elbow = fkElbow(geom, joints);
    const wrist = fkWrist(geom, joints);
    const grip = fkGrip(geom, joints);
    ctx.strokeStyle = "#e4572e";
    ctx.lineWidth = 4;
    ctx.beginPath();
    ctx.moveTo(originX, originY);
    for (const point of [elbow, wrist, grip]) {
      const { px, py } = toPx(point.x, point.z);
      ctx.lineTo(px, py);
    }
    ctx.stroke();
    ctx.lineWidth = 1;

    for (const point of [elbow, wrist]) {
      const { px, py } = toPx(point.x, point.z);
      ctx.fillStyle = "#1d3557";
      ctx.beginPath();
      ctx.arc(px, py, 4, 0, Math.PI * 2);
      ctx.fill();
    }

    // gripper jaws: spread shrinks with grip_fraction
    const jaw = 0.05 * (1 - 0.8 * frame.grip_fraction) * scale;
    const gp = toPx(grip.x, grip.z);
    ctx.strokeStyle = "#222";
    ctx.beginPath();
    ctx.moveTo(gp.px - 4, gp.py - jaw / 2);
    ctx.lineTo(gp.px + 10, gp.py - jaw / 2);
    ctx.moveTo(gp.px - 4, gp.py + jaw / 2);
    ctx.lineTo(gp.px + 10, gp.py + jaw / 2);
    ctx.stroke();

    // object marker (world -> drone-frame, ignoring the small tilt)
    const objX = welcome.object.x - frame.drone.x;
    const objZ = welcome.object.z - frame.drone.z;
    const op = toPx(objX, objZ);
    ctx.fillStyle = "#76b041";
    ctx.fillRect(op.px - 7, op.py - 7, 14, 14);

    ctx.fillStyle = "#555";
    ctx.font = "12px sans-serif";
    ctx.fillText(
      `t=${frame.t.toFixed(2)}s  grip (${frame.grip_pose.x.toFixed(3)}, ` +
        `${frame.grip_pose.z.toFixed(3)})  fraction ${frame.grip_fraction.toFixed(2)}`,
      panel.x + 8, panel.y + panel.h - 10,
    );
  }

  private drawDial(cx: number, cy: number, radius: number, value: number,
                   label: string): void {
    const { ctx } = this;
    ctx.strokeStyle = "#444";
    ctx.beginPath();
    ctx.arc(cx, cy, radius, 0, Math.PI * 2);
    ctx.stroke();
    ctx.strokeStyle = "#e63946";
    ctx.lineWidth = 3;
    ctx.beginPath();
    ctx.moveTo(cx, cy);
    ctx.lineTo(cx + radius * Math.sin(value * 6), cy - radius * Math.cos(value * 6));
    ctx.stroke();
    ctx.lineWidth = 1;
    ctx.fillStyle = "#555";
    ctx.font = "12px sans-serif";
    const degrees = (value * 180) / Math.PI;
    ctx.fillText(`${label} ${degrees.toFixed(2)} deg`, cx - radius,
                 cy + radius + 14);
  }

  private drawDials(frame: FrameMessage): void {
    this.drawDial(530, 80, 42, frame.drone.roll, "roll");
    this.drawDial(650, 80, 42, frame.drone.pitch, "pitch");
  }

  private drawStrip(x: number, y: number, w: number, h: number,
                    traces: Trace[], scaleMax: number, title: string): void {
    const { ctx } = this;
    ctx.strokeStyle = "#444";
    ctx.strokeRect(x, y, w, h);
    ctx.fillStyle = "#555";
    ctx.font = "12px sans-serif";
    ctx.fillText(title, x + 4, y + 12);
    for (const trace of traces) {
      ctx.strokeStyle = trace.color;
      ctx.beginPath();
      trace.values.forEach((value, i) => {
        const px = x + (i / HISTORY) * w;
        const py = y + h - (Math.min(Math.abs(value), scaleMax) / scaleMax) * (h - 4);
        if (i === 0) ctx.moveTo(px, py);
        else ctx.lineTo(px, py);
      });
      ctx.stroke();
    }
  }

  private drawStrips(_frame: FrameMessage): void {
    this.drawStrip(480, 150, 300, 90, this.torqueTraces, 6.0, "|torque| N*m");
    this.drawStrip(480, 255, 300, 85, this.forceTraces, 1.0, "grip force");
  }

  private drawHaptic(session: CockpitSession): void {
    const { ctx } = this;
    const level = session.hapticLevel;
    ctx.fillStyle = "#555";
    ctx.font = "12px sans-serif";
    ctx.fillText("haptic", 712, 136);
    ctx.beginPath();
    ctx.arc(690, 120, 10 + 22 * level, 0, Math.PI * 2);
    ctx.fillStyle = `rgba(230, 57, 70, ${Math.min(0.15 + level, 1)})`;
    ctx.fill();
  }
}
