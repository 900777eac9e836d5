// Browser wiring: connect form, sliders, arrow keys, render loop.

import { CockpitRenderer } from "./render.js";
import { CockpitSession } from "./session.js";
import type { SliderName } from "./controls.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

let session: CockpitSession | null = null;

function setBanner(text: string, kind: "info" | "warn" | "error"): void {
  const banner = el<HTMLDivElement>("banner");
  banner.textContent = text;
  banner.className = `banner ${kind}`;
}

function bindSlider(name: SliderName | "grip"): void {
  const input = el<HTMLInputElement>(`slider-${name}`);
  const label = el<HTMLSpanElement>(`value-${name}`);
  input.addEventListener("input", () => {
    if (!session?.panel) return;
    const value = parseFloat(input.value);
    const applied = name === "grip"
      ? session.panel.setGrip(value)
      : session.panel.setSlider(name, value);
    label.textContent = applied.toFixed(2);
    input.value = String(applied); // reflect the clamp, like the server does
  });
}

async function connect(): Promise<void> {
  const url = el<HTMLInputElement>("server-url").value;
  const role = el<HTMLInputElement>("want-control").checked
    ? "control" as const : "observer" as const;
  session?.close();
  session = new CockpitSession(url, { role });
  setBanner("connecting...", "info");
  try {
    const welcome = await session.connect();
    if (session.versionMismatch) {
      setBanner(`protocol version mismatch (server ${welcome.protocol_version})`,
                "error");
      return;
    }
    if (session.roleRejected) {
      setBanner("control is taken: joined as observer", "warn");
    } else {
      setBanner(`connected as ${welcome.role}`, "info");
    }
    for (const name of ["theta", "beta", "alpha", "wrist_roll"] as const) {
      const input = el<HTMLInputElement>(`slider-${name}`);
      input.min = String(welcome.limits[name][0]);
      input.max = String(welcome.limits[name][1]);
      input.step = "0.01";
    }
    session.startPump();
  } catch (exc) {
    setBanner(`connection failed: ${exc}`, "error");
  }
}

function renderLoop(): void {
  const canvas = el<HTMLCanvasElement>("cockpit");
  const renderer = new CockpitRenderer(canvas);
  let last = performance.now();
  const tick = (now: number) => {
    if (session) {
      session.decayHaptic((now - last) / 1000);
      renderer.draw(session);
      if (session.connection === "hold") {
        setBanner("stream ended / stalled: arm holds position", "warn");
      }
      if (session.lastError) {
        setBanner(session.lastError, "warn");
        session.lastError = null;
      }
    }
    last = now;
    requestAnimationFrame(tick);
  };
  requestAnimationFrame(tick);
}

function bindKeys(): void {
  window.addEventListener("keydown", (event) => {
    if (!session?.panel) return;
    const map: Record<string, "left" | "right" | "up" | "down"> = {
      ArrowLeft: "left", ArrowRight: "right", ArrowUp: "up", ArrowDown: "down",
    };
    const direction = map[event.key];
    if (direction) {
      session.panel.pressArrow(direction);
      event.preventDefault();
    }
    if (event.key === " ") {
      session.panel.setGrip(session.panel.gripFraction > 0.5 ? 0.0 : 1.0);
      event.preventDefault();
    }
  });
}

el<HTMLButtonElement>("connect").addEventListener("click", () => void connect());
for (const name of ["theta", "beta", "alpha", "wrist_roll", "grip"] as const) {
  bindSlider(name);
}
bindKeys();
renderLoop();
