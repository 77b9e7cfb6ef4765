/**
 * Control-panel markup builders. All functions here are pure string
 * producers so they can be tested without a DOM; main.ts owns the thin
 * event wiring.
 */

import type { HelloMessage } from "./schema.js";
import { argmax, type UiFrameView, type UiPoseState } from "./state.js";

const esc = (s: string) =>
  s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;").replace(/"/g, "&quot;");

export function renderSliders(state: UiPoseState): string {
  const joints = state.ranges
    .map((range, i) => {
      const value = state.angles[i] ?? 0;
      return (
        `<label class="slider-row">` +
        `<span class="slider-name">${esc(range.finger)} ${esc(range.joint)}</span>` +
        `<input type="range" data-joint="${i}" min="${range.min}" max="${range.max}" ` +
        `step="1" value="${value}"/>` +
        `<span class="slider-value">${value.toFixed(0)}&#176;</span>` +
        `</label>`
      );
    })
    .join("");
  const wristNames = ["roll", "pitch", "yaw"];
  const wrist = wristNames
    .map((name, axis) => {
      const value = state.wrist[axis] ?? 0;
      return (
        `<label class="slider-row">` +
        `<span class="slider-name">wrist ${name}</span>` +
        `<input type="range" data-wrist="${axis}" min="${state.wristRange[0]}" ` +
        `max="${state.wristRange[1]}" step="1" value="${value}"/>` +
        `<span class="slider-value">${value.toFixed(0)}&#176;</span>` +
        `</label>`
      );
    })
    .join("");
  return `<div class="sliders">${joints}${wrist}</div>`;
}

export function renderPresets(hello: HelloMessage, active: number | null): string {
  const buttons = hello.words
    .map((word, i) => {
      const cls = active === i ? "preset active" : "preset";
      const disabled = i >= hello.poses.length ? " disabled" : "";
      return `<button class="${cls}" data-preset="${i}"${disabled}>${esc(word)}</button>`;
    })
    .join("");
  return `<div class="presets">${buttons}</div>`;
}

/**
 * Probability bars show the raw sigmoid activations (they need not sum
 * to 1) with the argmax highlighted; bar width clamps at 100%.
 */
export function renderProbabilities(view: UiFrameView, words: string[]): string {
  if (view.probs.length === 0) {
    return `<div class="probs empty">no frames yet</div>`;
  }
  const top = argmax(view.probs);
  const rows = view.probs
    .map((p, i) => {
      const width = Math.min(Math.max(p, 0), 1) * 100;
      const cls = i === top ? "prob-row top" : "prob-row";
      return (
        `<div class="${cls}">` +
        `<span class="prob-word">${esc(words[i] ?? String(i))}</span>` +
        `<span class="prob-bar"><span class="prob-fill" style="width:${width.toFixed(1)}%"></span></span>` +
        `<span class="prob-value">${p.toFixed(3)}</span>` +
        `</div>`
      );
    })
    .join("");
  return `<div class="probs">${rows}</div>`;
}

export function renderTelemetry(view: UiFrameView): string {
  if (view.updates === 0) {
    return `<div class="telemetry empty">move a slider to sample the glove</div>`;
  }
  const volts = view.voltages.map((v) => v.toFixed(3)).join(" ");
  const codes = view.codes.join(" ");
  return (
    `<div class="telemetry">` +
    `<div class="word">predicted: <strong>${esc(view.word)}</strong></div>` +
    `<div class="latency">round trip ${view.latencyMs.toFixed(1)} ms</div>` +
    `<div class="volts">V: ${volts}</div>` +
    `<div class="codes">ADC: ${codes}</div>` +
    `</div>`
  );
}

export function renderBanner(status: string): string {
  const message: Record<string, string> = {
    connecting: "connecting to the glove backend&#8230;",
    connected: "connected",
    busy: "backend busy: another session is active",
    reconnecting: "connection lost, retrying&#8230;",
    stopped: "stopped",
  };
  return `<div class="banner banner-${esc(status)}">${message[status] ?? esc(status)}</div>`;
}
