/**
 * Browser entry point: wires the session to the DOM panel. The page talks
 * to `hallglove serve` through a WebSocket-to-TCP bridge; pass the bridge
 * URL as ?ws=ws://host:port (defaults to ws://127.0.0.1:7711).
 */

import { renderHandSvg } from "./hand.js";
import {
  renderBanner,
  renderPresets,
  renderProbabilities,
  renderSliders,
  renderTelemetry,
} from "./panel.js";
import type { HelloMessage } from "./schema.js";
import { Session, type SessionStatus } from "./session.js";
import {
  applyFrame,
  applyPresetPose,
  emptyFrameView,
  initialPoseState,
  setJointAngle,
  setWristAngle,
  type UiFrameView,
  type UiPoseState,
} from "./state.js";
import { webSocketTransport } from "./transport.js";

function query(id: string): HTMLElement {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing #${id}`);
  return el;
}

export function mount(root: Document = document): Session {
  const params = new URLSearchParams(root.defaultView?.location.search ?? "");
  const url = params.get("ws") ?? "ws://127.0.0.1:7711";

  let hello: HelloMessage | null = null;
  let pose: UiPoseState | null = null;
  let view: UiFrameView = emptyFrameView();
  let status: SessionStatus = "connecting";

  const banner = query("banner");
  const handBox = query("hand");
  const slidersBox = query("sliders");
  const presetsBox = query("presets");
  const probsBox = query("probs");
  const telemetryBox = query("telemetry");
  const recordForm = query("record-form") as HTMLFormElement;

  const redraw = () => {
    banner.innerHTML = renderBanner(status);
    if (!hello || !pose) return;
    handBox.innerHTML = renderHandSvg(pose);
    slidersBox.innerHTML = renderSliders(pose);
    presetsBox.innerHTML = renderPresets(hello, pose.activePreset);
    probsBox.innerHTML = renderProbabilities(view, hello.words);
    telemetryBox.innerHTML = renderTelemetry(view);
  };

  const session = new Session(webSocketTransport(url), {
    onStatus(next) {
      status = next;
      redraw();
    },
    onHello(message) {
      hello = message;
      pose = initialPoseState(message);
      view = emptyFrameView();
      redraw();
      session.updatePose(pose.angles, pose.wrist);
    },
    onFrame(frame, latencyMs) {
      view = applyFrame(view, frame, latencyMs);
      redraw();
    },
    onRecorded(message) {
      telemetryBox.insertAdjacentHTML(
        "beforeend",
        `<div class="recorded">stored ${message.count} samples for class ${message.label}</div>`,
      );
    },
    onErrorReply(reason) {
      console.warn("backend error:", reason);
      banner.innerHTML = renderBanner(status) + `<div class="banner-error">${reason}</div>`;
    },
  });

  slidersBox.addEventListener("input", (event) => {
    const target = event.target as HTMLInputElement;
    if (!pose) return;
    if (target.dataset.joint !== undefined) {
      pose = setJointAngle(pose, Number(target.dataset.joint), Number(target.value));
    } else if (target.dataset.wrist !== undefined) {
      pose = setWristAngle(pose, Number(target.dataset.wrist) as 0 | 1 | 2, Number(target.value));
    } else {
      return;
    }
    handBox.innerHTML = renderHandSvg(pose);
    session.updatePose(pose.angles, pose.wrist);
  });

  presetsBox.addEventListener("click", (event) => {
    const target = event.target as HTMLElement;
    const preset = target.dataset.preset;
    if (preset === undefined || !hello || !pose) return;
    pose = applyPresetPose(pose, hello, Number(preset));
    session.applyPreset(Number(preset));
    redraw();
  });

  recordForm.addEventListener("submit", (event) => {
    event.preventDefault();
    const label = Number((query("record-label") as HTMLInputElement).value);
    const count = Number((query("record-count") as HTMLInputElement).value);
    if (Number.isInteger(label) && Number.isInteger(count) && count > 0) {
      session.record(label, count);
    }
  });

  void session.start();
  redraw();
  return session;
}

if (typeof document !== "undefined" && document.getElementById("banner")) {
  mount();
}
