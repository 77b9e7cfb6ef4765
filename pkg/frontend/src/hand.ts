/**
 * 2D schematic hand: each finger is a chain of articulated segments drawn
 * in its own side-view column (flexion curls the chain), the wrist is a
 * rotated palm block. Pure function of the pose state; identical input
 * produces an identical SVG string.
 */

import type { UiPoseState } from "./state.js";

const FINGERS: { name: string; joints: number[]; lengths: number[]; x: number }[] = [
  { name: "thumb", joints: [0, 1], lengths: [34, 26], x: 28 },
  { name: "index", joints: [2, 3, 4], lengths: [34, 24, 16], x: 76 },
  { name: "middle", joints: [5, 6, 7], lengths: [38, 26, 17], x: 124 },
  { name: "ring", joints: [8, 9, 10], lengths: [35, 24, 16], x: 172 },
  { name: "little", joints: [11, 12, 13], lengths: [28, 19, 13], x: 220 },
];

const WIDTH = 260;
const HEIGHT = 210;
const BASE_Y = 150;

function fingerPath(state: UiPoseState, joints: number[], lengths: number[], baseX: number): string {
  let x = baseX;
  let y = BASE_Y;
  // 0 deg points straight up; each joint adds its flexion to the curl.
  let direction = -90;
  const points = [`${x.toFixed(2)},${y.toFixed(2)}`];
  for (let s = 0; s < joints.length; s++) {
    const jointIndex = joints[s] ?? 0;
    direction += state.angles[jointIndex] ?? 0;
    const rad = (direction * Math.PI) / 180;
    x += (lengths[s] ?? 0) * Math.cos(rad);
    y += (lengths[s] ?? 0) * Math.sin(rad);
    points.push(`${x.toFixed(2)},${y.toFixed(2)}`);
  }
  return points.join(" ");
}

export function renderHandSvg(state: UiPoseState): string {
  const fingers = FINGERS.map((finger) => {
    const path = fingerPath(state, finger.joints, finger.lengths, finger.x);
    return (
      `<polyline class="finger finger-${finger.name}" points="${path}" ` +
      `fill="none" stroke="#3b82f6" stroke-width="7" stroke-linecap="round" ` +
      `stroke-linejoin="round"/>`
    );
  }).join("");
  const [roll, pitch, yaw] = state.wrist;
  const palm =
    `<g transform="rotate(${roll.toFixed(2)} 130 175)">` +
    `<rect class="palm" x="55" y="155" width="180" height="40" rx="10" fill="#1e3a5f"/>` +
    `</g>`;
  const label =
    `<text x="130" y="206" text-anchor="middle" font-size="9" fill="#7a8aa0">` +
    `roll ${roll.toFixed(0)}&#176; pitch ${pitch.toFixed(0)}&#176; yaw ${yaw.toFixed(0)}&#176;</text>`;
  return (
    `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${WIDTH} ${HEIGHT}" ` +
    `class="hand-svg" role="img" aria-label="virtual hand">` +
    palm +
    fingers +
    label +
    `</svg>`
  );
}
