/** Deterministic PRNG (mulberry32) for property-style tests. */
export function makeRng(seed: number): () => number {
  let state = seed;
  return () => {
    state |= 0;
    state = (state + 0x6d2b79f5) | 0;
    let t = Math.imul(state ^ (state >>> 15), 1 | state);
    t = (t + Math.imul(t ^ (t >>> 7), 61 | t)) ^ t;
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

export function randomInt(rng: () => number, lo: number, hi: number): number {
  return lo + Math.floor(rng() * (hi - lo + 1));
}

export function randomArray(rng: () => number, n: number, lo: number, hi: number): number[] {
  return Array.from({ length: n }, () => lo + rng() * (hi - lo));
}

export const HELLO_FIXTURE = {
  type: "hello" as const,
  words: ["w0", "w1", "w2", "w3", "w4", "w5", "w6", "w7", "w8", "w9", "w10"],
  joints: [
    { finger: "thumb", joint: "mcp", min: 0, max: 90 },
    { finger: "thumb", joint: "ip", min: 0, max: 80 },
    { finger: "index", joint: "mcp", min: 0, max: 90 },
    { finger: "index", joint: "pip", min: 0, max: 110 },
    { finger: "index", joint: "dip", min: 0, max: 80 },
    { finger: "middle", joint: "mcp", min: 0, max: 90 },
    { finger: "middle", joint: "pip", min: 0, max: 110 },
    { finger: "middle", joint: "dip", min: 0, max: 80 },
    { finger: "ring", joint: "mcp", min: 0, max: 90 },
    { finger: "ring", joint: "pip", min: 0, max: 110 },
    { finger: "ring", joint: "dip", min: 0, max: 80 },
    { finger: "little", joint: "mcp", min: 0, max: 90 },
    { finger: "little", joint: "pip", min: 0, max: 110 },
    { finger: "little", joint: "dip", min: 0, max: 80 },
  ],
  poses: [
    { angles: new Array(14).fill(0), wrist: [0, 0, 0] },
    { angles: [60, 70, 80, 100, 70, 80, 100, 70, 80, 100, 70, 80, 100, 70], wrist: [0, 0, 0] },
    { angles: [30, 35, 45, 55, 40, 45, 55, 40, 45, 55, 40, 45, 55, 40], wrist: [0, 45, 0] },
  ],
  wrist_range: [-180, 180],
  version: "0.1.0",
};
