/**
 * Wire schema for the glove backend's serve endpoint: line-delimited JSON,
 * one message per line. The zod validators here are the single source of
 * truth on the client; every outbound message passes through
 * encodeClientMessage, which refuses anything schema-invalid.
 */

import { z } from "zod";

export const JOINT_COUNT = 14;
export const WRIST_AXES = 3;

const angleArray = z.array(z.number().finite()).length(JOINT_COUNT);
const wristArray = z.array(z.number().finite()).length(WRIST_AXES);

// ---- client -> server ----

export const poseMessageSchema = z
  .object({
    type: z.literal("pose"),
    angles: angleArray,
    wrist: wristArray,
  })
  .strict();

export const presetMessageSchema = z
  .object({
    type: z.literal("preset"),
    gesture: z.number().int().nonnegative(),
  })
  .strict();

export const recordMessageSchema = z
  .object({
    type: z.literal("record"),
    label: z.number().int().nonnegative(),
    count: z.number().int().min(1).max(10000),
  })
  .strict();

export const clientMessageSchema = z.discriminatedUnion("type", [
  poseMessageSchema,
  presetMessageSchema,
  recordMessageSchema,
]);

export type PoseMessage = z.infer<typeof poseMessageSchema>;
export type PresetMessage = z.infer<typeof presetMessageSchema>;
export type RecordMessage = z.infer<typeof recordMessageSchema>;
export type ClientMessage = z.infer<typeof clientMessageSchema>;

// ---- server -> client ----

export const jointInfoSchema = z.object({
  finger: z.string(),
  joint: z.string(),
  min: z.number(),
  max: z.number(),
});

export const helloMessageSchema = z.object({
  type: z.literal("hello"),
  words: z.array(z.string()).min(1),
  joints: z.array(jointInfoSchema).length(JOINT_COUNT),
  poses: z.array(z.object({ angles: angleArray, wrist: wristArray })),
  wrist_range: z.array(z.number()).length(2),
  version: z.string(),
});

export const frameMessageSchema = z.object({
  type: z.literal("frame"),
  voltages: z.array(z.number()).length(JOINT_COUNT),
  codes: z.array(z.number().int()).length(JOINT_COUNT),
  probs: z.array(z.number()).min(1),
  word: z.string(),
});

export const recordedMessageSchema = z.object({
  type: z.literal("recorded"),
  label: z.number().int(),
  count: z.number().int(),
});

export const errorMessageSchema = z.object({
  type: z.literal("error"),
  reason: z.string(),
});

export const serverMessageSchema = z.discriminatedUnion("type", [
  helloMessageSchema,
  frameMessageSchema,
  recordedMessageSchema,
  errorMessageSchema,
]);

export type HelloMessage = z.infer<typeof helloMessageSchema>;
export type FrameMessage = z.infer<typeof frameMessageSchema>;
export type RecordedMessage = z.infer<typeof recordedMessageSchema>;
export type ErrorMessage = z.infer<typeof errorMessageSchema>;
export type ServerMessage = z.infer<typeof serverMessageSchema>;

/** Serialize an outbound message, enforcing the schema. */
export function encodeClientMessage(message: ClientMessage): string {
  const checked = clientMessageSchema.parse(message);
  return JSON.stringify(checked) + "\n";
}

/**
 * Parse one line from the server. Returns null (with a console diagnostic)
 * for anything malformed; the view layer simply ignores such lines.
 */
export function parseServerLine(line: string): ServerMessage | null {
  let raw: unknown;
  try {
    raw = JSON.parse(line);
  } catch {
    console.warn("hallglove-ui: unparseable server line", line.slice(0, 120));
    return null;
  }
  const result = serverMessageSchema.safeParse(raw);
  if (!result.success) {
    console.warn("hallglove-ui: schema-invalid server message", result.error.issues[0]);
    return null;
  }
  return result.data;
}
