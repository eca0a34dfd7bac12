import { readFile } from "node:fs/promises";

export interface FrameEntry {
  frame_id: number;
  tokens: string[];
}

export interface BatchEntry {
  batch_id: number;
  frames: FrameEntry[];
}

/** Parse and validate a framing manifest (frames.json). */
export async function readFramesManifest(path: string): Promise<BatchEntry[]> {
  let doc: unknown;
  try {
    doc = JSON.parse(await readFile(path, "utf-8"));
  } catch (err) {
    throw new Error(`${path}: not valid JSON: ${(err as Error).message}`);
  }
  if (!Array.isArray(doc)) {
    throw new Error(`${path}: manifest must be a JSON array of batch objects`);
  }
  return doc.map((entry, i) => {
    const batch = entry as Partial<BatchEntry>;
    if (typeof batch.batch_id !== "number" || !Array.isArray(batch.frames)) {
      throw new Error(`${path}: entry ${i} needs "batch_id" and "frames"`);
    }
    const frames = batch.frames.map((f) => {
      const frame = f as Partial<FrameEntry>;
      if (typeof frame.frame_id !== "number" || !Array.isArray(frame.tokens)) {
        throw new Error(`${path}: batch ${batch.batch_id} has a malformed frame`);
      }
      if (!frame.tokens.every((t) => typeof t === "string" && t.length > 0)) {
        throw new Error(
          `${path}: batch ${batch.batch_id} frame ${frame.frame_id}: tokens must be nonempty strings`,
        );
      }
      return { frame_id: frame.frame_id, tokens: frame.tokens as string[] };
    });
    return { batch_id: batch.batch_id, frames };
  });
}

/** All tokens of a batch joined by single spaces (the simulator's batch text rule). */
export function batchText(batch: BatchEntry): string {
  return batch.frames.flatMap((f) => f.tokens).join(" ");
}

/** Batch text with one frame's tokens removed. */
export function textWithoutFrame(batch: BatchEntry, frameIndex: number): string {
  return batch.frames
    .filter((_, i) => i !== frameIndex)
    .flatMap((f) => f.tokens)
    .join(" ");
}

/** Batch text with one token (by flat position) removed. */
export function textWithoutWord(batch: BatchEntry, wordIndex: number): string {
  const tokens = batch.frames.flatMap((f) => f.tokens);
  if (wordIndex < 0 || wordIndex >= tokens.length) {
    throw new Error(`word index ${wordIndex} out of range for ${tokens.length} tokens`);
  }
  return tokens.filter((_, i) => i !== wordIndex).join(" ");
}
