import { writeFile } from "node:fs/promises";

import { Embedder } from "./embedder.js";
import { batchText, textWithoutFrame, textWithoutWord, type BatchEntry } from "./frames.js";
import { semanticLoss } from "./loss.js";

export interface EmbeddingRecord {
  text: string;
  vector: number[];
}

export interface ImportanceRecord {
  batch_id: number;
  weights: number[];
  source: string;
}

export interface ExtractionMeta {
  model: string;
  revision: string;
  pooling: string;
  dtype: string;
  dimension: number;
  records: number;
}

/**
 * Embed every text the simulator's file-backed provider will look up for
 * these batches: the full batch text and, per frame, the text with that
 * frame removed. With `includeWordDrops` the per-word drop texts are added
 * so single-word importance queries resolve too. Texts are deduplicated;
 * lookup is exact-match on the emitted string.
 */
export async function extractEmbeddings(
  batches: BatchEntry[],
  embedder: Embedder,
  includeWordDrops = false,
): Promise<EmbeddingRecord[]> {
  const texts: string[] = [];
  const seen = new Set<string>();
  const push = (text: string) => {
    if (!seen.has(text)) {
      seen.add(text);
      texts.push(text);
    }
  };
  for (const batch of batches) {
    push(batchText(batch));
    batch.frames.forEach((_, i) => push(textWithoutFrame(batch, i)));
    if (includeWordDrops) {
      const n = batch.frames.reduce((acc, f) => acc + f.tokens.length, 0);
      for (let i = 0; i < n; i++) {
        push(textWithoutWord(batch, i));
      }
    }
  }
  const records: EmbeddingRecord[] = [];
  for (const text of texts) {
    records.push({ text, vector: await embedder.embed(text) });
  }
  return records;
}

/**
 * Frame importance by drop-loss, computed model-side: weight of frame i is
 * the semantic loss between the batch text and the batch text without that
 * frame. A single-frame batch whose reduced text the model rejects gets the
 * maximal loss 2, mirroring the simulator's degenerate-case rule.
 */
export async function extractImportance(
  batches: BatchEntry[],
  embedder: Embedder,
): Promise<ImportanceRecord[]> {
  const records: ImportanceRecord[] = [];
  for (const batch of batches) {
    const full = await embedder.embed(batchText(batch));
    const weights: number[] = [];
    for (let i = 0; i < batch.frames.length; i++) {
      try {
        weights.push(semanticLoss(full, await embedder.embed(textWithoutFrame(batch, i))));
      } catch {
        weights.push(2.0);
      }
    }
    records.push({ batch_id: batch.batch_id, weights, source: "semantic" });
  }
  return records;
}

export function extractionMeta(embedder: Embedder, dimension: number, records: number): ExtractionMeta {
  return {
    model: embedder.options.model,
    revision: embedder.options.revision,
    pooling: embedder.options.pooling,
    dtype: embedder.options.dtype,
    dimension,
    records,
  };
}

/** JSON-lines embedding file plus a .meta.json sidecar recording the run. */
export async function writeEmbeddingsFile(path: string, records: EmbeddingRecord[], meta: ExtractionMeta): Promise<void> {
  const body = records.map((r) => JSON.stringify(r)).join("\n") + "\n";
  await writeFile(path, body, "utf-8");
  await writeFile(`${path}.meta.json`, JSON.stringify(meta, null, 1) + "\n", "utf-8");
}

/** Importance file in the simulator's schema plus a .meta.json sidecar. */
export async function writeImportanceFile(path: string, records: ImportanceRecord[], meta: ExtractionMeta): Promise<void> {
  await writeFile(path, JSON.stringify(records, null, 1) + "\n", "utf-8");
  await writeFile(`${path}.meta.json`, JSON.stringify(meta, null, 1) + "\n", "utf-8");
}
