// Model-dependent tests: they download the default encoder (cached under
// .cache/) and, for the round trip, drive the Python simulator end to end.
// Behind a hub mirror set HF_ENDPOINT (and NODE_EXTRA_CA_CERTS for a private
// CA) before running. Set EXTRACTOR_SKIP_MODEL_TESTS=1 to skip explicitly.

import assert from "node:assert/strict";
import { execFile } from "node:child_process";
import { mkdtemp, readFile, writeFile } from "node:fs/promises";
import os from "node:os";
import path from "node:path";
import { before, test } from "node:test";
import { promisify } from "node:util";

import { configureModelEnv } from "../src/env.js";
import { Embedder } from "../src/embedder.js";
import {
  extractEmbeddings,
  extractImportance,
  extractionMeta,
  writeEmbeddingsFile,
  writeImportanceFile,
} from "../src/extract.js";
import { batchText, type BatchEntry } from "../src/frames.js";
import { cosineSimilarity } from "../src/loss.js";

const run = promisify(execFile);
const skip = process.env.EXTRACTOR_SKIP_MODEL_TESTS === "1";

const SENTENCE = "It is an important step towards equal rights for all passengers".split(" ");
const KEY_WORDS = new Set(["towards", "rights", "passengers"]);

let embedder: Embedder;

before(async () => {
  if (skip) return;
  configureModelEnv();
  embedder = await Embedder.create();
});

test("embedding the same text twice is bit-identical", { skip }, async () => {
  const text = "the committee has agreed a common position";
  const first = await embedder.embed(text);
  const second = await embedder.embed(text);
  assert.deepEqual(first, second);
  assert.ok(first.length > 0);
});

test("an embedding has cosine 1 with itself", { skip }, async () => {
  const vec = await embedder.embed("assistance at terminals becomes a right");
  assert.equal(cosineSimilarity(vec, vec), 1);
});

test("word-drop losses rank the key content words highly", { skip }, async () => {
  // one batch of eleven one-word frames: frame drop == word drop
  const batch: BatchEntry = {
    batch_id: 0,
    frames: SENTENCE.map((word, i) => ({ frame_id: i, tokens: [word] })),
  };
  const [record] = await extractImportance([batch], embedder);
  assert.equal(record.weights.length, SENTENCE.length);
  for (const w of record.weights) {
    assert.ok(w >= 0 && w <= 2, `loss ${w} outside [0, 2]`);
  }
  const ranked = record.weights
    .map((loss, i) => ({ word: SENTENCE[i], loss }))
    .sort((a, b) => b.loss - a.loss);
  const top3 = ranked.slice(0, 3).map((r) => r.word);
  const hits = top3.filter((w) => KEY_WORDS.has(w)).length;
  assert.ok(
    hits >= 2,
    `top-3 drop losses ${JSON.stringify(top3)} contain ${hits} of {towards, rights, passengers}`,
  );
});

test("a stopword frame weighs less than a content frame", { skip }, async () => {
  const batch: BatchEntry = {
    batch_id: 0,
    frames: [
      { frame_id: 0, tokens: ["passengers", "rights", "compensation", "terminal", "assistance"] },
      { frame_id: 1, tokens: ["it", "is", "of", "the", "a"] },
    ],
  };
  const [record] = await extractImportance([batch], embedder);
  assert.ok(
    record.weights[1] < record.weights[0],
    `stopword frame loss ${record.weights[1]} should fall below content frame loss ${record.weights[0]}`,
  );
});

async function pythonSimulator(): Promise<string | null> {
  try {
    await run("python3", ["-c", "import siac"]);
    return "python3";
  } catch {
    return null;
  }
}

test("extractor output drives a full simulator sweep", { skip }, async (t) => {
  const python = await pythonSimulator();
  if (!python) {
    t.skip("python3 with the siac package is not installed");
    return;
  }
  const dir = await mkdtemp(path.join(os.tmpdir(), "roundtrip-"));
  const corpus = path.join(dir, "corpus.txt");
  await writeFile(
    corpus,
    "The report concerns the rights of travellers who depend on coaches " +
      "and buses to reach work school and family across the union every day. " +
      SENTENCE.join(" ") + ".",
  );
  const frameCfg = path.join(dir, "frame.toml");
  await writeFile(
    frameCfg,
    `corpus_path = "${corpus}"\nwords_per_frame = 5\nframes_per_batch = 3\n` +
      `p_total_watts = [2.0, 5.0]\nseed = 3\n`,
  );
  await run(python, ["-m", "siac", "frame", "--config", frameCfg, "--out-dir", dir]);
  const frames = path.join(dir, "frames.json");

  // importance route: model-side drop losses consumed via importance_path
  const batches = JSON.parse(await readFile(frames, "utf-8")) as BatchEntry[];
  const importance = await extractImportance(batches, embedder);
  const impPath = path.join(dir, "importance_model.json");
  await writeImportanceFile(impPath, importance, extractionMeta(embedder, 0, importance.length));
  const impCfg = path.join(dir, "imp.toml");
  await writeFile(
    impCfg,
    `corpus_path = "${corpus}"\nimportance_path = "${impPath}"\nsemantic = false\n` +
      `words_per_frame = 5\nframes_per_batch = 3\np_total_watts = [2.0, 5.0]\nseed = 3\n`,
  );
  await run(python, ["-m", "siac", "sweep", "--config", impCfg, "--out-dir", path.join(dir, "imp-out")]);
  const impResults = await readFile(path.join(dir, "imp-out", "results.csv"), "utf-8");
  assert.match(impResults, /semantic/);
  assert.match(impResults, /semantic_loss/);

  // embeddings route: JSONL served through the simulator's file provider
  const records = await extractEmbeddings(batches, embedder);
  for (const batch of batches) {
    assert.ok(records.some((r) => r.text === batchText(batch)));
  }
  const embPath = path.join(dir, "embeddings.jsonl");
  await writeEmbeddingsFile(embPath, records, extractionMeta(embedder, records[0].vector.length, records.length));
  const embCfg = path.join(dir, "emb.toml");
  await writeFile(
    embCfg,
    `corpus_path = "${corpus}"\nprovider = "file:${embPath}"\n` +
      `words_per_frame = 5\nframes_per_batch = 3\np_total_watts = [2.0, 5.0]\nseed = 3\n`,
  );
  await run(python, ["-m", "siac", "sweep", "--config", embCfg, "--out-dir", path.join(dir, "emb-out")]);
  const embResults = await readFile(path.join(dir, "emb-out", "results.csv"), "utf-8");
  assert.match(embResults, /semantic/);
});
