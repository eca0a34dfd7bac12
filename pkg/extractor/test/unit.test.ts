import assert from "node:assert/strict";
import { mkdtemp, writeFile } from "node:fs/promises";
import os from "node:os";
import path from "node:path";
import { test } from "node:test";

import { cosineSimilarity, semanticLoss } from "../src/loss.js";
import { batchText, readFramesManifest, textWithoutFrame, textWithoutWord } from "../src/frames.js";
import { main } from "../src/cli.js";

test("cosine similarity identities", () => {
  assert.equal(cosineSimilarity([1, 2, -3], [1, 2, -3]), 1);
  assert.equal(cosineSimilarity([1, 0], [0, 4]), 0);
  assert.equal(cosineSimilarity([1, 2], [-2, -4]), -1);
});

test("cosine similarity clamps rounding and rejects degenerate input", () => {
  const a = [1e-8, 1, 1e8];
  const threeA = a.map((x) => 3 * x);
  assert.equal(cosineSimilarity(a, threeA), 1);
  assert.throws(() => cosineSimilarity([0, 0], [1, 1]), /zero-norm/);
  assert.throws(() => cosineSimilarity([1], [1, 2]), /dimensions differ/);
});

test("semantic loss endpoints", () => {
  assert.equal(semanticLoss([2, 0], [5, 0]), 0);
  assert.equal(semanticLoss([1, 0], [0, 1]), 1);
  assert.equal(semanticLoss([1, 1], [-1, -1]), 2);
});

const MANIFEST = [
  {
    batch_id: 0,
    frames: [
      { frame_id: 0, tokens: ["It", "is", "an"] },
      { frame_id: 1, tokens: ["important", "step"] },
    ],
  },
];

test("frames manifest parsing and text construction", async () => {
  const dir = await mkdtemp(path.join(os.tmpdir(), "extractor-"));
  const file = path.join(dir, "frames.json");
  await writeFile(file, JSON.stringify(MANIFEST));
  const batches = await readFramesManifest(file);
  assert.equal(batches.length, 1);
  assert.equal(batchText(batches[0]), "It is an important step");
  assert.equal(textWithoutFrame(batches[0], 0), "important step");
  assert.equal(textWithoutFrame(batches[0], 1), "It is an");
  assert.equal(textWithoutWord(batches[0], 3), "It is an step");
  assert.throws(() => textWithoutWord(batches[0], 5), /out of range/);
});

test("frames manifest schema errors", async () => {
  const dir = await mkdtemp(path.join(os.tmpdir(), "extractor-"));
  const file = path.join(dir, "frames.json");
  await writeFile(file, JSON.stringify({ batch_id: 0 }));
  await assert.rejects(readFramesManifest(file), /JSON array/);
  await writeFile(file, JSON.stringify([{ batch_id: 0, frames: [{ frame_id: 0, tokens: [""] }] }]));
  await assert.rejects(readFramesManifest(file), /nonempty strings/);
  await writeFile(file, "not json");
  await assert.rejects(readFramesManifest(file), /not valid JSON/);
});

test("cli rejects bad invocations before touching any model", async () => {
  assert.equal(await main([]), 2);
  assert.equal(await main(["--frames", "x.json", "--out", "y", "--emit", "bogus"]), 2);
  assert.equal(await main(["--frames", "x.json", "--out", "y", "--pool", "max"]), 2);
  assert.equal(await main(["--frames", "x.json", "--out", "y", "--dtype", "q4"]), 2);
  assert.equal(await main(["--unknown-flag"]), 2);
});

test("cli reports missing manifest as a runtime error", async () => {
  assert.equal(await main(["--frames", "/nonexistent/frames.json", "--out", "/tmp/x.json"]), 1);
});
