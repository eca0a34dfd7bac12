import { parseArgs } from "node:util";

import { configureModelEnv } from "./env.js";
import { Embedder, DEFAULT_DTYPE, DEFAULT_MODEL, DEFAULT_POOLING, DEFAULT_REVISION, type Dtype, type Pooling } from "./embedder.js";
import {
  extractEmbeddings,
  extractImportance,
  extractionMeta,
  writeEmbeddingsFile,
  writeImportanceFile,
} from "./extract.js";
import { readFramesManifest } from "./frames.js";

const USAGE = `extract --frames frames.json --out FILE [options]

Options:
  --frames PATH      framing manifest produced by the simulator's frame stage
  --out PATH         output file (embeddings JSONL or importance JSON)
  --emit KIND        embeddings | importance (default: importance)
  --model NAME       model id (default: ${DEFAULT_MODEL})
  --pool RULE        mean | cls pooling over final-layer states (default: ${DEFAULT_POOLING})
  --dtype KIND       fp32 | q8 weights (default: ${DEFAULT_DTYPE})
  --revision REV     model revision (default: ${DEFAULT_REVISION})
  --words            also embed per-word drop texts (embeddings mode)

Set HF_ENDPOINT to download through a hub mirror and NODE_EXTRA_CA_CERTS if
that mirror uses a private CA. Downloads are cached under .cache/.
`;

export async function main(argv: string[]): Promise<number> {
  let args;
  try {
    args = parseArgs({
      args: argv,
      options: {
        frames: { type: "string" },
        out: { type: "string" },
        emit: { type: "string", default: "importance" },
        model: { type: "string", default: DEFAULT_MODEL },
        pool: { type: "string", default: DEFAULT_POOLING },
        dtype: { type: "string", default: DEFAULT_DTYPE },
        revision: { type: "string", default: DEFAULT_REVISION },
        words: { type: "boolean", default: false },
        help: { type: "boolean", default: false },
      },
    }).values;
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    return 2;
  }
  if (args.help) {
    console.log(USAGE);
    return 0;
  }
  if (!args.frames || !args.out) {
    console.error("error: --frames and --out are required\n");
    console.error(USAGE);
    return 2;
  }
  if (args.emit !== "embeddings" && args.emit !== "importance") {
    console.error(`error: --emit must be embeddings or importance, got ${args.emit}`);
    return 2;
  }
  if (args.pool !== "mean" && args.pool !== "cls") {
    console.error(`error: --pool must be mean or cls, got ${args.pool}`);
    return 2;
  }
  if (args.dtype !== "fp32" && args.dtype !== "q8") {
    console.error(`error: --dtype must be fp32 or q8, got ${args.dtype}`);
    return 2;
  }

  try {
    configureModelEnv();
    const batches = await readFramesManifest(args.frames);
    if (batches.length === 0) {
      console.error(`error: ${args.frames}: manifest holds no batches`);
      return 1;
    }
    const embedder = await Embedder.create({
      model: args.model,
      pooling: args.pool as Pooling,
      dtype: args.dtype as Dtype,
      revision: args.revision,
    });
    if (args.emit === "embeddings") {
      const records = await extractEmbeddings(batches, embedder, args.words);
      const meta = extractionMeta(embedder, records[0]?.vector.length ?? 0, records.length);
      await writeEmbeddingsFile(args.out, records, meta);
      console.log(`${args.out}: ${records.length} embeddings, dimension ${meta.dimension}`);
    } else {
      const records = await extractImportance(batches, embedder);
      const probe = await embedder.embed("dimension probe");
      const meta = extractionMeta(embedder, probe.length, records.length);
      await writeImportanceFile(args.out, records, meta);
      console.log(`${args.out}: importance for ${records.length} batches`);
    }
    return 0;
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    return 1;
  }
}
