import { pipeline, type FeatureExtractionPipeline } from "@huggingface/transformers";

export type Pooling = "mean" | "cls";
export type Dtype = "fp32" | "q8";

export interface EmbedderOptions {
  model: string;
  pooling: Pooling;
  dtype: Dtype;
  revision: string;
}

export const DEFAULT_MODEL = "Xenova/bert-base-uncased";
export const DEFAULT_POOLING: Pooling = "mean";
export const DEFAULT_DTYPE: Dtype = "q8";
export const DEFAULT_REVISION = "main";

/**
 * Sentence embedder over a pretrained bidirectional encoder: final-layer
 * token states pooled to one vector (mean pooling by default, CLS optional).
 * Inference mode only, so the same text always embeds to the same vector
 * for a fixed model revision and dtype.
 */
export class Embedder {
  private constructor(
    private readonly extractor: FeatureExtractionPipeline,
    readonly options: EmbedderOptions,
  ) {}

  static async create(options: Partial<EmbedderOptions> = {}): Promise<Embedder> {
    const resolved: EmbedderOptions = {
      model: options.model ?? DEFAULT_MODEL,
      pooling: options.pooling ?? DEFAULT_POOLING,
      dtype: options.dtype ?? DEFAULT_DTYPE,
      revision: options.revision ?? DEFAULT_REVISION,
    };
    const extractor = await pipeline("feature-extraction", resolved.model, {
      dtype: resolved.dtype,
      revision: resolved.revision,
    });
    return new Embedder(extractor, resolved);
  }

  async embed(text: string): Promise<number[]> {
    const output = await this.extractor(text, {
      pooling: this.options.pooling,
      normalize: false,
    });
    return Array.from(output.data as Float32Array, Number);
  }
}
