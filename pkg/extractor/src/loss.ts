/** Cosine similarity of two equal-length vectors, clamped to [-1, 1]. */
export function cosineSimilarity(a: readonly number[], b: readonly number[]): number {
  if (a.length !== b.length) {
    throw new Error(`vector dimensions differ: ${a.length} vs ${b.length}`);
  }
  let dot = 0;
  let na = 0;
  let nb = 0;
  for (let i = 0; i < a.length; i++) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na === 0 || nb === 0) {
    throw new Error("zero-norm embedding has no direction");
  }
  const cos = dot / Math.sqrt(na * nb);
  return Math.max(-1, Math.min(1, cos));
}

/** Semantic loss: 1 minus cosine similarity; 0 identical, 2 antipodal. */
export function semanticLoss(a: readonly number[], b: readonly number[]): number {
  return 1 - cosineSimilarity(a, b);
}
