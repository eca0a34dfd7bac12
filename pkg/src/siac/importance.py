"""Per-frame importance weights.

Two scorers produce the weight vector the allocator consumes: a count-based
scorer that sums binary important-word labels inside each frame (with majority
or averaging fusion across repeated labelings), and an embedding scorer that
weighs a frame by the semantic loss its removal causes.

Scorers are pure given a provider. They may be called from concurrent workers
only with a provider whose ``embed`` tolerates concurrent calls (the bundled
stub does); wrap other providers in a serializing adapter before sharing.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .corpus import Batch, tokenize
from .embeddings import EmbeddingProvider
from .errors import DegenerateEmbeddingError, LengthMismatchError, ParseError

KNOWN_SOURCES = ("count", "semantic", "custom")


@dataclass(frozen=True)
class WordLabeling:
    """Per-token scores in [0, 1], aligned with a batch's tokens."""

    values: tuple[float, ...]

    def __post_init__(self):
        for v in self.values:
            if not (0.0 <= v <= 1.0):
                raise ValueError(f"labeling values must lie in [0, 1], got {v}")

    def __len__(self) -> int:
        return len(self.values)

    @property
    def is_binary(self) -> bool:
        return all(v in (0.0, 1.0) for v in self.values)


@dataclass
class ImportanceVector:
    """Nonnegative per-frame weights, tagged with the scorer that produced them."""

    weights: np.ndarray
    source: str
    batch_id: int | None = None

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float)
        if self.weights.ndim != 1:
            raise ValueError("weights must be one-dimensional")
        if not np.all(np.isfinite(self.weights)):
            raise ValueError("weights must be finite")
        if np.any(self.weights < 0):
            raise ValueError("weights must be nonnegative")

    def __len__(self) -> int:
        return int(self.weights.size)


def _check_fusable(labelings: list[WordLabeling]) -> int:
    if not labelings:
        raise ValueError("at least one labeling required")
    length = len(labelings[0])
    for i, lab in enumerate(labelings):
        if len(lab) != length:
            raise LengthMismatchError(
                f"labeling {i} has {len(lab)} values, expected {length}"
            )
        if not lab.is_binary:
            raise ValueError(f"labeling {i} is not binary")
    return length


def fuse_majority(labelings: list[WordLabeling]) -> WordLabeling:
    """Per position, 1 iff strictly more than half the labelings say 1.

    Ties (possible only with an even number of labelings) resolve to 0, the
    conservative non-important side.
    """
    length = _check_fusable(labelings)
    n = len(labelings)
    fused = []
    for pos in range(length):
        ones = sum(lab.values[pos] for lab in labelings)
        fused.append(1.0 if ones * 2 > n else 0.0)
    return WordLabeling(tuple(fused))


def fuse_average(labelings: list[WordLabeling]) -> WordLabeling:
    """Per-position arithmetic mean of the labelings."""
    length = _check_fusable(labelings)
    n = len(labelings)
    return WordLabeling(
        tuple(sum(lab.values[pos] for lab in labelings) / n for pos in range(length))
    )


def frame_importance_count(labeling: WordLabeling, batch: Batch) -> ImportanceVector:
    """Weight of frame i = sum of label values over the frame's token positions.

    Accepts fractional labelings so averaged fusion output works unchanged.
    """
    if len(labeling) != batch.token_count:
        raise LengthMismatchError(
            f"labeling covers {len(labeling)} tokens but batch {batch.batch_id} "
            f"has {batch.token_count}"
        )
    weights = [
        sum(labeling.values[start:stop]) for start, stop in batch.frame_spans()
    ]
    return ImportanceVector(np.array(weights), "count", batch.batch_id)


def semantic_similarity(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine of two embeddings, clamped to [-1, 1] against rounding."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise LengthMismatchError(f"embedding dimensions differ: {a.shape} vs {b.shape}")
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na < 1e-300 or nb < 1e-300:
        raise DegenerateEmbeddingError("zero-norm embedding has no direction")
    cos = float(np.dot(a, b) / (na * nb))
    return max(-1.0, min(1.0, cos))


def semantic_loss(a: np.ndarray, b: np.ndarray) -> float:
    """1 minus cosine similarity; 0 for identical directions, 2 for antipodal."""
    return 1.0 - semantic_similarity(a, b)


def word_importance(text: str, drop_index: int, provider: EmbeddingProvider) -> float:
    """Semantic loss caused by removing one token from the text.

    The reduced text is the remaining tokens joined by single spaces.
    """
    tokens = tokenize(text)
    if not 0 <= drop_index < len(tokens):
        raise IndexError(f"drop_index {drop_index} out of range for {len(tokens)} tokens")
    reduced = " ".join(t.text for i, t in enumerate(tokens) if i != drop_index)
    return semantic_loss(provider.embed(text), provider.embed(reduced))


def frame_importance_semantic(batch: Batch, provider: EmbeddingProvider) -> ImportanceVector:
    """Weight of frame i = semantic loss between the batch text and the batch
    text with frame i's tokens removed.

    The whole batch is the context because the batch is the transmission unit.
    If removing the only frame leaves empty text and the provider rejects it,
    the weight is the maximal loss 2.
    """
    if batch.n_frames == 0:
        raise ValueError("batch has no frames")
    texts = [t.text for f in batch.frames for t in f.tokens]
    full = provider.embed(" ".join(texts))
    weights = []
    for start, stop in batch.frame_spans():
        remaining = texts[:start] + texts[stop:]
        reduced_text = " ".join(remaining)
        if not remaining:
            try:
                reduced = provider.embed(reduced_text)
            except Exception:
                weights.append(2.0)
                continue
        else:
            reduced = provider.embed(reduced_text)
        weights.append(semantic_loss(full, reduced))
    return ImportanceVector(np.array(weights), "semantic", batch.batch_id)


def read_labeling_file(path) -> tuple[list[str], list[WordLabeling]]:
    """Parse a labeling file: {"tokens": [...], "labelings": [[0|1, ...], ...]}.

    Every labeling must be binary and cover exactly the token list.
    """
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or "tokens" not in doc or "labelings" not in doc:
        raise ParseError(f"{path}: labeling files need 'tokens' and 'labelings'")
    tokens = doc["tokens"]
    if not isinstance(tokens, list) or not all(isinstance(t, str) and t for t in tokens):
        raise ParseError(f"{path}: 'tokens' must be a list of nonempty strings")
    rows = doc["labelings"]
    if not isinstance(rows, list) or not rows:
        raise ParseError(f"{path}: at least one labeling required")
    labelings = []
    for i, row in enumerate(rows):
        if not isinstance(row, list):
            raise ParseError(f"{path}: labeling {i} is not a list")
        if len(row) != len(tokens):
            raise LengthMismatchError(
                f"{path}: labeling {i} has {len(row)} values for {len(tokens)} tokens"
            )
        values = []
        for v in row:
            if isinstance(v, bool) or not isinstance(v, (int, float)) or v not in (0, 1):
                raise ParseError(
                    f"{path}: labeling {i} holds {v!r}; binary labelings allow only 0 and 1"
                )
            values.append(float(v))
        labelings.append(WordLabeling(tuple(values)))
    return tokens, labelings


def load_labelings(path) -> list[WordLabeling]:
    """Load the binary labelings of a labeling file (token list discarded)."""
    return read_labeling_file(path)[1]


def _importance_from_obj(obj, path) -> ImportanceVector:
    if not isinstance(obj, dict) or "weights" not in obj or "source" not in obj:
        raise ParseError(f"{path}: importance entries need 'batch_id', 'weights', 'source'")
    weights = obj["weights"]
    if not isinstance(weights, list) or not weights:
        raise ParseError(f"{path}: 'weights' must be a nonempty list")
    for v in weights:
        if not isinstance(v, (int, float)) or isinstance(v, bool) or not math.isfinite(v):
            raise ParseError(f"{path}: weight {v!r} is not a finite number")
        if v < 0:
            raise ParseError(f"{path}: negative weight {v!r}")
    source = obj["source"]
    if not isinstance(source, str) or not source:
        raise ParseError(f"{path}: 'source' must be a nonempty string")
    batch_id = obj.get("batch_id")
    if batch_id is not None and not isinstance(batch_id, int):
        raise ParseError(f"{path}: 'batch_id' must be an integer")
    return ImportanceVector(np.array(weights, dtype=float), source, batch_id)


def load_importance(path) -> ImportanceVector:
    """Load a single-batch importance file: {"batch_id", "weights", "source"}."""
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: not valid JSON: {exc}") from exc
    if isinstance(doc, list):
        raise ParseError(f"{path}: holds multiple entries; use load_importance_file")
    return _importance_from_obj(doc, path)


def load_importance_file(path) -> list[ImportanceVector]:
    """Load an importance file holding either one object or an array of them."""
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: not valid JSON: {exc}") from exc
    entries = doc if isinstance(doc, list) else [doc]
    return [_importance_from_obj(obj, path) for obj in entries]


def write_importance_file(vectors: list[ImportanceVector], path) -> None:
    doc = [
        {
            "batch_id": v.batch_id,
            "weights": [float(x) for x in v.weights],
            "source": v.source,
        }
        for v in vectors
    ]
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")
