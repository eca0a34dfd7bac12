"""Embedding providers: deterministic maps from text to fixed-dimension vectors.

The stub provider exists so every semantic-scoring test runs offline with no
model download; real pretrained-model embeddings arrive through JSON-lines
files produced by the companion extractor and are served by the file-backed
provider with exact-match lookup.
"""

from __future__ import annotations

import hashlib
import json
from typing import Protocol, runtime_checkable

import numpy as np

from .corpus import tokenize
from .errors import ParseError

# Seed of the stub token-vector stream. Fixed so stub weights are regression
# constants across machines; do not change without refreezing tests.
STUB_SEED = 1729


@runtime_checkable
class EmbeddingProvider(Protocol):
    """Deterministic text-to-vector map: same text, same vector, fixed dimension."""

    dimension: int

    def embed(self, text: str) -> np.ndarray: ...


class StubEmbeddingProvider:
    """Bag-of-words stub: each token hashes to a fixed pseudo-random unit
    vector; a text embeds as the normalized sum of its token vectors.

    Empty text (no tokens after punctuation stripping) embeds as the first
    basis vector. Safe for concurrent ``embed`` calls: the token cache only
    ever stores values that are identical for a given key.
    """

    def __init__(self, dimension: int = 64):
        if dimension < 1:
            raise ValueError("dimension must be positive")
        self.dimension = dimension
        self._cache: dict[str, np.ndarray] = {}

    def _token_vector(self, word: str) -> np.ndarray:
        vec = self._cache.get(word)
        if vec is None:
            digest = hashlib.blake2b(word.encode("utf-8"), digest_size=8).digest()
            rng = np.random.default_rng([STUB_SEED, int.from_bytes(digest, "big")])
            vec = rng.standard_normal(self.dimension)
            vec /= np.linalg.norm(vec)
            self._cache[word] = vec
        return vec

    def embed(self, text: str) -> np.ndarray:
        words = [t.text for t in tokenize(text)]
        if not words:
            basis = np.zeros(self.dimension)
            basis[0] = 1.0
            return basis
        total = np.zeros(self.dimension)
        for w in words:
            total += self._token_vector(w)
        norm = np.linalg.norm(total)
        if norm < 1e-12:  # antipodal cancellation, practically unreachable
            basis = np.zeros(self.dimension)
            basis[0] = 1.0
            return basis
        return total / norm


class FileEmbeddingProvider:
    """Serve precomputed embeddings from a JSON-lines file of
    ``{"text": ..., "vector": [...]}`` records, matched exactly on the text.

    A text absent from the file is an error: this provider never invents
    vectors, it only replays an extraction run.
    """

    def __init__(self, path):
        self.path = str(path)
        self._table: dict[str, np.ndarray] = {}
        dimension = None
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    record = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise ParseError(f"{path}:{lineno}: not valid JSON: {exc}") from exc
                if not isinstance(record, dict) or "text" not in record or "vector" not in record:
                    raise ParseError(f"{path}:{lineno}: records need 'text' and 'vector'")
                vec = np.asarray(record["vector"], dtype=float)
                if vec.ndim != 1 or vec.size == 0 or not np.all(np.isfinite(vec)):
                    raise ParseError(f"{path}:{lineno}: vector must be a finite 1-d array")
                if dimension is None:
                    dimension = vec.size
                elif vec.size != dimension:
                    raise ParseError(
                        f"{path}:{lineno}: vector has dimension {vec.size}, expected {dimension}"
                    )
                self._table[record["text"]] = vec
        if dimension is None:
            raise ParseError(f"{path}: embedding file holds no records")
        self.dimension = int(dimension)

    def embed(self, text: str) -> np.ndarray:
        try:
            return self._table[text]
        except KeyError:
            raise ParseError(
                f"{self.path}: no embedding for text {text!r}; "
                "regenerate the embedding file to cover every queried text"
            ) from None
