"""Text framing: tokenize plain text and pack words into frames and batches.

Frames are the unit of outage and power allocation; batches are the unit of
joint allocation (one budget per batch). Ragged tails are kept as-is: a short
final frame or batch is never padded or dropped.
"""

from __future__ import annotations

import json
import unicodedata
from dataclasses import dataclass

from .errors import ParseError

MANIFEST_KEYS = {"batch_id", "frames", "frame_id", "tokens"}


def _is_punct(ch: str) -> bool:
    return unicodedata.category(ch).startswith("P")


@dataclass(frozen=True)
class Token:
    """A word with its zero-based position inside its batch."""

    text: str
    index: int


@dataclass(frozen=True)
class Frame:
    """An ordered group of consecutive tokens, at most words_per_frame of them."""

    frame_id: int
    tokens: tuple[Token, ...]

    def __len__(self) -> int:
        return len(self.tokens)

    @property
    def texts(self) -> list[str]:
        return [t.text for t in self.tokens]


@dataclass(frozen=True)
class Batch:
    """N consecutive frames sharing one power budget."""

    batch_id: int
    frames: tuple[Frame, ...]

    @property
    def n_frames(self) -> int:
        return len(self.frames)

    @property
    def token_count(self) -> int:
        return sum(len(f) for f in self.frames)

    @property
    def tokens(self) -> list[Token]:
        return [t for f in self.frames for t in f.tokens]

    @property
    def text(self) -> str:
        """All tokens joined by single spaces."""
        return " ".join(t.text for f in self.frames for t in f.tokens)

    def frame_spans(self) -> list[tuple[int, int]]:
        """Half-open (start, stop) token positions of each frame within the batch."""
        spans = []
        pos = 0
        for f in self.frames:
            spans.append((pos, pos + len(f)))
            pos += len(f)
        return spans


def tokenize(text: str) -> list[Token]:
    """Split text into tokens: maximal non-whitespace runs with leading and
    trailing punctuation stripped; runs that are punctuation only are dropped.

    Inner punctuation (hyphens, apostrophes) is preserved. Empty input yields
    an empty list. Token indices are positions in the returned list.
    """
    words = []
    for run in text.split():
        start, end = 0, len(run)
        while start < end and _is_punct(run[start]):
            start += 1
        while end > start and _is_punct(run[end - 1]):
            end -= 1
        if end > start:
            words.append(run[start:end])
    return [Token(w, i) for i, w in enumerate(words)]


def make_batches(tokens: list[Token], words_per_frame: int, frames_per_batch: int) -> list[Batch]:
    """Pack consecutive tokens into frames of ``words_per_frame`` and frames
    into batches of ``frames_per_batch``.

    A trailing ragged frame or batch is kept. Token indices restart at zero in
    each batch so labelings align per batch. Deterministic in its inputs.
    """
    if words_per_frame < 1:
        raise ValueError(f"words_per_frame must be >= 1, got {words_per_frame}")
    if frames_per_batch < 1:
        raise ValueError(f"frames_per_batch must be >= 1, got {frames_per_batch}")

    per_batch = words_per_frame * frames_per_batch
    batches = []
    for b, base in enumerate(range(0, len(tokens), per_batch)):
        chunk = tokens[base : base + per_batch]
        frames = []
        for f, fstart in enumerate(range(0, len(chunk), words_per_frame)):
            part = chunk[fstart : fstart + words_per_frame]
            toks = tuple(Token(t.text, fstart + j) for j, t in enumerate(part))
            frames.append(Frame(f, toks))
        batches.append(Batch(b, tuple(frames)))
    return batches


def framing_manifest(batches: list[Batch]) -> list[dict]:
    """JSON-ready manifest: per batch, per frame, the frame_id and token strings."""
    return [
        {
            "batch_id": b.batch_id,
            "frames": [{"frame_id": f.frame_id, "tokens": f.texts} for f in b.frames],
        }
        for b in batches
    ]


def write_manifest(batches: list[Batch], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(framing_manifest(batches), fh, indent=1)
        fh.write("\n")


def read_manifest(path) -> list[Batch]:
    """Load a framing manifest back into Batch objects.

    Raises ParseError on schema violations (wrong keys, non-string tokens).
    """
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: not valid JSON: {exc}") from exc
    if not isinstance(doc, list):
        raise ParseError(f"{path}: manifest must be a JSON array of batch objects")
    batches = []
    for entry in doc:
        if not isinstance(entry, dict) or "batch_id" not in entry or "frames" not in entry:
            raise ParseError(f"{path}: batch entries need 'batch_id' and 'frames'")
        frames = []
        pos = 0
        for fentry in entry["frames"]:
            if not isinstance(fentry, dict) or "frame_id" not in fentry or "tokens" not in fentry:
                raise ParseError(f"{path}: frame entries need 'frame_id' and 'tokens'")
            texts = fentry["tokens"]
            if not isinstance(texts, list) or not all(isinstance(t, str) and t for t in texts):
                raise ParseError(
                    f"{path}: batch {entry['batch_id']} frame {fentry['frame_id']}: "
                    "tokens must be nonempty strings"
                )
            toks = tuple(Token(t, pos + j) for j, t in enumerate(texts))
            frames.append(Frame(int(fentry["frame_id"]), toks))
            pos += len(texts)
        batches.append(Batch(int(entry["batch_id"]), tuple(frames)))
    return batches
