import json

import numpy as np
import pytest

from siac.corpus import Batch, Frame, Token, make_batches, read_manifest, tokenize, write_manifest
from siac.errors import ParseError


def texts(tokens):
    return [t.text for t in tokens]


def test_tokenize_whitespace_split():
    assert texts(tokenize("It is an important step")) == ["It", "is", "an", "important", "step"]


def test_tokenize_empty_input():
    assert tokenize("") == []
    assert tokenize("   \n\t ") == []


def test_tokenize_strips_outer_punctuation():
    assert texts(tokenize("rights, for all passengers.")) == ["rights", "for", "all", "passengers"]


def test_tokenize_keeps_inner_punctuation():
    assert texts(tokenize("part-sessions and yesterday's vote")) == [
        "part-sessions", "and", "yesterday's", "vote",
    ]


def test_tokenize_drops_punctuation_only_runs():
    assert texts(tokenize("yes -- and ... no !!")) == ["yes", "and", "no"]


def test_tokenize_nested_punctuation():
    assert texts(tokenize('("quoted") [bracketed]!')) == ["quoted", "bracketed"]


def test_tokenize_indices_are_positions():
    toks = tokenize("a b c")
    assert [t.index for t in toks] == [0, 1, 2]


def test_make_batches_hundred_words():
    toks = tokenize(" ".join(f"w{i}" for i in range(100)))
    batches = make_batches(toks, 5, 20)
    assert len(batches) == 1
    assert batches[0].n_frames == 20
    assert all(len(f) == 5 for f in batches[0].frames)


def test_make_batches_ragged_tail_kept():
    toks = tokenize("a b c d e f g")
    batches = make_batches(toks, 5, 20)
    assert len(batches) == 1
    assert [len(f) for f in batches[0].frames] == [5, 2]


def test_make_batches_empty():
    assert make_batches([], 5, 20) == []


def test_make_batches_rejects_bad_sizes():
    toks = tokenize("a b")
    with pytest.raises(ValueError):
        make_batches(toks, 0, 20)
    with pytest.raises(ValueError):
        make_batches(toks, 5, 0)


def test_batch_indices_restart_per_batch():
    toks = tokenize(" ".join(f"w{i}" for i in range(12)))
    batches = make_batches(toks, 2, 3)
    assert len(batches) == 2
    for b in batches:
        assert [t.index for t in b.tokens] == list(range(b.token_count))


def test_frames_partition_reproduces_tokenize(rng):
    words = ["alpha", "beta-x", "gamma", "it's", "zz", "longword"]
    for trial in range(25):
        n = int(rng.integers(0, 60))
        text = " ".join(str(rng.choice(words)) for _ in range(n))
        wpf = int(rng.integers(1, 7))
        fpb = int(rng.integers(1, 5))
        toks = tokenize(text)
        batches = make_batches(toks, wpf, fpb)
        flat = [t.text for b in batches for t in b.tokens]
        assert flat == texts(toks)
        # every frame except possibly the very last is full
        frames = [f for b in batches for f in b.frames]
        for f in frames[:-1]:
            assert len(f) == wpf
        # deterministic
        again = make_batches(tokenize(text), wpf, fpb)
        assert again == batches


def test_frame_spans_cover_batch():
    toks = tokenize(" ".join(f"w{i}" for i in range(13)))
    (batch,) = make_batches(toks, 5, 20)
    spans = batch.frame_spans()
    assert spans == [(0, 5), (5, 10), (10, 13)]
    assert batch.text == " ".join(f"w{i}" for i in range(13))


def test_manifest_round_trip(tmp_path):
    toks = tokenize("one two three four five six seven")
    batches = make_batches(toks, 3, 2)
    path = tmp_path / "frames.json"
    write_manifest(batches, path)
    assert read_manifest(path) == batches
    doc = json.loads(path.read_text())
    assert isinstance(doc, list)
    assert set(doc[0]) == {"batch_id", "frames"}
    assert set(doc[0]["frames"][0]) == {"frame_id", "tokens"}


def test_read_manifest_rejects_bad_schema(tmp_path):
    path = tmp_path / "frames.json"
    path.write_text('{"batch_id": 0}')
    with pytest.raises(ParseError):
        read_manifest(path)
    path.write_text('[{"batch_id": 0, "frames": [{"frame_id": 0, "tokens": [""]}]}]')
    with pytest.raises(ParseError):
        read_manifest(path)
    path.write_text("not json")
    with pytest.raises(ParseError):
        read_manifest(path)
