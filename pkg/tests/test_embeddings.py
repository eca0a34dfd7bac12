import json

import numpy as np
import pytest

from siac.embeddings import FileEmbeddingProvider, StubEmbeddingProvider
from siac.errors import ParseError


def test_stub_is_deterministic_across_instances():
    a = StubEmbeddingProvider()
    b = StubEmbeddingProvider()
    text = "the committee has agreed a common position"
    np.testing.assert_array_equal(a.embed(text), b.embed(text))
    np.testing.assert_array_equal(a.embed(text), a.embed(text))


def test_stub_output_is_unit_norm():
    prov = StubEmbeddingProvider()
    for text in ("one", "one two three", "rights for all passengers"):
        assert np.linalg.norm(prov.embed(text)) == pytest.approx(1.0, abs=1e-12)
    assert prov.embed("x").shape == (64,)


def test_stub_empty_text_is_first_basis_vector():
    prov = StubEmbeddingProvider()
    basis = np.zeros(64)
    basis[0] = 1.0
    np.testing.assert_array_equal(prov.embed(""), basis)
    np.testing.assert_array_equal(prov.embed("... --"), basis)  # punctuation only


def test_stub_ignores_word_order_but_not_multiplicity():
    prov = StubEmbeddingProvider()
    np.testing.assert_allclose(prov.embed("a b"), prov.embed("b a"), atol=1e-15)
    assert not np.allclose(prov.embed("a b"), prov.embed("a a b"))


def test_stub_custom_dimension():
    prov = StubEmbeddingProvider(dimension=8)
    assert prov.embed("hello").shape == (8,)
    with pytest.raises(ValueError):
        StubEmbeddingProvider(dimension=0)


def _write_jsonl(path, records):
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec) + "\n")


def test_file_provider_exact_match(tmp_path):
    path = tmp_path / "emb.jsonl"
    _write_jsonl(path, [
        {"text": "hello world", "vector": [1.0, 0.0, 0.0]},
        {"text": "hello", "vector": [0.0, 1.0, 0.0]},
    ])
    prov = FileEmbeddingProvider(path)
    assert prov.dimension == 3
    np.testing.assert_array_equal(prov.embed("hello"), [0.0, 1.0, 0.0])
    with pytest.raises(ParseError, match="no embedding"):
        prov.embed("Hello")  # lookup is exact, not normalized


def test_file_provider_schema_errors(tmp_path):
    path = tmp_path / "emb.jsonl"
    path.write_text("")
    with pytest.raises(ParseError, match="no records"):
        FileEmbeddingProvider(path)
    _write_jsonl(path, [{"text": "a", "vector": [1.0, 2.0]}, {"text": "b", "vector": [1.0]}])
    with pytest.raises(ParseError, match="dimension"):
        FileEmbeddingProvider(path)
    path.write_text('{"text": "a"}\n')
    with pytest.raises(ParseError):
        FileEmbeddingProvider(path)
    path.write_text("not json\n")
    with pytest.raises(ParseError):
        FileEmbeddingProvider(path)
