"""Regenerate src/siac/data/sample_labelings.json from the bundled corpus.

Five binary rows imitate repeated noisy labeling runs: a deterministic
content-word rule (non-stopword, length >= 4) plus a seeded 6% flip per row.
Where the corpus contains the reference sentence "It is an important step
towards equal rights for all passengers", the five rows are pinned to the
canonical labels for those eleven positions so the bundled data reproduces
the documented fusion arithmetic.

Run from the repo root: python scripts/generate_sample_labelings.py
"""

import json
import pathlib

import numpy as np

from siac.corpus import tokenize

SEED = 20240501
FLIP_RATE = 0.06
ROWS = 5

STOPWORDS = {
    "a", "an", "the", "and", "or", "but", "nor", "so", "yet", "for", "of",
    "in", "on", "at", "by", "to", "from", "with", "without", "into", "onto",
    "over", "under", "above", "below", "between", "among", "through",
    "during", "before", "after", "until", "while", "about", "against",
    "along", "beside", "beyond", "within", "is", "are", "was", "were", "be",
    "been", "being", "am", "do", "does", "did", "done", "have", "has", "had",
    "having", "will", "would", "shall", "should", "can", "could", "may",
    "might", "must", "it", "its", "he", "she", "his", "her", "him", "they",
    "them", "their", "we", "us", "our", "you", "your", "i", "me", "my",
    "this", "that", "these", "those", "there", "here", "who", "whom",
    "whose", "which", "what", "when", "where", "why", "how", "not", "no",
    "nobody", "none", "nothing", "never", "than", "then", "as", "if",
    "because", "since", "although", "though", "unless", "whether", "each",
    "every", "any", "some", "all", "both", "few", "more", "most", "other",
    "such", "only", "own", "same", "too", "very", "also", "now", "once",
    "one", "two", "three",
}

SENTENCE = "It is an important step towards equal rights for all passengers".split()
SENTENCE_ROWS = [
    [0, 0, 0, 1, 1, 0, 1, 1, 0, 1, 1],
    [0, 0, 0, 1, 1, 0, 1, 1, 0, 1, 1],
    [0, 0, 0, 1, 1, 0, 1, 1, 0, 1, 1],
    [0, 0, 0, 1, 1, 0, 1, 1, 0, 0, 1],
    [0, 0, 0, 1, 1, 0, 1, 1, 0, 1, 1],
]


def base_label(word: str) -> int:
    lowered = word.lower()
    if lowered in STOPWORDS:
        return 0
    return 1 if len(word) >= 4 else 0


def main() -> None:
    repo = pathlib.Path(__file__).resolve().parents[1]
    corpus = (repo / "src/siac/data/sample_corpus.txt").read_text(encoding="utf-8")
    tokens = [t.text for t in tokenize(corpus)]
    base = np.array([base_label(w) for w in tokens], dtype=int)

    pinned = []
    for start in range(len(tokens) - len(SENTENCE) + 1):
        if tokens[start : start + len(SENTENCE)] == SENTENCE:
            pinned.append(start)

    rows = []
    for r in range(ROWS):
        rng = np.random.default_rng([SEED, r])
        flips = rng.random(len(tokens)) < FLIP_RATE
        row = np.where(flips, 1 - base, base)
        for start in pinned:
            row[start : start + len(SENTENCE)] = SENTENCE_ROWS[r]
        rows.append([int(v) for v in row])

    out = repo / "src/siac/data/sample_labelings.json"
    with out.open("w", encoding="utf-8") as fh:
        json.dump({"tokens": tokens, "labelings": rows}, fh)
        fh.write("\n")
    print(f"wrote {out} ({len(tokens)} tokens, {ROWS} rows, pinned at {pinned})")


if __name__ == "__main__":
    main()
