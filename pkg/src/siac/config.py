"""Experiment configuration: one flat TOML file of key/value pairs with the
full default set matching the reference experiment (5-word frames, 20 frames
per batch, up to 100 batches, sigma^2 = 1 W, gamma_th = 0 dB, budget sweep
5..15 W). CLI flags override file keys; dB-to-linear conversion happens here
so channel math stays in linear units.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, fields
from importlib import resources

from .channel import ChannelParams
from .embeddings import FileEmbeddingProvider, StubEmbeddingProvider
from .errors import ParseError

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

DEFAULT_P_SWEEP = tuple(float(x) for x in range(5, 16))


def bundled_corpus_path() -> str:
    return str(resources.files("siac").joinpath("data/sample_corpus.txt"))


def bundled_labelings_path() -> str:
    return str(resources.files("siac").joinpath("data/sample_labelings.json"))


def snr_db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


@dataclass
class ExperimentConfig:
    corpus_path: str | None = None  # None -> bundled sample corpus
    labeling_path: str | None = None  # None with bundled corpus -> bundled labelings
    importance_path: str | None = None
    words_per_frame: int = 5
    frames_per_batch: int = 20
    max_batches: int = 100
    noise_variance_watts: float = 1.0
    snr_threshold_db: float = 0.0
    p_total_watts: tuple[float, ...] = DEFAULT_P_SWEEP
    semantic: bool = True
    provider: str = "stub"  # stub | file:PATH
    fusion: str = "majority"  # majority | average
    tol: float = 1e-8
    restarts: int = 8
    max_iters: int = 10_000
    seed: int = 0
    trials: int = 0  # 0 -> analytic evaluation only
    out_dir: str = "results"

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.words_per_frame < 1:
            raise ParseError("words_per_frame must be >= 1")
        if self.frames_per_batch < 1:
            raise ParseError("frames_per_batch must be >= 1")
        if self.max_batches < 1:
            raise ParseError("max_batches must be >= 1")
        if not self.noise_variance_watts > 0:
            raise ParseError("noise_variance_watts must be > 0")
        if not self.p_total_watts:
            raise ParseError("p_total_watts must name at least one budget")
        if any(not p > 0 for p in self.p_total_watts):
            raise ParseError("every p_total_watts entry must be > 0")
        if self.fusion not in ("majority", "average"):
            raise ParseError(f"fusion must be 'majority' or 'average', got {self.fusion!r}")
        if self.provider != "stub" and not self.provider.startswith("file:"):
            raise ParseError(f"provider must be 'stub' or 'file:PATH', got {self.provider!r}")
        if self.restarts < 1:
            raise ParseError("restarts must be >= 1")
        if self.max_iters < 1:
            raise ParseError("max_iters must be >= 1")
        if self.trials < 0:
            raise ParseError("trials must be >= 0")
        if not self.tol > 0:
            raise ParseError("tol must be > 0")

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        with open(path, "rb") as fh:
            try:
                doc = tomllib.load(fh)
            except tomllib.TOMLDecodeError as exc:
                raise ParseError(f"{path}: not valid TOML: {exc}") from exc
        known = {f.name for f in fields(cls)}
        unknown = set(doc) - known
        if unknown:
            raise ParseError(f"{path}: unknown config keys: {', '.join(sorted(unknown))}")
        if "p_total_watts" in doc:
            sweep = doc["p_total_watts"]
            if not isinstance(sweep, list):
                raise ParseError(f"{path}: p_total_watts must be a list of watts")
            doc["p_total_watts"] = tuple(float(x) for x in sweep)
        return cls(**doc)

    def resolved_corpus_path(self) -> str:
        return self.corpus_path if self.corpus_path else bundled_corpus_path()

    def resolved_labeling_path(self) -> str | None:
        if self.labeling_path:
            return self.labeling_path
        if self.corpus_path is None:
            return bundled_labelings_path()
        return None

    def channel_params(self) -> ChannelParams:
        return ChannelParams(self.noise_variance_watts, snr_db_to_linear(self.snr_threshold_db))

    def make_provider(self):
        if self.provider == "stub":
            return StubEmbeddingProvider()
        return FileEmbeddingProvider(self.provider[len("file:"):])
