"""Importance-aware power allocation over a Rayleigh fading link.

Pipeline: tokenize text into frames and batches, weigh each frame by semantic
importance (label counts or embedding drop-loss), split the batch power budget
to minimize the importance-weighted outage, and evaluate schemes against the
equal-priority baseline.
"""

from .allocator import (
    Allocation,
    SolverReport,
    allocate,
    allocate_equal,
    allocate_grid_oracle,
    allocate_kkt,
    allocate_pg,
    project_simplex,
    weighted_outage,
)
from .channel import ChannelParams, FadeSample, frame_survives, outage_probability, sample_gain
from .config import ExperimentConfig
from .corpus import Batch, Frame, Token, make_batches, tokenize
from .embeddings import EmbeddingProvider, FileEmbeddingProvider, StubEmbeddingProvider
from .errors import DegenerateEmbeddingError, LengthMismatchError, ParseError, SiacError
from .importance import (
    ImportanceVector,
    WordLabeling,
    frame_importance_count,
    frame_importance_semantic,
    fuse_average,
    fuse_majority,
    load_importance,
    load_labelings,
    semantic_loss,
    semantic_similarity,
    word_importance,
)
from .metrics import (
    EvaluationCell,
    OutageProfile,
    cross_evaluate,
    expected_weighted_loss,
    monte_carlo_profile,
    realized_semantic_loss,
)
from .runner import SweepResult, run_sweep

__version__ = "0.1.0"
