"""Evaluation metrics: expected weighted loss per outage profile, Monte-Carlo
validation of the analytic outage, and cross-evaluation of schemes.

Both reported metrics (expected important word errors, expected semantic loss)
are the same functional sum_i w_i * P_i_out under different weight vectors, so
one evaluator serves both.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .allocator import Allocation
from .channel import ChannelParams, gain_matrix, outage_probabilities
from .errors import LengthMismatchError


@dataclass
class OutageProfile:
    """Per-frame outage probabilities, analytic or empirically estimated."""

    probabilities: np.ndarray
    kind: str  # analytic | empirical
    trials: int | None = None
    ci_halfwidths: np.ndarray | None = None

    def __post_init__(self):
        self.probabilities = np.asarray(self.probabilities, dtype=float)
        if np.any(self.probabilities < 0) or np.any(self.probabilities > 1):
            raise ValueError("outage probabilities must lie in [0, 1]")


@dataclass(frozen=True)
class EvaluationCell:
    scheme: str
    metric: str
    value: float


def analytic_profile(allocation: Allocation, params: ChannelParams) -> OutageProfile:
    return OutageProfile(outage_probabilities(allocation.powers, params), "analytic")


def monte_carlo_profile(allocation: Allocation, params: ChannelParams,
                        trials: int, seed: int) -> OutageProfile:
    """Empirical per-frame outage frequency with 3-sigma binomial half-widths.

    Deterministic for a fixed seed: gains come from per-frame counter-based
    streams, so the estimate does not depend on how trials are scheduled.
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    gains = gain_matrix(seed, allocation.powers.size, trials)
    outages = allocation.powers[np.newaxis, :] * gains < params.c
    freq = outages.mean(axis=0)
    halfwidths = 3.0 * np.sqrt(freq * (1.0 - freq) / trials)
    return OutageProfile(freq, "empirical", trials, halfwidths)


def expected_weighted_loss(weights, profile: OutageProfile) -> float:
    """sum_i w_i * P_i_out; linear in the weights, monotone in each outage."""
    w = np.asarray(getattr(weights, "weights", weights), dtype=float)
    if w.size != profile.probabilities.size:
        raise LengthMismatchError(
            f"{w.size} weights vs {profile.probabilities.size} outage entries"
        )
    return float(w @ profile.probabilities)


def realized_semantic_loss(batch, allocation: Allocation, params: ChannelParams,
                           provider, trials: int, seed: int) -> float:
    """Monte-Carlo mean of the semantic loss actually incurred: per trial,
    drop the frames that suffered outage, embed the surviving text, and
    compare it with the full batch text.

    This is the slow validation path; the reported metric is the analytic
    sum w_i * P_i_out. If nothing survives and the provider rejects empty
    text, the trial counts the maximal loss 2.
    """
    from .importance import semantic_loss

    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    if batch.n_frames != allocation.powers.size:
        raise LengthMismatchError(
            f"allocation covers {allocation.powers.size} frames, batch has {batch.n_frames}"
        )
    gains = gain_matrix(seed, batch.n_frames, trials)
    survived = allocation.powers[np.newaxis, :] * gains >= params.c
    full = provider.embed(batch.text)
    frame_texts = [f.texts for f in batch.frames]
    loss_by_mask: dict[bytes, float] = {}
    total = 0.0
    for row in survived:
        key = row.tobytes()
        loss = loss_by_mask.get(key)
        if loss is None:
            words = [w for keep, texts in zip(row, frame_texts) if keep for w in texts]
            try:
                loss = semantic_loss(full, provider.embed(" ".join(words)))
            except Exception:
                loss = 2.0  # empty or degenerate survivor text
            loss_by_mask[key] = loss
        total += loss
    return total / trials


def cross_evaluate(schemes: dict[str, Allocation], weight_sets: dict,
                   params: ChannelParams, optimized_for: dict[str, str] | None = None,
                   atol: float = 1e-9) -> list[EvaluationCell]:
    """Evaluate every scheme under every metric analytically.

    ``weight_sets`` maps metric names to weight vectors. When
    ``optimized_for`` names the scheme that minimizes a metric, that scheme's
    cell is checked to be the column minimum within ``atol`` rather than
    assumed; a violation means the named solver run was beaten by a rival
    allocation and is reported as an error.
    """
    cells = []
    values: dict[tuple[str, str], float] = {}
    for scheme, alloc in schemes.items():
        profile = analytic_profile(alloc, params)
        for metric, w in weight_sets.items():
            value = expected_weighted_loss(w, profile)
            values[(scheme, metric)] = value
            cells.append(EvaluationCell(scheme, metric, value))
    if optimized_for:
        for metric, scheme in optimized_for.items():
            own = values[(scheme, metric)]
            for other in schemes:
                if values[(other, metric)] + atol < own:
                    raise ValueError(
                        f"scheme {scheme!r} should minimize metric {metric!r} "
                        f"but {other!r} scores {values[(other, metric)]:.12g} "
                        f"vs {own:.12g}"
                    )
    return cells
