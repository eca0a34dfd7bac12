"""Rayleigh block-fading outage model.

The channel gain g = |h|^2 of a zero-mean unit-variance complex Gaussian
coefficient is exponential with mean 1, so a frame sent with power p fails
(received SNR p*g/sigma^2 below the threshold) with probability
1 - exp(-gamma_th * sigma^2 / p). All math here is in linear units; dB
conversion happens at the config boundary.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class ChannelParams:
    """Noise variance sigma^2 (watts) and linear SNR threshold gamma_th."""

    noise_variance: float
    snr_threshold: float

    def __post_init__(self):
        if not self.noise_variance > 0:
            raise ValueError(f"noise_variance must be > 0, got {self.noise_variance}")
        if not self.snr_threshold > 0:
            raise ValueError(f"snr_threshold must be > 0, got {self.snr_threshold}")

    @property
    def c(self) -> float:
        """The outage constant gamma_th * sigma^2 (watts)."""
        return self.snr_threshold * self.noise_variance


@dataclass(frozen=True)
class FadeSample:
    """One realization of the channel power gain g = |h|^2."""

    gain: float

    def __post_init__(self):
        if self.gain < 0:
            raise ValueError("gain must be nonnegative")


def outage_probability(power: float, params: ChannelParams) -> float:
    """1 - exp(-c/p) for p > 0; exactly 1 at p = 0 (the continuity limit)."""
    if power < 0:
        raise ValueError(f"power must be nonnegative, got {power}")
    if power == 0:
        return 1.0
    return float(-np.expm1(-params.c / power))


def outage_probabilities(powers: np.ndarray, params: ChannelParams) -> np.ndarray:
    """Vectorized outage over a power vector; zero-power frames map to 1."""
    p = np.asarray(powers, dtype=float)
    if np.any(p < 0):
        raise ValueError("powers must be nonnegative")
    out = np.ones_like(p)
    mask = p > 0
    out[mask] = -np.expm1(-params.c / p[mask])
    return out


def gain_from_uniform(u: float) -> float:
    """Inverse CDF of the unit-mean exponential: g = -ln(u) for u in (0, 1]."""
    if not 0 < u <= 1:
        raise ValueError(f"u must lie in (0, 1], got {u}")
    return float(-np.log(u))


def sample_gain(rng: np.random.Generator) -> FadeSample:
    """Draw one exponential(mean 1) gain from the stream."""
    # rng.random() is uniform on [0, 1), so 1 - rng.random() lies in (0, 1].
    return FadeSample(gain_from_uniform(1.0 - rng.random()))


def frame_survives(power: float, sample: FadeSample, params: ChannelParams) -> bool:
    """True iff p*g/sigma^2 >= gamma_th; outage is the strict-below event.

    The comparison is written as p*g >= c so the scalar and vectorized paths
    share one boundary rule.
    """
    if power < 0:
        raise ValueError(f"power must be nonnegative, got {power}")
    return power * sample.gain >= params.c


def gain_matrix(seed: int, n_frames: int, trials: int) -> np.ndarray:
    """Exponential(mean 1) gains of shape (trials, n_frames).

    Entry (t, i) is draw t of a counter-based Philox stream keyed by
    (seed, i), so every (trial, frame) value is pinned by (seed, trial, frame)
    alone: chunking trials across workers or sampling frames in parallel
    reproduces the same matrix bit for bit.
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    if n_frames < 1:
        raise ValueError(f"n_frames must be >= 1, got {n_frames}")
    gains = np.empty((trials, n_frames))
    for i in range(n_frames):
        bg = np.random.Philox(key=np.array([seed & _MASK64, i], dtype=np.uint64))
        u = np.random.Generator(bg).random(trials)
        gains[:, i] = -np.log1p(-u)
    return gains
