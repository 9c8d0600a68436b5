"""Seeded stochastic primitives for the placement engines.

Every draw goes through an :class:`RngStream`, a value-type wrapper around a
counter-seeded PCG64 generator. Identical (master_seed, stream_index) pairs
reproduce identical draw sequences across processes and platforms, which is
what makes the whole pipeline replayable.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "RngStream",
    "PsadaParams",
    "DengParams",
    "stable_stream_index",
    "sample_group_count",
    "sample_size",
    "gaussian_size_pdf",
    "sample_window",
    "next_temperature",
    "acceptance_probability",
]

_MASK64 = (1 << 64) - 1


def stable_stream_index(*parts: object) -> int:
    """Content-stable 64-bit stream index derived from string parts.

    Unlike ``hash()``, the result does not vary across processes or runs, so
    per-image streams stay fixed when other inputs are added or removed.
    """
    key = "\x1f".join(str(p) for p in parts).encode()
    return int.from_bytes(hashlib.sha256(key).digest()[:8], "little")


@dataclass
class RngStream:
    """A deterministic random stream identified by (master_seed, stream_index)."""

    master_seed: int
    stream_index: int = 0
    _gen: np.random.Generator = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        seq = np.random.SeedSequence(
            (self.master_seed & _MASK64, self.stream_index & _MASK64)
        )
        self._gen = np.random.Generator(np.random.PCG64(seq))

    def random(self) -> float:
        """Uniform float in [0, 1)."""
        return float(self._gen.random())

    def uniform(self, low: float, high: float) -> float:
        return float(self._gen.uniform(low, high))

    def normal(self, mean: float, std: float) -> float:
        return float(self._gen.normal(mean, std))

    def integers(self, low: int, high: int) -> int:
        """Uniform integer in [low, high) — numpy convention."""
        return int(self._gen.integers(low, high))


@dataclass
class PsadaParams:
    """Hyperparameters of the annealing-based placement engine."""

    lam: float = 3.0            # mean number of groups per image
    max_objects: int = 12       # total paste budget per image
    sigma_px: float = 30.0      # object size std-dev, pixels
    tau: float = 1.5            # horizontal crowdedness factor
    epsilon: float = 1.5        # vertical crowdedness factor
    t0: float = 1.0             # initial temperature
    gamma: float = 0.95         # geometric temperature decay per pasted object
    min_size_px: int = 8        # lower clamp for sampled sizes

    def validate(self) -> None:
        if self.lam <= 0:
            raise ValueError(f"lam must be positive, got {self.lam}")
        if self.max_objects < 1:
            raise ValueError(f"max_objects must be >= 1, got {self.max_objects}")
        if self.sigma_px <= 0:
            raise ValueError(f"sigma_px must be positive, got {self.sigma_px}")
        if self.tau <= 1 or self.epsilon <= 1:
            raise ValueError(
                f"crowdedness factors must exceed 1, got tau={self.tau} epsilon={self.epsilon}"
            )
        if not 0 < self.gamma < 1:
            raise ValueError(f"gamma must be in (0, 1), got {self.gamma}")
        if self.t0 <= 0:
            raise ValueError(f"t0 must be positive, got {self.t0}")
        if self.min_size_px < 1:
            raise ValueError(f"min_size_px must be >= 1, got {self.min_size_px}")


@dataclass
class DengParams:
    """Hyperparameters of the baseline group copy-paste engine."""

    max_groups: int = 5         # group count drawn uniformly from [0, max_groups]
    max_per_group: int = 6      # per-group count drawn uniformly from [0, max_per_group]
    sigma_norm: float = 0.2     # size std-dev relative to the group-center size
    tau: float = 1.5
    epsilon: float = 1.5
    min_size_px: int = 8

    def validate(self) -> None:
        if self.max_groups < 0 or self.max_per_group < 0:
            raise ValueError("group/object maxima must be non-negative")
        if self.sigma_norm <= 0:
            raise ValueError(f"sigma_norm must be positive, got {self.sigma_norm}")
        if self.tau <= 1 or self.epsilon <= 1:
            raise ValueError(
                f"crowdedness factors must exceed 1, got tau={self.tau} epsilon={self.epsilon}"
            )
        if self.min_size_px < 1:
            raise ValueError(f"min_size_px must be >= 1, got {self.min_size_px}")


def sample_group_count(rng: RngStream, lam: float) -> int:
    """Poisson draw by inversion with sequential search (exact for small lam)."""
    if lam <= 0:
        raise ValueError(f"lam must be positive, got {lam}")
    u = rng.random()
    p = math.exp(-lam)
    cdf = p
    k = 0
    # exp(-lam) underflows for huge lam; the cap keeps the search finite
    cap = int(lam + 10.0 * math.sqrt(lam) + 100.0)
    while u > cdf and k < cap:
        k += 1
        p *= lam / k
        cdf += p
    return k


def sample_size(
    rng: RngStream, center_size: int, sigma_px: float, min_size_px: int
) -> int:
    """Gaussian object size around the group-center size, clamped from below."""
    draw = rng.normal(center_size, sigma_px)
    return max(min_size_px, int(math.floor(draw + 0.5)))


def gaussian_size_pdf(size: float, center_size: float, sigma: float) -> float:
    """Density of the size distribution at ``size`` given a group-center size."""
    z = (size - center_size) / sigma
    return math.exp(-0.5 * z * z) / (math.sqrt(2.0 * math.pi) * sigma)


def sample_window(
    rng: RngStream,
    center_x: float,
    center_y: float,
    d_w: float,
    d_h: float,
    tau: float,
    epsilon: float,
) -> tuple[float, float]:
    """Uniform position in the crowdedness window around a group center.

    x is uniform in [center_x - tau*d_w, center_x + tau*d_w] and y uniform in
    [center_y - epsilon*d_h, center_y + epsilon*d_h]; no bounds clamping here.
    """
    half_w = tau * d_w
    half_h = epsilon * d_h
    x = rng.uniform(center_x - half_w, center_x + half_w)
    y = rng.uniform(center_y - half_h, center_y + half_h)
    return x, y


def next_temperature(temperature: float, gamma: float) -> float:
    """One geometric cooling step."""
    return temperature * gamma


def acceptance_probability(distance: float, temperature: float) -> float:
    """Metropolis-style acceptance for a candidate ``distance`` from its center.

    exp(-distance / T): accepts freely when hot, collapses onto the center as
    the temperature decays.
    """
    return math.exp(-distance / temperature)
