"""Shared statistics helpers: seed derivation, Wilson intervals, MC checks."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


def derive_rng(master_seed: int, *path: int) -> np.random.Generator:
    """Return a generator for a named sub-stream of a master seed.

    The split rule is ``SeedSequence(entropy=[master_seed, *path])``: a trial
    index, a stage index and similar coordinates go into ``path``.  Equal
    (seed, path) pairs always produce identical streams; distinct paths are
    statistically independent.
    """
    return np.random.default_rng(np.random.SeedSequence([int(master_seed), *map(int, path)]))


def wilson_interval(successes: int, trials: int, z: float = 3.0) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion.

    Args:
        successes: number of successes observed.
        trials: number of Bernoulli trials, must be positive.
        z: half-width in standard normal units (defaults to 3 sigma).

    Returns:
        (lo, hi) bounds, clipped to [0, 1].
    """
    if trials <= 0:
        raise ValueError(f"trials must be positive, got {trials}")
    if not 0 <= successes <= trials:
        raise ValueError(f"successes {successes} outside [0, {trials}]")
    p = successes / trials
    z2 = z * z
    denom = 1.0 + z2 / trials
    center = (p + z2 / (2 * trials)) / denom
    half = (z / denom) * math.sqrt(p * (1 - p) / trials + z2 / (4 * trials * trials))
    return (max(0.0, center - half), min(1.0, center + half))


@dataclass
class MeanEstimate:
    """Monte Carlo mean of values in [0, 1] with a normal-theory band."""

    mean: float
    sigma: float
    trials: int

    @property
    def lo(self) -> float:
        return max(0.0, self.mean - 3.0 * self.sigma)

    @property
    def hi(self) -> float:
        return min(1.0, self.mean + 3.0 * self.sigma)


def mean_estimate(values) -> MeanEstimate:
    arr = np.asarray(list(values), dtype=float)
    if arr.size == 0:
        raise ValueError("mean_estimate needs at least one value")
    sigma = float(arr.std(ddof=1) / math.sqrt(arr.size)) if arr.size > 1 else 0.0
    return MeanEstimate(mean=float(arr.mean()), sigma=sigma, trials=int(arr.size))


def binomial_within_3sigma(count: int, trials: int, p: float) -> bool:
    """True when an observed count is within 3 sigma of Binomial(trials, p)."""
    sigma = math.sqrt(trials * p * (1 - p))
    return abs(count - trials * p) <= 3.0 * sigma + 1e-12
