"""Distribution-based mapping from detected outcomes to pixel intensities.

Each detectable outcome gets an integer (its canonical rank), the outcome's
probability becomes the intensity of that pixel. Surplus outcomes are
trimmed from both tails and the survivors min-max normalized to [0, 1].
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from .fock import format_pattern, format_state
from .simulator import Detector, OutputDistribution, outcome_space


class MappingError(ValueError):
    pass


@dataclass(frozen=True)
class MappingSpec:
    m: int
    n: int
    detector: Detector = "pnr"
    lossy: bool = False
    patch_pixels: int = 32

    def __post_init__(self):
        if self.detector not in ("pnr", "threshold"):
            raise MappingError(f"detector must be 'pnr' or 'threshold', got {self.detector!r}")
        if self.detector == "threshold" and self.lossy and self.n > self.m:
            raise MappingError(
                f"lossy threshold detection needs photons <= modes (got n={self.n}, m={self.m})"
            )
        available = available_integers(self)
        if available < self.patch_pixels:
            raise MappingError(
                f"{self.m} modes and {self.n} photons with {self.detector} detection "
                f"({'lossy' if self.lossy else 'lossless'}) give {available} integers, "
                f"fewer than the {self.patch_pixels} pixels of a patch"
            )

    def outcomes(self) -> tuple:
        return outcome_table(self.m, self.n, self.detector, self.lossy)


def available_integers(spec: MappingSpec) -> int:
    """Number of distinguishable outcomes, i.e. of usable pixel slots."""
    m, n = spec.m, spec.n
    if spec.detector == "pnr":
        return comb(m + n - 1, n)
    if spec.lossy:
        return comb(m, n)
    return sum(comb(m, k) for k in range(1, min(n, m) + 1))


def outcome_table(m: int, n: int, detector: Detector = "pnr", lossy: bool = False) -> tuple:
    """Outcomes in integer order: entry r is the outcome mapped to integer r."""
    return outcome_space(m, n, detector, lossy)


def outcome_label(outcome, detector: Detector) -> str:
    return format_state(outcome) if detector == "pnr" else format_pattern(outcome)


def distribution_to_integers(dist: OutputDistribution, spec: MappingSpec) -> np.ndarray:
    """Probability vector indexed by outcome integer; absent outcomes count as 0."""
    table = spec.outcomes()
    index = {o: r for r, o in enumerate(table)}
    v = np.zeros(len(table))
    for outcome, p in zip(dist.support, dist.probs):
        r = index.get(tuple(outcome))
        if r is None:
            raise MappingError(f"outcome {outcome} is not in the {spec.detector} outcome space")
        v[r] += p
    return v


def trim_tails(v, target_len: int) -> np.ndarray:
    """Drop ``floor(surplus/2)`` entries from the front and the rest from the back."""
    v = np.asarray(v)
    surplus = len(v) - target_len
    if surplus < 0:
        raise MappingError(f"cannot trim {len(v)} values to {target_len}")
    front = surplus // 2
    return v[front : front + target_len]


def minmax_normalize(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    lo, hi = v.min(), v.max()
    if hi == lo:
        # a flat distribution carries no image; paint it black
        return np.zeros_like(v)
    return (v - lo) / (hi - lo)


def distribution_to_patch(dist: OutputDistribution, spec: MappingSpec) -> np.ndarray:
    return minmax_normalize(trim_tails(distribution_to_integers(dist, spec), spec.patch_pixels))
