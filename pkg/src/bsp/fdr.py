"""Benjamini-Yekutieli step-up threshold."""

from __future__ import annotations

import dataclasses
import functools
import math

import numpy as np


@dataclasses.dataclass(frozen=True)
class ThresholdResult:
    tau: float
    rejected: tuple


@functools.lru_cache(maxsize=64)
def harmonic(m: int) -> float:
    """H_m = sum_{i<=m} 1/i, summed exactly-rounded."""
    return math.fsum(1.0 / i for i in range(1, m + 1))


def by_threshold(pvalues, alpha: float) -> ThresholdResult:
    """Reject the hypotheses with p_j <= tau, where tau is the largest order
    statistic p_(k) with m p_(k) / k <= alpha / H_m. The comparison is
    inclusive. ``tau`` is 0 and nothing is rejected when no rank passes.
    """
    p = np.asarray(pvalues, dtype=float)
    m = p.size
    if m == 0:
        return ThresholdResult(0.0, ())
    ps = np.sort(p)
    ranks = np.arange(1, m + 1)
    ok = np.flatnonzero(m * ps / ranks <= alpha / harmonic(m))
    if ok.size == 0:
        return ThresholdResult(0.0, ())
    tau = float(ps[ok[-1]])
    return ThresholdResult(tau, tuple(int(j) for j in np.flatnonzero(p <= tau)))
