"""Bimodule Search Procedure: alternating B-Y half-updates from singleton seeds."""

from __future__ import annotations

import dataclasses
import enum
import logging
import math
import threading
import zlib
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Optional

import numpy as np

from .corr import View, intra_eigenvalues, r2_profile
from .fdr import by_threshold
from .pvalues import approx_pvalues, set_pvalue

log = logging.getLogger(__name__)

Updater = Callable[[tuple, View], tuple]


class Termination(enum.Enum):
    FixedPoint = "fixed_point"
    EmptySet = "empty_set"
    CycleResolved = "cycle_resolved"
    IterationCap = "iteration_cap"
    SizeCap = "size_cap"


@dataclasses.dataclass(frozen=True)
class Bimodule:
    """Feature-index sets A (TypeOne) and B (TypeTwo), both sorted tuples."""

    A: tuple
    B: tuple
    pvalue_ab: Optional[float] = None
    hits: int = 1

    def __post_init__(self):
        if not self.A or not self.B:
            raise ValueError("bimodule sets must be non-empty")

    @property
    def geometric_size(self) -> float:
        return math.sqrt(len(self.A) * len(self.B))

    @property
    def key(self) -> tuple:
        return (self.A, self.B)


@dataclasses.dataclass
class SearchTrace:
    seed: int
    view: View
    iterates: list = dataclasses.field(default_factory=list)
    termination: Termination = Termination.EmptySet
    iterations: int = 0
    seed_contained: Optional[bool] = None


@dataclasses.dataclass(frozen=True)
class SearchConfig:
    alpha: float = 0.05
    max_iterations: int = 20
    size_cap: float = 5000.0
    seed_fraction_s: float = 1.0
    seed_fraction_t: float = 1.0
    skip_covered_seeds: bool = False
    rng_seed: int = 0
    workers: int = 1
    n_perms: int = 2000

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be positive")
        if self.size_cap <= 0:
            raise ValueError("size_cap must be positive")
        for f in (self.seed_fraction_s, self.seed_fraction_t):
            if not 0 <= f <= 1:
                raise ValueError("seed fractions must lie in [0, 1]")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")
        if self.n_perms < 100:
            raise ValueError("n_perms must be at least 100")


def half_update(dataset, idx, view: View, alpha: float) -> tuple:
    """Opposite-view features whose p-value against the set ``idx`` is
    rejected by the B-Y procedure at level ``alpha``.
    """
    idx = tuple(idx)
    lam = intra_eigenvalues(dataset, idx, view)
    stats = r2_profile(dataset, idx, view)
    p = approx_pvalues(stats, lam, dataset.dof)
    return by_threshold(p, alpha).rejected


class CachedUpdater:
    """Memoized :func:`half_update`; many seeds revisit the same sets."""

    def __init__(self, dataset, alpha: float):
        self.dataset = dataset
        self.alpha = alpha
        self._cache: dict = {}
        self._lock = threading.Lock()

    def __call__(self, idx: tuple, view: View) -> tuple:
        key = (view, idx)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        out = half_update(self.dataset, idx, view, self.alpha)
        with self._lock:
            self._cache[key] = out
        return out


def _intersect(a: tuple, b: tuple) -> tuple:
    return tuple(sorted(set(a) & set(b)))


def search_from(dataset, seed: int, view: View, config: SearchConfig,
                update: Optional[Updater] = None):
    """Run the alternating search from the singleton ``{seed}`` of ``view``.

    Returns ``(bimodule or None, trace)``. A bimodule is returned only when a
    non-empty fixed point is reached; cycles are broken by intersecting the
    last two iterates.
    """
    if update is None:
        update = CachedUpdater(dataset, config.alpha)
    trace = SearchTrace(seed=int(seed), view=view)
    own = (int(seed),)
    prev = None
    seen: dict = {}
    resolved = False
    for k in range(1, config.max_iterations + 1):
        trace.iterations = k
        other = update(own, view)
        if not other:
            trace.iterates.append(_sizes(own, (), view))
            trace.termination = Termination.EmptySet
            return None, trace
        new_own = update(other, view.opposite)
        state = (new_own, other)
        trace.iterates.append(_sizes(new_own, other, view))
        if not new_own:
            trace.termination = Termination.EmptySet
            return None, trace
        if math.sqrt(len(new_own) * len(other)) > config.size_cap:
            trace.termination = Termination.SizeCap
            return None, trace
        if state == prev:
            trace.termination = Termination.CycleResolved if resolved else Termination.FixedPoint
            trace.seed_contained = int(seed) in new_own
            A, B = (new_own, other) if view is View.TypeOne else (other, new_own)
            return Bimodule(A, B), trace
        if state in seen:
            # non-trivial cycle: continue from the intersection of the last two iterates
            state = (_intersect(new_own, prev[0]), _intersect(other, prev[1]))
            resolved = True
            log.debug("cycle at iteration %d (seed %s), resolving by intersection", k, seed)
            if not state[0] or not state[1]:
                trace.termination = Termination.EmptySet
                return None, trace
        seen[state] = k
        prev = state
        own = state[0]
    trace.termination = Termination.IterationCap
    return None, trace


def _sizes(own, other, view):
    return (len(own), len(other)) if view is View.TypeOne else (len(other), len(own))


def seed_list(dataset, config: SearchConfig) -> list:
    """Seeds in launch order: TypeTwo features first, then TypeOne features."""
    rng = np.random.default_rng(config.rng_seed)

    def pick(total, frac):
        k = int(round(frac * total))
        if k >= total:
            return list(range(total))
        return sorted(int(i) for i in rng.choice(total, size=k, replace=False))

    t_seeds = pick(dataset.q, config.seed_fraction_t)
    s_seeds = pick(dataset.p, config.seed_fraction_s)
    return [(t, View.TypeTwo) for t in t_seeds] + [(s, View.TypeOne) for s in s_seeds]


def run_all(dataset, config: SearchConfig, update: Optional[Updater] = None):
    """Search from every configured seed.

    Returns ``(bimodules, traces)``. Exactly repeated results are collapsed
    into one bimodule whose ``hits`` counts the repeats; output order is the
    order of first discovery in the seed list, whatever the worker count.
    """
    if update is None:
        update = CachedUpdater(dataset, config.alpha)
    seeds = seed_list(dataset, config)

    def one(item):
        return search_from(dataset, item[0], item[1], config, update)

    if config.skip_covered_seeds:
        results = []
        covered = {View.TypeOne: set(), View.TypeTwo: set()}
        for item in seeds:
            if item[0] in covered[item[1]]:
                continue
            bm, tr = one(item)
            if bm is not None:
                covered[View.TypeOne].update(bm.A)
                covered[View.TypeTwo].update(bm.B)
            results.append((bm, tr))
    elif config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(one, seeds))
    else:
        results = [one(item) for item in seeds]

    found: dict = {}
    traces = []
    for bm, tr in results:
        traces.append(tr)
        if bm is None:
            continue
        if bm.key in found:
            old = found[bm.key]
            found[bm.key] = dataclasses.replace(old, hits=old.hits + 1)
        else:
            found[bm.key] = bm
    return list(found.values()), traces


def bimodule_seed(base_seed: int, bm: Bimodule) -> int:
    """Deterministic per-bimodule RNG seed."""
    raw = np.asarray(bm.A + (-1,) + bm.B, dtype=np.int64).tobytes()
    return (int(base_seed) * 1_000_003 + zlib.crc32(raw)) % (2**63)


def final_filter(dataset, bimodule: Bimodule, alpha: float, p: Optional[int] = None,
                 q: Optional[int] = None, n_perms: int = 2000, rng_seed: int = 0):
    """Attach p(A, B) and drop the bimodule when it exceeds alpha / (p q)."""
    p = dataset.p if p is None else p
    q = dataset.q if q is None else q
    pab = set_pvalue(dataset, bimodule.A, bimodule.B,
                     rng_seed=bimodule_seed(rng_seed, bimodule), n_perms=n_perms)
    if pab > alpha / (p * q):
        return None
    return dataclasses.replace(bimodule, pvalue_ab=float(pab))


def is_stable(dataset, bimodule: Bimodule, alpha: float, update: Optional[Updater] = None) -> bool:
    """Both half-updates of (A, B) reproduce (A, B) exactly."""
    if update is None:
        update = CachedUpdater(dataset, alpha)
    return (update(bimodule.A, View.TypeOne) == bimodule.B
            and update(bimodule.B, View.TypeTwo) == bimodule.A)
