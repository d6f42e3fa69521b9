"""Choosing the false discovery parameter from half-permuted data."""

from __future__ import annotations

import dataclasses
import logging
from typing import Optional, Sequence

import numpy as np

from .matrix import TwoViewDataset, prepare
from .pipeline import discover
from .search import SearchConfig

log = logging.getLogger(__name__)


@dataclasses.dataclass(frozen=True)
class HalfPermInstance:
    permuted_s: frozenset
    permuted_t: frozenset
    dataset: TwoViewDataset


@dataclasses.dataclass
class TuningReport:
    grid: list
    mean_edge_error: list
    per_instance: list  # per alpha: one estimate per instance
    n_bimodules: list  # per alpha: bimodules found per instance
    zero_discovery: list  # per alpha: instances with no bimodule
    chosen_alpha: float
    no_alpha_qualified: bool
    target: float

    def to_json(self) -> dict:
        return dataclasses.asdict(self)


def half_permute(dataset_raw: TwoViewDataset, rng_seed, permutations=None) -> HalfPermInstance:
    """Permute the sample labels of a random half of each view's features.

    One permutation is applied to the chosen x columns and an independent one
    to the chosen y columns; all other columns are untouched. Covariates, if
    attached, are projected out afterwards and the result is standardized.
    ``permutations`` overrides the two row permutations (used in tests).
    """
    rng = np.random.default_rng(rng_seed)
    p, q, n = dataset_raw.p, dataset_raw.q, dataset_raw.n
    s_hat = np.sort(rng.choice(p, size=p // 2, replace=False))
    t_hat = np.sort(rng.choice(q, size=q // 2, replace=False))
    if permutations is None:
        perm_x, perm_y = rng.permutation(n), rng.permutation(n)
    else:
        perm_x, perm_y = (np.asarray(a) for a in permutations)
    x = dataset_raw.x.copy()
    y = dataset_raw.y.copy()
    x[:, s_hat] = dataset_raw.x[perm_x][:, s_hat]
    y[:, t_hat] = dataset_raw.y[perm_y][:, t_hat]
    permuted = dataclasses.replace(dataset_raw, x=x, y=y)
    return HalfPermInstance(
        frozenset(int(i) for i in s_hat), frozenset(int(j) for j in t_hat), prepare(permuted)
    )


def estimated_edge_error(discoveries, instance: HalfPermInstance) -> float:
    """Mean over bimodules of the fraction of essential edges that touch a
    permuted feature; 0 for an empty collection."""
    if not discoveries:
        return 0.0
    fracs = []
    for d in discoveries:
        edges = d.stats.essential_edges
        bad = sum(1 for s, t, _ in edges
                  if s in instance.permuted_s or t in instance.permuted_t)
        fracs.append(bad / len(edges))
    return float(np.mean(fracs))


def choose_alpha(dataset_raw: TwoViewDataset, grid: Sequence[float], n_instances: int,
                 target: float = 0.05, rng_seed: int = 0,
                 base: Optional[SearchConfig] = None) -> TuningReport:
    """Largest grid value whose mean half-permutation edge-error is <= target.

    Falls back to the smallest grid value, with ``no_alpha_qualified`` set,
    when none qualifies. The same ``n_instances`` half-permuted datasets are
    scored at every alpha.
    """
    grid = [float(a) for a in grid]
    if not grid:
        raise ValueError("alpha grid is empty")
    if grid != sorted(grid):
        raise ValueError("alpha grid must be ascending")
    if n_instances < 1:
        raise ValueError("need at least one half-permuted instance")
    base = base or SearchConfig(rng_seed=rng_seed)
    seeds = np.random.SeedSequence(rng_seed).spawn(n_instances)
    instances = [half_permute(dataset_raw, s) for s in seeds]

    per_alpha, counts, zeros = [], [], []
    for alpha in grid:
        cfg = dataclasses.replace(base, alpha=alpha)
        est, cnt = [], []
        for inst in instances:
            res = discover(inst.dataset, cfg)
            est.append(estimated_edge_error(res.discoveries, inst))
            cnt.append(len(res.discoveries))
        log.info("alpha=%g edge-error estimates %s", alpha, est)
        per_alpha.append(est)
        counts.append(cnt)
        zeros.append(sum(1 for c in cnt if c == 0))
    means = [float(np.mean(e)) for e in per_alpha]
    ok = [a for a, m in zip(grid, means) if m <= target]
    return TuningReport(
        grid=grid,
        mean_edge_error=means,
        per_instance=per_alpha,
        n_bimodules=counts,
        zero_discovery=zeros,
        chosen_alpha=max(ok) if ok else grid[0],
        no_alpha_qualified=not ok,
        target=target,
    )
