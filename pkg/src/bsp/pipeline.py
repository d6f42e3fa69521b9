"""Full discovery pipeline: search, significance filter, overlap filter, network stats."""

from __future__ import annotations

import dataclasses
import logging

from .network import NetStats, net_stats
from .overlap import select_representatives
from .search import Bimodule, SearchConfig, final_filter, run_all

log = logging.getLogger(__name__)


@dataclasses.dataclass(frozen=True)
class Discovery:
    bimodule: Bimodule
    stats: NetStats


@dataclasses.dataclass
class PipelineResult:
    discoveries: list
    traces: list
    n_raw: int  # distinct fixed points before the significance filter
    n_significant: int

    @property
    def bimodules(self) -> list:
        return [d.bimodule for d in self.discoveries]


def significant(dataset, found, config: SearchConfig) -> list:
    kept = []
    for bm in found:
        out = final_filter(dataset, bm, config.alpha, n_perms=config.n_perms,
                           rng_seed=config.rng_seed)
        if out is not None:
            kept.append(out)
    return kept


def representatives(bimodules) -> list:
    """Overlap filter; repeated discoveries count once per hit."""
    expanded = [bm for bm in bimodules for _ in range(bm.hits)]
    seen = set()
    out = []
    for bm in select_representatives(expanded):
        if bm.key not in seen:
            seen.add(bm.key)
            out.append(bm)
    return out


def discover(dataset, config: SearchConfig, filter_overlaps: bool = True) -> PipelineResult:
    found, traces = run_all(dataset, config)
    kept = significant(dataset, found, config)
    reps = representatives(kept) if filter_overlaps else kept
    log.info("%d fixed points, %d significant, %d representatives",
             len(found), len(kept), len(reps))
    disc = [Discovery(bm, net_stats(dataset, bm)) for bm in reps]
    return PipelineResult(disc, traces, len(found), len(kept))


def bimodule_record(dataset, bm: Bimodule, stats=None, ident=None) -> dict:
    rec = {
        "A": [dataset.s_ids[i] for i in bm.A],
        "B": [dataset.t_ids[j] for j in bm.B],
        "A_index": list(bm.A),
        "B_index": list(bm.B),
        "geometric_size": bm.geometric_size,
        "hits": bm.hits,
        "pvalue": bm.pvalue_ab,
    }
    if ident is not None:
        rec["id"] = ident
    if stats is not None:
        rec["tau_star"] = stats.tau_star
        rec["tree_multiplicity"] = stats.tree_multiplicity
        rec["essential_edges"] = [
            [dataset.s_ids[s], dataset.t_ids[t], w] for s, t, w in stats.essential_edges
        ]
    return rec


def bimodule_from_record(rec: dict, dataset=None) -> Bimodule:
    """Rebuild a bimodule from a JSON record, resolving ids against ``dataset``
    when given (ids win over stored indices)."""
    if dataset is not None:
        s_pos = {s: i for i, s in enumerate(dataset.s_ids)}
        t_pos = {t: j for j, t in enumerate(dataset.t_ids)}
        try:
            A = tuple(sorted(s_pos[s] for s in rec["A"]))
            B = tuple(sorted(t_pos[t] for t in rec["B"]))
        except KeyError as exc:
            raise ValueError(f"unknown feature id {exc.args[0]!r}") from None
    else:
        A = tuple(sorted(rec["A_index"]))
        B = tuple(sorted(rec["B_index"]))
    return Bimodule(A, B, pvalue_ab=rec.get("pvalue"), hits=rec.get("hits", 1))
