"""Connectivity threshold, essential edges and tree-multiplicity of a bimodule."""

from __future__ import annotations

import dataclasses

import numpy as np

from .corr import cross_corr_block
from .errors import PreconditionError

# above this many candidate edges, sort in descending weight buckets
STREAM_EDGES = 10_000_000


class UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))
        self.size = [1] * n
        self.components = n

    def find(self, a: int) -> int:
        parent = self.parent
        root = a
        while parent[root] != root:
            root = parent[root]
        while parent[a] != root:
            parent[a], a = root, parent[a]
        return root

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        self.components -= 1
        return True


@dataclasses.dataclass(frozen=True)
class NetStats:
    tau_star: float
    essential_edges: tuple  # (s, t, r) with dataset indices
    tree_multiplicity: float


def _descending_order(w: np.ndarray):
    """Yield flat indices of ``w`` by decreasing value."""
    if w.size <= STREAM_EDGES:
        yield from np.argsort(-w, kind="stable")
        return
    hi = np.inf
    n_buckets = int(np.ceil(w.size / STREAM_EDGES)) * 4
    cuts = np.quantile(w, np.linspace(1, 0, n_buckets + 1)[1:])
    for lo in cuts:
        sel = np.flatnonzero((w < hi) & (w >= lo))
        yield from sel[np.argsort(-w[sel], kind="stable")]
        hi = lo


def threshold_from_weights(w: np.ndarray) -> float:
    """Largest tau such that edges with weight >= tau connect all rows and
    columns of the |A| x |B| weight matrix ``w``."""
    a, b = w.shape
    if a == 0 or b == 0:
        raise PreconditionError("both sets must be non-empty")
    uf = UnionFind(a + b)
    flat = w.ravel()
    for e in _descending_order(flat):
        i, j = divmod(int(e), b)
        if uf.union(i, a + j) and uf.components == 1:
            return float(flat[e])
    return float(flat.min())  # only reached when a + b == 1, impossible here


def connectivity_threshold(dataset, bimodule) -> float:
    return threshold_from_weights(np.abs(cross_corr_block(dataset, bimodule.A, bimodule.B)))


def essential_edges(dataset, bimodule, tau_star: float) -> tuple:
    r = cross_corr_block(dataset, bimodule.A, bimodule.B)
    ii, jj = np.nonzero(np.abs(r) >= tau_star)
    return tuple((bimodule.A[i], bimodule.B[j], float(r[i, j])) for i, j in zip(ii, jj))


def tree_multiplicity(n_edges: int, a: int, b: int) -> float:
    return n_edges / (a + b - 1)


def net_stats(dataset, bimodule) -> NetStats:
    tau = connectivity_threshold(dataset, bimodule)
    edges = essential_edges(dataset, bimodule, tau)
    return NetStats(tau, edges, tree_multiplicity(len(edges), len(bimodule.A), len(bimodule.B)))


def edge_error(essential, truth_edges) -> float:
    """Fraction of essential edges (s, t[, w]) whose pair is not in ``truth_edges``."""
    if len(essential) == 0:
        raise PreconditionError("edge_error needs at least one essential edge")
    bad = sum(1 for e in essential if (e[0], e[1]) not in truth_edges)
    return bad / len(essential)
