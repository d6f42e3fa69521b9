"""Redundancy in a bimodule collection: effective number and representatives."""

from __future__ import annotations

import math
from collections import Counter
from fractions import Fraction

import numpy as np
from scipy.cluster.hierarchy import cut_tree, linkage
from scipy.spatial.distance import squareform


def _a_sets(items):
    return [frozenset(bm.A) for bm in items]


def _b_sets(items):
    return [frozenset(bm.B) for bm in items]


def pair_counts(items) -> dict:
    """Map (s, t) -> number of items containing the pair."""
    counts: Counter = Counter()
    for bm in items:
        for s in bm.A:
            for t in bm.B:
                counts[(s, t)] += 1
    return dict(counts)


def effective_number(items) -> Fraction:
    """Overlap-corrected count of distinct bimodules, as an exact fraction.

    Each item contributes the mean over its pairs of 1 / C(s, t), where
    C(s, t) counts the items containing the pair.
    """
    items = list(items)
    if not items:
        return Fraction(0)
    a_sets, b_sets = _a_sets(items), _b_sets(items)
    total = Fraction(0)
    for bm in items:
        in_a = np.array([[s in sa for sa in a_sets] for s in bm.A], dtype=np.int64)
        in_b = np.array([[t in sb for sb in b_sets] for t in bm.B], dtype=np.int64)
        c = in_a @ in_b.T
        vals, freq = np.unique(c, return_counts=True)
        inner = sum(Fraction(int(f), int(v)) for v, f in zip(vals, freq))
        total += inner / (len(bm.A) * len(bm.B))
    return total


def jaccard_distance(b1, b2) -> float:
    """1 - |pairs(b1) & pairs(b2)| / |pairs(b1) | pairs(b2)|."""
    inter = len(set(b1.A) & set(b2.A)) * len(set(b1.B) & set(b2.B))
    union = len(b1.A) * len(b1.B) + len(b2.A) * len(b2.B) - inter
    return 1.0 - inter / union


def importance(bm, cluster) -> int:
    """Sum over the pairs of ``bm`` of how many cluster members contain them."""
    a, b = set(bm.A), set(bm.B)
    return sum(len(a.intersection(o.A)) * len(b.intersection(o.B)) for o in cluster)


def select_representatives(items) -> list:
    """Cluster into ceil(N_e) groups by average linkage on Jaccard distance
    and keep the most important member of each group.

    Ties go to the larger geometric size, then to the earlier item. Groups
    are returned in order of their first member.
    """
    items = list(items)
    if not items:
        return []
    n_groups = min(math.ceil(effective_number(items)), len(items))
    if len(items) == 1:
        return items[:]
    if n_groups == len(items):
        labels = np.arange(len(items))
    else:
        d = np.zeros((len(items), len(items)))
        for i in range(len(items)):
            for j in range(i + 1, len(items)):
                d[i, j] = d[j, i] = jaccard_distance(items[i], items[j])
        z = linkage(squareform(d, checks=False), method="average")
        labels = cut_tree(z, n_clusters=n_groups).ravel()
    groups: dict = {}
    for i, lab in enumerate(labels):
        groups.setdefault(int(lab), []).append(i)
    reps = []
    for members in sorted(groups.values(), key=lambda g: g[0]):
        cluster = [items[i] for i in members]
        best = max(members, key=lambda i: (importance(items[i], cluster),
                                           items[i].geometric_size, -i))
        reps.append(items[best])
    return reps
