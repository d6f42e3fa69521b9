"""Synthetic two-view benchmark with planted bimodules and bridge variables.

Each planted block (A, B) draws X_A from an equicorrelated Gaussian and sets
Y_B = X_A D + noise, where D is a random connected regressor graph with d
ones per column. Parameters are chosen so that every regressor edge has
population cross-correlation eta.
"""

from __future__ import annotations

import dataclasses
import itertools
import math
from collections import deque
from typing import Iterable, Optional

import numpy as np

from . import jsonio
from .errors import DataError, PreconditionError
from .matrix import make_dataset
from .network import UnionFind

MAX_ETA = 0.8
BETA_STEP = 0.1


@dataclasses.dataclass(frozen=True)
class PlantedParams:
    rho: float
    eta: float
    sigma: float
    d: int
    beta: float
    D: np.ndarray  # |A| x |B| boolean regressor graph

    @property
    def delta(self) -> float:
        return 1.0 + self.rho * (self.d - 1)


@dataclasses.dataclass(frozen=True)
class PlantedBimodule:
    A: tuple
    B: tuple
    rho: float
    eta: float
    sigma: float
    d: int
    regressor_edges: tuple  # (s, t) global index pairs with D = 1


@dataclasses.dataclass(frozen=True)
class BridgeRecord:
    t: int
    s: int
    s2: int
    sigma: float
    blocks: tuple


@dataclasses.dataclass
class GroundTruth:
    planted: list
    bridge_edges: list
    population_edges: Optional[set]
    p: int = 0
    q: int = 0

    def truth_edges(self) -> set:
        """Pairs that count as correct: every pair inside a planted A x B plus
        the population edges created by bridge variables."""
        out = set()
        for pb in self.planted:
            out.update(itertools.product(pb.A, pb.B))
        for br in self.bridge_edges:
            out.update(_bridge_edges(br, self.planted))
        return out

    def to_json(self, edge_cap: Optional[int] = None) -> dict:
        edges = sorted(self.population_edges) if self.population_edges is not None else None
        elided = edges is None or (edge_cap is not None and len(edges) > edge_cap)
        return {
            "p": self.p,
            "q": self.q,
            "planted": [
                {
                    "A": list(pb.A), "B": list(pb.B), "rho": pb.rho, "eta": pb.eta,
                    "sigma": pb.sigma, "d": pb.d,
                    "regressor_edges": [list(e) for e in pb.regressor_edges],
                }
                for pb in self.planted
            ],
            "bridges": [
                {"t": b.t, "s": b.s, "s2": b.s2, "sigma": b.sigma, "blocks": list(b.blocks)}
                for b in self.bridge_edges
            ],
            "population_edges": None if elided else [list(e) for e in edges],
            "population_edges_elided": elided,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "GroundTruth":
        planted = [
            PlantedBimodule(
                tuple(d["A"]), tuple(d["B"]), d["rho"], d["eta"], d["sigma"], d["d"],
                tuple(tuple(e) for e in d["regressor_edges"]),
            )
            for d in obj["planted"]
        ]
        bridges = [
            BridgeRecord(b["t"], b["s"], b["s2"], b["sigma"], tuple(b["blocks"]))
            for b in obj["bridges"]
        ]
        edges = obj.get("population_edges")
        truth = cls(planted, bridges, None, obj.get("p", 0), obj.get("q", 0))
        truth.population_edges = (
            {tuple(e) for e in edges} if edges is not None else _population_edges(planted, bridges)
        )
        return truth


def _bridge_edges(br: BridgeRecord, planted) -> set:
    out = {(br.s, br.t), (br.s2, br.t)}
    for k in br.blocks:
        if planted[k].rho > 0:
            out.update((a, br.t) for a in planted[k].A)
    return out


def _population_edges(planted, bridges) -> set:
    edges = set()
    for pb in planted:
        if pb.rho > 0:
            edges.update(itertools.product(pb.A, pb.B))
        else:
            edges.update(pb.regressor_edges)
    for br in bridges:
        edges.update(_bridge_edges(br, planted))
    return edges


# ---------------------------------------------------------------------------
# one planted block


def _connected(D: np.ndarray) -> bool:
    a, b = D.shape
    uf = UnionFind(a + b)
    for i, j in zip(*np.nonzero(D)):
        uf.union(int(i), a + int(j))
    return uf.components == 1


def _wire(a, b, d, rng) -> np.ndarray:
    D = np.zeros((a, b), dtype=bool)
    for j in range(b):
        D[rng.choice(a, size=d, replace=False), j] = True
    return D


def sample_planted_params(size_a: int, size_b: int, rng) -> PlantedParams:
    """Draw (rho, eta, sigma, D) for one planted block.

    beta ~ U[0, 1] sets d = ceil(beta |A|); the graph is rewired with beta
    raised by 0.1 until it is connected. rho ~ U[0, 1) and eta is uniform on
    (0, min(sqrt(delta / d), 0.8)] so that delta = 1 + rho (d - 1) >= eta^2 d.
    """
    if size_a < 1 or size_b < 1:
        raise PreconditionError("planted sets must be non-empty")
    beta = rng.uniform(0.0, 1.0)
    while True:
        d = max(1, min(size_a, math.ceil(beta * size_a)))
        D = _wire(size_a, size_b, d, rng)
        if _connected(D):
            break
        beta = min(beta + BETA_STEP, 1.0)
    rho = rng.uniform(0.0, 1.0)
    delta = 1.0 + rho * (d - 1)
    hi = min(math.sqrt(delta / d), MAX_ETA)
    eta = hi * (1.0 - rng.uniform(0.0, 1.0))  # in (0, hi]
    sigma = math.sqrt(max(delta * (delta - eta * eta * d), 0.0)) / eta
    return PlantedParams(rho, eta, sigma, d, beta, D)


def sample_block(params: PlantedParams, n: int, rng):
    """Draw n samples of (X_A, Y_B) for one block."""
    a, b = params.D.shape
    common = rng.standard_normal((n, 1))
    x = math.sqrt(params.rho) * common + math.sqrt(1.0 - params.rho) * rng.standard_normal((n, a))
    y = x @ params.D.astype(float) + params.sigma * rng.standard_normal((n, b))
    return x, y


def block_covariance(params: PlantedParams):
    """Population (Cov(X), Cov(X, Y), Cov(Y)) of one block."""
    D = params.D.astype(float)
    a, b = D.shape
    rho, d, s2 = params.rho, params.d, params.sigma**2
    cov_x = rho * np.ones((a, a)) + (1 - rho) * np.eye(a)
    cov_xy = rho * d * np.ones((a, b)) + (1 - rho) * D
    cov_y = rho * d * d * np.ones((b, b)) + (1 - rho) * D.T @ D + s2 * np.eye(b)
    return cov_x, cov_xy, cov_y


# ---------------------------------------------------------------------------
# full dataset


def _partition_sizes(total: int, k: int, rng) -> np.ndarray:
    """Dirichlet(1, ..., 1) proportions rounded by largest remainder, each >= 1."""
    props = rng.dirichlet(np.ones(k))
    spare = total - k
    raw = props * spare
    sizes = np.floor(raw).astype(int)
    short = spare - sizes.sum()
    order = np.argsort(-(raw - sizes), kind="stable")
    sizes[order[:short]] += 1
    return sizes + 1


def generate_dataset(p: int, q: int, n: int, K: int, bridge_rate: float = 1.5,
                     rng_seed: int = 0, on_bridge_shortage: str = "error"):
    """Simulate raw data with K planted bimodules in the first halves of S and T.

    Every unordered pair of blocks is bridged with probability
    ``bridge_rate / K`` by a spare second-half T feature
    Y = X_s + X_s' + noise. ``on_bridge_shortage`` is ``"error"`` or
    ``"skip"`` when spare T features run out.
    """
    p_half, q_half = math.ceil(p / 2), math.ceil(q / 2)
    if K < 1 or p_half < K or q_half < K:
        raise PreconditionError("need p, q >= 2K and K >= 1")
    if n < 10:
        raise PreconditionError("need n >= 10")
    master = np.random.SeedSequence(rng_seed)
    part_ss, bridge_ss, noise_ss, *block_ss = master.spawn(K + 3)
    part_rng = np.random.default_rng(part_ss)

    s_perm = part_rng.permutation(p_half)
    t_perm = part_rng.permutation(q_half)
    a_sizes = _partition_sizes(p_half, K, part_rng)
    b_sizes = _partition_sizes(q_half, K, part_rng)
    a_sets = np.split(s_perm, np.cumsum(a_sizes)[:-1])
    b_sets = np.split(t_perm, np.cumsum(b_sizes)[:-1])

    x = np.empty((n, p))
    y = np.empty((n, q))
    planted = []
    for k in range(K):
        rng = np.random.default_rng(block_ss[k])
        A = tuple(sorted(int(i) for i in a_sets[k]))
        B = tuple(sorted(int(j) for j in b_sets[k]))
        params = sample_planted_params(len(A), len(B), rng)
        xa, yb = sample_block(params, n, rng)
        x[:, A] = xa
        y[:, B] = yb
        reg = tuple((A[i], B[j]) for i, j in zip(*np.nonzero(params.D)))
        planted.append(PlantedBimodule(A, B, params.rho, params.eta, params.sigma,
                                       params.d, reg))

    noise_rng = np.random.default_rng(noise_ss)
    x[:, p_half:] = noise_rng.standard_normal((n, p - p_half))
    y[:, q_half:] = noise_rng.standard_normal((n, q - q_half))

    bridge_rng = np.random.default_rng(bridge_ss)
    spare = list(bridge_rng.permutation(np.arange(q_half, q)))
    prob = min(bridge_rate / K, 1.0)
    bridges = []
    for k, l in itertools.combinations(range(K), 2):
        if bridge_rng.uniform() >= prob:
            continue
        if not spare:
            if on_bridge_shortage == "skip":
                break
            raise DataError("not enough spare T features for bridge variables")
        t = int(spare.pop())
        s = int(bridge_rng.choice(planted[k].A))
        s2 = int(bridge_rng.choice(planted[l].A))
        c = 0.5 * (planted[k].eta + planted[l].eta)
        # corr(Y, X_s) = 1 / sqrt(2 + sigma^2); capped at 1/sqrt(2) when c is larger
        sig = math.sqrt(max(1.0 / (c * c) - 2.0, 0.0))
        y[:, t] = x[:, s] + x[:, s2] + sig * bridge_rng.standard_normal(n)
        bridges.append(BridgeRecord(t, s, s2, sig, (k, l)))

    truth = GroundTruth(planted, bridges, _population_edges(planted, bridges), p, q)
    return make_dataset(x, y), truth


# ---------------------------------------------------------------------------
# population layer


def population_bimodules(truth_or_edges) -> list:
    """Connected components (with both sides non-empty) of the population
    cross-correlation graph, found by alternating neighbourhood expansion
    from each T vertex. Returned as sorted (A, B) tuples in order of the
    smallest T member.
    """
    edges = (truth_or_edges.population_edges if isinstance(truth_or_edges, GroundTruth)
             else truth_or_edges)
    nb_s: dict = {}
    nb_t: dict = {}
    for s, t in edges:
        nb_s.setdefault(s, set()).add(t)
        nb_t.setdefault(t, set()).add(s)
    done = set()
    out = []
    for t0 in sorted(nb_t):
        if t0 in done:
            continue
        A, B = set(), {t0}
        frontier_t = deque([t0])
        while frontier_t:
            new_a = set()
            while frontier_t:
                new_a |= nb_t[frontier_t.popleft()] - A
            A |= new_a
            for s in new_a:
                for t in nb_s[s] - B:
                    B.add(t)
                    frontier_t.append(t)
        done |= B
        out.append((tuple(sorted(A)), tuple(sorted(B))))
    return out


def epsilon_zero(rho: np.ndarray) -> float:
    """delta / max(|S|, |T|) with delta the smallest nonzero squared correlation."""
    rho = np.asarray(rho, dtype=float)
    nz = rho[rho != 0]
    if nz.size == 0:
        return math.inf
    return float(np.min(nz * nz)) / max(rho.shape)


def _masks(k: int) -> np.ndarray:
    return np.array([[(m >> i) & 1 for i in range(k)] for m in range(2**k)], dtype=float)


def nash_equilibria(rho: np.ndarray, epsilon: float) -> set:
    """Non-empty Nash equilibria of the game with payoff
    sum_{A x B} rho^2 - epsilon |A||B|, by exhaustive best response."""
    rho = np.asarray(rho, dtype=float)
    a, b = rho.shape
    ia, ib = _masks(a), _masks(b)
    phi = ia @ (rho * rho) @ ib.T - epsilon * np.outer(ia.sum(1), ib.sum(1))
    tol = 1e-12 * max(1.0, float(np.abs(phi).max()))
    best_a = phi.max(axis=0)  # best response of player 1 to each B
    best_b = phi.max(axis=1)
    ok = (phi >= best_a[None, :] - tol) & (phi >= best_b[:, None] - tol)
    ok[0, :] = False
    ok[:, 0] = False
    out = set()
    for i, j in zip(*np.nonzero(ok)):
        A = tuple(k for k in range(a) if (i >> k) & 1)
        B = tuple(k for k in range(b) if (j >> k) & 1)
        out.add((A, B))
    return out


def stable_unions(components: Iterable) -> set:
    """All non-empty unions of components, as (A, B) sorted tuples."""
    comps = list(components)
    out = set()
    for r in range(1, len(comps) + 1):
        for combo in itertools.combinations(comps, r):
            A = tuple(sorted(itertools.chain.from_iterable(c[0] for c in combo)))
            B = tuple(sorted(itertools.chain.from_iterable(c[1] for c in combo)))
            out.add((A, B))
    return out


def nash_check(rho: np.ndarray, epsilon: float) -> bool:
    """Brute-force check, on a population correlation matrix with at most
    4 x 4 features, that the non-empty Nash equilibria coincide with the
    unions of connected components of the population network."""
    rho = np.asarray(rho, dtype=float)
    if rho.ndim != 2 or max(rho.shape) > 4 or min(rho.shape) < 1:
        raise PreconditionError("nash_check needs 1..4 features on each side")
    eps0 = epsilon_zero(rho)
    if not 0 < epsilon < eps0:
        raise PreconditionError(f"epsilon must lie in (0, {eps0})")
    edges = {(int(s), int(t)) for s, t in zip(*np.nonzero(rho))}
    return nash_equilibria(rho, epsilon) == stable_unions(population_bimodules(edges))


def truth_json_dump(truth: GroundTruth, path, edge_cap: Optional[int] = None) -> None:
    jsonio.dump(truth.to_json(edge_cap), path)
