"""Permutation p-values for aggregate squared correlations.

Under the permutation null a statistic R^2(A, t) behaves like
sum_i lambda_i * w_i, where lambda are the eigenvalues of the intra-correlation
matrix of A and w is a symmetric Dirichlet(1/2, ..., 1/2) vector with ``dof``
components. Its first three moments follow in closed form; the tail is then
read off a location-shifted Gamma with the same three moments.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np
from scipy import special, stats

from .corr import View, columns, intra_eigenvalues, r2_sum
from .errors import PreconditionError

P_FLOOR = 1e-300
EIG_REL_TOL = 1e-12
MIN_DOF = 5


@dataclasses.dataclass(frozen=True)
class PermMoments:
    mean: float
    variance: float
    third_central: float
    m: int

    @property
    def degenerate(self) -> bool:
        return not self.variance > 0


@dataclasses.dataclass(frozen=True)
class ShiftedGamma:
    shape: float
    scale: float
    shift: float

    @property
    def mean(self):
        return self.shift + self.shape * self.scale

    @property
    def variance(self):
        return self.shape * self.scale**2

    @property
    def third_central(self):
        return 2.0 * self.shape * self.scale**3

    def sf(self, x):
        z = (np.asarray(x, dtype=float) - self.shift) / self.scale
        return special.gammaincc(self.shape, np.maximum(z, 0.0))


@dataclasses.dataclass(frozen=True)
class NormalTail:
    """Fallback when the fitted skewness is not positive."""

    mean: float
    sd: float
    shift: float = -math.inf

    def sf(self, x):
        return stats.norm.sf(np.asarray(x, dtype=float), loc=self.mean, scale=self.sd)


def moments_from_eigenvalues(lambdas, m: int) -> PermMoments:
    """First three permutation moments of R^2 given intra-correlation eigenvalues.

    With S_k = sum(lambda**k) the raw moments are S1/m,
    (S1^2 + 2 S2)/(m(m+2)) and (S1^3 + 6 S1 S2 + 8 S3)/(m(m+2)(m+4)).
    """
    if m < MIN_DOF:
        raise PreconditionError(f"degrees of freedom m={m} < {MIN_DOF}")
    lam = np.asarray(lambdas, dtype=float)
    if np.any(lam < 0):
        raise PreconditionError("eigenvalues must be non-negative")
    s1 = float(lam.sum())
    if s1 <= 0:
        return PermMoments(0.0, 0.0, 0.0, m)
    lam = lam[lam > EIG_REL_TOL * s1]
    s2 = float(np.sum(lam**2))
    s3 = float(np.sum(lam**3))
    mu1 = s1 / m
    mu2 = (s1 * s1 + 2 * s2) / (m * (m + 2))
    mu3 = (s1**3 + 6 * s1 * s2 + 8 * s3) / (m * (m + 2) * (m + 4))
    var = mu2 - mu1 * mu1
    third = mu3 - 3 * mu1 * mu2 + 2 * mu1**3
    return PermMoments(mu1, var, third, m)


def fit_shifted_gamma(moments: PermMoments):
    """Shifted Gamma matching mean, variance and third central moment.

    Returns a :class:`NormalTail` instead when the third central moment is
    not positive.
    """
    if moments.degenerate:
        raise PreconditionError("cannot fit a null distribution with zero variance")
    if not moments.third_central > 0:
        return NormalTail(moments.mean, math.sqrt(moments.variance))
    theta = moments.third_central / (2.0 * moments.variance)
    k = moments.variance / theta**2
    return ShiftedGamma(shape=k, scale=theta, shift=moments.mean - k * theta)


def pvalue(statistic, fit):
    """Upper-tail probability of ``fit`` at ``statistic``, floored at 1e-300."""
    x = np.asarray(statistic, dtype=float)
    p = np.where(x <= fit.shift, 1.0, fit.sf(x))
    p = np.clip(p, P_FLOOR, 1.0)
    return float(p) if p.ndim == 0 else p


def null_fit(lambdas, m: int):
    """Fitted null for one conditioning set, or None when it is degenerate."""
    mom = moments_from_eigenvalues(lambdas, m)
    if mom.degenerate:
        return None
    return fit_shifted_gamma(mom)


def approx_pvalues(statistics, lambdas, m: int):
    """Approximate permutation p-values of many statistics sharing one
    conditioning set."""
    fit = null_fit(lambdas, m)
    if fit is None:
        return np.ones_like(np.asarray(statistics, dtype=float))
    return pvalue(statistics, fit)


# ---------------------------------------------------------------------------
# Monte Carlo permutation


def _permutations(rng, n_perms, n):
    return rng.permuted(np.tile(np.arange(n), (n_perms, 1)), axis=1)


def permutation_statistics(dataset, A, t, n_perms, rng, view: View = View.TypeOne,
                           chunk: int = 2048) -> np.ndarray:
    """R^2(A, t) under ``n_perms`` random permutations of the sample labels of t.

    ``A`` lives in ``view``; ``t`` is a single feature of the opposite view.
    """
    a = columns(dataset, view)[:, np.asarray(A, dtype=np.intp)]
    col = columns(dataset, view.opposite)[:, int(t)]
    out = np.empty(n_perms)
    for lo in range(0, n_perms, chunk):
        hi = min(lo + chunk, n_perms)
        perm = _permutations(rng, hi - lo, dataset.n)
        r = col[perm] @ a
        out[lo:hi] = np.einsum("ij,ij->i", r, r)
    return out


def mc_pvalue_oracle(dataset, A, t, n_perms: int, rng_seed, view: View = View.TypeOne) -> float:
    """Direct Monte Carlo estimate (1 + #{R^2 >= r^2}) / (n_perms + 1)."""
    if n_perms < 100:
        raise PreconditionError("n_perms must be at least 100")
    A = list(A)
    if view is View.TypeOne:
        observed = r2_sum(dataset, A, [t])
    else:
        observed = r2_sum(dataset, [t], A)
    rng = np.random.default_rng(rng_seed)
    perm = permutation_statistics(dataset, A, t, n_perms, rng, view)
    # equal values must count as exceedances despite summation-order round-off
    tol = 1e-12 * max(1.0, observed)
    return (1 + int(np.sum(perm >= observed - tol))) / (n_perms + 1)


def set_permutation_statistics(dataset, A, B, n_perms, rng, chunk: int = 1024) -> np.ndarray:
    """R^2(A, B) when all columns of B share one permutation of the samples.

    Both sets are first reduced to their principal directions, which leaves
    the Frobenius norm of the cross-correlation block unchanged.
    """
    xa = dataset.x[:, np.asarray(A, dtype=np.intp)]
    yb = dataset.y[:, np.asarray(B, dtype=np.intp)]
    ua, sa, _ = np.linalg.svd(xa, full_matrices=False)
    ub, sb, _ = np.linalg.svd(yb, full_matrices=False)
    left = ua * sa  # n x ra
    right = ub * sb  # n x rb
    out = np.empty(n_perms)
    for lo in range(0, n_perms, chunk):
        hi = min(lo + chunk, n_perms)
        perm = _permutations(rng, hi - lo, dataset.n)
        blk = np.einsum("na,knb->kab", left, right[perm], optimize=True)
        out[lo:hi] = np.einsum("kab,kab->k", blk, blk)
    return out


def _sample_moments(values):
    mean = float(values.mean())
    c = values - mean
    var = float(np.mean(c * c))
    third = float(np.mean(c**3))
    return mean, var, third


def set_pvalue(dataset, A, B, rng_seed=0, n_perms: int = 2000):
    """p(A, B) for arbitrary non-empty sets.

    When either set is a singleton the closed-form eigenvalue moments of the
    other side are used. Otherwise the first three moments of the joint
    permutation distribution are estimated from ``n_perms`` shared
    permutations and the shifted-Gamma tail of those moments is returned,
    which resolves p-values far below 1 / n_perms.
    """
    A, B = list(A), list(B)
    if not A or not B:
        return 1.0
    observed = r2_sum(dataset, A, B)
    m = dataset.dof
    if len(A) == 1:
        return float(approx_pvalues(observed, intra_eigenvalues(dataset, B, View.TypeTwo), m))
    if len(B) == 1:
        return float(approx_pvalues(observed, intra_eigenvalues(dataset, A, View.TypeOne), m))
    rng = np.random.default_rng(rng_seed)
    perm = set_permutation_statistics(dataset, A, B, n_perms, rng)
    mean, var, third = _sample_moments(perm)
    if not var > 0:
        return 1.0
    fit = fit_shifted_gamma(PermMoments(mean, var, third, m))
    return pvalue(observed, fit)
