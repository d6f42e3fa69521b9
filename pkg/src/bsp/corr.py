"""Cross-correlation statistics on a standardized two-view dataset.

All functions take feature sets as sequences of column indices. For a
standardized dataset the correlation of two columns is their inner product,
so every statistic here is a matrix product.
"""

from __future__ import annotations

import enum

import numpy as np

from .errors import PreconditionError

# columns of the opposite view scored per matrix product in r2_profile
PROFILE_BLOCK = 4096


class View(enum.Enum):
    TypeOne = "S"
    TypeTwo = "T"

    @property
    def opposite(self) -> "View":
        return View.TypeTwo if self is View.TypeOne else View.TypeOne


def columns(dataset, view: View) -> np.ndarray:
    return dataset.x if view is View.TypeOne else dataset.y


def _require_standardized(dataset):
    if not dataset.standardized:
        raise PreconditionError("dataset must be standardized first")


def _as_index(idx) -> np.ndarray:
    return np.asarray(list(idx) if not isinstance(idx, np.ndarray) else idx, dtype=np.intp)


def cross_corr_block(dataset, A, B) -> np.ndarray:
    """|A| x |B| matrix of correlations between x-columns A and y-columns B."""
    _require_standardized(dataset)
    A, B = _as_index(A), _as_index(B)
    return dataset.x[:, A].T @ dataset.y[:, B]


def r2_sum(dataset, A, B) -> float:
    """Aggregate squared cross-correlation; 0 when either set is empty."""
    if len(A) == 0 or len(B) == 0:
        return 0.0
    r = cross_corr_block(dataset, A, B)
    return float(np.sum(r * r))


def r2_profile(dataset, idx, view: View = View.TypeOne) -> np.ndarray:
    """Aggregate squared correlation of the set ``idx`` (in ``view``) with
    every single feature of the opposite view.

    Returns a vector of length q for a TypeOne set, length p for a TypeTwo set.
    """
    _require_standardized(dataset)
    idx = _as_index(idx)
    if idx.size == 0:
        raise PreconditionError("r2_profile needs a non-empty set")
    own = columns(dataset, view)[:, idx]
    other = columns(dataset, view.opposite)
    out = np.empty(other.shape[1])
    for lo in range(0, other.shape[1], PROFILE_BLOCK):
        hi = min(lo + PROFILE_BLOCK, other.shape[1])
        r = own.T @ other[:, lo:hi]
        out[lo:hi] = np.einsum("ij,ij->j", r, r)
    return out


def intra_eigenvalues(dataset, idx, view: View = View.TypeOne) -> np.ndarray:
    """Eigenvalues of the intra-correlation matrix of a feature set, descending.

    The nonzero spectrum is taken from whichever Gram matrix is smaller
    (features x features or samples x samples); the rest are exact zeros.
    Round-off negatives are clamped to 0.
    """
    _require_standardized(dataset)
    idx = _as_index(idx)
    a = columns(dataset, view)[:, idx]
    k = idx.size
    if k <= a.shape[0]:
        lam = np.linalg.eigvalsh(a.T @ a)
    else:
        lam = np.concatenate([np.linalg.eigvalsh(a @ a.T), np.zeros(k - a.shape[0])])
    lam = np.clip(lam, 0.0, None)
    return np.sort(lam)[::-1]
