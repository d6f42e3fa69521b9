"""Two-view data matrices: loading, covariate correction and standardization."""

from __future__ import annotations

import csv
import dataclasses
import struct
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import DataError

BINARY_MAGIC = b"BSPM"
MIN_SAMPLES = 4


@dataclasses.dataclass(frozen=True)
class TwoViewDataset:
    """Two sample-aligned matrices ``x`` (n x p) and ``y`` (n x q).

    ``n_eff`` is the effective sample size after covariates were projected
    out; it drives the degrees of freedom of every p-value.
    """

    x: np.ndarray
    y: np.ndarray
    s_ids: tuple
    t_ids: tuple
    n_eff: int
    standardized: bool = False
    covariates: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.x.ndim != 2 or self.y.ndim != 2:
            raise DataError("x and y must be two-dimensional")
        if self.x.shape[0] != self.y.shape[0]:
            raise DataError(
                f"dimension mismatch: x has {self.x.shape[0]} rows, y has {self.y.shape[0]}"
            )
        if len(self.s_ids) != self.x.shape[1] or len(self.t_ids) != self.y.shape[1]:
            raise DataError("feature id count does not match column count")
        _check_unique(self.s_ids, "x")
        _check_unique(self.t_ids, "y")
        if self.n < MIN_SAMPLES:
            raise DataError(f"need at least {MIN_SAMPLES} samples, got {self.n}")
        if self.n_eff < MIN_SAMPLES:
            raise DataError(f"effective sample size {self.n_eff} is below {MIN_SAMPLES}")

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def p(self) -> int:
        return self.x.shape[1]

    @property
    def q(self) -> int:
        return self.y.shape[1]

    @property
    def dof(self) -> int:
        """Degrees of freedom of the permutation null (one lost to centering)."""
        return self.n_eff - 1


def _check_unique(ids, view):
    if len(set(ids)) != len(ids):
        seen = set()
        for i in ids:
            if i in seen:
                raise DataError(f"duplicate feature id {i!r} in {view}")
            seen.add(i)


def make_dataset(x, y, s_ids=None, t_ids=None, covariates=None) -> TwoViewDataset:
    """Wrap raw arrays, generating ids ``s0..``/``t0..`` when none are given."""
    x = np.array(x, dtype=float, ndmin=2)
    y = np.array(y, dtype=float, ndmin=2)
    if s_ids is None:
        s_ids = [f"s{i}" for i in range(x.shape[1])]
    if t_ids is None:
        t_ids = [f"t{j}" for j in range(y.shape[1])]
    cov = None
    if covariates is not None:
        cov = check_covariates(covariates, x.shape[0])
    return TwoViewDataset(x, y, tuple(s_ids), tuple(t_ids), n_eff=x.shape[0], covariates=cov)


def check_covariates(v, n: int) -> np.ndarray:
    v = np.array(v, dtype=float, ndmin=2)
    if v.shape[0] != n:
        raise DataError(f"dimension mismatch: covariates have {v.shape[0]} rows, data has {n}")
    m = v.shape[1]
    if m > n - MIN_SAMPLES:
        raise DataError(f"{m} covariates leave fewer than {MIN_SAMPLES} effective samples")
    if np.linalg.matrix_rank(v) < m:
        raise DataError("covariates are rank deficient")
    return v


# ---------------------------------------------------------------------------
# file formats


def read_matrix(path) -> tuple[np.ndarray, list]:
    """Read a CSV (header row of ids) or a BSPM binary matrix."""
    path = Path(path)
    with open(path, "rb") as fh:
        head = fh.read(4)
    if head == BINARY_MAGIC:
        return _read_binary(path)
    return _read_csv(path)


def _read_csv(path):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            ids = [c.strip() for c in next(reader)]
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(ids):
                raise DataError(f"{path}:{lineno}: expected {len(ids)} cells, got {len(row)}")
            try:
                rows.append([float(c) for c in row])
            except ValueError:
                raise DataError(f"{path}:{lineno}: non-numeric cell") from None
    data = np.array(rows, dtype=float).reshape(len(rows), len(ids))
    if not np.all(np.isfinite(data)):
        raise DataError(f"{path}: missing or non-finite values are not supported")
    return data, ids


def _read_binary(path):
    raw = Path(path).read_bytes()
    nrow, ncol = struct.unpack_from("<QQ", raw, 4)
    start = 20
    end = start + 8 * nrow * ncol
    if len(raw) < end:
        raise DataError(f"{path}: truncated binary matrix")
    data = np.frombuffer(raw, dtype="<f8", count=nrow * ncol, offset=start)
    data = data.reshape(nrow, ncol).astype(float)
    ids = raw[end:].decode("utf-8").split("\n")
    ids = [i for i in ids if i != ""]
    if len(ids) != ncol:
        raise DataError(f"{path}: expected {ncol} ids, found {len(ids)}")
    return data, ids


def write_matrix(path, data, ids, fmt: str = "csv") -> None:
    data = np.asarray(data, dtype=float)
    if fmt == "csv":
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(ids)
            for row in data:
                w.writerow([repr(float(v)) for v in row])
    elif fmt == "bin":
        with open(path, "wb") as fh:
            fh.write(BINARY_MAGIC)
            fh.write(struct.pack("<QQ", data.shape[0], data.shape[1]))
            fh.write(np.ascontiguousarray(data, dtype="<f8").tobytes())
            fh.write("\n".join(str(i) for i in ids).encode("utf-8"))
            fh.write(b"\n")
    else:
        raise ValueError(f"unknown matrix format {fmt!r}")


def load_dataset(x_path, y_path, cov_path=None) -> TwoViewDataset:
    """Load and validate both views (and optional covariates) from disk.

    The result is not standardized; covariates are attached but not yet
    projected out.
    """
    x, s_ids = read_matrix(x_path)
    y, t_ids = read_matrix(y_path)
    if x.shape[0] != y.shape[0]:
        raise DataError(f"dimension mismatch: x has {x.shape[0]} rows, y has {y.shape[0]}")
    cov = None
    if cov_path is not None:
        cov, _ = read_matrix(cov_path)
    return make_dataset(x, y, s_ids, t_ids, covariates=cov)


# ---------------------------------------------------------------------------
# transforms


def residualize(dataset: TwoViewDataset, cov=None) -> TwoViewDataset:
    """Project every column of both views off the span of the covariates.

    Uses the covariates attached to ``dataset`` when ``cov`` is omitted.
    ``n_eff`` drops by the number of covariates.
    """
    if dataset.standardized:
        raise DataError("residualize must run before standardize")
    v = dataset.covariates if cov is None else cov
    if v is None:
        return dataset
    v = check_covariates(v, dataset.n)
    q, _ = np.linalg.qr(v)
    x = dataset.x - q @ (q.T @ dataset.x)
    y = dataset.y - q @ (q.T @ dataset.y)
    return dataclasses.replace(
        dataset, x=x, y=y, n_eff=dataset.n - v.shape[1], covariates=None
    )


def _standardize_block(a: np.ndarray, ids: Sequence, tol: float = 1e-12) -> np.ndarray:
    a = a - a.mean(axis=0)
    norms = np.linalg.norm(a, axis=0)
    bad = np.flatnonzero(norms <= tol)
    if bad.size:
        raise DataError(f"constant column: feature {ids[bad[0]]!r}")
    a = a / norms
    # a second pass removes the rounding left by the first
    a -= a.mean(axis=0)
    a /= np.linalg.norm(a, axis=0)
    return a


def standardize(dataset: TwoViewDataset) -> TwoViewDataset:
    """Center each column and scale it to unit Euclidean norm.

    With this scaling the sample correlation of two columns is their inner
    product. The returned arrays are read-only.
    """
    x = _standardize_block(dataset.x, dataset.s_ids)
    y = _standardize_block(dataset.y, dataset.t_ids)
    x.setflags(write=False)
    y.setflags(write=False)
    return dataclasses.replace(dataset, x=x, y=y, standardized=True)


def prepare(dataset: TwoViewDataset) -> TwoViewDataset:
    """Residualize attached covariates, then standardize."""
    return standardize(residualize(dataset))
