import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bsp.corr import View, cross_corr_block, intra_eigenvalues, r2_profile, r2_sum
from bsp.errors import PreconditionError
from bsp.matrix import make_dataset, prepare

from conftest import noise_dataset, pearson


def test_cross_corr_matches_scalar_loop(rng):
    x, y = rng.standard_normal((30, 4)), rng.standard_normal((30, 3))
    ds = prepare(make_dataset(x, y))
    r = cross_corr_block(ds, range(4), range(3))
    for i in range(4):
        for j in range(3):
            assert abs(r[i, j] - pearson(list(x[:, i]), list(y[:, j]))) < 1e-10


def test_r2_sum_elementwise(rng):
    x, y = rng.standard_normal((25, 3)), rng.standard_normal((25, 2))
    ds = prepare(make_dataset(x, y))
    want = sum(pearson(list(x[:, i]), list(y[:, j])) ** 2 for i in range(3) for j in range(2))
    assert abs(r2_sum(ds, [0, 1, 2], [0, 1]) - want) < 1e-9


def test_r2_profile_matches_loop():
    ds = noise_dataset(40, 30, 20, seed=3)
    A = [1, 4, 9]
    prof = r2_profile(ds, A, View.TypeOne)
    want = [r2_sum(ds, A, [t]) for t in range(ds.q)]
    np.testing.assert_allclose(prof, want, atol=1e-9)
    B = [0, 5]
    prof = r2_profile(ds, B, View.TypeTwo)
    np.testing.assert_allclose(prof, [r2_sum(ds, [s], B) for s in range(ds.p)], atol=1e-9)


def test_r2_profile_blocked(monkeypatch):
    import bsp.corr
    ds = noise_dataset(20, 12, 9, seed=1)
    full = r2_profile(ds, [0, 2], View.TypeOne)
    monkeypatch.setattr(bsp.corr, "PROFILE_BLOCK", 2)
    np.testing.assert_allclose(r2_profile(ds, [0, 2], View.TypeOne), full, atol=1e-14)


def test_intra_eigenvalues_match_dense_solver(rng):
    x = rng.standard_normal((40, 6)) + rng.standard_normal((40, 1))
    ds = prepare(make_dataset(x, rng.standard_normal((40, 2))))
    lam = intra_eigenvalues(ds, range(6), View.TypeOne)
    gram = ds.x.T @ ds.x
    ref = np.sort(np.linalg.eigvalsh(gram))[::-1]
    np.testing.assert_allclose(lam, ref, atol=1e-8)
    assert abs(lam.sum() - 6) < 1e-10


def test_intra_eigenvalues_rank_deficient(rng):
    # more columns than samples: trailing eigenvalues are zero
    ds = noise_dataset(8, 12, 2, seed=2)
    lam = intra_eigenvalues(ds, range(12), View.TypeOne)
    assert len(lam) == 12 and np.all(lam >= 0) and np.all(np.diff(lam) <= 1e-12)
    assert abs(lam.sum() - 12) < 1e-9


@settings(max_examples=30, deadline=None)
@given(st.lists(st.integers(0, 19), min_size=1, max_size=8, unique=True))
def test_r2_profile_order_invariant(A):
    ds = noise_dataset(30, 20, 10, seed=7)
    a = r2_profile(ds, A, View.TypeOne)
    b = r2_profile(ds, list(reversed(A)), View.TypeOne)
    np.testing.assert_allclose(a, b, atol=1e-12)
    assert np.all(a >= 0) and np.all(a <= len(A) + 1e-12)


def test_requires_standardized(rng):
    ds = make_dataset(rng.standard_normal((10, 2)), rng.standard_normal((10, 2)))
    with pytest.raises(PreconditionError):
        r2_sum(ds, [0], [0])


def test_view_opposite():
    assert View.TypeOne.opposite is View.TypeTwo
    assert View.TypeTwo.opposite is View.TypeOne
