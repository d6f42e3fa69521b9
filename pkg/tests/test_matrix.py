import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from bsp.errors import DataError
from bsp.matrix import (load_dataset, make_dataset, prepare, read_matrix, residualize,
                        standardize, write_matrix)


def test_standardize_unit_norm_and_centered(rng):
    ds = standardize(make_dataset(rng.normal(3, 2, (30, 5)), rng.normal(-1, 5, (30, 4))))
    for m in (ds.x, ds.y):
        np.testing.assert_allclose(m.mean(axis=0), 0, atol=1e-14)
        np.testing.assert_allclose(np.linalg.norm(m, axis=0), 1, atol=1e-14)
    assert ds.standardized
    with pytest.raises(ValueError):
        ds.x[0, 0] = 1.0


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, (12, 3), elements=st.floats(-1e3, 1e3)),
       st.floats(0.1, 100), st.floats(-50, 50))
def test_standardize_affine_invariant(x, scale, shift):
    x = x + np.arange(12)[:, None]  # avoid constant columns
    y = np.random.default_rng(0).standard_normal((12, 2))
    a = standardize(make_dataset(x, y))
    b = standardize(make_dataset(x * scale + shift, y))
    np.testing.assert_allclose(a.x, b.x, atol=1e-9)


def test_constant_column_named(rng):
    x = rng.standard_normal((10, 3))
    x[:, 1] = 7.0
    with pytest.raises(DataError, match="s1"):
        standardize(make_dataset(x, rng.standard_normal((10, 2))))


def test_dimension_mismatch(rng):
    with pytest.raises(DataError, match="dimension mismatch"):
        make_dataset(rng.standard_normal((10, 3)), rng.standard_normal((9, 2)))


def test_duplicate_ids(rng):
    with pytest.raises(DataError, match="duplicate"):
        make_dataset(rng.standard_normal((10, 2)), rng.standard_normal((10, 2)), s_ids=["a", "a"])


def test_too_few_samples(rng):
    with pytest.raises(DataError):
        make_dataset(rng.standard_normal((3, 2)), rng.standard_normal((3, 2)))


def test_residual_orthogonal_to_covariates(rng):
    cov = rng.standard_normal((50, 3))
    x = rng.standard_normal((50, 4)) + cov @ rng.standard_normal((3, 4))
    ds = residualize(make_dataset(x, rng.standard_normal((50, 2)), covariates=cov))
    for j in range(4):
        for c in range(3):
            assert abs(sum(ds.x[i, j] * cov[i, c] for i in range(50))) < 1e-9
    assert ds.n_eff == 47
    assert ds.dof == 46


def test_covariate_errors(rng):
    x, y = rng.standard_normal((10, 2)), rng.standard_normal((10, 2))
    with pytest.raises(DataError, match="rank"):
        make_dataset(x, y, covariates=np.ones((10, 2)))
    with pytest.raises(DataError):
        make_dataset(x, y, covariates=rng.standard_normal((10, 7)))
    with pytest.raises(DataError, match="dimension mismatch"):
        make_dataset(x, y, covariates=rng.standard_normal((9, 1)))


def test_residualize_after_standardize_rejected(rng):
    ds = standardize(make_dataset(rng.standard_normal((10, 2)), rng.standard_normal((10, 2))))
    with pytest.raises(DataError):
        residualize(ds, rng.standard_normal((10, 1)))


@pytest.mark.parametrize("fmt,ext", [("csv", "csv"), ("bin", "bin")])
def test_roundtrip(tmp_path, rng, fmt, ext):
    data = rng.standard_normal((6, 3))
    path = tmp_path / f"m.{ext}"
    write_matrix(path, data, ["a", "b", "c"], fmt)
    back, ids = read_matrix(path)
    assert ids == ["a", "b", "c"]
    np.testing.assert_array_equal(back, data)


def test_load_dataset_with_covariates(tmp_path, rng):
    write_matrix(tmp_path / "x.csv", rng.standard_normal((20, 3)), ["s1", "s2", "s3"])
    write_matrix(tmp_path / "y.csv", rng.standard_normal((20, 2)), ["t1", "t2"])
    write_matrix(tmp_path / "c.csv", rng.standard_normal((20, 2)), ["c1", "c2"])
    ds = prepare(load_dataset(tmp_path / "x.csv", tmp_path / "y.csv", tmp_path / "c.csv"))
    assert ds.n_eff == 18 and ds.s_ids == ("s1", "s2", "s3")
