import numpy as np
import pytest

from bsp.matrix import make_dataset
from bsp.tuning import choose_alpha, estimated_edge_error, half_permute
from bsp.network import NetStats
from bsp.pipeline import Discovery
from bsp.search import Bimodule


def raw_noise(n=60, p=20, q=10, seed=0):
    rng = np.random.default_rng(seed)
    return make_dataset(rng.standard_normal((n, p)), rng.standard_normal((n, q)))


def test_half_permute_structure():
    raw = raw_noise()
    inst = half_permute(raw, 3)
    assert len(inst.permuted_s) == 10 and len(inst.permuted_t) == 5
    z = (raw.x - raw.x.mean(0)) / np.linalg.norm(raw.x - raw.x.mean(0), axis=0)
    for s in range(raw.p):
        if s in inst.permuted_s:
            np.testing.assert_allclose(np.sort(inst.dataset.x[:, s]), np.sort(z[:, s]), atol=1e-12)
        else:
            np.testing.assert_allclose(inst.dataset.x[:, s], z[:, s], atol=1e-12)


def test_half_permute_explicit_permutations():
    raw = raw_noise(n=10)
    ident = np.arange(10)
    inst = half_permute(raw, 0, permutations=(ident, ident))
    z = raw.x - raw.x.mean(0)
    np.testing.assert_allclose(inst.dataset.x, z / np.linalg.norm(z, axis=0), atol=1e-12)


def test_permuted_columns_uncorrelated_on_average():
    rng = np.random.default_rng(0)
    n = 40
    common = rng.standard_normal((n, 1))
    raw = make_dataset(common + 0.3 * rng.standard_normal((n, 4)),
                       common + 0.3 * rng.standard_normal((n, 4)))
    vals = []
    for k in range(1000):
        inst = half_permute(raw, k)
        s = min(inst.permuted_s)
        vals.append(float(inst.dataset.x[:, s] @ inst.dataset.y[:, 0]))
    vals = np.array(vals)
    assert abs(vals.mean()) < 3 * vals.std() / np.sqrt(len(vals))


def test_estimated_edge_error():
    inst = half_permute(raw_noise(), 1)
    bad_s = min(inst.permuted_s)
    good_s = min(set(range(20)) - inst.permuted_s)
    good_t = min(set(range(10)) - inst.permuted_t)
    edges = ((bad_s, good_t, 0.5), (good_s, good_t, 0.4))
    d = Discovery(Bimodule(tuple(sorted({bad_s, good_s})), (good_t,)), NetStats(0.4, edges, 1.0))
    assert estimated_edge_error([d], inst) == 0.5
    assert estimated_edge_error([], inst) == 0.0


def test_noise_chooses_max_and_flags_zero_discovery():
    raw = raw_noise(n=60, p=30, q=15, seed=2)
    rep = choose_alpha(raw, [0.01, 0.03, 0.05], 2, target=0.05, rng_seed=0)
    assert rep.chosen_alpha == 0.05 and not rep.no_alpha_qualified
    assert all(m <= 0.05 for m in rep.mean_edge_error)
    assert rep.zero_discovery[0] >= 1


def test_no_alpha_qualified_falls_back_to_smallest(monkeypatch):
    import bsp.tuning as tuning
    monkeypatch.setattr(tuning, "estimated_edge_error", lambda d, i: 0.5)
    rep = choose_alpha(raw_noise(), [0.02, 0.04], 1, target=0.05)
    assert rep.chosen_alpha == 0.02 and rep.no_alpha_qualified


def test_choose_alpha_validation():
    raw = raw_noise()
    with pytest.raises(ValueError):
        choose_alpha(raw, [], 1)
    with pytest.raises(ValueError):
        choose_alpha(raw, [0.05, 0.01], 1)
    with pytest.raises(ValueError):
        choose_alpha(raw, [0.05], 0)
