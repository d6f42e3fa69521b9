import pytest
from hypothesis import given, settings, strategies as st

from bsp.fdr import by_threshold, harmonic


def brute_force(p, alpha):
    m = len(p)
    h = sum(1.0 / i for i in range(1, m + 1))
    order = sorted(p)
    tau = 0.0
    found = False
    for k in range(1, m + 1):
        if m * order[k - 1] / k <= alpha / h:
            tau = order[k - 1]
            found = True
    rejected = tuple(j for j in range(m) if found and p[j] <= tau)
    return tau, rejected


def test_hand_example():
    res = by_threshold([0.001, 0.01, 0.04, 0.5], 0.05)
    assert harmonic(4) == pytest.approx(25 / 12)
    bounds = [0.05 / (25 / 12) * k / 4 for k in range(1, 5)]
    assert bounds == pytest.approx([0.006, 0.012, 0.018, 0.024])
    assert res.tau == 0.01
    assert res.rejected == (0, 1)


def test_empty_and_none():
    assert by_threshold([], 0.05).rejected == ()
    res = by_threshold([0.5, 0.9], 0.05)
    assert res.rejected == () and res.tau == 0.0


def test_inclusive_boundary():
    # m=1: threshold alpha / H_1 = alpha exactly
    assert by_threshold([0.05], 0.05).rejected == (0,)


def test_ties_all_rejected():
    assert by_threshold([0.001, 0.001, 0.001, 0.9], 0.05).rejected == (0, 1, 2)


@settings(max_examples=300, deadline=None)
@given(st.lists(st.floats(0, 1), min_size=1, max_size=50), st.floats(0.001, 0.5))
def test_matches_brute_force(p, alpha):
    res = by_threshold(p, alpha)
    tau, rej = brute_force(p, alpha)
    assert res.rejected == rej
    assert res.tau == tau


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(0, 1), min_size=1, max_size=30), st.floats(0.001, 0.2))
def test_monotone_in_alpha(p, alpha):
    assert set(by_threshold(p, alpha).rejected) <= set(by_threshold(p, 2 * alpha).rejected)


def test_harmonic_exact_small():
    assert harmonic(1) == 1.0
    assert harmonic(3) == pytest.approx(11 / 6, rel=1e-15)
