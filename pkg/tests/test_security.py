import math

import numpy as np
import pytest
from scipy.optimize import brentq

from nonclassical import security
from nonclassical.errors import NumericalFailure
from nonclassical.security import binary_entropy, ck_secure, key_rate_gap, solve_threshold

# frozen from a 30-digit mpmath evaluation
H_017 = 0.657704778744219448558956739581
GAP_AT_ONE = -0.311278124459132863909695792039
F_STAR = 0.682142643401204197185290259933


def test_binary_entropy_values():
    assert binary_entropy(0) == 0
    assert binary_entropy(1) == 0
    assert binary_entropy(0.5) == 1
    assert abs(binary_entropy(0.17) - 0.6577) <= 1e-4
    assert abs(binary_entropy(0.17) - H_017) <= 1e-12


def series_entropy(p, terms=4000):
    """h(p) = 1 - sum_k (1-2p)^{2k} / (2k(2k-1) ln 2), valid on (0, 1)."""
    x = 1 - 2 * p
    s = sum(x ** (2 * k) / (2 * k * (2 * k - 1)) for k in range(1, terms))
    return 1 - s / math.log(2)


@pytest.mark.parametrize("p", [0.05, 0.17, 0.3, 0.5, 0.81])
def test_binary_entropy_against_series(p):
    assert abs(binary_entropy(p) - series_entropy(p)) <= 1e-9


@pytest.mark.parametrize("p", [-0.1, 1.1, float("nan")])
def test_binary_entropy_domain(p):
    with pytest.raises(ValueError):
        binary_entropy(p)


def test_binary_entropy_symmetric_and_concave():
    grid = np.linspace(0, 1, 1001)
    for p in grid:
        assert abs(binary_entropy(p) - binary_entropy(1 - p)) <= 1e-12
    for p, q in zip(grid[::7], grid[::-11]):
        assert binary_entropy((p + q) / 2) >= (binary_entropy(p) + binary_entropy(q)) / 2 - 1e-15


def test_ck_secure():
    assert ck_secure(1.0, 0.0)
    assert ck_secure(0.66, 0.34)
    assert not ck_secure(0.5, 0.6)


def test_key_rate_gap_examples():
    assert key_rate_gap(0) == 1
    assert abs(key_rate_gap(0.68)) <= 0.005
    assert abs(key_rate_gap(1) - GAP_AT_ONE) <= 1e-12
    assert abs(key_rate_gap(1) - (-0.3113)) <= 1e-4


def test_ck_at_the_threshold_neighbourhood():
    f = 0.68
    assert ck_secure(security.bob_information(f), security.eve_information_rate(f))
    assert not ck_secure(security.bob_information(0.7), security.eve_information_rate(0.7))


def test_key_rate_gap_strictly_decreasing():
    grid = np.arange(0, 1.0005, 1e-3)
    gaps = [key_rate_gap(min(f, 1.0)) for f in grid]
    assert all(b < a for a, b in zip(gaps, gaps[1:]))


def test_solve_threshold():
    rep = solve_threshold(1e-6)
    assert abs(rep.f_star - 0.680) <= 0.005
    assert abs(rep.e_max - 0.170) <= 0.002
    assert abs(key_rate_gap(rep.f_star)) <= 1e-6
    assert abs(rep.f_star - F_STAR) <= 1e-6
    assert rep.e_max == rep.f_star / 4


def test_solve_threshold_matches_brent():
    root = brentq(lambda f: 1 - binary_entropy(f / 4) - f / 2, 0, 1, xtol=1e-14)
    rep = solve_threshold(1e-10)
    assert abs(rep.f_star - root) <= 1e-9


@pytest.mark.parametrize("tol", [1e-2, 1e-4, 1e-8])
def test_residual_scales_with_tolerance(tol):
    rep = solve_threshold(tol)
    assert abs(key_rate_gap(rep.f_star)) <= 10 * tol


def test_solve_threshold_rejects_bad_tolerance():
    with pytest.raises(ValueError):
        solve_threshold(0)


def test_report_serializes():
    d = solve_threshold(1e-6).to_dict()
    assert set(d) == {"f_star", "e_max", "tolerance", "grid"}
    assert d["grid"][0] == [0.0, 1.0]


def test_report_guards():
    with pytest.raises(NumericalFailure):
        security.SecurityReport(f_star=1.5, e_max=0.375, tolerance=1e-6)
    with pytest.raises(NumericalFailure):
        security.SecurityReport(f_star=0.5, e_max=0.125, tolerance=1e-6, grid=[(0, 0.1), (1, 0.2)])


def test_distilled_fraction_monotone():
    es = np.linspace(0, 0.5, 101)
    fr = [security.distilled_fraction(e) for e in es]
    assert fr[0] == 1.0
    assert all(b <= a for a, b in zip(fr, fr[1:]))
    assert fr[-1] == 0.0
