import itertools
import math
import time
from collections import Counter

import numpy as np
import pytest

from nonclassical import boson
from nonclassical.errors import UnsupportedError

BS = boson.beamsplitter()


def fock_distribution(u, inp):
    """Oracle independent of permanents: expand prod_j (sum_i U_ij a_i^dag)^{s_j} on vacuum."""
    m = u.shape[0]
    poly = {tuple([0] * m): 1 + 0j}
    for j, s in enumerate(inp):
        for _ in range(s):
            nxt = {}
            for occ, c in poly.items():
                for i in range(m):
                    if u[i, j] == 0:
                        continue
                    o = list(occ)
                    o[i] += 1
                    nxt[tuple(o)] = nxt.get(tuple(o), 0) + c * u[i, j]
            poly = nxt
    norm_in = np.prod([math.factorial(s) for s in inp])
    return {occ: abs(c) ** 2 * np.prod([math.factorial(t) for t in occ]) / norm_in for occ, c in poly.items()}


def trajectory_distribution(u, inp):
    """Oracle: each labelled photon picks an output mode independently."""
    m = u.shape[0]
    p = np.abs(u) ** 2
    sources = [j for j, s in enumerate(inp) for _ in range(s)]
    dist = Counter()
    for dests in itertools.product(range(m), repeat=len(sources)):
        prob = np.prod([p[i, j] for i, j in zip(dests, sources)])
        occ = [0] * m
        for i in dests:
            occ[i] += 1
        dist[tuple(occ)] += prob
    return dist


def test_naive_examples():
    assert boson.permanent_naive(np.eye(3)) == 1
    assert boson.permanent_naive(np.ones((3, 3))) == 6
    assert boson.permanent_naive([[1, 2], [3, 4]]) == 10


def test_naive_guards():
    with pytest.raises(ValueError):
        boson.permanent_naive(np.ones((2, 3)))
    with pytest.raises(ValueError):
        boson.permanent_naive(np.ones((10, 10)))


def test_ryser_examples():
    assert boson.permanent_ryser(np.eye(4)) == 1
    assert abs(boson.permanent_ryser(BS)) <= 1e-12
    assert boson.permanent_ryser([[1, 2], [3, 4]]) == 10
    assert boson.permanent_ryser(np.ones((5, 5))) == 120
    with pytest.raises(ValueError):
        boson.permanent_ryser(np.ones((3, 2)))
    with pytest.raises(ValueError):
        boson.permanent_ryser(np.ones((31, 31)))


@pytest.mark.parametrize("n", range(2, 8))
def test_ryser_matches_naive(n):
    rng = np.random.default_rng(n)
    for _ in range(100):
        m = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        naive = boson.permanent_naive(m)
        assert abs(boson.permanent_ryser(m) - naive) <= 1e-9 * abs(naive)


def test_permanent_symmetries(rng):
    for n in range(2, 7):
        m = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        p = boson.permanent_ryser(m)
        rows, cols = rng.permutation(n), rng.permutation(n)
        assert abs(boson.permanent_ryser(m[rows][:, cols]) - p) <= 1e-9 * abs(p)
        assert abs(boson.permanent_ryser(m.conj()) - p.conjugate()) <= 1e-9 * abs(p)
        assert abs(boson.permanent_ryser(m.T) - p) <= 1e-9 * abs(p)


def test_outcome_probability_examples():
    assert boson.outcome_probability(np.eye(2), (1, 0), (1, 0)) == 1
    assert abs(boson.outcome_probability(BS, (1, 1), (1, 1))) <= 1e-12
    assert abs(boson.outcome_probability(BS, (1, 1), (2, 0)) - 0.5) <= 1e-12
    with pytest.raises(ValueError):
        boson.outcome_probability(BS, (1, 1), (1, 0))
    with pytest.raises(ValueError):
        boson.outcome_probability(np.ones((2, 2)), (1, 0), (1, 0))


def test_hong_ou_mandel_distribution(rng):
    dist, samples = boson.exact_distribution_and_sample(BS, (1, 1), 100_000, rng)
    d = dict(dist)
    assert [occ for occ, _ in dist] == [(0, 2), (1, 1), (2, 0)]
    assert abs(d[(2, 0)] - 0.5) <= 1e-12 and abs(d[(0, 2)] - 0.5) <= 1e-12
    assert abs(d[(1, 1)]) <= 1e-12
    freq = Counter(samples)
    assert abs(freq[(2, 0)] / 100_000 - 0.5) <= 0.01
    assert freq[(1, 1)] == 0


def test_distinguishable_hong_ou_mandel():
    d = dict(boson.distinguishable_distribution(BS, (1, 1)))
    assert abs(d[(2, 0)] - 0.25) <= 1e-12
    assert abs(d[(1, 1)] - 0.5) <= 1e-12
    assert abs(d[(0, 2)] - 0.25) <= 1e-12


def test_distinguishable_identity_is_point_mass():
    d = dict(boson.distinguishable_distribution(np.eye(3), (1, 0, 2)))
    assert d[(1, 0, 2)] == 1
    assert sum(d.values()) == 1


@pytest.mark.parametrize("m, inp", [(4, (1, 1, 0, 0)), (4, (2, 0, 0, 0)), (3, (1, 1, 1)), (6, (0, 2, 0, 1, 0, 0)), (5, (3, 0, 0, 0, 0))])
def test_distributions_match_oracles(m, inp, rng):
    u = boson.random_unitary(m, rng)
    bos = dict(boson.exact_distribution(u, inp))
    dis = dict(boson.distinguishable_distribution(u, inp))
    assert abs(sum(bos.values()) - 1) <= 1e-9
    assert abs(sum(dis.values()) - 1) <= 1e-9
    fock = fock_distribution(u, inp)
    traj = trajectory_distribution(u, inp)
    for occ in bos:
        assert abs(bos[occ] - fock.get(occ, 0)) <= 1e-12
        assert abs(dis[occ] - traj.get(occ, 0)) <= 1e-12


def test_random_distributions_normalize(rng):
    for _ in range(20):
        m = int(rng.integers(2, 7))
        n = int(rng.integers(1, 4))
        inp = np.bincount(rng.integers(0, m, n), minlength=m)
        u = boson.random_unitary(m, rng)
        assert abs(sum(p for _, p in boson.exact_distribution(u, inp)) - 1) <= 1e-9
        assert abs(sum(p for _, p in boson.distinguishable_distribution(u, inp)) - 1) <= 1e-9


def test_enumeration_guard():
    with pytest.raises(UnsupportedError):
        boson.exact_distribution(np.eye(30, dtype=complex), [1] * 15 + [0] * 15)


def test_random_unitary(rng):
    for m in (1, 2, 5, 8):
        u = boson.random_unitary(m, rng)
        assert np.max(np.abs(u @ u.conj().T - np.eye(m))) <= 1e-10
        assert np.allclose(np.linalg.norm(u, axis=0), 1, atol=1e-12, rtol=0)
    assert abs(abs(boson.random_unitary(1, rng)[0, 0]) - 1) <= 1e-12
    with pytest.raises(ValueError):
        boson.random_unitary(0, rng)


def test_random_unitary_haar_phase():
    # Haar measure: E|U_00|^2 = 1/m and the phase of U_00 is uniform
    rng = np.random.default_rng(5)
    samples = np.array([boson.random_unitary(3, rng)[0, 0] for _ in range(20_000)])
    assert abs(np.mean(np.abs(samples) ** 2) - 1 / 3) < 0.01
    assert abs(np.mean(samples)) < 0.02


def test_sample_from_frequencies(rng):
    u = boson.random_unitary(3, rng)
    dist, samples = boson.exact_distribution_and_sample(u, (1, 1, 0), 100_000, rng)
    freq = Counter(samples)
    for occ, p in dist:
        assert abs(freq[occ] / 100_000 - p) <= 4 * math.sqrt(p * (1 - p) / 100_000) + 1e-12


def test_parse_matrix_formats():
    m = boson.parse_matrix([[[1, 0], [0, 1]], [[0, -1], [2, 0]]])
    assert m[0, 1] == 1j and m[1, 0] == -1j
    assert np.array_equal(boson.parse_matrix([[1, 2], [3, 4]]), np.array([[1, 2], [3, 4]], dtype=complex))
    assert boson.parse_matrix(boson.matrix_to_json(m)).tolist() == m.tolist()
    with pytest.raises(ValueError):
        boson.parse_matrix([1, 2, 3])


@pytest.mark.slow
def test_ryser_benchmark_scaling():
    rows = boson.bench_permanent(range(16, 23), np.random.default_rng(0), repeats=5)
    times = dict(rows)
    assert times[20] < 10
    # growth per unit n from a least-squares fit of log2(time), robust to one noisy point
    slope = np.polyfit(list(times), np.log2(list(times.values())), 1)[0]
    assert 2 ** slope == pytest.approx(2.0, rel=0.35), rows
