"""Permanents and exact boson-sampling statistics at desk scale.

``U[i, j]`` is the amplitude for a photon entering mode ``j`` to leave in mode
``i``. For input occupation ``s`` and output occupation ``t`` the relevant
matrix repeats column ``j`` of ``U`` ``s[j]`` times and row ``i`` ``t[i]``
times.
"""

from __future__ import annotations

import itertools
import math
import time

import numba
import numpy as np

from .errors import NumericalFailure, UnsupportedError

NAIVE_MAX = 9
RYSER_MAX = 30
ENUMERATION_MAX = 10**6
UNITARY_TOL = 1e-10


def _square(matrix) -> np.ndarray:
    m = np.asarray(matrix, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"permanent needs a square matrix, got shape {m.shape}")
    return m


def permanent_naive(matrix) -> complex:
    """Sum over all permutations; reference oracle for small n."""
    m = _square(matrix)
    n = m.shape[0]
    if n > NAIVE_MAX:
        raise ValueError(f"naive permanent limited to n <= {NAIVE_MAX}, got {n}")
    total = 0j
    for sigma in itertools.permutations(range(n)):
        term = 1 + 0j
        for i, j in enumerate(sigma):
            term *= m[i, j]
        total += term
    return complex(total)


@numba.njit(cache=True)
def _ryser_gray(m):
    n = m.shape[0]
    row_sums = np.zeros(n, dtype=np.complex128)
    in_subset = np.zeros(n, dtype=np.bool_)
    total = 0j
    size = 0
    for k in range(1, 1 << n):
        # column toggled between consecutive Gray codes = lowest set bit of k
        j = 0
        while not (k >> j) & 1:
            j += 1
        if in_subset[j]:
            in_subset[j] = False
            size -= 1
            for i in range(n):
                row_sums[i] -= m[i, j]
        else:
            in_subset[j] = True
            size += 1
            for i in range(n):
                row_sums[i] += m[i, j]
        prod = 1 + 0j
        for i in range(n):
            prod *= row_sums[i]
        if size & 1:
            total -= prod
        else:
            total += prod
    if n & 1:
        total = -total
    return total


def permanent_ryser(matrix) -> complex:
    """Ryser's inclusion-exclusion formula with Gray-code subset order, O(2^n n)."""
    m = _square(matrix)
    n = m.shape[0]
    if n > RYSER_MAX:
        raise ValueError(f"Ryser permanent limited to n <= {RYSER_MAX}, got {n}")
    if n == 0:
        return 1 + 0j
    return complex(_ryser_gray(np.ascontiguousarray(m, dtype=np.complex128)))


def _occupation(counts, m: int | None = None, name: str = "occupation") -> tuple[int, ...]:
    counts = tuple(int(c) for c in counts)
    if any(c < 0 for c in counts):
        raise ValueError(f"{name} has negative counts: {counts}")
    if m is not None and len(counts) != m:
        raise ValueError(f"{name} has {len(counts)} modes, interferometer has {m}")
    return counts


def check_unitary(u, tol: float = UNITARY_TOL) -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ValueError(f"interferometer must be square, got shape {u.shape}")
    err = np.max(np.abs(u @ u.conj().T - np.eye(u.shape[0])))
    if err > tol:
        raise ValueError(f"interferometer is not unitary (max |UU^dag - I| = {err:.3g})")
    return u


def _expanded(u: np.ndarray, inp, out) -> np.ndarray:
    cols = [j for j, s in enumerate(inp) for _ in range(s)]
    rows = [i for i, t in enumerate(out) for _ in range(t)]
    return u[np.ix_(rows, cols)]


def _norm(inp, out) -> float:
    return float(np.prod([math.factorial(c) for c in inp]) * np.prod([math.factorial(c) for c in out]))


def outcome_probability(u, input, output) -> float:
    u = check_unitary(u)
    m = u.shape[0]
    inp = _occupation(input, m, "input")
    out = _occupation(output, m, "output")
    if sum(inp) != sum(out):
        raise ValueError(f"photon number mismatch: input has {sum(inp)}, output has {sum(out)}")
    if sum(inp) == 0:
        return 1.0
    per = permanent_ryser(_expanded(u, inp, out))
    return abs(per) ** 2 / _norm(inp, out)


def occupations(m: int, n: int):
    """All ways to put ``n`` photons in ``m`` modes, in lexicographic order."""
    if m == 1:
        yield (n,)
        return
    for first in range(n + 1):
        for rest in occupations(m - 1, n - first):
            yield (first,) + rest


def _enumeration_guard(m: int, n: int):
    count = math.comb(m + n - 1, n)
    if count > ENUMERATION_MAX:
        raise UnsupportedError(f"{count} output occupations exceed the {ENUMERATION_MAX} enumeration guard")


def exact_distribution(u, input) -> list[tuple[tuple[int, ...], float]]:
    u = check_unitary(u)
    inp = _occupation(input, u.shape[0], "input")
    n = sum(inp)
    if n < 1:
        raise ValueError("need at least one photon")
    _enumeration_guard(u.shape[0], n)
    dist = [(out, outcome_probability(u, inp, out)) for out in occupations(u.shape[0], n)]
    total = sum(p for _, p in dist)
    if abs(total - 1.0) > 1e-9:
        raise NumericalFailure(f"bosonic distribution sums to {total!r}")
    return dist


def sample_from(dist, k: int, rng: np.random.Generator) -> list[tuple[int, ...]]:
    """Inverse-CDF sampling from an enumerated distribution."""
    if k < 0:
        raise ValueError(f"sample count must be nonnegative, got {k}")
    cdf = np.cumsum([p for _, p in dist])
    idx = np.searchsorted(cdf, rng.random(k) * cdf[-1], side="right")
    idx = np.minimum(idx, len(dist) - 1)
    return [dist[i][0] for i in idx]


def exact_distribution_and_sample(u, input, k: int, rng: np.random.Generator):
    dist = exact_distribution(u, input)
    return dist, sample_from(dist, k, rng)


def distinguishable_distribution(u, input) -> list[tuple[tuple[int, ...], float]]:
    """Output statistics of the same input when the photons are distinguishable.

    Each photon scatters independently with probabilities ``|U|^2``, so the
    permanent of the nonnegative submatrix counts trajectories; only the output
    factorials are divided out, since input photons are labelled.
    """
    u = check_unitary(u)
    inp = _occupation(input, u.shape[0], "input")
    n = sum(inp)
    if n < 1:
        raise ValueError("need at least one photon")
    _enumeration_guard(u.shape[0], n)
    weights = np.abs(u) ** 2
    dist = []
    for out in occupations(u.shape[0], n):
        per = permanent_ryser(_expanded(weights, inp, out)).real
        dist.append((out, per / float(np.prod([math.factorial(c) for c in out]))))
    total = sum(p for _, p in dist)
    if abs(total - 1.0) > 1e-9:
        raise NumericalFailure(f"distinguishable distribution sums to {total!r}")
    return dist


def random_unitary(m: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary: QR of a complex Ginibre matrix with R's diagonal phases removed."""
    if m < 1:
        raise ValueError(f"dimension must be >= 1, got {m}")
    z = (rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def beamsplitter() -> np.ndarray:
    s = 1 / math.sqrt(2)
    return np.array([[s, s], [s, -s]], dtype=complex)


def bench_permanent(sizes, rng: np.random.Generator, repeats: int = 1) -> list[tuple[int, float]]:
    """Best-of-``repeats`` wall time of :func:`permanent_ryser` on random complex matrices."""
    permanent_ryser(np.eye(2))  # compile outside the timed region
    rows = []
    for n in sizes:
        m = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        best = math.inf
        for _ in range(repeats):
            t0 = time.perf_counter()
            permanent_ryser(m)
            best = min(best, time.perf_counter() - t0)
        rows.append((int(n), best))
    return rows


def parse_matrix(data) -> np.ndarray:
    """Matrix from nested lists whose entries are ``[re, im]`` pairs or plain reals."""
    try:
        arr = np.asarray(data, dtype=float)
    except (TypeError, ValueError):
        raise ValueError("matrix must be a rectangular nested list of numbers or [re, im] pairs") from None
    if arr.ndim == 3 and arr.shape[2] == 2:
        return arr[..., 0] + 1j * arr[..., 1]
    if arr.ndim == 2:
        return arr.astype(complex)
    raise ValueError(f"cannot interpret array of shape {arr.shape} as a complex matrix")


def matrix_to_json(m: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m, dtype=complex)]
