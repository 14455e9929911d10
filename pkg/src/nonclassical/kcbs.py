"""Cyclic contextuality fragment: n observables with jointly measurable neighbours.

The state ``rho`` gives perfectly anticorrelated, uniformly random outcomes on
every adjacent pair. Outcomes are bits; correlators use the map 0 -> +1,
1 -> -1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import UnsupportedError

PAIRS = ((0, 0), (0, 1), (1, 0), (1, 1))
MAX_BRUTE_FORCE = 24
_CHUNK = 1 << 20


@dataclass(frozen=True)
class CycleTheory:
    n: int = 5
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.n < 3:
            raise ValueError(f"cycle length must be >= 3, got {self.n}")
        labels = self.labels
        if labels is None:
            labels = tuple("VWXYZ") if self.n == 5 else tuple(f"O{i}" for i in range(self.n))
        labels = tuple(labels)
        if len(labels) != self.n or len(set(labels)) != self.n:
            raise ValueError(f"need {self.n} distinct labels, got {labels}")
        object.__setattr__(self, "labels", labels)

    def index(self, label: str | int) -> int:
        if isinstance(label, (int, np.integer)):
            if not 0 <= label < self.n:
                raise ValueError(f"observable index {label} out of range for n={self.n}")
            return int(label)
        try:
            return self.labels.index(label)
        except ValueError:
            raise ValueError(f"unknown observable {label!r}; expected one of {self.labels}") from None

    def relation(self, first, second) -> str:
        i, j = self.index(first), self.index(second)
        if i == j:
            return "identical"
        if (i - j) % self.n in (1, self.n - 1):
            return "adjacent"
        return "other"

    @property
    def edges(self) -> list[tuple[int, int]]:
        return [(i, (i + 1) % self.n) for i in range(self.n)]


@dataclass(frozen=True)
class PairCorrelation:
    """Joint distribution over outcome pairs ordered 00, 01, 10, 11."""

    relation: str
    probs: tuple[float, float, float, float]

    def __post_init__(self):
        if self.relation not in ("identical", "adjacent", "other"):
            raise ValueError(f"unknown relation {self.relation!r}")
        probs = tuple(float(p) for p in self.probs)
        if len(probs) != 4 or any(p < 0 for p in probs) or abs(sum(probs) - 1.0) > 1e-12:
            raise ValueError(f"malformed pair distribution {self.probs}")
        object.__setattr__(self, "probs", probs)

    @property
    def correlator(self) -> float:
        p00, p01, p10, p11 = self.probs
        return p00 + p11 - p01 - p10

    @property
    def marginals(self) -> tuple[tuple[float, float], tuple[float, float]]:
        p00, p01, p10, p11 = self.probs
        return (p00 + p01, p10 + p11), (p00 + p10, p01 + p11)


_RHO_TABLES = {
    "identical": (0.5, 0.0, 0.0, 0.5),
    "adjacent": (0.0, 0.5, 0.5, 0.0),
    "other": (0.25, 0.25, 0.25, 0.25),
}


def rho_correlation(theory: CycleTheory, first, second) -> PairCorrelation:
    rel = theory.relation(first, second)
    return PairCorrelation(rel, _RHO_TABLES[rel])


def rho_sample_pairs(theory: CycleTheory, first, second, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized draw of outcome pairs for arrays of observable indices."""
    first = np.asarray(first)
    second = np.asarray(second)
    if first.shape != second.shape:
        raise ValueError("observable index arrays must have equal shape")
    if first.size and (first.min() < 0 or first.max() >= theory.n or second.min() < 0 or second.max() >= theory.n):
        raise ValueError(f"observable index out of range for n={theory.n}")
    diff = (first - second) % theory.n
    identical = diff == 0
    adjacent = (diff == 1) | (diff == theory.n - 1)
    a = rng.integers(0, 2, size=first.shape, dtype=np.int8)
    free = rng.integers(0, 2, size=first.shape, dtype=np.int8)
    b = np.where(identical, a, np.where(adjacent, 1 - a, free)).astype(np.int8)
    return a, b


def rho_sample_pair(theory: CycleTheory, first, second, rng: np.random.Generator) -> tuple[int, int]:
    a, b = rho_sample_pairs(theory, [theory.index(first)], [theory.index(second)], rng)
    return int(a[0]), int(b[0])


def kcbs_value(correlations: list[PairCorrelation]) -> float:
    """Sum of the adjacent-pair correlators around the cycle."""
    if len(correlations) < 3:
        raise ValueError(f"need one correlation per cycle edge (>= 3), got {len(correlations)}")
    for c in correlations:
        if not isinstance(c, PairCorrelation):
            raise ValueError(f"expected PairCorrelation, got {type(c).__name__}")
        if c.relation != "adjacent":
            raise ValueError(f"cycle edge carries a {c.relation!r} correlation")
    return float(sum(c.correlator for c in correlations))


def rho_table(theory: CycleTheory) -> list[PairCorrelation]:
    return [rho_correlation(theory, i, j) for i, j in theory.edges]


def assignment_table(theory: CycleTheory, values) -> list[PairCorrelation]:
    """Point-mass edge correlations induced by a deterministic assignment."""
    if isinstance(values, dict):
        values = [values[label] for label in theory.labels]
    values = [int(v) for v in values]
    if len(values) != theory.n or any(v not in (0, 1) for v in values):
        raise ValueError(f"assignment must give a bit to each of {theory.n} observables")
    table = []
    for i, j in theory.edges:
        probs = [0.0] * 4
        probs[PAIRS.index((values[i], values[j]))] = 1.0
        table.append(PairCorrelation("adjacent", tuple(probs)))
    return table


def _check_size(n: int):
    if n < 3:
        raise ValueError(f"cycle length must be >= 3, got {n}")
    if n > MAX_BRUTE_FORCE:
        raise UnsupportedError(f"brute force over 2^{n} assignments exceeds the n <= {MAX_BRUTE_FORCE} guard")


def _anticorrelated_counts(n: int, start: int, stop: int) -> np.ndarray:
    """Number of anticorrelated cycle edges for assignments ``start..stop-1``.

    Bit i of the integer code is the value of observable i.
    """
    codes = np.arange(start, stop, dtype=np.int64)
    mask = (1 << n) - 1
    rotated = ((codes >> 1) | ((codes & 1) << (n - 1))) & mask
    diff = codes ^ rotated
    count = np.zeros(codes.shape, dtype=np.int64)
    for _ in range(n):
        count += diff & 1
        diff >>= 1
    return count


def max_anticorrelated_edges(n: int) -> int:
    _check_size(n)
    best = 0
    for start in range(0, 1 << n, _CHUNK):
        stop = min(1 << n, start + _CHUNK)
        best = max(best, int(_anticorrelated_counts(n, start, stop).max()))
    return best


def best_noncontextual_value(n: int) -> float:
    """Minimum cycle-correlator sum over all 2^n deterministic assignments."""
    anti = max_anticorrelated_edges(n)
    return float((n - anti) - anti)


def exists_perfect_assignment(n: int) -> bool:
    return max_anticorrelated_edges(n) == n


def optimal_assignments(n: int) -> np.ndarray:
    """All assignments (rows of bits) reaching the maximal anticorrelated-edge count."""
    _check_size(n)
    counts = _anticorrelated_counts(n, 0, 1 << n)
    codes = np.flatnonzero(counts == counts.max())
    return ((codes[:, None] >> np.arange(n)) & 1).astype(np.int8)
