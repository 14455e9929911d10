"""Bipartite behaviors P(ab|xy) with binary inputs and outputs.

Locality is decided two ways: a linear feasibility problem over the 16
deterministic strategies, and the complete facet description of the local
polytope (positivity plus the eight CHSH variants). ``is_local`` runs both and
refuses to answer if they disagree.
"""

from __future__ import annotations

import functools
import itertools
import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .errors import NumericalFailure

NORM_TOL = 1e-12
DEFAULT_TOL = 1e-9

# mu = (a(0), a(1), b(0), b(1))
STRATEGIES: tuple[tuple[int, int, int, int], ...] = tuple(itertools.product((0, 1), repeat=4))
INPUTS = ((0, 0), (0, 1), (1, 0), (1, 1))
OUTPUTS = ((0, 0), (0, 1), (1, 0), (1, 1))


@dataclass(frozen=True, eq=False)
class Behavior:
    """``table[x, y, a, b]`` = P(ab|xy)."""

    table: np.ndarray

    def __post_init__(self):
        t = np.array(self.table, dtype=float)
        if t.shape != (2, 2, 2, 2):
            raise ValueError(f"behavior table must have shape (2, 2, 2, 2), got {t.shape}")
        if np.any(t < -NORM_TOL):
            raise ValueError("behavior has negative entries")
        t = np.clip(t, 0.0, None)
        sums = t.sum(axis=(2, 3))
        if np.max(np.abs(sums - 1.0)) > NORM_TOL:
            raise ValueError(f"P(ab|xy) does not sum to 1 for every (x, y): {sums.tolist()}")
        alice = t.sum(axis=3)  # [x, y, a]
        bob = t.sum(axis=2)  # [x, y, b]
        if np.max(np.abs(alice[:, 0] - alice[:, 1])) > NORM_TOL or np.max(np.abs(bob[0] - bob[1])) > NORM_TOL:
            raise ValueError("behavior is signaling")
        t.setflags(write=False)
        object.__setattr__(self, "table", t)

    def __eq__(self, other):
        return isinstance(other, Behavior) and np.array_equal(self.table, other.table)

    def correlator(self, x: int, y: int) -> float:
        t = self.table[x, y]
        return float(t[0, 0] + t[1, 1] - t[0, 1] - t[1, 0])

    def to_rows(self) -> list[list[float]]:
        return [[float(self.table[x, y, a, b]) for a, b in OUTPUTS] for x, y in INPUTS]

    def to_json(self) -> str:
        return json.dumps(self.to_rows())

    @classmethod
    def from_rows(cls, rows) -> "Behavior":
        arr = np.asarray(rows, dtype=float)
        if arr.shape != (4, 4):
            raise ValueError(f"expected a 4x4 table keyed by (x, y) then (a, b), got shape {arr.shape}")
        return cls(arr.reshape(2, 2, 2, 2))

    @classmethod
    def from_json(cls, text: str) -> "Behavior":
        return cls.from_rows(json.loads(text))


@dataclass(frozen=True)
class LocalDecomposition:
    weights: tuple[float, ...]

    def reconstruct(self) -> np.ndarray:
        return sum(w * _vertex(mu) for w, mu in zip(self.weights, STRATEGIES))

    def support(self, tol: float = DEFAULT_TOL) -> dict[tuple[int, ...], float]:
        return {mu: w for mu, w in zip(STRATEGIES, self.weights) if w > tol}


def _vertex(mu) -> np.ndarray:
    a0, a1, b0, b1 = mu
    t = np.zeros((2, 2, 2, 2))
    for x, y in INPUTS:
        t[x, y, (a0, a1)[x], (b0, b1)[y]] = 1.0
    return t


_VERTICES = np.stack([_vertex(mu).ravel() for mu in STRATEGIES], axis=1)  # (16 entries, 16 strategies)


def make_behavior(kind: str, mu=None) -> Behavior:
    """Reference boxes: ``deterministic`` (needs ``mu``), ``uniform``, ``pr`` or ``tsirelson``."""
    if kind == "deterministic":
        if mu is None or len(mu) != 4 or any(v not in (0, 1) for v in mu):
            raise ValueError(f"deterministic box needs mu = (a0, a1, b0, b1) of bits, got {mu}")
        return Behavior(_vertex(tuple(int(v) for v in mu)))
    if kind == "uniform":
        return Behavior(np.full((2, 2, 2, 2), 0.25))
    if kind == "pr":
        return pr_box()
    if kind == "tsirelson":
        t = np.empty((2, 2, 2, 2))
        for x, y in INPUTS:
            corr = (-1) ** (x * y) / math.sqrt(2)
            for a, b in OUTPUTS:
                t[x, y, a, b] = (1 + (-1) ** (a ^ b) * corr) / 4
        return Behavior(t)
    raise ValueError(f"unknown box kind {kind!r}")


def pr_box(alpha: int = 0, beta: int = 0, gamma: int = 0) -> Behavior:
    """Extremal no-signaling box with a xor b = xy xor alpha x xor beta y xor gamma."""
    t = np.zeros((2, 2, 2, 2))
    for x, y in INPUTS:
        for a, b in OUTPUTS:
            if a ^ b == (x * y) ^ (alpha * x) ^ (beta * y) ^ gamma:
                t[x, y, a, b] = 0.5
    return Behavior(t)


def no_signaling_vertices() -> list[Behavior]:
    """The 24 vertices of the binary no-signaling polytope: 16 local, 8 PR-type."""
    local = [make_behavior("deterministic", mu) for mu in STRATEGIES]
    nonlocal_ = [pr_box(a, b, g) for a, b, g in itertools.product((0, 1), repeat=3)]
    return local + nonlocal_


@functools.lru_cache(maxsize=1)
def _ns_stack() -> np.ndarray:
    return np.stack([v.table for v in no_signaling_vertices()])


def chsh_value(behavior: Behavior) -> float:
    if not isinstance(behavior, Behavior):
        raise ValueError(f"expected a Behavior, got {type(behavior).__name__}")
    return behavior.correlator(0, 0) + behavior.correlator(0, 1) + behavior.correlator(1, 0) - behavior.correlator(1, 1)


def chsh_variants(behavior: Behavior) -> list[float]:
    """All eight CHSH expressions: the minus sign on each of four terms, both overall signs."""
    e = [behavior.correlator(x, y) for x, y in INPUTS]
    out = []
    for minus in range(4):
        s = sum(c if i != minus else -c for i, c in enumerate(e))
        out.extend([s, -s])
    return out


def satisfies_local_facets(behavior: Behavior, tolerance: float = DEFAULT_TOL) -> bool:
    if np.any(behavior.table < -tolerance):
        return False
    return all(s <= 2.0 + tolerance for s in chsh_variants(behavior))


def _feasible_weights(behavior: Behavior) -> np.ndarray | None:
    a_eq = np.vstack([_VERTICES, np.ones((1, 16))])
    b_eq = np.append(behavior.table.ravel(), 1.0)
    res = linprog(np.zeros(16), A_eq=a_eq, b_eq=b_eq, bounds=[(0, None)] * 16, method="highs")
    if res.status != 0:
        return None
    return np.clip(res.x, 0.0, None)


def is_local(behavior: Behavior, tolerance: float = DEFAULT_TOL) -> LocalDecomposition | None:
    """Decomposition over deterministic strategies, or ``None`` if the box is nonlocal."""
    weights = _feasible_weights(behavior)
    primal = False
    if weights is not None:
        weights = weights / weights.sum()
        primal = np.max(np.abs(_VERTICES @ weights - behavior.table.ravel())) <= tolerance
    dual = satisfies_local_facets(behavior, tolerance)
    if primal != dual:
        raise NumericalFailure(
            f"vertex feasibility ({primal}) and facet test ({dual}) disagree; chsh variants {chsh_variants(behavior)}"
        )
    if not primal:
        return None
    return LocalDecomposition(tuple(float(w) for w in weights))


def di_secure_precondition(behavior: Behavior) -> bool:
    """Necessary condition for device-independent security: the box is nonlocal."""
    return is_local(behavior) is None


def random_no_signaling(rng: np.random.Generator, concentration: float = 1.0) -> Behavior:
    """Dirichlet mixture of the 24 no-signaling vertices."""
    w = rng.dirichlet(np.full(24, concentration))
    return Behavior(np.tensordot(w, _ns_stack(), axes=1))


def random_local(rng: np.random.Generator, concentration: float = 1.0) -> Behavior:
    w = rng.dirichlet(np.full(16, concentration))
    return Behavior((_VERTICES @ w).reshape(2, 2, 2, 2))
