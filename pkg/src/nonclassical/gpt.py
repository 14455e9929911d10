"""Operational states as fiducial probability vectors, and the gbit theory.

A state is stored as one outcome distribution per fiducial measurement. The
gbit has two dichotomic measurements ``X`` and ``Z`` and four pure states, each
sharp on one measurement and uniformly random on the other.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import nnls

NORM_TOL = 1e-12

MEASUREMENTS = ("X", "Z")
OUTCOMES = ("+", "-")


@dataclass(frozen=True)
class FiducialState:
    """Ordered blocks of ``(measurement_label, outcome_distribution)``."""

    blocks: tuple[tuple[str, tuple[float, ...]], ...]

    def __post_init__(self):
        blocks = tuple((str(label), tuple(float(p) for p in dist)) for label, dist in self.blocks)
        labels = [label for label, _ in blocks]
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate measurement labels: {labels}")
        for label, dist in blocks:
            if not dist:
                raise ValueError(f"empty outcome distribution for {label}")
            if any(p < 0.0 or p > 1.0 for p in dist):
                raise ValueError(f"probability outside [0, 1] in block {label}: {dist}")
            if abs(sum(dist) - 1.0) > NORM_TOL:
                raise ValueError(f"block {label} sums to {sum(dist)!r}, not 1")
        object.__setattr__(self, "blocks", blocks)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(label for label, _ in self.blocks)

    @property
    def shape(self) -> tuple[tuple[str, int], ...]:
        return tuple((label, len(dist)) for label, dist in self.blocks)

    def block(self, label: str) -> tuple[float, ...]:
        for name, dist in self.blocks:
            if name == label:
                return dist
        raise ValueError(f"measurement {label!r} is not fiducial for this state (has {self.labels})")

    def as_vector(self) -> np.ndarray:
        return np.array([p for _, dist in self.blocks for p in dist])

    def __str__(self):
        inner = " | ".join(", ".join(f"{p:g}" for p in dist) for _, dist in self.blocks)
        return f"({inner})"


def maximally_mixed(shape: Sequence[tuple[str, int]]) -> FiducialState:
    return FiducialState(tuple((label, (1.0 / k,) * k) for label, k in shape))


@functools.lru_cache(maxsize=None)
def gbit_pure(meas: str, sign: str) -> FiducialState:
    """Pure gbit state that is sharp on ``meas`` with outcome ``sign``.

    >>> str(gbit_pure("X", "+"))
    '(1, 0 | 0.5, 0.5)'
    """
    if meas not in MEASUREMENTS:
        raise ValueError(f"unknown measurement {meas!r}; expected one of {MEASUREMENTS}")
    if sign not in OUTCOMES:
        raise ValueError(f"unknown outcome {sign!r}; expected one of {OUTCOMES}")
    sharp = (1.0, 0.0) if sign == "+" else (0.0, 1.0)
    return FiducialState(tuple((m, sharp if m == meas else (0.5, 0.5)) for m in MEASUREMENTS))


def mix(components: Iterable[tuple[float, FiducialState]]) -> FiducialState:
    """Blockwise convex combination of states with a common block structure."""
    components = list(components)
    if not components:
        raise ValueError("mix needs at least one component")
    weights = [float(w) for w, _ in components]
    if any(w < 0 for w in weights):
        raise ValueError(f"negative mixing weight in {weights}")
    if abs(sum(weights) - 1.0) > NORM_TOL:
        raise ValueError(f"mixing weights sum to {sum(weights)!r}, not 1")
    shape = components[0][1].shape
    for _, state in components[1:]:
        if state.shape != shape:
            raise ValueError(f"block structure mismatch: {state.shape} vs {shape}")

    blocks = []
    for b, (label, k) in enumerate(shape):
        dist = []
        for j in range(k):
            p = sum(w * state.blocks[b][1][j] for w, state in zip(weights, (s for _, s in components)))
            dist.append(min(1.0, max(0.0, p)))
        blocks.append((label, tuple(dist)))
    return FiducialState(tuple(blocks))


def measure_gbit(state: FiducialState, meas: str, rng: np.random.Generator) -> tuple[str, FiducialState]:
    """Sample an outcome of ``meas`` and collapse to the matching pure state."""
    if meas not in MEASUREMENTS:
        raise ValueError(f"unknown measurement {meas!r}; expected one of {MEASUREMENTS}")
    p_plus = state.block(meas)[0]
    outcome = "+" if rng.random() < p_plus else "-"
    return outcome, gbit_pure(meas, outcome)


def outcome_table() -> np.ndarray:
    """``table[prep_meas, prep_sign, meas]`` = probability of ``+``.

    Indices follow ``MEASUREMENTS`` and ``OUTCOMES``. Used by the vectorized
    protocol simulators so that they read the same fiducial vectors as
    :func:`measure_gbit`.
    """
    table = np.empty((2, 2, 2))
    for i, m in enumerate(MEASUREMENTS):
        for j, s in enumerate(OUTCOMES):
            state = gbit_pure(m, s)
            for k, meas in enumerate(MEASUREMENTS):
                table[i, j, k] = state.block(meas)[0]
    return table


@dataclass(frozen=True)
class GbitTheory:
    """A finite fragment of a theory: its fiducial measurements and pure states."""

    measurements: tuple[str, ...] = MEASUREMENTS
    outcomes: tuple[str, ...] = OUTCOMES
    pure_states: dict[str, FiducialState] = field(
        default_factory=lambda: {
            f"{m}{s}": gbit_pure(m, s) for m in MEASUREMENTS for s in OUTCOMES
        }
    )

    def __post_init__(self):
        for name, state in self.pure_states.items():
            if state.labels != tuple(self.measurements):
                raise ValueError(f"state {name} has blocks {state.labels}, expected {self.measurements}")

    def center(self) -> FiducialState:
        return maximally_mixed(next(iter(self.pure_states.values())).shape)

    def without(self, *names: str) -> "GbitTheory":
        kept = {k: v for k, v in self.pure_states.items() if k not in names}
        return GbitTheory(self.measurements, self.outcomes, kept)


def equal_weight_decompositions(theory: GbitTheory) -> dict[str, FiducialState]:
    """The two even mixtures of antipodal pure states, keyed by measurement."""
    out = {}
    for m in theory.measurements:
        names = [f"{m}{s}" for s in theory.outcomes]
        if all(n in theory.pure_states for n in names):
            w = 1.0 / len(names)
            out[m] = mix((w, theory.pure_states[n]) for n in names)
    return out


def _in_hull(point: np.ndarray, vertices: list[np.ndarray], tol: float = 1e-9) -> bool:
    a = np.vstack([np.column_stack(vertices), np.ones(len(vertices))])
    b = np.append(point, 1.0)
    _, residual = nnls(a, b)
    return residual <= tol


def minimal_decompositions(theory: GbitTheory) -> list[frozenset[str]]:
    """Inclusion-minimal sets of pure states whose convex hull holds the center."""
    center = theory.center().as_vector()
    names = sorted(theory.pure_states)
    vecs = {n: theory.pure_states[n].as_vector() for n in names}
    found: list[frozenset[str]] = []
    for size in range(1, len(names) + 1):
        for subset in itertools.combinations(names, size):
            s = frozenset(subset)
            if any(f <= s for f in found):
                continue
            if _in_hull(center, [vecs[n] for n in subset]):
                found.append(s)
    return found


def verify_nonsimplicial(theory: GbitTheory) -> bool:
    """True iff the maximally mixed state has two or more distinct pure decompositions.

    The even antipodal mixtures are evaluated first and must all reproduce the
    maximally mixed vector; the count of distinct decompositions then comes from
    an exhaustive search over subsets of pure states.
    """
    center = theory.center()
    for m, state in equal_weight_decompositions(theory).items():
        if state != center:
            raise ValueError(f"even {m} mixture {state} is not the maximally mixed state {center}")
    return len(minimal_decompositions(theory)) >= 2


def classical_bit() -> GbitTheory:
    """One measurement, two pure states: the simplex reference case."""
    pure = {
        "0": FiducialState((("Z", (1.0, 0.0)),)),
        "1": FiducialState((("Z", (0.0, 1.0)),)),
    }
    return GbitTheory(measurements=("Z",), outcomes=("+", "-"), pure_states=pure)
