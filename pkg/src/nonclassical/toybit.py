"""Epistemically restricted toy bit: four ontic states, knowledge of at most half.

Pure epistemic states are the six 2-subsets of {1, 2, 3, 4}; the full set is the
maximally mixed state. Measurements are the three 2+2 partitions, and a
measurement leaves the system known to lie in the observed block.

Two toy bits in the correlated state {(k, k)} support teleportation: the joint
measurement on the input and Alice's half identifies which Klein four-group
permutation relates their ontic values, and Bob undoes that permutation.
Everything is generated by an ontic model, so every induced behavior is local.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .boxes import Behavior

ONTIC = (1, 2, 3, 4)


@dataclass(frozen=True)
class OnticState:
    value: int

    def __post_init__(self):
        if self.value not in ONTIC:
            raise ValueError(f"ontic state must be one of {ONTIC}, got {self.value}")


@dataclass(frozen=True)
class EpistemicState:
    support: frozenset[int]

    def __post_init__(self):
        s = frozenset(int(v) for v in self.support)
        if not s <= set(ONTIC):
            raise ValueError(f"support {sorted(s)} is not a subset of {ONTIC}")
        if len(s) not in (2, 4):
            raise ValueError(f"knowledge balance violated: |support| = {len(s)}, must be 2 or 4")
        object.__setattr__(self, "support", s)

    @classmethod
    def of(cls, *values: int) -> "EpistemicState":
        return cls(frozenset(values))

    @property
    def is_pure(self) -> bool:
        return len(self.support) == 2

    def __str__(self):
        return "{" + ",".join(str(v) for v in sorted(self.support)) + "}"


PURE_STATES = tuple(EpistemicState(frozenset(c)) for c in itertools.combinations(ONTIC, 2))
MIXED = EpistemicState(frozenset(ONTIC))


@dataclass(frozen=True)
class ToyMeasurement:
    blocks: tuple[frozenset[int], frozenset[int]]

    def __post_init__(self):
        blocks = tuple(frozenset(b) for b in self.blocks)
        if len(blocks) != 2 or any(len(b) != 2 for b in blocks):
            raise ValueError(f"toy measurement needs two blocks of size 2, got {self.blocks}")
        if blocks[0] & blocks[1] or (blocks[0] | blocks[1]) != set(ONTIC):
            raise ValueError(f"blocks {self.blocks} do not partition {ONTIC}")
        blocks = tuple(sorted(blocks, key=min))
        object.__setattr__(self, "blocks", blocks)

    @classmethod
    def parse(cls, text: str) -> "ToyMeasurement":
        """Parse ``'12|34'`` style notation."""
        try:
            left, right = text.split("|")
            return cls((frozenset(int(c) for c in left), frozenset(int(c) for c in right)))
        except (ValueError, TypeError):
            raise ValueError(f"cannot parse toy measurement {text!r}; use e.g. '13|24'") from None

    def block_index(self, ontic: int) -> int:
        return 0 if ontic in self.blocks[0] else 1

    def label(self, index: int) -> str:
        return "".join(str(v) for v in sorted(self.blocks[index]))

    def __str__(self):
        return f"{self.label(0)}|{self.label(1)}"


MEASUREMENTS = tuple(ToyMeasurement.parse(p) for p in ("12|34", "13|24", "14|23"))


@dataclass(frozen=True)
class ToyPairState:
    support: frozenset[tuple[int, int]]

    def marginals(self) -> tuple[frozenset[int], frozenset[int]]:
        return frozenset(a for a, _ in self.support), frozenset(b for _, b in self.support)

    def is_product(self) -> bool:
        left, right = self.marginals()
        return self.support == frozenset(itertools.product(left, right))


ENTANGLED = ToyPairState(frozenset((k, k) for k in ONTIC))


def toy_measure(state: EpistemicState, meas: ToyMeasurement, rng: np.random.Generator) -> tuple[str, EpistemicState]:
    ontic = int(rng.choice(sorted(state.support)))
    idx = meas.block_index(ontic)
    return meas.label(idx), EpistemicState(meas.blocks[idx])


def outcome_probabilities(state: EpistemicState, meas: ToyMeasurement) -> dict[str, float]:
    return {meas.label(i): len(state.support & b) / len(state.support) for i, b in enumerate(meas.blocks)}


# Klein four-group on {1,2,3,4}; it acts regularly, so for any (i, j) exactly
# one element maps i to j. Index = Alice's 2-bit message.
CORRECTIONS: tuple[dict[int, int], ...] = (
    {1: 1, 2: 2, 3: 3, 4: 4},
    {1: 2, 2: 1, 3: 4, 4: 3},
    {1: 3, 2: 4, 3: 1, 4: 2},
    {1: 4, 2: 3, 3: 2, 4: 1},
)


def bell_outcome(input_ontic: int, partner_ontic: int) -> int:
    """Outcome of the joint measurement on the input and Alice's half of the pair."""
    for s, perm in enumerate(CORRECTIONS):
        if perm[input_ontic] == partner_ontic:
            return s
    raise ValueError(f"ontic values {input_ontic}, {partner_ontic} out of range")


def teleport_ontic(input_ontic: int, pair_ontic: int) -> tuple[int, int]:
    """Deterministic ontic-level run: returns (Alice's outcome, Bob's corrected ontic value)."""
    s = bell_outcome(input_ontic, pair_ontic)
    return s, CORRECTIONS[s][pair_ontic]


def bob_state_given(input_state: EpistemicState, outcome: int) -> EpistemicState:
    """Bob's epistemic state after learning Alice's outcome, before correcting."""
    perm = CORRECTIONS[outcome]
    return EpistemicState(frozenset(perm[i] for i in input_state.support))


def toy_teleport(input: EpistemicState, rng: np.random.Generator) -> tuple[EpistemicState, tuple[int, int]]:
    """Teleport a toy-bit state through the correlated pair using two classical bits."""
    if not isinstance(input, EpistemicState):
        raise ValueError(f"expected an EpistemicState, got {type(input).__name__}")
    input_ontic = int(rng.choice(sorted(input.support)))
    pair_ontic = int(rng.choice(ONTIC))
    s, bob_ontic = teleport_ontic(input_ontic, pair_ontic)
    perm = CORRECTIONS[s]
    recovered = EpistemicState(frozenset(perm[k] for k in bob_state_given(input, s).support))
    if bob_ontic not in recovered.support:
        raise AssertionError("corrected ontic value fell outside the recovered support")
    return recovered, (s >> 1, s & 1)


def _as_pair(meas) -> tuple[ToyMeasurement, ToyMeasurement]:
    if isinstance(meas, ToyMeasurement):
        return meas, meas
    first, second = meas
    return first, second


def induced_behavior(measA, measB, state: ToyPairState = ENTANGLED) -> Behavior:
    """P(ab|xy) from measuring each half of a toy pair state.

    ``measA`` and ``measB`` are a single measurement (used for both inputs) or a
    pair indexed by the input bit. Outcomes are block indices.
    """
    a_meas, b_meas = _as_pair(measA), _as_pair(measB)
    table = np.zeros((2, 2, 2, 2))
    weight = 1.0 / len(state.support)
    for x, y in itertools.product((0, 1), repeat=2):
        for ka, kb in state.support:
            table[x, y, a_meas[x].block_index(ka), b_meas[y].block_index(kb)] += weight
    return Behavior(table)
