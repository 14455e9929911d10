"""Monte-Carlo simulation of the two local key distribution protocols.

``run_bb84_lkd`` uses gbits prepared in one of the four pure states, and
``run_kcbs_lkd`` uses the cyclic five-observable state ``rho``. Both sift,
spend a fraction of the sifted rounds on a public check, abort when the check
error exceeds a threshold, and otherwise shorten the key by an abstract
distillation rate.

Rounds are simulated as numpy arrays drawn from a single generator in a fixed
order, so a transcript is a deterministic function of the generator state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import gpt, kcbs
from .security import distilled_fraction

KINDS = ("honest", "intercept", "passive", "active")

DEFAULT_CHECK_FRACTION = 0.5
DEFAULT_QBER_THRESHOLD = 0.17
DEFAULT_KCBS_THRESHOLD = 0.05


@dataclass(frozen=True)
class EveStrategy:
    kind: str = "honest"
    f: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown strategy {self.kind!r}; expected one of {KINDS}")
        if not 0.0 <= self.f <= 1.0:
            raise ValueError(f"attack fraction must lie in [0, 1], got {self.f}")
        if self.kind != "intercept" and self.f != 0.0:
            raise ValueError(f"attack fraction only applies to intercept-resend, not {self.kind}")

    @classmethod
    def honest(cls):
        return cls("honest")

    @classmethod
    def intercept_resend(cls, f: float):
        return cls("intercept", float(f))

    @classmethod
    def passive_device(cls):
        return cls("passive")

    @classmethod
    def active_memory_device(cls):
        return cls("active")

    def to_dict(self) -> dict:
        out = {"kind": self.kind}
        if self.kind == "intercept":
            out["f"] = self.f
        return out


@dataclass(slots=True)
class Round:
    alice_basis: str
    alice_bit: int
    eve_attacked: bool
    eve_basis: str | None
    bob_basis: str
    bob_bit: int
    sifted: bool
    used_for_check: bool


@dataclass
class Transcript:
    protocol: str
    strategy: EveStrategy
    n: int
    check_fraction: float
    threshold: float
    sift_rate: float
    qber: float
    eve_info_bits: float
    aborted: bool
    final_key_length: int
    sifted_count: int
    checked_count: int
    identical_error: float | None = None
    adjacent_error: float | None = None
    arrays: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not 0.0 <= self.qber <= 1.0:
            raise ValueError(f"qber {self.qber} outside [0, 1]")
        if self.final_key_length > self.sifted_count - self.checked_count:
            raise ValueError("final key longer than the unchecked sifted string")
        if self.aborted and self.final_key_length != 0:
            raise ValueError("aborted run must have an empty key")

    @property
    def rounds(self) -> list[Round]:
        a = self.arrays
        labels = a["labels"]
        eve_basis = a["eve_basis"].tolist()
        return [
            Round(
                alice_basis=labels[ab],
                alice_bit=int(x),
                eve_attacked=bool(att),
                eve_basis=labels[eb] if eb >= 0 else None,
                bob_basis=labels[bb],
                bob_bit=int(y),
                sifted=bool(s),
                used_for_check=bool(c),
            )
            for ab, x, att, eb, bb, y, s, c in zip(
                a["alice_basis"].tolist(),
                a["alice_bit"].tolist(),
                a["eve_attacked"].tolist(),
                eve_basis,
                a["bob_basis"].tolist(),
                a["bob_bit"].tolist(),
                a["sifted"].tolist(),
                a["checked"].tolist(),
            )
        ]

    def summary(self) -> dict:
        out = {
            "sift_rate": self.sift_rate,
            "qber": self.qber,
            "eve_info_bits": self.eve_info_bits,
            "aborted": self.aborted,
            "final_key_length": self.final_key_length,
            "sifted_count": self.sifted_count,
            "checked_count": self.checked_count,
        }
        if self.identical_error is not None:
            out["identical_error"] = self.identical_error
            out["adjacent_error"] = self.adjacent_error
        return out

    def params(self) -> dict:
        return {
            "protocol": self.protocol,
            "n": self.n,
            "strategy": self.strategy.to_dict(),
            "check_fraction": self.check_fraction,
            "threshold": self.threshold,
        }

    def to_dict(self, seed: int | None = None, emit_rounds: bool = False) -> dict:
        out = {"params": self.params(), "summary": self.summary(), "seed": seed}
        if emit_rounds:
            out["rounds"] = [
                {
                    "alice_basis": r.alice_basis,
                    "alice_bit": r.alice_bit,
                    "eve_attacked": r.eve_attacked,
                    "eve_basis": r.eve_basis,
                    "bob_basis": r.bob_basis,
                    "bob_bit": r.bob_bit,
                    "sifted": r.sifted,
                    "used_for_check": r.used_for_check,
                }
                for r in self.rounds
            ]
        return out


def _validate(n: int, check_fraction: float, threshold: float):
    if int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n}")
    for name, value in (("check_fraction", check_fraction), ("threshold", threshold)):
        if not 0.0 < value < 1.0:
            raise ValueError(f"{name} must lie in (0, 1), got {value}")


def _choose_checks(sifted: np.ndarray, check_fraction: float, rng: np.random.Generator) -> np.ndarray:
    idx = np.flatnonzero(sifted)
    k = int(round(check_fraction * idx.size))
    if idx.size and k == 0:
        k = 1
    checked = np.zeros(sifted.shape, dtype=bool)
    if k:
        checked[rng.choice(idx, size=k, replace=False)] = True
    return checked


def _sample_sign(table: np.ndarray, basis, sign, meas, rng) -> np.ndarray:
    """Outcome index (0 for '+') of measuring ``meas`` on pure gbits ``(basis, sign)``."""
    p_plus = table[basis, sign, meas]
    return (rng.random(p_plus.shape) >= p_plus).astype(np.int8)


def _finish(protocol, strategy, n, check_fraction, threshold, arrays, errors, eve_bits, **extra) -> Transcript:
    sifted, checked = arrays["sifted"], arrays["checked"]
    sifted_count = int(sifted.sum())
    checked_count = int(checked.sum())
    qber = float(errors.sum() / checked_count) if checked_count else 0.0
    aborted = qber > threshold
    remaining = sifted_count - checked_count
    final = 0 if aborted else math.floor(remaining * distilled_fraction(qber))
    return Transcript(
        protocol=protocol,
        strategy=strategy,
        n=n,
        check_fraction=check_fraction,
        threshold=threshold,
        sift_rate=sifted_count / n,
        qber=qber,
        eve_info_bits=float(eve_bits),
        aborted=aborted,
        final_key_length=final,
        sifted_count=sifted_count,
        checked_count=checked_count,
        arrays=arrays,
        **extra,
    )


def run_bb84_lkd(
    n: int,
    strategy: EveStrategy,
    check_fraction: float = DEFAULT_CHECK_FRACTION,
    qber_threshold: float = DEFAULT_QBER_THRESHOLD,
    rng: np.random.Generator | None = None,
) -> Transcript:
    """Simulate ``n`` rounds of the gbit key protocol against ``strategy``.

    Intercept-resend attacks each system independently with probability ``f``
    and forwards the pure state it collapsed to. The passive device carries a
    hidden random bit for each of X and Z; the active device remembers Alice's
    basis and outcome and answers Bob from that record.
    """
    _validate(n, check_fraction, qber_threshold)
    rng = np.random.default_rng() if rng is None else rng
    table = gpt.outcome_table()
    n = int(n)

    alice_basis = rng.integers(0, 2, n, dtype=np.int8)
    eve_attacked = np.zeros(n, dtype=bool)
    eve_basis = np.full(n, -1, dtype=np.int8)
    eve_bits = 0

    if strategy.kind == "passive":
        hidden = rng.integers(0, 2, (n, 2), dtype=np.int8)
        alice_bit = hidden[np.arange(n), alice_basis]
    else:
        alice_bit = rng.integers(0, 2, n, dtype=np.int8)

    carried_basis, carried_bit = alice_basis, alice_bit
    if strategy.kind == "intercept":
        eve_attacked = rng.random(n) < strategy.f
        guess = rng.integers(0, 2, n, dtype=np.int8)
        eve_bit = _sample_sign(table, alice_basis, alice_bit, guess, rng)
        eve_basis = np.where(eve_attacked, guess, -1).astype(np.int8)
        carried_basis = np.where(eve_attacked, guess, alice_basis)
        carried_bit = np.where(eve_attacked, eve_bit, alice_bit)
        eve_bits = int(np.sum(eve_attacked & (guess == alice_basis)))
    elif strategy.kind in ("passive", "active"):
        eve_attacked[:] = True

    bob_basis = rng.integers(0, 2, n, dtype=np.int8)
    if strategy.kind == "passive":
        bob_bit = hidden[np.arange(n), bob_basis]
    elif strategy.kind == "active":
        free = rng.integers(0, 2, n, dtype=np.int8)
        bob_bit = np.where(bob_basis == alice_basis, alice_bit, free).astype(np.int8)
    else:
        bob_bit = _sample_sign(table, carried_basis, carried_bit, bob_basis, rng)

    sifted = alice_basis == bob_basis
    checked = _choose_checks(sifted, check_fraction, rng)
    errors = (alice_bit != bob_bit) & checked
    if strategy.kind in ("passive", "active"):
        eve_bits = int(sifted.sum())

    arrays = {
        "labels": gpt.MEASUREMENTS,
        "alice_basis": alice_basis,
        "alice_bit": alice_bit,
        "eve_attacked": eve_attacked,
        "eve_basis": eve_basis,
        "bob_basis": bob_basis,
        "bob_bit": bob_bit,
        "sifted": sifted,
        "checked": checked,
    }
    return _finish("bb84-lkd", strategy, n, check_fraction, qber_threshold, arrays, errors, eve_bits)


def run_kcbs_lkd(
    n: int,
    strategy: EveStrategy,
    check_fraction: float = DEFAULT_CHECK_FRACTION,
    error_threshold: float = DEFAULT_KCBS_THRESHOLD,
    rng: np.random.Generator | None = None,
    theory: kcbs.CycleTheory | None = None,
) -> Transcript:
    """Simulate ``n`` rounds of the contextual key protocol against ``strategy``.

    Rounds with identical or adjacent bases are kept. A check passes when
    identical bases gave equal bits and adjacent bases gave opposite bits. Bob
    flips his bit on adjacent rounds to form the key.
    """
    _validate(n, check_fraction, error_threshold)
    if strategy.kind == "intercept":
        raise ValueError("intercept-resend is only defined for the gbit protocol")
    rng = np.random.default_rng() if rng is None else rng
    theory = kcbs.CycleTheory() if theory is None else theory
    n = int(n)

    alice_basis = rng.integers(0, theory.n, n, dtype=np.int8)
    bob_basis = rng.integers(0, theory.n, n, dtype=np.int8)
    diff = (alice_basis.astype(np.int64) - bob_basis) % theory.n
    identical = diff == 0
    adjacent = (diff == 1) | (diff == theory.n - 1)

    if strategy.kind == "honest":
        alice_bit, bob_bit = kcbs.rho_sample_pairs(theory, alice_basis, bob_basis, rng)
    elif strategy.kind == "passive":
        table = kcbs.optimal_assignments(theory.n)
        assignment = table[rng.integers(0, len(table), n)]
        rows = np.arange(n)
        alice_bit = assignment[rows, alice_basis]
        bob_bit = assignment[rows, bob_basis]
    else:
        alice_bit = rng.integers(0, 2, n, dtype=np.int8)
        free = rng.integers(0, 2, n, dtype=np.int8)
        bob_bit = np.where(identical, alice_bit, np.where(adjacent, 1 - alice_bit, free)).astype(np.int8)

    sifted = identical | adjacent
    checked = _choose_checks(sifted, check_fraction, rng)
    fail = np.where(identical, alice_bit != bob_bit, alice_bit == bob_bit)
    errors = fail & checked

    def rate(mask):
        k = int(np.sum(mask & checked))
        return float(np.sum(fail & mask & checked) / k) if k else 0.0

    eve_bits = int(sifted.sum()) if strategy.kind in ("passive", "active") else 0
    arrays = {
        "labels": theory.labels,
        "alice_basis": alice_basis,
        "alice_bit": alice_bit,
        "eve_attacked": np.full(n, strategy.kind != "honest"),
        "eve_basis": np.full(n, -1, dtype=np.int8),
        "bob_basis": bob_basis,
        "bob_bit": bob_bit,
        "sifted": sifted,
        "checked": checked,
        "key_bob": np.where(adjacent, 1 - bob_bit, bob_bit).astype(np.int8),
    }
    return _finish(
        "kcbs-lkd",
        strategy,
        n,
        check_fraction,
        error_threshold,
        arrays,
        errors,
        eve_bits,
        identical_error=rate(identical),
        adjacent_error=rate(adjacent),
    )


def detection_escape_probability(m: int) -> float:
    """Chance that an intercept-resend attack on ``m`` checked systems goes unnoticed."""
    if int(m) != m or m < 0:
        raise ValueError(f"m must be a nonnegative integer, got {m}")
    return 0.75 ** int(m)


def simulate_detection_escape(m: int, trials: int, rng: np.random.Generator) -> float:
    """Monte-Carlo frequency of an attack on ``m`` checked systems raising no error.

    Each trial plays ``m`` sifted, checked rounds in which Eve intercepts every
    system in a random basis and resends what she saw.
    """
    if m < 0 or trials < 1:
        raise ValueError("need m >= 0 and trials >= 1")
    if m == 0:
        return 1.0
    table = gpt.outcome_table()
    shape = (trials, m)
    basis = rng.integers(0, 2, shape, dtype=np.int8)
    bit = rng.integers(0, 2, shape, dtype=np.int8)
    guess = rng.integers(0, 2, shape, dtype=np.int8)
    eve_bit = _sample_sign(table, basis, bit, guess, rng)
    bob_bit = _sample_sign(table, guess, eve_bit, basis, rng)
    escaped = np.all(bob_bit == bit, axis=1)
    return float(escaped.mean())


def eve_information(transcript: Transcript, strategy: EveStrategy) -> float:
    """Eve's information about Alice's bits.

    Intercept-resend is reported per transmitted system; the device attacks
    per sifted bit, all of which Eve learns once bases are announced.
    """
    if transcript.strategy != strategy:
        raise ValueError(f"transcript was produced under {transcript.strategy}, not {strategy}")
    if strategy.kind == "honest":
        return 0.0
    if strategy.kind == "intercept":
        return transcript.eve_info_bits / transcript.n
    if transcript.sifted_count == 0:
        return 0.0
    return transcript.eve_info_bits / transcript.sifted_count
