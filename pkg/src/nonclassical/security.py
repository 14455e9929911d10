"""Information-theoretic security of the gbit key protocol under intercept-resend.

An eavesdropper attacking a fraction ``f`` of the systems causes an error rate
``f/4`` and learns ``f/2`` bits per system. The protocol tolerates the attack
while Bob's mutual information ``1 - h(f/4)`` is at least Eve's.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import NumericalFailure


def binary_entropy(p: float) -> float:
    """Shannon entropy in bits of a Bernoulli(p) variable."""
    p = float(p)
    if not 0.0 <= p <= 1.0 or math.isnan(p):
        raise ValueError(f"probability must lie in [0, 1], got {p}")
    if p == 0.0 or p == 1.0:
        return 0.0
    return -p * math.log2(p) - (1.0 - p) * math.log2(1.0 - p)


def ck_secure(iab: float, iae: float) -> bool:
    """Csiszar-Korner condition: a key is extractable when I(A:B) >= I(A:E)."""
    return iab >= iae


def bob_information(f: float) -> float:
    return 1.0 - binary_entropy(f / 4.0)


def eve_information_rate(f: float) -> float:
    return f / 2.0


def key_rate_gap(f: float) -> float:
    if not 0.0 <= f <= 1.0:
        raise ValueError(f"attack fraction must lie in [0, 1], got {f}")
    return bob_information(f) - eve_information_rate(f)


@dataclass
class SecurityReport:
    f_star: float
    e_max: float
    tolerance: float
    grid: list[tuple[float, float]] = field(default_factory=list)

    def __post_init__(self):
        if not 0.0 < self.f_star < 1.0:
            raise NumericalFailure(f"threshold {self.f_star} outside (0, 1)")
        gaps = [g for _, g in self.grid]
        if any(b >= a for a, b in zip(gaps, gaps[1:])):
            raise NumericalFailure("key-rate gap is not strictly decreasing on the grid")

    def rate_at(self, f: float) -> float:
        return key_rate_gap(f)

    def to_dict(self) -> dict:
        return {
            "f_star": self.f_star,
            "e_max": self.e_max,
            "tolerance": self.tolerance,
            "grid": [[f, g] for f, g in self.grid],
        }


def solve_threshold(tolerance: float = 1e-6, grid_points: int = 101) -> SecurityReport:
    """Bisect the key-rate gap on [0, 1] for the largest tolerable attack fraction."""
    if not tolerance > 0:
        raise ValueError(f"tolerance must be positive, got {tolerance}")
    lo, hi = 0.0, 1.0
    g_lo, g_hi = key_rate_gap(lo), key_rate_gap(hi)
    if g_lo * g_hi > 0:
        raise NumericalFailure(f"no sign change on [0, 1]: gap({lo})={g_lo}, gap({hi})={g_hi}")
    while hi - lo > tolerance:
        mid = 0.5 * (lo + hi)
        g_mid = key_rate_gap(mid)
        if g_mid == 0.0:
            lo = hi = mid
            break
        if (g_mid > 0) == (g_lo > 0):
            lo, g_lo = mid, g_mid
        else:
            hi = mid
    f_star = 0.5 * (lo + hi)
    grid = [(i / (grid_points - 1), key_rate_gap(i / (grid_points - 1))) for i in range(grid_points)]
    return SecurityReport(f_star=f_star, e_max=f_star / 4.0, tolerance=tolerance, grid=grid)


def distilled_fraction(error: float) -> float:
    """Fraction of remaining bits kept by the abstract reconciliation step.

    Error correction is charged ``h(e)`` and a further ``2e`` stands in for
    reconciliation overhead; the result is clipped at zero.
    """
    return max(0.0, 1.0 - binary_entropy(error) - 2.0 * error)
