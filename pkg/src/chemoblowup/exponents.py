"""Blow-up/boundedness predicates and the choice of the exponent triple.

The subsolution needs ``alpha, beta, delta`` in (0, 1) with

    alpha + delta - 1 < 0,            beta + delta - 1 < 0,
    (m1-1)(1-alpha) + beta - 1 + 2/n < 0,
    (m2-1)(1-beta) + alpha - 1 + 2/n < 0.

How they are found depends on where ``(m1, m2)`` sits relative to the
threshold ``2 - 2/n`` (regions S1..S4).
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional, Tuple

from .errors import InfeasibleError, PreconditionError

# absolute tolerance on the critical-line gap, scaled by max(1, m1*m2)
CRITICAL_TOL = 1e-12
CASE1_MARGIN = 0.1
DELTA_CAP = 0.45


class RegionClass(str, enum.Enum):
    S1 = "S1"
    S2 = "S2"
    S3 = "S3"
    S4 = "S4"


def _gap(m1: float, m2: float, n: int) -> float:
    return m1 + m2 - max(m1 * m2 + 2 * m1 / n, m1 * m2 + 2 * m2 / n)


def _tol(m1: float, m2: float) -> float:
    return CRITICAL_TOL * max(1.0, m1 * m2)


def blowup_condition(m1: float, m2: float, n: int) -> bool:
    """True iff ``m1 + m2 > max(m1 m2 + 2 m1 / n, m1 m2 + 2 m2 / n)``."""
    return _gap(m1, m2, n) > _tol(m1, m2)


def bounded_condition(m1: float, m2: float, n: int) -> bool:
    """True iff ``m1 + m2 < max(m1 m2 + 2 m1 / n, m1 m2 + 2 m2 / n)``."""
    return _gap(m1, m2, n) < -_tol(m1, m2)


def classify_point(m1: float, m2: float, n: int) -> str:
    """``'blowup'``, ``'bounded'`` or ``'critical'`` (equality within tolerance)."""
    if blowup_condition(m1, m2, n):
        return "blowup"
    if bounded_condition(m1, m2, n):
        return "bounded"
    return "critical"


def critical_m2(m1: float, n: int) -> Optional[float]:
    """Exponent ``m2 > 1`` on the critical curve for given ``m1``, if any.

    Closed form for the branch ``m2 < m1``; the branch ``m2 >= m1`` follows by
    symmetry. Returns ``None`` when the curve leaves ``m2 > 1``.
    """
    cands = []
    if m1 > 1:
        m2 = m1 * (1 - 2 / n) / (m1 - 1)
        if 1 < m2 <= m1:
            cands.append(m2)
    m2 = m1 / (m1 - 1 + 2 / n)
    if m2 >= m1 and m2 > 1:
        cands.append(m2)
    return cands[0] if cands else None


def classify_region(m1: float, m2: float, n: int) -> RegionClass:
    c = 2.0 - 2.0 / n
    hi1, hi2 = m1 >= c, m2 >= c
    if not hi1 and not hi2:
        return RegionClass.S1
    if hi1 and hi2:
        return RegionClass.S2
    return RegionClass.S3 if hi1 else RegionClass.S4


@dataclass(frozen=True)
class Exponents:
    alpha: float
    beta: float
    delta: float
    provenance: str = "manual"
    star_pair: Optional[Tuple[float, float]] = None

    def __post_init__(self):
        for name in ("alpha", "beta", "delta"):
            v = getattr(self, name)
            if not (0.0 < v < 1.0):
                raise InfeasibleError(f"{name}={v} must lie in (0, 1)")

    def residuals(self, m1: float, m2: float, n: int) -> dict:
        """Left-hand sides of the four defining inequalities (all must be < 0)."""
        a, b, d = self.alpha, self.beta, self.delta
        return {
            "delta1": a + d - 1.0,
            "delta2": b + d - 1.0,
            "pa": (m1 - 1.0) * (1.0 - a) + b - 1.0 + 2.0 / n,
            "qb": (m2 - 1.0) * (1.0 - b) + a - 1.0 + 2.0 / n,
        }

    def satisfies(self, m1: float, m2: float, n: int) -> bool:
        return all(v < 0 for v in self.residuals(m1, m2, n).values())

    def swapped(self) -> "Exponents":
        pair = None if self.star_pair is None else self.star_pair[::-1]
        prov = {"case3": "case4", "case4": "case3"}.get(self.provenance, self.provenance)
        return Exponents(self.beta, self.alpha, self.delta, prov, pair)


def case3_exponents(m1s: float, m2s: float, n: int) -> Tuple[float, float]:
    """Closed-form ``(alpha, beta)`` making both ``pa``/``qb`` equalities at ``(m1s, m2s)``."""
    denom = (m1s - 1.0) * (m2s - 1.0) - 1.0
    if not denom < 0:
        raise InfeasibleError(f"pair ({m1s}, {m2s}) gives nonnegative denominator {denom}")
    alpha = 1.0 + (2.0 / n) * m2s / denom
    beta = 1.0 + (2.0 / n) * m1s / denom
    if not (0 < alpha < 1 and 0 < beta < 1):
        raise InfeasibleError(
            f"pair ({m1s}, {m2s}) yields alpha={alpha}, beta={beta} outside (0, 1)")
    return alpha, beta


def _delta_for(alpha: float, beta: float) -> float:
    return min(DELTA_CAP, 0.5 * (1.0 - alpha), 0.5 * (1.0 - beta))


def _pq(m1, m2, n, a, b):
    return ((m1 - 1.0) * (1.0 - a) + b - 1.0 + 2.0 / n,
            (m2 - 1.0) * (1.0 - b) + a - 1.0 + 2.0 / n)


def _case1(m1: float, m2: float, n: int) -> Exponents:
    need = CASE1_MARGIN * (1.0 - 2.0 / n)
    a = 0.25
    fallback = None
    for _ in range(60):
        p, q = _pq(m1, m2, n, a, a)
        if p < 0 and q < 0:
            fallback = a
            if -p >= need and -q >= need:
                break
        a *= 0.5
    else:
        a = fallback
    if a is None:
        raise InfeasibleError(f"no small alpha=beta satisfies the inequalities at ({m1}, {m2})")
    return Exponents(a, a, _delta_for(a, a), "case1")


def _case3(m1: float, m2: float, n: int) -> Exponents:
    eta = 0.1
    for _ in range(80):
        m1s, m2s = m1 + eta, m2 + eta
        if blowup_condition(m1s, m2s, n) and classify_region(m1s, m2s, n) is RegionClass.S3:
            a, b = case3_exponents(m1s, m2s, n)
            exp = Exponents(a, b, _delta_for(a, b), "case3", (m1s, m2s))
            if exp.satisfies(m1, m2, n):
                return exp
        eta *= 0.5
    raise InfeasibleError(f"no admissible shifted pair found for ({m1}, {m2})")


def select_exponents(m1: float, m2: float, n: int) -> Exponents:
    """Constructive choice of ``(alpha, beta, delta)`` for a blow-up pair.

    Raises
    ------
    PreconditionError
        If the blow-up condition fails.
    InfeasibleError
        For S2 inputs (which never satisfy the blow-up condition) or if the
        search fails.
    """
    if not blowup_condition(m1, m2, n):
        raise PreconditionError(f"blow-up condition fails at (m1, m2, n) = ({m1}, {m2}, {n})")
    region = classify_region(m1, m2, n)
    if region is RegionClass.S1:
        return _case1(m1, m2, n)
    if region is RegionClass.S3:
        return _case3(m1, m2, n)
    if region is RegionClass.S4:
        return _case3(m2, m1, n).swapped()
    raise InfeasibleError("region S2 never satisfies the blow-up condition")
