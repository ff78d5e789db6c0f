"""Comparison operators and the three-region subsolution check.

For functions ``phi, psi`` of ``(s, t)`` with nonnegative ``s``-derivatives,

    P[phi, psi] = phi_t - n^2 s^{2-2/n} phi_ss D1(n phi_s) - n phi_s (psi - mu_up s / n)
    Q[phi, psi] = psi_t - n^2 s^{2-2/n} psi_ss D2(n psi_s) - n psi_s (phi - mu_up s / n)

A pair is a subsolution when both are <= 0 for a.e. ``s`` in ``(0, R^n)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import DomainError, InvalidParameterError
from .logspace import signed_log_sum
from .model import MassState, ModelParams, log_diffusion
from .subsolution import SubsolutionParams, subsolution_terms

REL_SLACK = 1e-12
REGIONS = ("inner", "transition", "outer")


@dataclass
class OperatorInput:
    """Pointwise data for ``P``/``Q``.

    ``phi*`` are the first component and its derivatives, ``psi*`` the second;
    ``P`` differentiates ``phi`` and couples to ``psi``, ``Q`` the reverse.
    """

    phi: float
    phi_t: float
    phi_s: float
    phi_ss: float
    psi: float
    s: float
    mu_star_up: float
    D1: Callable
    n: int = 3
    t: float = 0.0
    psi_t: float = 0.0
    psi_s: float = 0.0
    psi_ss: float = 0.0
    D2: Optional[Callable] = None


def _check_s(s):
    if np.any(np.asarray(s) <= 0):
        raise DomainError("operators are defined for s > 0 only")


def eval_P(inp: OperatorInput):
    _check_s(inp.s)
    n = inp.n
    return (inp.phi_t
            - n ** 2 * inp.s ** (2 - 2 / n) * inp.phi_ss * inp.D1(n * inp.phi_s)
            - n * inp.phi_s * (inp.psi - inp.mu_star_up * inp.s / n))


def eval_Q(inp: OperatorInput):
    _check_s(inp.s)
    n = inp.n
    D2 = inp.D2 if inp.D2 is not None else inp.D1
    return (inp.psi_t
            - n ** 2 * inp.s ** (2 - 2 / n) * inp.psi_ss * D2(n * inp.psi_s)
            - n * inp.psi_s * (inp.phi - inp.mu_star_up * inp.s / n))


# ---------------------------------------------------------------------------
# log-space residuals on the constructed subsolution


def operator_residuals(sp: SubsolutionParams, params: ModelParams, log_s, log_y, theta_t):
    """Signed-log ``P`` and ``Q`` residuals of the subsolution at sample points.

    Returns
    -------
    dict
        ``{'P': (sign, log_abs, log_scale), 'Q': (...)}`` where ``log_scale`` is
        the log of the largest individual term magnitude at each point.
    """
    n = sp.n
    ln = math.log(n)
    log_mu = math.log(sp.mu_star_up)
    U = subsolution_terms("U", log_s, log_y, theta_t, sp)
    W = subsolution_terms("W", log_s, log_y, theta_t, sp)
    log_s = np.broadcast_to(np.asarray(log_s, float), U.phi.log.shape)
    out = {}
    for key, me, other, D in (("P", U, W, params.D1), ("Q", W, U, params.D2)):
        log_d = log_diffusion(D, ln + me.phi_s.log)
        diff_log = 2 * ln + (2 - 2 / n) * log_s + me.phi_ss.log + log_d
        signs = np.stack([
            me.hat_t.sign,
            -me.theta_part.sign,
            -me.phi_ss.sign,              # -phi_ss >= 0
            -other.phi.sign,
            np.ones_like(log_s),
        ], axis=-1)
        logs = np.stack([
            me.hat_t.log,
            me.theta_part.log,
            diff_log,
            ln + me.phi_s.log + other.phi.log,
            me.phi_s.log + log_mu + log_s,
        ], axis=-1)
        out[key] = signed_log_sum(signs, logs, axis=-1)
    return out


@dataclass(frozen=True)
class Sampling:
    time_samples: int = 100
    samples_per_time: int = 100
    # closest relative approach to the kink and to the blow-up time
    kink_gap: float = 1e-9
    min_time_fraction: float = 1e-8
    end_gap: float = 1e-12

    @property
    def samples_per_region(self) -> int:
        return self.time_samples * self.samples_per_time


@dataclass
class RegionReport:
    name: str
    samples: int = 0
    flagged: int = 0
    violations_P: int = 0
    violations_Q: int = 0
    max_P: tuple = (0.0, -math.inf)
    max_Q: tuple = (0.0, -math.inf)
    max_rel_P: float = -math.inf
    max_rel_Q: float = -math.inf

    @property
    def violations(self) -> int:
        return self.violations_P + self.violations_Q


@dataclass
class VerifierReport:
    regions: dict
    provenance: str
    log_window: float
    slack: float = REL_SLACK
    notes: list = field(default_factory=list)

    @property
    def total_samples(self) -> int:
        return sum(r.samples for r in self.regions.values())

    @property
    def verdict(self) -> str:
        if self.total_samples == 0:
            return "vacuous"
        if any(r.violations or r.flagged for r in self.regions.values()):
            return "fail"
        return "pass"

    def to_text(self) -> str:
        lines = [f"verdict={self.verdict}", f"provenance={self.provenance}",
                 f"log_window={self.log_window:.17g}", f"slack={self.slack:g}"]
        lines += [f"note={n}" for n in self.notes]
        for r in self.regions.values():
            lines.append(
                f"[region {r.name}] samples={r.samples} flagged={r.flagged} "
                f"violations_P={r.violations_P} violations_Q={r.violations_Q} "
                f"max_P_sign={r.max_P[0]:+.0f} max_P_log={r.max_P[1]:.17g} "
                f"max_Q_sign={r.max_Q[0]:+.0f} max_Q_log={r.max_Q[1]:.17g} "
                f"max_rel_P={r.max_rel_P:.17g} max_rel_Q={r.max_rel_Q:.17g}")
        return "\n".join(lines) + "\n"


def _signed_max(sign, log_abs):
    """Largest value among signed-log numbers, returned as ``(sign, log)``."""
    if sign.size == 0:
        return (0.0, -math.inf)
    pos = sign > 0
    if np.any(pos):
        return (1.0, float(np.max(log_abs[pos])))
    zero = sign == 0
    if np.any(zero):
        return (0.0, -math.inf)
    return (-1.0, float(np.min(log_abs)))


def _time_fractions(k: int, smp: Sampling):
    if k <= 0:
        return np.empty(0)
    k1 = k // 2
    early = np.geomspace(smp.min_time_fraction, 0.5, k1, endpoint=False) if k1 else np.empty(0)
    late = 1.0 - np.geomspace(0.5, smp.end_gap, k - k1)
    return np.concatenate([early, late])


def region_log_samples(region, log_y, log_s0, log_Rn, k, gap):
    """Geometric ``log s`` samples inside one region, one row per ``log y``.

    Returns the sample matrix and a mask of rows whose region is nonempty.
    Regions: inner ``(0, 1/y)``, transition ``(1/y, s0]``, outer
    ``(max(s0, 1/y), R^n)``; ``gap`` keeps samples off the kink and ends.
    """
    lg_lo = math.log1p(gap)
    lg_hi = math.log1p(-gap)
    kink = -log_y
    u = np.linspace(0.0, 1.0, k)
    if region == "inner":
        lo = kink + math.log(gap)
        hi = kink + lg_hi
    elif region == "transition":
        lo = kink + lg_lo
        hi = np.full_like(kink, log_s0)
    else:
        lo = np.maximum(kink, log_s0) + lg_lo
        hi = np.full_like(kink, log_Rn + lg_hi)
    ok = hi > lo
    pts = lo[:, None] + (hi - lo)[:, None] * u[None, :]
    pts[:, -1] = hi  # no rounding past the region end
    return pts, ok


def verify_subsolution(sp: SubsolutionParams, params: ModelParams,
                       sampling: Optional[Sampling] = None) -> VerifierReport:
    """Sample ``P`` and ``Q`` on the subsolution over the three regions.

    Times fill ``(0, min(T, 1/theta))`` logarithmically at both ends; within
    each region ``s`` is geometric, and the kink ``s = 1/y(t)`` is excluded.
    A sample violates when its residual exceeds ``REL_SLACK`` times the
    largest term magnitude at that point. Non-finite evaluations are flagged,
    never dropped.
    """
    smp = sampling or Sampling()
    log_window = sp.log_time_window
    notes = []
    if sp.mode != "theory-grade":
        notes.append("toy constants: lemma hypotheses on theta and y0 are not guaranteed")
    regions = {name: RegionReport(name) for name in REGIONS}
    frac = _time_fractions(smp.time_samples, smp)
    if frac.size == 0 or smp.samples_per_time <= 0:
        return VerifierReport(regions, sp.mode, log_window, notes=notes)

    traj = sp.trajectory
    log_t = log_window + np.log(frac)
    frac_T = frac if log_window >= sp.log_T else np.exp(log_t - sp.log_T)
    log_y = traj.log_y_at_fraction(frac_T)
    if sp.log_theta == -math.inf:
        theta_t = np.zeros_like(frac)
    else:
        theta_t = np.exp(sp.log_theta + log_t)  # <= 1 inside the window
    log_Rn = sp.n * math.log(sp.R)

    for name in REGIONS:
        log_s, ok = region_log_samples(name, log_y, sp.log_s0, log_Rn,
                                       smp.samples_per_time, smp.kink_gap)
        log_s = log_s[ok]
        if log_s.size == 0:
            continue
        ly = np.broadcast_to(log_y[ok][:, None], log_s.shape)
        tt = np.broadcast_to(theta_t[ok][:, None], log_s.shape)
        res = operator_residuals(sp, params, log_s.ravel(), ly.ravel(), tt.ravel())
        rep = regions[name]
        rep.samples = int(log_s.size)
        bad = np.zeros(log_s.size, dtype=bool)
        for key in ("P", "Q"):
            sign, log_abs, scale = res[key]
            bad |= ~np.isfinite(scale) | np.isnan(log_abs)
        rep.flagged = int(np.count_nonzero(bad))
        for key in ("P", "Q"):
            sign, log_abs, scale = (a[~bad] for a in res[key])
            viol = (sign > 0) & (log_abs > scale + math.log(REL_SLACK))
            with np.errstate(over="ignore", under="ignore"):
                rel = sign * np.exp(np.minimum(log_abs - scale, 50.0))
            setattr(rep, f"violations_{key}", int(np.count_nonzero(viol)))
            setattr(rep, f"max_{key}", _signed_max(sign, log_abs))
            setattr(rep, f"max_rel_{key}", float(np.max(rel)) if rel.size else -math.inf)
    return VerifierReport(regions, sp.mode, log_window, notes=notes)


# ---------------------------------------------------------------------------
# discrete residual of the simulated mass system


@dataclass
class MassResidualReport:
    min_P: float
    min_Q: float
    scale: float
    tol: float
    snapshots: int

    @property
    def min_rel(self) -> float:
        return min(self.min_P, self.min_Q) / self.scale if self.scale > 0 else 0.0

    @property
    def passed(self) -> bool:
        return min(self.min_P, self.min_Q) >= -self.tol


def _ddt(a0, a1, a2, t0, t1, t2):
    h0, h1 = t1 - t0, t2 - t1
    return (-h1 / (h0 * (h0 + h1)) * a0 + (h1 - h0) / (h0 * h1) * a1
            + h0 / (h1 * (h0 + h1)) * a2)


def _space_derivs(M, s):
    hm = s[1:-1] - s[:-2]
    hp = s[2:] - s[1:-1]
    Mm, M0, Mp = M[:-2], M[1:-1], M[2:]
    d1 = (-hp / (hm * (hm + hp)) * Mm + (hp - hm) / (hm * hp) * M0
          + hm / (hp * (hm + hp)) * Mp)
    d2 = 2.0 * ((Mp - M0) / hp - (M0 - Mm) / hm) / (hm + hp)
    return d1, d2


def check_mass_system_residual(history: Sequence[MassState], params: ModelParams,
                               rtol: float = 1e-2) -> MassResidualReport:
    """Finite-difference ``P[U, W]``, ``Q[U, W]`` along a simulated history.

    The true mass system solves these operators with ``mu2``/``mu1`` in place
    of ``mu_up``, so it is a supersolution: residuals must be >= 0 up to
    truncation error, ``tol = rtol * scale`` with ``scale`` the largest term
    magnitude seen.

    Raises
    ------
    InvalidParameterError
        With fewer than 3 snapshots or snapshots on different grids.
    """
    if len(history) < 3:
        raise InvalidParameterError("need at least 3 consecutive snapshots")
    s = history[0].s_grid
    for h in history:
        if h.s_grid.shape != s.shape or not np.array_equal(h.s_grid, s):
            raise InvalidParameterError("snapshots must share one grid")
    n = params.n
    mu = params.mu_star_up
    si = s[1:-1]
    coef = n ** 2 * si ** (2 - 2 / n)
    min_p = min_q = math.inf
    scale = 0.0
    for k in range(1, len(history) - 1):
        a, b, c = history[k - 1], history[k], history[k + 1]
        for key, M, other, D in (("P", "U", "W", params.D1), ("Q", "W", "U", params.D2)):
            Mt = _ddt(getattr(a, M), getattr(b, M), getattr(c, M), a.t, b.t, c.t)[1:-1]
            Ms, Mss = _space_derivs(getattr(b, M), s)
            diff = coef * Mss * D(n * Ms)
            adv = n * Ms * (getattr(b, other)[1:-1] - mu * si / n)
            res = Mt - diff - adv
            scale = max(scale, float(np.max(np.abs(np.concatenate([Mt, diff, adv])))))
            if key == "P":
                min_p = min(min_p, float(np.min(res)))
            else:
                min_q = min(min_q, float(np.min(res)))
    return MassResidualReport(min_p, min_q, scale, rtol * scale, len(history))
