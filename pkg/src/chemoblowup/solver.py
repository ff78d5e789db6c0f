"""Method-of-lines solver for the mass-distribution system.

    U_t = n^2 s^{2-2/n} D1(n U_s) U_ss + n U_s (W - mu2 s / n)
    W_t = n^2 s^{2-2/n} D2(n W_s) W_ss + n W_s (U - mu1 s / n)

on ``0 < s < R^n`` with ``U(0) = W(0) = 0``, ``U(R^n) = mu1 R^n / n`` and
``W(R^n) = mu2 R^n / n``. The means ``mu1, mu2`` are read off the initial
boundary values, so the solver always integrates the true mass equations of
the data it is given.
"""
from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import isotonic_regression

from .errors import (AbortedRunError, InvalidParameterError, NotRepresentableError,
                     PreconditionError)
from . import _kernels
from .model import MassState, ModelParams, PowerDiffusion, RadialProfile, mass_from_profile
from .subsolution import THEORY, SubsolutionParams, eval_subsolution

logger = logging.getLogger(__name__)

Initial = Union[Tuple[RadialProfile, RadialProfile], Tuple[np.ndarray, np.ndarray], MassState]


@dataclass
class SimConfig:
    """Solver settings.

    ``initial`` is either a pair of radial density profiles, a pair of mass
    arrays on the solver grid, or a ``MassState`` on that grid. ``cadence`` is
    the time between snapshots (default ``t_end / 20``). ``rho_max`` defaults
    to ``1e6`` times the initial sup density and ``dt_min`` to
    ``1e-12 t_end``. ``capacity_fraction`` is the slope threshold: the run is
    also stopped once ``U(s_1) >= capacity_fraction * U(R^n)``, i.e. when that
    share of the mass sits in the innermost cell and the grid can no longer
    resolve further concentration.
    """

    params: ModelParams
    initial: Initial
    N: int = 256
    gamma: float = 2.0
    t_end: float = 1.0
    cfl: float = 0.8
    dt_min: Optional[float] = None
    cadence: Optional[float] = None
    rho_max: Optional[float] = None
    capacity_fraction: float = 0.5
    enforce_monotone: bool = False
    max_steps: int = 10_000_000
    subsolution_T: Optional[float] = None

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 16:
            raise InvalidParameterError(f"N must be an integer >= 16, got {self.N}")
        if not (self.gamma >= 1):
            raise InvalidParameterError(f"gamma must be >= 1, got {self.gamma}")
        if not (self.t_end > 0):
            raise InvalidParameterError("t_end must be positive")
        if not (0 < self.cfl <= 1):
            raise InvalidParameterError("cfl must lie in (0, 1]")
        if self.dt_min is not None and not (self.dt_min > 0):
            raise InvalidParameterError("dt_min must be positive")
        if self.cadence is not None and not (self.cadence > 0):
            raise InvalidParameterError("cadence must be positive")
        if not (0 < self.capacity_fraction <= 1):
            raise InvalidParameterError("capacity_fraction must lie in (0, 1]")

    def grid(self) -> np.ndarray:
        return graded_grid(self.params.Rn, self.N, self.gamma)


@dataclass
class BlowupReport:
    fired: bool
    t_detect: Optional[float]
    trigger: str            # density | dt-collapse | horizon
    detail: str = ""
    T_ref: Optional[float] = None

    @property
    def ratio_to_T(self) -> Optional[float]:
        if self.t_detect is None or not self.T_ref:
            return None
        return self.t_detect / self.T_ref


@dataclass
class SimResult:
    t: np.ndarray
    sup_u: np.ndarray
    sup_w: np.ndarray
    mass_u: np.ndarray
    mass_w: np.ndarray
    dt: np.ndarray
    snapshots: List[MassState]
    blowup: BlowupReport
    mu: Tuple[float, float]
    steps: int
    params: ModelParams = field(repr=False, default=None)

    @property
    def final(self) -> MassState:
        return self.snapshots[-1]


def graded_grid(Rn: float, N: int, gamma: float) -> np.ndarray:
    """``s_i = R^n (i / N)^gamma`` for ``i = 0..N``; clusters nodes at ``s = 0``."""
    s = Rn * (np.arange(N + 1) / N) ** gamma
    s[-1] = Rn
    return s


def subsolution_mass_state(sp: SubsolutionParams, s_grid, t: float = 0.0) -> MassState:
    """Closed-form ``(U_sub, W_sub)`` sampled on a grid."""
    s = np.asarray(s_grid, dtype=float)
    return MassState(s, eval_subsolution(s, t, "U", "0", sp),
                     eval_subsolution(s, t, "W", "0", sp), t)


class MassSystem:
    """Spatial operator and stable step size on a fixed graded grid."""

    def __init__(self, params: ModelParams, s: np.ndarray, mu: Tuple[float, float]):
        self.params = params
        self.s = s
        self.n = params.n
        self.mu1, self.mu2 = mu
        n = self.n
        si = s[1:-1]
        self.hm = si - s[:-2]
        self.hp = s[2:] - si
        self.coef = n ** 2 * si ** (2.0 - 2.0 / n)
        self.hmin2 = np.minimum(self.hm, self.hp) ** 2
        hm, hp = self.hm, self.hp
        # central first derivative weights
        self.c = (-hp / (hm * (hm + hp)), (hp - hm) / (hm * hp), hm / (hp * (hm + hp)))
        # one-sided second-order weights; the outermost nodes fall back to first order
        h2m = np.empty_like(hm)
        h2m[1:] = hm[:-1]
        h2m[0] = np.nan
        h2p = np.empty_like(hp)
        h2p[:-1] = hp[1:]
        h2p[-1] = np.nan
        self.bw = (hm / (h2m * (h2m + hm)), -(h2m + hm) / (h2m * hm),
                   (h2m + 2 * hm) / (hm * (h2m + hm)))
        self.fw = (-(2 * hp + h2p) / (hp * (hp + h2p)), (hp + h2p) / (hp * h2p),
                   -hp / (h2p * (hp + h2p)))

    def _terms(self, M, other, mu_other, D):
        n, s = self.n, self.s
        Mm, M0, Mp = M[:-2], M[1:-1], M[2:]
        c = self.c
        Ms = c[0] * Mm + c[1] * M0 + c[2] * Mp
        Mss = 2.0 * ((Mp - M0) / self.hp - (M0 - Mm) / self.hm) / (self.hm + self.hp)
        d = D(n * Ms)
        a = other[1:-1] - mu_other * s[1:-1] / n
        back = np.empty_like(Ms)
        back[1:] = self.bw[0][1:] * M[:-3] + self.bw[1][1:] * Mm[1:] + self.bw[2][1:] * M0[1:]
        back[0] = (M0[0] - Mm[0]) / self.hm[0]
        fwd = np.empty_like(Ms)
        fwd[:-1] = self.fw[0][:-1] * M0[:-1] + self.fw[1][:-1] * Mp[:-1] + self.fw[2][:-1] * M[3:]
        fwd[-1] = (Mp[-1] - M0[-1]) / self.hp[-1]
        up = np.where(a > 0, fwd, back)
        return self.coef * d * Mss + n * a * up, d, a

    def rhs(self, U, W):
        fu = np.zeros_like(U)
        fw = np.zeros_like(W)
        fu[1:-1], du, au = self._terms(U, W, self.mu2, self.params.D1)
        fw[1:-1], dw, aw = self._terms(W, U, self.mu1, self.params.D2)
        return fu, fw, (du, dw, au, aw)

    def stable_dt(self, aux, cfl: float) -> float:
        du, dw, au, aw = aux
        dmax = np.maximum(du, dw)
        diff = np.min(self.hmin2 / (2.0 * self.coef * dmax))
        amax = np.maximum(np.abs(au), np.abs(aw))
        h = np.minimum(self.hm, self.hp)
        with np.errstate(divide="ignore"):
            adv = np.min(np.where(amax > 0, h / (self.n * amax), np.inf))
        return cfl * min(diff, adv)

    def step(self, U, W, dt, k1=None):
        """One explicit midpoint step; ``k1`` reuses an already computed RHS."""
        fu, fw = k1 if k1 is not None else self.rhs(U, W)[:2]
        Uh = U + 0.5 * dt * fu
        Wh = W + 0.5 * dt * fw
        gu, gw, _ = self.rhs(Uh, Wh)
        return U + dt * gu, W + dt * gw


def _project(M):
    top = M[-1]
    out = isotonic_regression(M).x
    out[0], out[-1] = 0.0, top
    return out


def cell_densities(M, s, n):
    return n * np.diff(M) / np.diff(s)


def sup_density(M, s, n) -> float:
    """Largest nodal density ``n U_s`` (second-order differences, one-sided at ends)."""
    return float(np.max(n * np.gradient(M, s, edge_order=2)))


def initial_mass(cfg: SimConfig, s: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    init = cfg.initial
    n = cfg.params.n
    if isinstance(init, MassState):
        U0, W0 = init.U, init.W
        if init.s_grid.shape != s.shape or not np.allclose(init.s_grid, s, rtol=1e-12, atol=0):
            raise InvalidParameterError("initial mass state is not on the solver grid")
    else:
        a, b = init
        if isinstance(a, RadialProfile):
            U0, W0 = mass_from_profile(a, s, n), mass_from_profile(b, s, n)
        else:
            U0, W0 = np.asarray(a, float), np.asarray(b, float)
    U0 = np.array(U0, dtype=float)
    W0 = np.array(W0, dtype=float)
    if U0.shape != s.shape or W0.shape != s.shape:
        raise InvalidParameterError(f"initial mass arrays must have {s.size} entries")
    for name, M in (("U", U0), ("W", W0)):
        scale = max(abs(M[-1]), 1e-300)
        if not np.all(np.isfinite(M)):
            raise InvalidParameterError(f"initial {name} is not finite")
        if abs(M[0]) > 1e-12 * scale:
            raise InvalidParameterError(f"initial {name}(0) must vanish")
        if not (M[-1] > 0):
            raise InvalidParameterError(f"initial {name} carries no mass")
        if np.any(np.diff(M) < -1e-12 * scale):
            raise InvalidParameterError(f"initial {name} is not nondecreasing in s")
        M[0] = 0.0
    return U0, W0


# series rows: at least every t_end / SERIES_POINTS, and whenever a sup moves by SERIES_REL
SERIES_POINTS = 1000
SERIES_REL = 0.01
_BUF_ROWS = 4096


def _compiled_ok(cfg: SimConfig) -> bool:
    return (not cfg.enforce_monotone
            and isinstance(cfg.params.D1, PowerDiffusion)
            and isinstance(cfg.params.D2, PowerDiffusion))


class _Marcher:
    """Shared state of one run; ``advance`` moves to ``t_stop`` or the first event."""

    def __init__(self, cfg, s, U, W, mu, rho_max, dt_min):
        p = cfg.params
        self.cfg, self.s, self.n = cfg, s, p.n
        self.U, self.W = U, W
        self.system = MassSystem(p, s, mu)
        self.rho_max, self.dt_min = rho_max, dt_min
        self.cap_u = cfg.capacity_fraction * U[-1]
        self.cap_w = cfg.capacity_fraction * W[-1]
        self.rec_dt = cfg.t_end / SERIES_POINTS
        self.t = 0.0
        self.steps = 0
        self.rows = [self._row(0.0, 0.0)]
        self.last_rec = np.array(self.rows[0][:3])
        self.compiled = _compiled_ok(cfg)
        if self.compiled:
            sy = self.system
            self.g = (sy.hm, sy.hp, sy.coef) + sy.c + sy.bw + sy.fw
            e = np.array(_gradient_edges(s))
            self.edge = e
            self.dpar = np.array([p.D1.k, p.D1.m, p.D1.reg, p.D2.k, p.D2.m, p.D2.reg])
            self.buf = np.empty((_BUF_ROWS, 6))

    def _row(self, t, dt):
        n, s, U, W = self.n, self.s, self.U, self.W
        return (t, sup_density(U, s, n), sup_density(W, s, n),
                float(np.sum(cell_densities(U, s, n) * np.diff(s))),
                float(np.sum(cell_densities(W, s, n) * np.diff(s))), dt)

    def advance(self, t_stop):
        if self.compiled:
            return self._advance_compiled(t_stop)
        return self._advance_numpy(t_stop)

    def _advance_compiled(self, t_stop):
        cfg = self.cfg
        while True:
            budget = cfg.max_steps - self.steps
            code, t, steps, nrows, dt = _kernels.march(
                self.U, self.W, self.s, self.g, self.edge, float(self.n),
                self.system.mu1, self.system.mu2, self.dpar, self.t, t_stop, cfg.cfl,
                self.dt_min, budget, self.rho_max, self.cap_u, self.cap_w,
                self.rec_dt, SERIES_REL, self.last_rec, self.buf)
            self.t = t
            self.steps += steps
            self.rows.extend(map(tuple, self.buf[:nrows].tolist()))
            if code != _kernels.BUFFER_FULL:
                return _EVENTS[code], dt

    def _advance_numpy(self, t_stop):
        cfg, sy = self.cfg, self.system
        while True:
            if self.steps >= cfg.max_steps:
                return "budget", 0.0
            fu, fw, aux = sy.rhs(self.U, self.W)
            if not (np.all(np.isfinite(fu)) and np.all(np.isfinite(fw))):
                return "nonfinite", 0.0
            dt = sy.stable_dt(aux, cfg.cfl)
            if not dt >= self.dt_min:
                return "dt-collapse", dt
            last = dt >= t_stop - self.t
            if last:
                dt = t_stop - self.t
            Un, Wn = sy.step(self.U, self.W, dt, (fu, fw))
            Un[0] = Wn[0] = 0.0
            Un[-1], Wn[-1] = self.U[-1], self.W[-1]
            if not (np.all(np.isfinite(Un)) and np.all(np.isfinite(Wn))):
                return "nonfinite", dt
            if cfg.enforce_monotone:
                Un, Wn = _project(Un), _project(Wn)
            self.U, self.W = Un, Wn
            self.t = t_stop if last else self.t + dt
            self.steps += 1
            row = self._row(self.t, dt)
            hit_rho = max(row[1], row[2]) >= self.rho_max
            hit_cap = Un[1] >= self.cap_u or Wn[1] >= self.cap_w
            lr = self.last_rec
            if (last or hit_rho or hit_cap or self.t - lr[0] >= self.rec_dt
                    or abs(row[1] - lr[1]) > SERIES_REL * lr[1]
                    or abs(row[2] - lr[2]) > SERIES_REL * lr[2]):
                self.rows.append(row)
                lr[:] = row[:3]
            if hit_rho:
                return "density", dt
            if hit_cap:
                return "capacity", dt
            if last:
                return "output", dt


_EVENTS = {_kernels.OUTPUT: "output", _kernels.DT_COLLAPSE: "dt-collapse",
           _kernels.NONFINITE: "nonfinite", _kernels.DENSITY: "density",
           _kernels.CAPACITY: "capacity", _kernels.STEP_BUDGET: "budget"}


def _gradient_edges(s):
    d1, d2 = s[1] - s[0], s[2] - s[1]
    e1, e2 = s[-2] - s[-3], s[-1] - s[-2]
    return (-(2 * d1 + d2) / (d1 * (d1 + d2)), (d1 + d2) / (d1 * d2), -d1 / (d2 * (d1 + d2)),
            e2 / (e1 * (e1 + e2)), -(e1 + e2) / (e1 * e2), (2 * e2 + e1) / (e2 * (e1 + e2)))


def run(cfg: SimConfig) -> SimResult:
    """Integrate to ``t_end`` or until a blow-up trigger fires.

    Raises
    ------
    InvalidParameterError
        For initial data that is not monotone or violates the boundary values.
    AbortedRunError
        If non-finite values appear; carries the last finite state.
    """
    p = cfg.params
    n = p.n
    s = cfg.grid()
    U, W = initial_mass(cfg, s)
    mu = (n * U[-1] / p.Rn, n * W[-1] / p.Rn)
    sup0 = max(sup_density(U, s, n), sup_density(W, s, n))
    rho_max = cfg.rho_max if cfg.rho_max is not None else 1e6 * sup0
    if not rho_max > sup0:
        raise InvalidParameterError(f"rho_max={rho_max:g} must exceed the initial sup {sup0:g}")
    dt_min = cfg.dt_min if cfg.dt_min is not None else 1e-12 * cfg.t_end
    cadence = cfg.cadence if cfg.cadence is not None else cfg.t_end / 20.0
    T_ref = cfg.subsolution_T

    mr = _Marcher(cfg, s, U, W, mu, rho_max, dt_min)
    snaps = [MassState(s, U.copy(), W.copy(), 0.0)]
    report = BlowupReport(False, None, "horizon", T_ref=T_ref)
    k = 1
    while mr.t < cfg.t_end:
        target = min(k * cadence, cfg.t_end)
        event, dt = mr.advance(target)
        if event == "output":
            snaps.append(MassState(s, mr.U.copy(), mr.W.copy(), mr.t))
            k += 1
            continue
        if event == "nonfinite":
            # both marchers leave the last finite state in place
            raise AbortedRunError(
                f"non-finite values after t={mr.t:g}",
                last_state=MassState(s, mr.U.copy(), mr.W.copy(), mr.t),
                partial=_result(mr, snaps, report, mu, p))
        if event == "dt-collapse":
            report = BlowupReport(True, mr.t, "dt-collapse",
                                  f"dt={dt:.3e} < dt_min={dt_min:.3e}", T_ref)
        elif event == "density":
            report = BlowupReport(True, mr.t, "density", "sup density reached rho_max", T_ref)
        elif event == "capacity":
            report = BlowupReport(True, mr.t, "density",
                                  f"inner cell holds {cfg.capacity_fraction:g} of the mass", T_ref)
        else:
            report = BlowupReport(False, None, "horizon",
                                  f"step budget {cfg.max_steps} exhausted", T_ref)
        break
    if snaps[-1].t != mr.t:
        snaps.append(MassState(s, mr.U.copy(), mr.W.copy(), mr.t))
    return _result(mr, snaps, report, mu, p)


def _result(mr: _Marcher, snaps, report, mu, params) -> SimResult:
    a = np.asarray(mr.rows, dtype=float).reshape(-1, 6)
    mass = params.omega_n / params.n
    return SimResult(a[:, 0], a[:, 1], a[:, 2], mass * a[:, 3], mass * a[:, 4], a[:, 5],
                     list(snaps), report, mu, mr.steps, params)


# ---------------------------------------------------------------------------
# output


SERIES_COLUMNS = ("t", "sup_u", "sup_w", "mass_u", "mass_w", "dt")
SNAPSHOT_COLUMNS = ("t", "s_index", "s", "U", "W", "u", "w")


def write_series(res: SimResult, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SERIES_COLUMNS)
        for row in zip(res.t, res.sup_u, res.sup_w, res.mass_u, res.mass_w, res.dt):
            w.writerow([repr(float(v)) for v in row])


def write_snapshots(res: SimResult, path) -> None:
    n = res.params.n
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SNAPSHOT_COLUMNS)
        for snap in res.snapshots:
            u = n * np.gradient(snap.U, snap.s_grid, edge_order=2)
            v = n * np.gradient(snap.W, snap.s_grid, edge_order=2)
            for i, row in enumerate(zip(snap.s_grid, snap.U, snap.W, u, v)):
                w.writerow([repr(float(snap.t)), i] + [repr(float(x)) for x in row])


# ---------------------------------------------------------------------------
# experiments


@dataclass
class OrderingReport:
    ok: bool
    times: np.ndarray
    min_gap_U: float
    min_gap_W: float
    tol: float
    first_violation: Optional[Tuple[float, str, int]] = None


def ordering_experiment(cfg: SimConfig, pair: Sequence[MassState],
                        rtol: float = 1e-8) -> OrderingReport:
    """Advance two ordered mass states in lockstep and check the order persists.

    Both states share each step size (the smaller of their stable steps), so
    the check probes the discrete solution map itself. Order is tested at
    every output time with tolerance ``rtol * scale``.

    Raises
    ------
    PreconditionError
        If the initial states are not componentwise ordered.
    """
    lo, hi = pair
    s = cfg.grid()
    p = cfg.params
    n = p.n
    states = []
    for st in (lo, hi):
        U, W = initial_mass(SimConfig(p, st, cfg.N, cfg.gamma, cfg.t_end), s)
        states.append([U, W])
    (U1, W1), (U2, W2) = states
    scale = max(float(np.max(np.abs(U2))), float(np.max(np.abs(W2))), 1e-300)
    tol = rtol * scale
    if np.any(U1 > U2 + tol) or np.any(W1 > W2 + tol):
        raise PreconditionError("initial states are not ordered componentwise")
    systems = [MassSystem(p, s, (n * U[-1] / p.Rn, n * W[-1] / p.Rn)) for U, W in states]
    # comparison is for one equation: use the upper state's means for both
    systems[0] = systems[1]
    cadence = cfg.cadence if cfg.cadence is not None else cfg.t_end / 20.0
    dt_min = cfg.dt_min if cfg.dt_min is not None else 1e-12 * cfg.t_end

    t, next_out = 0.0, cadence
    times = [0.0]
    # boundary nodes are pinned to equal or ordered constants; gaps are interior
    gu = float(np.min((U2 - U1)[1:-1]))
    gw = float(np.min((W2 - W1)[1:-1]))
    first = None
    steps = 0
    while t < cfg.t_end and steps < cfg.max_steps:
        ks = [sys.rhs(U, W) for sys, (U, W) in zip(systems, states)]
        dt = min(sys.stable_dt(k[2], cfg.cfl) for sys, k in zip(systems, ks))
        if dt < dt_min:
            break
        target = min(next_out, cfg.t_end)
        dt = min(dt, target - t)
        for sys, st, k in zip(systems, states, ks):
            Un, Wn = sys.step(st[0], st[1], dt, k[:2])
            Un[0] = Wn[0] = 0.0
            Un[-1], Wn[-1] = st[0][-1], st[1][-1]
            if cfg.enforce_monotone:
                Un, Wn = _project(Un), _project(Wn)
            st[0], st[1] = Un, Wn
        t = target if dt == target - t else t + dt
        steps += 1
        if t >= target:
            next_out = target + cadence
            times.append(t)
            (U1, W1), (U2, W2) = states
            if not (np.all(np.isfinite(U1)) and np.all(np.isfinite(U2))):
                raise AbortedRunError(f"non-finite values at t={t:g}")
            du, dw = (U2 - U1)[1:-1], (W2 - W1)[1:-1]
            gu, gw = min(gu, float(np.min(du))), min(gw, float(np.min(dw)))
            if first is None:
                if np.min(du) < -tol:
                    first = (t, "U", int(np.argmin(du)) + 1)
                elif np.min(dw) < -tol:
                    first = (t, "W", int(np.argmin(dw)) + 1)
    return OrderingReport(first is None, np.asarray(times), gu, gw, tol, first)


@dataclass
class DominanceReport:
    times: np.ndarray
    min_diff_U: np.ndarray
    min_diff_W: np.ndarray
    scale: float
    horizon: float
    label: str = "empirical (toy parameters)"
    notes: list = field(default_factory=list)
    result: Optional[SimResult] = field(default=None, repr=False)

    @property
    def min_diff(self) -> float:
        return float(min(np.min(self.min_diff_U), np.min(self.min_diff_W)))

    @property
    def dominated(self) -> bool:
        return self.min_diff >= -1e-6 * self.scale


def dominance_experiment(cfg: SimConfig, sp: SubsolutionParams, exp=None) -> DominanceReport:
    """Compare a run started from the subsolution data against the subsolution itself.

    The initial state is the closed-form ``(U_sub, W_sub)(., 0)`` on the grid,
    so ``U - U_sub = 0`` at ``t = 0``. The comparison stops at ``0.99 T`` when
    the horizon would pass the subsolution's blow-up time.

    Raises
    ------
    NotRepresentableError
        For theory-grade constants (``y0`` far beyond double range).
    """
    if sp.mode == THEORY:
        raise NotRepresentableError(
            "dominance needs toy constants; theory-grade y0 is not representable")
    s = cfg.grid()
    init = subsolution_mass_state(sp, s)
    notes = []
    horizon = cfg.t_end
    if horizon >= 0.99 * sp.T:
        horizon = 0.99 * sp.T
        notes.append(f"horizon truncated at 0.99T = {horizon:.6g}")
    run_cfg = SimConfig(cfg.params, init, cfg.N, cfg.gamma, horizon, cfg.cfl, cfg.dt_min,
                        min(cfg.cadence or horizon / 20.0, horizon), cfg.rho_max,
                        cfg.capacity_fraction, cfg.enforce_monotone, cfg.max_steps, sp.T)
    res = run(run_cfg)
    if res.blowup.fired:
        notes.append(f"run stopped by {res.blowup.trigger} trigger at t={res.blowup.t_detect:.6g}")
    times, dU, dW = [], [], []
    for snap in res.snapshots:
        ref = subsolution_mass_state(sp, s, snap.t)
        times.append(snap.t)
        dU.append(float(np.min(snap.U - ref.U)))
        dW.append(float(np.min(snap.W - ref.W)))
    scale = max(float(init.U[-1]), float(init.W[-1]))
    return DominanceReport(np.asarray(times), np.asarray(dU), np.asarray(dW), scale,
                           horizon, notes=notes, result=res)
