"""Explicit blow-up subsolutions and their derived-constant chain.

The comparison pair is ``(e^{-theta t} U_hat, e^{-theta t} W_hat)`` where, with
``y(t)`` the blow-up solution of ``y' = Lambda y^{1+delta}``,

    U_hat(s, t) = l y^{1-alpha} s                             for s <= 1/y,
                  l alpha^{-alpha} (s - (1-alpha)/y)^alpha     for s >  1/y,

and ``W_hat`` likewise with ``beta``. Theory-grade constants are astronomically
scaled (``y0`` is of order 1e139 for the reference set), so every constant is
derived and stored as a natural log; linear fields saturate to ``inf``/``0``
when they leave the double range.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from .errors import DomainError, InfeasibleError, NotRepresentableError
from .exponents import Exponents
from .logspace import LOG_MAX, log_sub, log_sum, representable, safe_exp
from .model import ModelParams, RadialProfile, log_diffusion

THETA_FACTOR = 1.01
Y0_FACTOR = 1.01
S0_SAFETY = 0.99
DMAX_GRID = 1024

THEORY = "theory-grade"
TOY = "toy"


@dataclass(frozen=True)
class SubsolutionParams:
    n: int
    R: float
    mu_star_up: float
    mu_star_lo: float
    alpha: float
    beta: float
    delta: float
    l: float
    c1: float
    c2: float
    Lambda: float
    log_l: float
    log_s0: float
    log_s0_bounds: dict
    log_D1max: float
    log_D2max: float
    log_theta0: float
    log_theta: float
    log_y_star: float
    log_y0: float
    log_T: float
    mode: str = THEORY
    feasibility: dict = field(default_factory=dict)

    # linear companions; inf/0 when outside the double range
    @property
    def s0(self) -> float:
        return safe_exp(self.log_s0)

    @property
    def D1max(self) -> float:
        return safe_exp(self.log_D1max)

    @property
    def D2max(self) -> float:
        return safe_exp(self.log_D2max)

    @property
    def theta0(self) -> float:
        return safe_exp(self.log_theta0)

    @property
    def theta(self) -> float:
        return safe_exp(self.log_theta)

    @property
    def y_star(self) -> float:
        return safe_exp(self.log_y_star)

    @property
    def y0(self) -> float:
        return safe_exp(self.log_y0)

    @property
    def T(self) -> float:
        return safe_exp(self.log_T)

    @property
    def log_center_density(self) -> float:
        """``log(n l y0^{1 - min(alpha, beta)})``: the larger initial central density."""
        return (math.log(self.n) + self.log_l
                + (1.0 - min(self.alpha, self.beta)) * self.log_y0)

    @property
    def trajectory(self) -> "Trajectory":
        return Trajectory(self.log_y0, self.delta, self.Lambda, self.log_T)

    @property
    def log_time_window(self) -> float:
        """Log of the upper end of ``(0, T) cap (0, 1/theta)``."""
        return min(self.log_T, -self.log_theta)

    @property
    def time_window(self) -> float:
        return safe_exp(self.log_time_window)

    def as_records(self) -> list:
        """``(name, linear value, log value, representable)`` rows for reports."""
        rows = [("l", self.log_l), ("s0", self.log_s0), ("D1max", self.log_D1max),
                ("D2max", self.log_D2max), ("theta0", self.log_theta0),
                ("theta", self.log_theta), ("Lambda", math.log(self.Lambda)),
                ("y_star", self.log_y_star), ("y0", self.log_y0), ("T", self.log_T),
                ("center_density", self.log_center_density)]
        rows += [(f"s0_bound_{k}", v) for k, v in self.log_s0_bounds.items()]
        out = [("c1", self.c1, math.log(self.c1), True),
               ("c2", self.c2, math.log(self.c2), True)]
        for name, lg in rows:
            out.append((name, safe_exp(lg), lg, representable(lg) or lg == -math.inf))
        return out



def _s0_log_bounds(params: ModelParams, exp: Exponents, log_l: float, c1: float, c2: float):
    n, R = params.n, params.R
    a, b, d = exp.alpha, exp.beta, exp.delta
    mu_up = params.mu_star_up
    ln, la, lb = math.log(n), math.log(a), math.log(b)
    e_pa = (params.m1 - 1) * (1 - a) + b - 1 + 2 / n
    e_qb = (params.m2 - 1) * (1 - b) + a - 1 + 2 / n
    bounds = {
        "sstar1_first": ((1 - a) * la + ln + log_l - 1.0) / (1 - a),
        "sstar1_second": ((1 - a) * la + ln + log_l - math.log(2 * mu_up) - 1.0) / (1 - a),
        "sstar2_first": ((1 - b) * lb + ln + log_l - 1.0) / (1 - b),
        "sstar2_second": ((1 - b) * lb + ln + log_l - math.log(2 * mu_up) - 1.0) / (1 - b),
    }
    # C <= s0^e with e < 0  <=>  log s0 <= log C / e
    log_c = (math.log(4) + b * lb + 2.0 + (d - 1) * la - b * math.log(c2) - ln - log_l)
    bounds["sstar3_first"] = log_c / (b + d - 1)
    log_c = (math.log(4) + b * lb + 2.0 + math.log(params.k1) + params.m1 * ln
             + (params.m1 - 2) * log_l + ((params.m1 - 1) * (1 - a) - 2 + 2 / n) * la
             - b * math.log(c2))
    bounds["sstar3_second"] = log_c / e_pa
    log_c = (math.log(4) + a * math.log(c1) + a * la + 2.0 + (d - 1) * lb - ln - log_l)
    bounds["sstar4_first"] = log_c / (a + d - 1)
    log_c = (math.log(4) + a * math.log(c1) + a * la + 2.0 + math.log(params.k2)
             + params.m2 * ln + (params.m2 - 2) * log_l
             + ((params.m2 - 1) * (1 - b) - 2 + 2 / n) * lb)
    bounds["sstar4_second"] = log_c / e_qb
    bounds["half_Rn"] = n * math.log(R) - math.log(2.0)
    return bounds


def _log_dmax(D, log_lo: float, log_hi: float) -> float:
    if getattr(D, "monotone", False):
        return float(log_diffusion(D, log_hi))
    grid = np.linspace(log_lo, log_hi, DMAX_GRID)
    return float(np.max(log_diffusion(D, grid)))


def derive_constants(params: ModelParams, exp: Exponents, y0: Optional[float] = None,
                     theta: Optional[float] = None) -> SubsolutionParams:
    """Assemble every constant of the subsolution construction.

    Parameters
    ----------
    params, exp:
        Problem description and a valid exponent triple.
    y0, theta:
        Toy overrides. When given they replace the derived values (and the
        result is labelled ``toy``); the remaining constants still follow the
        theory chain.

    Raises
    ------
    InfeasibleError
        If an upper bound for ``s0`` is not finite, naming the inequality.
    """
    n, R = params.n, params.R
    a, b, d = exp.alpha, exp.beta, exp.delta
    mu_up, mu_lo = params.mu_star_up, params.mu_star_lo
    logRn = n * math.log(R)

    log_l = (math.log(mu_lo) + logRn - math.log(n) - 1.0 / math.e
             - float(np.logaddexp(logRn, 0.0)))
    if not representable(log_l):
        raise InfeasibleError(f"l = exp({log_l:.6g}) is outside double range; Lambda and "
                              "y_star need a representable l")
    l = math.exp(log_l)
    c1, c2 = max(b / a, 1.0), min(b / a, 1.0)

    bounds = _s0_log_bounds(params, exp, log_l, c1, c2)
    for name, v in bounds.items():
        if not math.isfinite(v):
            raise InfeasibleError(f"s0 bound from {name} is not finite ({v})")
    log_s0 = math.log(S0_SAFETY) + min(bounds.values())

    lo1 = math.log(n) + log_l - 1.0 + (1 - a) * math.log(a) + n * (a - 1) * math.log(R)
    hi1 = math.log(n) + log_l + (a - 1) * log_s0
    lo2 = math.log(n) + log_l - 1.0 + (1 - b) * math.log(b) + n * (b - 1) * math.log(R)
    hi2 = math.log(n) + log_l + (b - 1) * log_s0
    log_d1 = _log_dmax(params.D1, lo1, hi1)
    log_d2 = _log_dmax(params.D2, lo2, hi2)

    two_n = 2 * math.log(n) + (2 * n - 2) * math.log(R) - 2 * log_s0
    mass = math.log(mu_up) + logRn - log_s0
    th1 = 1.0 + log_sum([-d * log_s0, two_n + log_d1 - math.log(a), mass])
    th2 = 1.0 + log_sum([-d * log_s0, two_n + log_d2 - math.log(b), mass])
    log_theta0 = max(th1, th2)

    if theta is None:
        log_theta = math.log(THETA_FACTOR) + log_theta0
    else:
        log_theta = math.log(theta) if theta > 0 else -math.inf

    Lambda = min(1.0, n * l / (2 * math.e ** 2 * (1 - a)), n * l / (2 * math.e ** 2 * (1 - b)))
    log_ratio = math.log(2 * mu_up * math.e / (n * l))
    log_y_star = max(0.0, log_ratio / (1 - b), log_ratio / (1 - a), -logRn)
    log_y_ode = (log_theta - math.log(d) - math.log(Lambda)) / d
    if y0 is None:
        log_y0 = math.log(Y0_FACTOR) + max(log_y_ode, log_y_star, -log_s0)
    else:
        log_y0 = math.log(y0)
    log_T = -d * log_y0 - math.log(d) - math.log(Lambda)

    feas = {
        "s0_below_Rn": log_s0 < logRn,
        "theta_above_theta0": log_theta > log_theta0,
        "y0_above_ode_bound": log_y0 > log_y_ode,
        "y0_above_y_star": log_y0 > log_y_star,
        "y0_above_inv_s0": log_y0 > -log_s0,
        "T_below_inv_theta": log_T < -log_theta,
    }
    mode = THEORY if (y0 is None and theta is None) else TOY
    return SubsolutionParams(
        n=n, R=R, mu_star_up=mu_up, mu_star_lo=mu_lo, alpha=a, beta=b, delta=d,
        l=l, c1=c1, c2=c2, Lambda=Lambda, log_l=log_l, log_s0=log_s0,
        log_s0_bounds=bounds, log_D1max=log_d1, log_D2max=log_d2,
        log_theta0=log_theta0, log_theta=log_theta, log_y_star=log_y_star,
        log_y0=log_y0, log_T=log_T, mode=mode, feasibility=feas)


@dataclass(frozen=True)
class Trajectory:
    """Closed-form solution of ``y' = Lambda y^{1+delta}``, ``y(0) = y0``."""

    log_y0: float
    delta: float
    Lambda: float
    log_T: float

    @classmethod
    def from_values(cls, y0: float, delta: float, Lambda: float) -> "Trajectory":
        log_y0 = math.log(y0)
        return cls(log_y0, delta, Lambda, -delta * log_y0 - math.log(delta * Lambda))

    @property
    def y0(self) -> float:
        return safe_exp(self.log_y0)

    @property
    def T(self) -> float:
        return safe_exp(self.log_T)

    def log_y_at_fraction(self, frac):
        """``log y`` at ``t = frac * T``; stays accurate as ``frac -> 1``."""
        frac = np.asarray(frac, dtype=float)
        out = self.log_y0 - np.log1p(-frac) / self.delta
        return out if out.ndim else float(out)

    def log_y_prime(self, log_y):
        return math.log(self.Lambda) + (1.0 + self.delta) * np.asarray(log_y)


def y_of_t(t, traj: Trajectory):
    """``(y(t), log y(t))`` for ``0 <= t < T``.

    Raises
    ------
    DomainError
        If ``t`` is negative or not below the blow-up time.
    """
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise DomainError("time must be nonnegative")
    with np.errstate(divide="ignore"):
        frac = np.exp(np.log(t) - traj.log_T)
    if np.any(frac >= 1.0):
        raise DomainError(f"t must be below the blow-up time T={traj.T:g}")
    log_y = traj.log_y_at_fraction(frac)
    return safe_exp(log_y), log_y


class SignedLog(NamedTuple):
    sign: np.ndarray
    log: np.ndarray

    def value(self):
        out = self.sign * safe_exp(np.where(self.sign == 0, -np.inf, self.log))
        return out if np.ndim(out) else float(out)


class Terms(NamedTuple):
    """Subsolution value and derivatives at sample points, in signed-log form.

    ``hat_t`` is the time derivative of the hatted function (before the
    ``-theta`` contribution); ``theta_part`` is ``theta * phi``.
    """

    phi: SignedLog
    phi_t: SignedLog
    phi_s: SignedLog
    phi_ss: SignedLog
    hat_t: SignedLog
    theta_part: SignedLog
    inner: np.ndarray


def subsolution_terms(which: str, log_s, log_y, theta_t, sp: SubsolutionParams) -> Terms:
    """Vectorized ``U_sub``/``W_sub`` derivatives from ``log s``, ``log y(t)`` and ``theta t``.

    Points with ``s <= 1/y`` use the linear inner branch. All arithmetic is in
    log space, so ``y`` may be far beyond the double range.
    """
    a = {"U": sp.alpha, "W": sp.beta}[which]
    log_s, log_y, theta_t = np.broadcast_arrays(
        np.asarray(log_s, float), np.asarray(log_y, float), np.asarray(theta_t, float))
    log_lam = math.log(sp.Lambda)
    la, l1a = math.log(a), math.log1p(-a)
    inner = log_s <= -log_y

    # inner branch
    i_phi = sp.log_l + (1 - a) * log_y + log_s
    i_s = sp.log_l + (1 - a) * log_y + np.zeros_like(log_s)
    i_t = sp.log_l + l1a - a * log_y + log_lam + (1 + sp.delta) * log_y + log_s

    # outer branch, X = s - (1-a)/y
    with np.errstate(invalid="ignore"):
        log_x = log_sub(np.where(inner, 0.0, log_s), np.where(inner, -1.0, l1a - log_y))
    o_phi = sp.log_l - a * la + a * log_x
    o_s = sp.log_l + (1 - a) * la + (a - 1) * log_x
    o_ss = o_s + l1a - log_x
    o_t = o_s + l1a + log_lam + (sp.delta - 1) * log_y

    damp = -theta_t
    phi = np.where(inner, i_phi, o_phi) + damp
    phi_s = np.where(inner, i_s, o_s) + damp
    hat_t = np.where(inner, i_t, o_t) + damp
    phi_ss = np.where(inner, -np.inf, o_ss) + damp
    log_theta = np.full_like(phi, sp.log_theta)
    theta_part = log_theta + phi

    zero_phi = log_s == -np.inf
    sign_phi = np.where(zero_phi, 0.0, 1.0)
    sign_t_hat = np.where(zero_phi, 0.0, 1.0)
    sign_theta = np.where(zero_phi | (log_theta == -np.inf), 0.0, 1.0)
    # phi_t = hat_t - theta * phi
    m = np.maximum(np.where(sign_t_hat > 0, hat_t, -np.inf),
                   np.where(sign_theta > 0, theta_part, -np.inf))
    m_safe = np.where(np.isfinite(m), m, 0.0)
    diff = sign_t_hat * np.exp(np.where(sign_t_hat > 0, hat_t, -np.inf) - m_safe) \
        - sign_theta * np.exp(np.where(sign_theta > 0, theta_part, -np.inf) - m_safe)
    with np.errstate(divide="ignore"):
        phi_t_log = np.log(np.abs(diff)) + m_safe
    phi_t = SignedLog(np.sign(diff), phi_t_log)

    return Terms(
        phi=SignedLog(sign_phi, phi),
        phi_t=phi_t,
        phi_s=SignedLog(np.ones_like(phi), phi_s),
        phi_ss=SignedLog(np.where(inner, 0.0, -1.0), phi_ss),
        hat_t=SignedLog(sign_t_hat, hat_t),
        theta_part=SignedLog(sign_theta, theta_part),
        inner=inner,
    )


_ORDERS = ("0", "t", "s", "ss")


def eval_subsolution(s, t, which: str, order: str, sp: SubsolutionParams,
                     exp: Optional[Exponents] = None):
    """Value or derivative of ``U_sub`` (``which='U'``) or ``W_sub`` (``'W'``).

    ``order`` is one of ``'0'``, ``'t'``, ``'s'``, ``'ss'``. The exponents are
    taken from ``sp``; ``exp`` is accepted for call-site symmetry and checked
    for consistency when supplied.

    Raises
    ------
    DomainError
        For ``s`` outside ``[0, R^n]``, ``t`` outside ``[0, T)``, or a second
        derivative requested exactly at the kink ``s = 1/y(t)``.
    """
    order = str(order)
    if order not in _ORDERS:
        raise ValueError(f"order must be one of {_ORDERS}")
    if which not in ("U", "W"):
        raise ValueError("which must be 'U' or 'W'")
    if exp is not None and (exp.alpha, exp.beta) != (sp.alpha, sp.beta):
        raise ValueError("exponents do not match the subsolution parameters")
    s = np.asarray(s, dtype=float)
    Rn = sp.R ** sp.n
    if np.any(s < 0) or np.any(s > Rn * (1 + 1e-12)):
        raise DomainError("s must lie in [0, R^n]")
    _, log_y = y_of_t(t, sp.trajectory)
    with np.errstate(divide="ignore"):
        log_s = np.log(s)
    if order == "ss" and np.any(np.abs(log_s + log_y) < 1e-14):
        raise DomainError("second s-derivative is undefined at the kink s = 1/y(t)")
    theta_t = sp.theta * np.asarray(t, dtype=float) if sp.log_theta > -math.inf else 0.0
    terms = subsolution_terms(which, log_s, log_y, theta_t, sp)
    pick = {"0": terms.phi, "t": terms.phi_t, "s": terms.phi_s, "ss": terms.phi_ss}[order]
    return pick.value()


def initial_mass_threshold(r, sp: SubsolutionParams, exp: Optional[Exponents] = None,
                           params: Optional[ModelParams] = None):
    """``(M1_hat(r), M2_hat(r)) = omega_n (U_sub(r^n, 0), W_sub(r^n, 0))``."""
    from .model import unit_sphere_area

    r = np.asarray(r, dtype=float)
    if np.any(r < 0) or np.any(r > sp.R * (1 + 1e-12)):
        raise DomainError("r must lie in [0, R]")
    s = np.minimum(r ** sp.n, sp.R ** sp.n)
    omega = unit_sphere_area(sp.n)
    return (omega * eval_subsolution(s, 0.0, "U", "0", sp, exp),
            omega * eval_subsolution(s, 0.0, "W", "0", sp, exp))


def adapted_radial_grid(sp: SubsolutionParams, n_inner: int = 64, n_outer: int = 40000):
    """Radial grid resolving the initial subsolution profiles.

    Uniform in ``s = r^n`` inside the kink ``s = 1/y0`` and geometric in the
    distance ``s - (1 - a)/y0`` outside it (``a = min(alpha, beta)``), which
    keeps the relative trapezoid error of the mass integral near 1e-9.
    """
    if not representable(sp.log_y0):
        raise NotRepresentableError("y0 is not representable; use toy overrides")
    Rn = sp.R ** sp.n
    inv_y0 = math.exp(-sp.log_y0)
    a = min(sp.alpha, sp.beta)
    inner = np.linspace(0.0, inv_y0, n_inner)
    x0 = a * inv_y0
    base = (1 - a) * inv_y0
    outer = base + x0 * np.geomspace(1.0, (Rn - base) / x0, n_outer)
    s = np.unique(np.concatenate([inner, outer[1:]]))
    s[-1] = Rn
    r = s ** (1.0 / sp.n)
    r[0], r[-1] = 0.0, sp.R
    return r


def generate_initial_profiles(sp: SubsolutionParams, exp: Optional[Exponents] = None,
                              params: Optional[ModelParams] = None, grid=None):
    """Initial densities whose mass distributions equal ``U_sub(., 0)``, ``W_sub(., 0)``.

    ``u0(r) = n U_sub_s(r^n, 0)``, so the initial-mass condition holds with
    equality.

    Raises
    ------
    NotRepresentableError
        When the central density overflows double precision (theory-grade
        constants); derive toy constants instead.
    """
    if sp.log_center_density >= LOG_MAX or not representable(sp.log_y0):
        raise NotRepresentableError(
            f"initial densities reach exp({sp.log_center_density:.1f}); "
            "derive constants with toy overrides (y0, theta) to build profiles")
    r = adapted_radial_grid(sp) if grid is None else np.asarray(grid, dtype=float)
    s = np.minimum(r ** sp.n, sp.R ** sp.n)
    u0 = sp.n * eval_subsolution(s, 0.0, "U", "s", sp, exp)
    w0 = sp.n * eval_subsolution(s, 0.0, "W", "s", sp, exp)
    return RadialProfile(r, u0), RadialProfile(r, w0)
