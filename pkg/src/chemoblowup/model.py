"""Problem description, diffusion family and mass/density transforms.

The radial system is handled through its mass distribution functions

    U(s, t) = int_0^{s^{1/n}} r^{n-1} u(r, t) dr,    s in [0, R^n],

so that the density is recovered as ``u = n U_s`` and the total mass of the
ball is ``omega_n U(R^n)``.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import cumulative_trapezoid, trapezoid

from .errors import InfeasibleError, InvalidParameterError

logger = logging.getLogger(__name__)

_D_PROBES = np.array([0.0, 0.25, 0.5, 1.0, 1.5, 2.0, 10.0, 100.0])


@dataclass(frozen=True)
class PowerDiffusion:
    """Regularized power law ``k ((s^2 + reg) / (1 + reg))^((m - 1) / 2)``.

    Smooth and positive on ``[0, inf)``, equal to ``k`` at ``s = 1`` and bounded
    by ``k s^(m-1)`` for ``s >= 1``. Nondecreasing in ``s >= 0``.
    """

    k: float
    m: float
    reg: float = 1.0

    monotone = True

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        base = (s * s + self.reg) / (1.0 + self.reg)
        out = self.k * base ** (0.5 * (self.m - 1.0))
        return out if out.ndim else float(out)

    def log_at(self, log_s):
        """``log D(exp(log_s))`` without forming ``exp(log_s)``."""
        log_s = np.asarray(log_s, dtype=float)
        lb = np.logaddexp(2.0 * log_s, math.log(self.reg)) - math.log1p(self.reg)
        out = math.log(self.k) + 0.5 * (self.m - 1.0) * lb
        return out if out.ndim else float(out)


def build_diffusion(k: float, m: float, reg: float = 1.0) -> PowerDiffusion:
    """Return the default diffusion function for coefficient ``k`` and exponent ``m``."""
    if not (k > 0):
        raise InvalidParameterError(f"diffusion coefficient must be positive, got k={k}")
    if not (m > 1):
        raise InvalidParameterError(f"diffusion exponent must exceed 1, got m={m}")
    if not (reg > 0):
        raise InvalidParameterError(f"regularizer must be positive, got reg={reg}")
    return PowerDiffusion(float(k), float(m), float(reg))


def log_diffusion(D: Callable, log_x):
    """Evaluate ``log D(x)`` given ``log x``; generic callables need representable ``x``."""
    if hasattr(D, "log_at"):
        return D.log_at(log_x)
    with np.errstate(over="ignore"):
        x = np.exp(np.asarray(log_x, dtype=float))
    if not np.all(np.isfinite(x)):
        raise InvalidParameterError(
            "diffusion argument overflows; supply a diffusion with a log_at method"
        )
    with np.errstate(divide="ignore"):
        return np.log(D(x))


def unit_sphere_area(n: int) -> float:
    """Surface area of the unit sphere in R^n."""
    return 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)


@dataclass(frozen=True)
class ModelParams:
    n: int
    R: float
    m1: float
    m2: float
    k1: float
    k2: float
    D1: Callable
    D2: Callable
    mu1: float
    mu2: float

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 3:
            raise InvalidParameterError(f"dimension must be an integer >= 3, got n={self.n}")
        if not (self.R > 0):
            raise InvalidParameterError(f"radius must be positive, got R={self.R}")
        if not (self.m1 > 1 and self.m2 > 1):
            raise InvalidParameterError("diffusion exponents must exceed 1")
        if not (self.k1 > 0 and self.k2 > 0):
            raise InvalidParameterError("diffusion coefficients must be positive")
        if not (self.mu1 > 0 and self.mu2 > 0):
            raise InvalidParameterError("mean masses must be positive")
        for name, D, k, m in (("D1", self.D1, self.k1, self.m1), ("D2", self.D2, self.k2, self.m2)):
            vals = np.asarray(D(_D_PROBES), dtype=float)
            if not np.all(vals > 0):
                raise InvalidParameterError(f"{name} must be positive on [0, inf)")
            big = _D_PROBES >= 1.0
            bound = k * _D_PROBES[big] ** (m - 1.0)
            if np.any(vals[big] > bound * (1.0 + 1e-12)):
                raise InvalidParameterError(f"{name}(s) exceeds k s^(m-1) for some s >= 1")

    @property
    def mu_star_up(self) -> float:
        return max(self.mu1, self.mu2)

    @property
    def mu_star_lo(self) -> float:
        return min(self.mu1, self.mu2)

    @property
    def omega_n(self) -> float:
        return unit_sphere_area(self.n)

    @property
    def Rn(self) -> float:
        return self.R ** self.n

    def with_masses(self, mu1: float, mu2: float) -> "ModelParams":
        return ModelParams(self.n, self.R, self.m1, self.m2, self.k1, self.k2,
                           self.D1, self.D2, float(mu1), float(mu2))

    def with_exponents(self, m1: float, m2: float, reg: float = 1.0) -> "ModelParams":
        """Copy with new exponents and freshly built default diffusions."""
        return make_params(self.n, self.R, m1, m2, self.k1, self.k2,
                           self.mu1, self.mu2, reg=reg)


def make_params(n=3, R=1.0, m1=1.1, m2=1.1, k1=1.0, k2=1.0, mu1=1.0, mu2=1.0,
                reg=1.0) -> ModelParams:
    """Build ``ModelParams`` with the default regularized power-law diffusions."""
    return ModelParams(int(n), float(R), float(m1), float(m2), float(k1), float(k2),
                       build_diffusion(k1, m1, reg), build_diffusion(k2, m2, reg),
                       float(mu1), float(mu2))


@dataclass(frozen=True)
class RadialProfile:
    """Radial samples ``values[i] = f(r_grid[i])`` on ``[0, R]``.

    ``signed`` profiles (potentials) skip the nonnegativity check. ``clipped``
    counts negative values zeroed during density recovery.
    """

    r_grid: np.ndarray
    values: np.ndarray
    signed: bool = False
    clipped: int = 0

    def __post_init__(self):
        r = np.asarray(self.r_grid, dtype=float)
        v = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "r_grid", r)
        object.__setattr__(self, "values", v)
        if r.ndim != 1 or r.shape != v.shape or r.size < 2:
            raise InvalidParameterError("profile needs matching 1-d grid and values")
        if r[0] != 0.0 or np.any(np.diff(r) <= 0):
            raise InvalidParameterError("radial grid must start at 0 and increase strictly")
        if not np.all(np.isfinite(v)):
            raise InvalidParameterError("profile values must be finite")
        if not self.signed and np.any(v < 0):
            raise InvalidParameterError("densities must be nonnegative")

    @property
    def R(self) -> float:
        return float(self.r_grid[-1])


@dataclass(frozen=True)
class MassState:
    """Snapshot ``(s_grid, U, W)`` of the mass-distribution system at time ``t``."""

    s_grid: np.ndarray
    U: np.ndarray
    W: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        s = np.asarray(self.s_grid, dtype=float)
        U = np.asarray(self.U, dtype=float)
        W = np.asarray(self.W, dtype=float)
        for name, a in (("s_grid", s), ("U", U), ("W", W)):
            object.__setattr__(self, name, a)
        if s.ndim != 1 or U.shape != s.shape or W.shape != s.shape:
            raise InvalidParameterError("MassState arrays must be 1-d and the same length")
        if s[0] != 0.0 or np.any(np.diff(s) <= 0):
            raise InvalidParameterError("s_grid must start at 0 and increase strictly")

    def is_monotone(self, tol: float = 0.0) -> bool:
        scale = max(abs(self.U[-1]), abs(self.W[-1]), 1e-300)
        return bool(np.all(np.diff(self.U) >= -tol * scale)
                    and np.all(np.diff(self.W) >= -tol * scale))

    def check_boundary(self, params: ModelParams, rtol: float = 1e-12) -> bool:
        Rn = params.Rn
        top_u = params.mu1 * Rn / params.n
        top_w = params.mu2 * Rn / params.n
        return bool(self.U[0] == 0.0 and self.W[0] == 0.0
                    and abs(self.U[-1] - top_u) <= rtol * top_u
                    and abs(self.W[-1] - top_w) <= rtol * top_w)


def mass_from_profile(p: RadialProfile, s_grid, n: int) -> np.ndarray:
    """Mass distribution ``U(s) = int_0^{s^{1/n}} r^{n-1} p(r) dr`` at each ``s``.

    Uses ``r^{n-1} dr = dsigma / n`` with a composite trapezoid in ``sigma = r^n``
    over the profile nodes, and linear interpolation inside a cell for query
    points between nodes. Constant densities integrate exactly.
    """
    s = np.asarray(s_grid, dtype=float)
    sigma = p.r_grid ** n
    top = sigma[-1]
    if np.any(s < 0) or np.any(s > top * (1 + 1e-12)):
        raise InvalidParameterError("s_grid must lie in [0, R^n]")
    s = np.minimum(s, top)
    cum = cumulative_trapezoid(p.values, sigma, initial=0.0) / n
    j = np.clip(np.searchsorted(sigma, s, side="right") - 1, 0, sigma.size - 2)
    ds = s - sigma[j]
    slope = (p.values[j + 1] - p.values[j]) / (sigma[j + 1] - sigma[j])
    p_at = p.values[j] + slope * ds
    out = cum[j] + 0.5 * (p.values[j] + p_at) * ds / n
    return out


def mu_bounds(u0: RadialProfile, w0: RadialProfile, params: ModelParams):
    """Mean masses of the initial data and their max/min.

    Returns
    -------
    tuple
        ``(mu1, mu2, mu_star_up, mu_star_lo)``.
    """
    n, Rn = params.n, params.Rn
    means = []
    for prof in (u0, w0):
        total = mass_from_profile(prof, [prof.r_grid[-1] ** n], n)[0]
        means.append(n * total / Rn)
    mu1, mu2 = means
    if not (mu1 > 0 and mu2 > 0):
        raise InfeasibleError("initial data must carry positive mass for both species")
    return mu1, mu2, max(mu1, mu2), min(mu1, mu2)


def density_from_mass(m: MassState, n: int):
    """Recover ``(u, w)`` from a mass state via ``u = n U_s``.

    Second-order differences on the nonuniform grid (one-sided at the ends).
    Negative values from differentiation noise are clipped to zero and counted
    on the returned profiles' ``clipped`` field.
    """
    if m.s_grid.size < 3:
        raise InvalidParameterError("density recovery needs at least 3 nodes")
    r = m.s_grid ** (1.0 / n)
    r[0] = 0.0
    out = []
    for M in (m.U, m.W):
        dens = n * np.gradient(M, m.s_grid, edge_order=2)
        neg = int(np.count_nonzero(dens < 0))
        if neg:
            logger.warning("clipped %d negative density values at t=%g", neg, m.t)
            dens = np.maximum(dens, 0.0)
        out.append(RadialProfile(r, dens, clipped=neg))
    return out[0], out[1]


def _potential(r, s, mu, M, n):
    grad = np.zeros_like(r)
    pos = r > 0
    grad[pos] = mu * r[pos] / n - r[pos] ** (1 - n) * M[pos]
    v = cumulative_trapezoid(grad, r, initial=0.0)
    v -= trapezoid(v, s) / s[-1]
    return RadialProfile(r, v, signed=True)


def recover_potentials(m: MassState, params: ModelParams):
    """Zero-average chemical potentials ``(v, z)`` from the mass state.

    ``v_r = mu2 r / n - r^{1-n} W(r^n)`` is integrated outward from the centre
    and shifted so that ``int_Omega v = 0`` in the discrete trapezoid sense; ``z``
    likewise with ``mu1`` and ``U``.
    """
    n = params.n
    r = m.s_grid ** (1.0 / n)
    r[0] = 0.0
    return (_potential(r, m.s_grid, params.mu2, m.W, n),
            _potential(r, m.s_grid, params.mu1, m.U, n))
