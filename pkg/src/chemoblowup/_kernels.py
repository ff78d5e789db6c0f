"""Compiled time-marching loop for regularized power-law diffusions.

Mirrors ``MassSystem`` step for step; kept separate so the numpy version
remains the readable reference (and the path for arbitrary diffusions).
"""
import numpy as np
from numba import njit

# return codes
OUTPUT = 1
DT_COLLAPSE = 2
NONFINITE = 3
DENSITY = 4
CAPACITY = 5
STEP_BUDGET = 6
BUFFER_FULL = 7


@njit(cache=True)
def _diff(x, k, m, reg):
    return k * ((x * x + reg) / (1.0 + reg)) ** (0.5 * (m - 1.0))


@njit(cache=True)
def _rhs(U, W, s, g, n, mu1, mu2, dpar, fu, fw):
    """Fill ``fu, fw`` and return ``(max D / h^2 coef, max |a| / h)`` stability data."""
    hm, hp, coef, c0, c1, c2, b0, b1, b2, f0, f1, f2 = g
    N = s.shape[0] - 1
    inv_diff = 0.0
    inv_adv = 0.0
    for which in range(2):
        if which == 0:
            M = U
            O = W
            mu = mu2
            k, m, reg = dpar[0], dpar[1], dpar[2]
            out = fu
        else:
            M = W
            O = U
            mu = mu1
            k, m, reg = dpar[3], dpar[4], dpar[5]
            out = fw
        out[0] = 0.0
        out[N] = 0.0
        for i in range(1, N):
            j = i - 1
            Ms = c0[j] * M[i - 1] + c1[j] * M[i] + c2[j] * M[i + 1]
            Mss = 2.0 * ((M[i + 1] - M[i]) / hp[j] - (M[i] - M[i - 1]) / hm[j]) / (hm[j] + hp[j])
            d = _diff(n * Ms, k, m, reg)
            a = O[i] - mu * s[i] / n
            if a > 0:
                if i < N - 1:
                    up = f0[j] * M[i] + f1[j] * M[i + 1] + f2[j] * M[i + 2]
                else:
                    up = (M[i + 1] - M[i]) / hp[j]
            else:
                if i > 1:
                    up = b0[j] * M[i - 2] + b1[j] * M[i - 1] + b2[j] * M[i]
                else:
                    up = (M[i] - M[i - 1]) / hm[j]
            out[i] = coef[j] * d * Mss + n * a * up
            h = min(hm[j], hp[j])
            q = 2.0 * coef[j] * d / (h * h)
            if q > inv_diff:
                inv_diff = q
            q = n * abs(a) / h
            if q > inv_adv:
                inv_adv = q
    return inv_diff, inv_adv


@njit(cache=True)
def _sup_density(M, s, n, c0, c1, c2, edge):
    N = s.shape[0] - 1
    best = n * (edge[0] * M[0] + edge[1] * M[1] + edge[2] * M[2])
    v = n * (edge[3] * M[N - 2] + edge[4] * M[N - 1] + edge[5] * M[N])
    if v > best:
        best = v
    for i in range(1, N):
        j = i - 1
        v = n * (c0[j] * M[i - 1] + c1[j] * M[i] + c2[j] * M[i + 1])
        if v > best:
            best = v
    return best


@njit(cache=True)
def march(U, W, s, g, edge, n, mu1, mu2, dpar, t, t_stop, cfl, dt_min, max_steps,
          rho_max, cap_u, cap_w, rec_dt, rec_rel, last_rec, buf):
    """Advance ``U, W`` in place until an event; rows of ``buf`` get series records.

    ``last_rec = [t, sup_u, sup_w]`` of the previous record. Returns
    ``(code, t, steps, rows, dt)``.
    """
    N = s.shape[0] - 1
    fu = np.empty_like(U)
    fw = np.empty_like(W)
    gu = np.empty_like(U)
    gw = np.empty_like(W)
    Uh = np.empty_like(U)
    Wh = np.empty_like(W)
    cap_rows = buf.shape[0]
    rows = 0
    steps = 0
    dt = 0.0
    top_u = U[N]
    top_w = W[N]
    while True:
        if steps >= max_steps:
            return STEP_BUDGET, t, steps, rows, dt
        if rows >= cap_rows - 1:
            return BUFFER_FULL, t, steps, rows, dt
        inv_diff, inv_adv = _rhs(U, W, s, g, n, mu1, mu2, dpar, fu, fw)
        ok = np.isfinite(inv_diff) and np.isfinite(inv_adv)
        for i in range(N + 1):
            if not (np.isfinite(fu[i]) and np.isfinite(fw[i])):
                ok = False
        if not ok:
            return NONFINITE, t, steps, rows, dt
        lim = inv_diff if inv_diff > inv_adv else inv_adv
        dt = cfl / lim if lim > 0 else np.inf
        if not (dt >= dt_min):
            return DT_COLLAPSE, t, steps, rows, dt
        last = False
        if dt >= t_stop - t:
            dt = t_stop - t
            last = True
        for i in range(N + 1):
            Uh[i] = U[i] + 0.5 * dt * fu[i]
            Wh[i] = W[i] + 0.5 * dt * fw[i]
        _rhs(Uh, Wh, s, g, n, mu1, mu2, dpar, gu, gw)
        finite = True
        for i in range(N + 1):
            Uh[i] = U[i] + dt * gu[i]
            Wh[i] = W[i] + dt * gw[i]
            if not (np.isfinite(Uh[i]) and np.isfinite(Wh[i])):
                finite = False
        if not finite:
            return NONFINITE, t, steps, rows, dt
        Uh[0] = 0.0
        Wh[0] = 0.0
        Uh[N] = top_u
        Wh[N] = top_w
        for i in range(N + 1):
            U[i] = Uh[i]
            W[i] = Wh[i]
        t = t_stop if last else t + dt
        steps += 1
        su = _sup_density(U, s, n, g[3], g[4], g[5], edge)
        sw = _sup_density(W, s, n, g[3], g[4], g[5], edge)
        hit_rho = max(su, sw) >= rho_max
        hit_cap = U[1] >= cap_u or W[1] >= cap_w
        if (last or hit_rho or hit_cap or t - last_rec[0] >= rec_dt
                or abs(su - last_rec[1]) > rec_rel * last_rec[1]
                or abs(sw - last_rec[2]) > rec_rel * last_rec[2]):
            mu_ = 0.0
            mw_ = 0.0
            for i in range(N):
                ds = s[i + 1] - s[i]
                mu_ += (n * (U[i + 1] - U[i]) / ds) * ds
                mw_ += (n * (W[i + 1] - W[i]) / ds) * ds
            buf[rows, 0] = t
            buf[rows, 1] = su
            buf[rows, 2] = sw
            buf[rows, 3] = mu_
            buf[rows, 4] = mw_
            buf[rows, 5] = dt
            rows += 1
            last_rec[0] = t
            last_rec[1] = su
            last_rec[2] = sw
        if hit_rho:
            return DENSITY, t, steps, rows, dt
        if hit_cap:
            return CAPACITY, t, steps, rows, dt
        if last:
            return OUTPUT, t, steps, rows, dt
