"""Overflow-safe arithmetic on (sign, log-magnitude) pairs.

The blow-up constants span hundreds of decades, so every quantity that may
leave the double range is carried as its natural log, and signed sums are
reduced with a shifted log-sum-exp.
"""
from __future__ import annotations

import math

import numpy as np

LOG_MAX = math.log(np.finfo(float).max)
LOG_TINY = math.log(np.finfo(float).tiny)


def safe_exp(x):
    """``exp(x)`` that saturates to ``inf`` / ``0.0`` instead of warning."""
    with np.errstate(over="ignore", under="ignore"):
        out = np.exp(x)
    if np.ndim(out) == 0:
        return float(out)
    return out


def representable(logx: float) -> bool:
    return LOG_TINY < logx < LOG_MAX


def log_sub(a, b):
    """``log(exp(a) - exp(b))`` for ``a >= b``; ``-inf`` when equal."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = a + np.log1p(-np.exp(b - a))
    out = np.where(b == -np.inf, a, out)
    return out if out.ndim else float(out)


def log_sum(logs, axis=None):
    """``log(sum(exp(logs)))`` along ``axis``; empty or all ``-inf`` gives ``-inf``."""
    logs = np.asarray(logs, dtype=float)
    m = np.max(logs, axis=axis, keepdims=True)
    m_safe = np.where(np.isfinite(m), m, 0.0)
    with np.errstate(divide="ignore"):
        out = np.log(np.sum(np.exp(logs - m_safe), axis=axis, keepdims=True)) + m_safe
    out = np.squeeze(out, axis=axis) if axis is not None else out.reshape(())
    return out if out.ndim else float(out)


def signed_log_sum(signs, logs, axis=-1):
    """Reduce ``sum(sign * exp(log))`` along ``axis``.

    Returns
    -------
    sign, log_abs, log_scale
        Sign of the sum (-1, 0, +1), log of its magnitude (``-inf`` for an
        exact zero) and log of the largest term magnitude, which callers use
        as the reference for relative rounding slack.
    """
    signs = np.asarray(signs, dtype=float)
    logs = np.asarray(logs, dtype=float)
    logs = np.where(signs == 0, -np.inf, logs)
    scale = np.max(logs, axis=axis, keepdims=True)
    shift = np.where(np.isfinite(scale), scale, 0.0)
    total = np.sum(signs * np.exp(logs - shift), axis=axis, keepdims=True)
    with np.errstate(divide="ignore"):
        log_abs = np.log(np.abs(total)) + shift
    sign = np.sign(total)
    squeeze = lambda x: np.squeeze(x, axis=axis)
    return squeeze(sign), squeeze(log_abs), squeeze(scale)
