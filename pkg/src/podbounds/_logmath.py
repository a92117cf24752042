"""Small log-domain helpers.

Sums are formed with ``math.fsum`` so that adding a nonnegative term can never
decrease the result through rounding.
"""

from __future__ import annotations

import math

import numpy as np

NEG_INF = -math.inf


def log_sum(log_terms) -> float:
    """log(sum(exp(log_terms))) with -inf entries treated as zeros."""
    arr = np.asarray(log_terms, dtype=float).ravel()
    if arr.size == 0:
        return NEG_INF
    top = float(np.max(arr))
    if top == NEG_INF:
        return NEG_INF
    if top == math.inf:
        return math.inf
    if arr.size == 1:
        return top
    return top + math.log(math.fsum(np.exp(arr - top)))


def safe_log(x) -> np.ndarray:
    """Elementwise log mapping 0 to -inf without a warning."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        return np.log(x)


def log_or_neginf(x: float) -> float:
    return math.log(x) if x > 0 else NEG_INF


def log_factorials(n: int) -> np.ndarray:
    """Array of log(k!) for k = 0..n, built by accumulating log k."""
    out = np.zeros(n + 1)
    if n >= 1:
        np.cumsum(np.log(np.arange(1, n + 1, dtype=float)), out=out[1:])
    return out


def finite_or_flag(x: float, flag: str):
    """Pass finite floats through; replace non-finite values by a flag string."""
    return x if math.isfinite(x) else flag
