"""Elementary symmetric polynomials of weight prefixes, in log domain.

e_ell(x_1..x_j) obeys e_ell(j) = e_ell(j-1) + x_j e_{ell-1}(j-1). Unrolling
over j turns each order into a cumulative sum of the previous order shifted
by one coordinate, so a table is built one order at a time with
``np.logaddexp.accumulate`` running down the coordinates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._logmath import NEG_INF
from .weights import DEFAULT_RTOL, WeightSequence


@dataclass(frozen=True)
class SymTable:
    """``values[j, ell]`` = log e_ell(Upsilon_1..Upsilon_j), j = 0..d."""

    d: int
    max_order: int
    values: np.ndarray

    def entry(self, j: int, ell: int) -> float:
        return float(self.values[j, ell])

    def row(self, j: int | None = None) -> np.ndarray:
        return self.values[self.d if j is None else j]


def next_order(log_x: np.ndarray, prev: np.ndarray) -> np.ndarray:
    """Column of log e_ell over prefixes 0..d given the column for ell - 1.

    ``log_x[i]`` is log of coordinate i + 1; ``prev[j]`` is log e_{ell-1} of
    the first j coordinates.
    """
    out = np.empty_like(prev)
    out[0] = NEG_INF
    # prefix j: logaddexp(e_ell(j-1), log x_j + e_{ell-1}(j-1))
    np.logaddexp.accumulate(log_x + prev[:-1], out=out[1:])
    return out


def log_esp_row(log_x: np.ndarray, max_order: int) -> np.ndarray:
    """log e_ell of all coordinates for ell = 0..max_order (rolling memory)."""
    log_x = np.asarray(log_x, dtype=float)
    d = log_x.size
    if max_order > d:
        raise ValueError(f"max_order={max_order} exceeds prefix length d={d}")
    col = np.zeros(d + 1)
    row = np.full(max_order + 1, NEG_INF)
    row[0] = 0.0
    for ell in range(1, max_order + 1):
        col = next_order(log_x, col)
        row[ell] = col[-1]
    return row


def build_sym_table(seq: WeightSequence, d: int, max_order: int) -> SymTable:
    if d < 1:
        raise ValueError(f"d must be positive, got {d}")
    if max_order > d:
        raise ValueError(f"max_order={max_order} exceeds prefix length d={d}")
    log_x = seq.log_terms(d)
    values = np.full((d + 1, max_order + 1), NEG_INF)
    col = np.zeros(d + 1)
    values[:, 0] = 0.0
    for ell in range(1, max_order + 1):
        col = next_order(log_x, col)
        values[:, ell] = col
    return SymTable(d, max_order, values)


def _bound_inputs(seq: WeightSequence, ell: int, rtol: float):
    if ell < 1:
        raise ValueError(f"order must be >= 1, got {ell}")
    ups = seq.terms(ell)
    _, zeta_hi = seq.tail_sums(ell + 1, rtol)
    return ups, zeta_hi[1:]  # zeta_{J+1} for J = 1..ell


def lemma2_bound_fine(seq: WeightSequence, ell: int, rtol: float = DEFAULT_RTOL) -> float:
    """log prod_J (Upsilon_J + zeta_{J+1} / (ell - J + 1))."""
    ups, zeta_next = _bound_inputs(seq, ell, rtol)
    J = np.arange(1, ell + 1)
    factors = ups + zeta_next / (ell - J + 1)
    if np.any(factors == 0):
        return NEG_INF
    return math.fsum(np.log(factors))


def lemma2_bound_coarse(seq: WeightSequence, ell: int, rtol: float = DEFAULT_RTOL) -> float:
    """(ell + 1) + sum_J log max(Upsilon_J, zeta_{J+1} / J)."""
    ups, zeta_next = _bound_inputs(seq, ell, rtol)
    J = np.arange(1, ell + 1)
    factors = np.maximum(ups, zeta_next / J)
    if np.any(factors == 0):
        return NEG_INF
    return (ell + 1) + math.fsum(np.log(factors))


def log_stirling_factor(ell: int) -> float:
    """log of prod_{J=1}^ell (J / (ell - J + 1) + 1) = log((ell+1)^(ell+1) / (ell+1)!)."""
    return (ell + 1) * math.log(ell + 1) - math.lgamma(ell + 2)
