"""Brute-force reference sums by explicit enumeration.

Deliberately naive: plain itertools loops in linear domain, sharing no code
with the dynamic-programming paths they are used to check.
"""

from __future__ import annotations

import itertools
import math


def esp(values, ell: int) -> float:
    """Sum over size-ell subsets of the product of the chosen values."""
    return math.fsum(math.prod(c) for c in itertools.combinations(values, ell))


def pod_sum(gamma, values, m: float, max_order: int | None = None) -> float:
    """sum_{v subset of 1..d, |v| <= max_order} gamma(|v|) m^|v| prod values."""
    d = len(values)
    top = d if max_order is None else min(d, max_order)
    terms = []
    for r in range(top + 1):
        g = gamma(r)
        for c in itertools.combinations(values, r):
            terms.append(g * m**r * math.prod(c))
    return math.fsum(terms)


def spod_sum(gamma, grid, m: float, max_order: int | None = None) -> float:
    """sum over (v, nu) of gamma(|nu|) m^|v| prod grid[nu_j - 1][j - 1].

    ``grid[k][j]`` holds Upsilon_{j+1, k+1}; all rows share the same length d.
    """
    alpha = len(grid)
    d = len(grid[0])
    top = d if max_order is None else min(d, max_order)
    terms = []
    for r in range(top + 1):
        for v in itertools.combinations(range(d), r):
            for nu in itertools.product(range(alpha), repeat=r):
                p = math.prod(grid[k][j] for j, k in zip(v, nu))
                terms.append(gamma(r + sum(nu)) * m**r * p)
    return math.fsum(terms)


def spod_class_sum(grid, ell: int, ell_prime: int) -> float:
    """sum over |v| = ell, |nu| = ell' of prod Upsilon_{j, nu_j}."""
    alpha = len(grid)
    d = len(grid[0])
    terms = []
    for v in itertools.combinations(range(d), ell):
        for nu in itertools.product(range(1, alpha + 1), repeat=ell):
            if sum(nu) == ell_prime:
                terms.append(math.prod(grid[k - 1][j] for j, k in zip(v, nu)))
    return math.fsum(terms)
