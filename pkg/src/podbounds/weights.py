"""Weight sequences, order profiles and POD/SPOD family descriptions.

Coordinate sequences are 1-indexed: ``seq.term(1)`` is the first weight.
Tail sums come back as :class:`Interval` enclosures; callers that need an
upper bound use ``hi`` and callers that need a lower bound use ``lo``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ._logmath import log_factorials, safe_log

DEFAULT_RTOL = 1e-12


class Interval(NamedTuple):
    lo: float
    hi: float

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def mid(self) -> float:
        return 0.5 * (self.lo + self.hi)

    def contains(self, x: float) -> bool:
        return self.lo <= x <= self.hi


class WeightSequence:
    """Common interface of the nonnegative coordinate weight laws."""

    #: number of nonzero-capable leading terms, or None for infinite support
    support: int | None = None

    def term(self, j: int) -> float:
        raise NotImplementedError

    def terms(self, n: int) -> np.ndarray:
        """First ``n`` terms as an array (index 0 holds the weight of j=1)."""
        raise NotImplementedError

    def log_terms(self, n: int) -> np.ndarray:
        return safe_log(self.terms(n))

    def tail_sums(self, J_max: int, rtol: float = DEFAULT_RTOL) -> tuple[np.ndarray, np.ndarray]:
        """Enclosures of zeta_J for J = 1..J_max, as (lo, hi) arrays."""
        raise NotImplementedError

    def tail_sum(self, J: int, rtol: float = DEFAULT_RTOL) -> Interval:
        if J < 1:
            raise ValueError(f"tail index must be >= 1, got {J}")
        lo, hi = self.tail_sums(J, rtol)
        return Interval(float(lo[-1]), float(hi[-1]))

    @property
    def summable(self) -> bool:
        return True

    def root(self, k: int) -> "WeightSequence":
        """The sequence of k-th roots of the terms."""
        raise NotImplementedError


@dataclass(frozen=True)
class Zero(WeightSequence):
    support = 0

    def term(self, j: int) -> float:
        _check_index(j)
        return 0.0

    def terms(self, n: int) -> np.ndarray:
        return np.zeros(n)

    def tail_sums(self, J_max, rtol=DEFAULT_RTOL):
        z = np.zeros(J_max)
        return z, z.copy()

    def root(self, k):
        return self


@dataclass(frozen=True)
class Explicit(WeightSequence):
    """Finitely supported sequence; ``values[0]`` is the weight of j=1."""

    values: tuple[float, ...]

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        for i, v in enumerate(vals):
            if not math.isfinite(v) or v < 0:
                raise ValueError(f"values[{i}] must be finite and nonnegative, got {v!r}")
        object.__setattr__(self, "values", vals)

    @property
    def support(self) -> int:
        return len(self.values)

    def term(self, j: int) -> float:
        _check_index(j)
        return self.values[j - 1] if j <= len(self.values) else 0.0

    def terms(self, n: int) -> np.ndarray:
        out = np.zeros(n)
        k = min(n, len(self.values))
        out[:k] = self.values[:k]
        return out

    def tail_sums(self, J_max, rtol=DEFAULT_RTOL):
        n = max(J_max, len(self.values))
        # summed from the far end so every zeta_J uses the same rounding path
        rev = np.cumsum(self.terms(n)[::-1])[::-1][:J_max]
        return rev, rev.copy()

    def root(self, k):
        return Explicit(tuple(v ** (1.0 / k) for v in self.values))


@dataclass(frozen=True)
class PowerLaw(WeightSequence):
    """c * j**(-rho) with no decay requirement.

    Used for user-supplied raw laws (the divergence witnesses); tail sums are
    infinite when ``rho <= 1``. :class:`PolyDecay` is the validated variant.
    """

    c: float
    rho: float

    def __post_init__(self):
        if not (math.isfinite(self.c) and self.c >= 0):
            raise ValueError(f"c must be finite and nonnegative, got {self.c!r}")
        if not (math.isfinite(self.rho) and self.rho > 0):
            raise ValueError(f"rho must be positive, got {self.rho!r}")

    @property
    def summable(self) -> bool:
        return self.c == 0 or self.rho > 1

    def term(self, j: int) -> float:
        _check_index(j)
        return self.c * float(j) ** (-self.rho)

    def terms(self, n: int) -> np.ndarray:
        return self.c * np.arange(1, n + 1, dtype=float) ** (-self.rho)

    def tail_sums(self, J_max, rtol=DEFAULT_RTOL):
        if self.c == 0:
            z = np.zeros(J_max)
            return z, z.copy()
        if self.rho <= 1:
            inf = np.full(J_max, math.inf)
            return inf, inf.copy()
        return _power_tail_sums(self.c, self.rho, J_max, rtol)

    def root(self, k):
        c, rho = self.c ** (1.0 / k), self.rho / k
        return PolyDecay(c, rho) if rho > 1 else PowerLaw(c, rho)


@dataclass(frozen=True)
class PolyDecay(PowerLaw):
    """c * j**(-rho) with rho > 1, so every tail sum is finite."""

    def __post_init__(self):
        super().__post_init__()
        if not self.rho > 1:
            raise ValueError(f"PolyDecay requires rho > 1, got {self.rho!r}")


@dataclass(frozen=True)
class BlockedPolyDecay(WeightSequence):
    """c * ceil(j / alpha)**(-rho): each power-law term repeated alpha times."""

    c: float
    rho: float
    alpha: int

    def __post_init__(self):
        if not (math.isfinite(self.c) and self.c >= 0):
            raise ValueError(f"c must be finite and nonnegative, got {self.c!r}")
        if not self.rho > 1:
            raise ValueError(f"rho must exceed 1, got {self.rho!r}")
        if int(self.alpha) != self.alpha or self.alpha < 1:
            raise ValueError(f"alpha must be a positive integer, got {self.alpha!r}")

    def term(self, j: int) -> float:
        _check_index(j)
        return self.c * float(-(-j // self.alpha)) ** (-self.rho)

    def terms(self, n: int) -> np.ndarray:
        blocks = np.ceil(np.arange(1, n + 1) / self.alpha)
        return self.c * blocks ** (-self.rho)

    def tail_sums(self, J_max, rtol=DEFAULT_RTOL):
        a = self.alpha
        J = np.arange(1, J_max + 1)
        b = -(-J // a)
        base_lo, base_hi = _power_tail_sums(1.0, self.rho, int(b[-1]) + 1, rtol)
        head = (a * b - J + 1) * b.astype(float) ** (-self.rho)
        lo = self.c * (head + a * base_lo[b])
        hi = self.c * (head + a * base_hi[b])
        return lo, hi


def term(seq: WeightSequence, j: int) -> float:
    return seq.term(j)


def tail_sum(seq: WeightSequence, J: int, rtol: float = DEFAULT_RTOL) -> Interval:
    return seq.tail_sum(J, rtol)


def _check_index(j: int) -> None:
    if j < 1:
        raise ValueError(f"sequence index must be >= 1, got {j}")


def _power_remainder(c: float, rho: float, N: int) -> tuple[float, float]:
    """Bracket for sum_{n>=N} c n^-rho.

    x^-rho is convex and decreasing, so the trapezoid rule over [N, inf) and
    the midpoint rule over [N-1/2, inf) bound the sum from below and above.
    Both endpoints lie inside [int_N^inf, int_{N-1}^inf].
    """
    lo = N ** (1.0 - rho) / (rho - 1.0) + 0.5 * N ** (-rho)
    hi = (N - 0.5) ** (1.0 - rho) / (rho - 1.0)
    return c * lo, c * hi


def _power_tail_sums(c, rho, J_max, rtol):
    N = J_max + 16
    while True:
        r_lo, r_hi = _power_remainder(c, rho, N)
        partial = c * np.arange(J_max, N, dtype=float) ** (-rho)
        hi_last = float(np.sum(partial[::-1])) + r_hi
        if r_hi - r_lo <= rtol * hi_last:
            break
        N = J_max + 2 * (N - J_max)
    t = c * np.arange(1, N, dtype=float) ** (-rho)
    rev = np.cumsum(t[::-1])[::-1][:J_max]
    return rev + r_lo, rev + r_hi


# -- order profiles ---------------------------------------------------------


class OrderProfile:
    """Order-dependent factors Gamma_ell, exposed in log domain."""

    #: largest order with a possibly nonzero factor, None if unbounded
    support: int | None = None

    def log_values(self, L: int) -> np.ndarray:
        """log Gamma_ell for ell = 0..L (-inf where Gamma_ell = 0)."""
        raise NotImplementedError

    def log_value(self, ell: int) -> float:
        return float(self.log_values(ell)[ell])

    @property
    def gamma0(self) -> float:
        return math.exp(self.log_value(0))


@dataclass(frozen=True)
class ExplicitOrder(OrderProfile):
    """Explicit list of order factors with Gamma_0 first."""

    values: tuple[float, ...]

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        if not vals:
            raise ValueError("values must contain at least Gamma_0")
        for i, v in enumerate(vals):
            if not math.isfinite(v) or v < 0:
                raise ValueError(f"values[{i}] must be finite and nonnegative, got {v!r}")
        object.__setattr__(self, "values", vals)

    @property
    def support(self) -> int:
        return len(self.values) - 1

    def log_values(self, L):
        out = np.full(L + 1, -math.inf)
        k = min(L + 1, len(self.values))
        out[:k] = safe_log(self.values[:k])
        return out


@dataclass(frozen=True)
class FactorialPower(OrderProfile):
    """Gamma_ell = (ell!)**sigma."""

    sigma: float

    def __post_init__(self):
        if not (math.isfinite(self.sigma) and self.sigma >= 0):
            raise ValueError(f"sigma must be finite and >= 0, got {self.sigma!r}")

    def log_values(self, L):
        return self.sigma * log_factorials(L)

    def log_value(self, ell):
        return self.sigma * math.lgamma(ell + 1)


# -- families ---------------------------------------------------------------


@dataclass(frozen=True)
class PODSpec:
    gamma: OrderProfile
    upsilon: WeightSequence

    def __post_init__(self):
        if not isinstance(self.gamma, OrderProfile):
            raise TypeError("gamma must be an OrderProfile")
        if not isinstance(self.upsilon, WeightSequence):
            raise TypeError("upsilon must be a WeightSequence")


@dataclass(frozen=True)
class SPODSpec:
    alpha: int
    gamma: OrderProfile
    upsilon_grid: tuple[WeightSequence, ...]

    def __post_init__(self):
        if int(self.alpha) != self.alpha or self.alpha < 1:
            raise ValueError(f"alpha must be a positive integer, got {self.alpha!r}")
        grid = tuple(self.upsilon_grid)
        if len(grid) != self.alpha:
            raise ValueError(f"upsilon_grid needs {self.alpha} sequences, got {len(grid)}")
        if not all(isinstance(s, WeightSequence) for s in grid):
            raise TypeError("upsilon_grid entries must be WeightSequence instances")
        object.__setattr__(self, "alpha", int(self.alpha))
        object.__setattr__(self, "upsilon_grid", grid)

    def as_pod(self) -> PODSpec:
        if self.alpha != 1:
            raise ValueError("only alpha = 1 SPOD families are POD families")
        return PODSpec(self.gamma, self.upsilon_grid[0])
