"""SPOD weights: gamma_v = sum_{nu in {1..alpha}^|v|} Gamma_|nu| prod_{j in v} Upsilon_{j, nu_j}.

The truncated sum groups (v, nu) pairs by (|v|, |nu|) = (ell, ell'). For each
ell the table T[ell][ell'] over coordinate prefixes is a running sum of
sum_k Upsilon_{j,k} T[ell-1][ell'-k], built one ell at a time down the
coordinates exactly as the POD elementary symmetric table is.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

import numpy as np

from ._logmath import NEG_INF, log_sum, safe_log
from .asymptotics import ThetaSeries, theta_series_eval
from .errors import BudgetExceeded, NotSummable
from .podsum import Summability, _check_m, _refine, _rel_change
from .symfunc import log_esp_row
from .weights import (
    BlockedPolyDecay,
    Explicit,
    FactorialPower,
    Interval,
    PolyDecay,
    PowerLaw,
    SPODSpec,
    WeightSequence,
    Zero,
)

RHO_TOL = 1e-12


@dataclass(frozen=True)
class SpodTable:
    """log T[ell][ell'] over all coordinates 1..d; -inf outside ell <= ell' <= alpha*ell."""

    d: int
    alpha: int
    values: np.ndarray  # shape (L + 1, alpha * L + 1)

    def entry(self, ell: int, ell_prime: int) -> float:
        return float(self.values[ell, ell_prime])


def _accumulate(x: np.ndarray) -> np.ndarray:
    out = np.empty(x.size + 1)
    out[0] = NEG_INF
    np.logaddexp.accumulate(x, out=out[1:])
    return out


def _spod_table(spec: SPODSpec, d: int, L: int) -> np.ndarray:
    a = spec.alpha
    log_ups = [s.log_terms(d) for s in spec.upsilon_grid]
    table = np.full((L + 1, a * L + 1), NEG_INF)
    table[0, 0] = 0.0
    prev = {0: np.zeros(d + 1)}
    for ell in range(1, L + 1):
        cur = {}
        for lp in range(ell, a * ell + 1):
            parts = [
                log_ups[k - 1] + prev[lp - k][:-1]
                for k in range(1, a + 1)
                if (lp - k) in prev
            ]
            x = parts[0]
            for p in parts[1:]:
                x = np.logaddexp(x, p)
            col = _accumulate(x)
            cur[lp] = col
            table[ell, lp] = col[-1]
        prev = cur
    return table


def spod_table(spec: SPODSpec, d: int, L: int) -> SpodTable:
    if L > d:
        raise ValueError(f"L={L} exceeds d={d}")
    return SpodTable(d, spec.alpha, _spod_table(spec, d, L))


def _spod_truncated(spec: SPODSpec, log_m: float, d: int, L: int) -> float:
    a = spec.alpha
    table = _spod_table(spec, d, L)
    log_gamma = spec.gamma.log_values(a * L)
    inner = np.array(
        [log_sum(log_gamma[ell : a * ell + 1] + table[ell, ell : a * ell + 1]) for ell in range(L + 1)]
    )
    return log_sum(inner + np.arange(L + 1) * log_m)


def spod_truncated_sum(spec: SPODSpec, m: float, d: int, L: int) -> float:
    """log(Gamma_0 + sum_{ell<=L} m^ell sum_{ell'} Gamma_ell' T[ell][ell']) over coordinates 1..d."""
    m = _check_m(m)
    if d < 1 or L < 1:
        raise ValueError(f"d and L must be positive, got d={d}, L={L}")
    if L > d:
        raise ValueError(f"L={L} exceeds d={d}")
    return _spod_truncated(spec, math.log(m), d, L)


# -- reduction to POD -------------------------------------------------------


def reduction_map(v, nu, alpha: int) -> tuple[int, ...]:
    """v' = {alpha (j-1) + k : j in v, 1 <= k <= nu_j}; ``nu`` is aligned with sorted(v)."""
    v = sorted(v)
    nu = list(nu)
    if len(v) != len(nu):
        raise ValueError("nu must have one entry per element of v")
    if len(set(v)) != len(v):
        raise ValueError("v must not repeat indices")
    out = []
    for j, n in zip(v, nu):
        if j < 1:
            raise ValueError(f"indices must be >= 1, got {j}")
        if not (1 <= n <= alpha):
            raise ValueError(f"nu_j must lie in 1..{alpha}, got {n}")
        out.extend(alpha * (j - 1) + k for k in range(1, n + 1))
    return tuple(out)


def _common_rho(spec: SPODSpec) -> tuple[float, float] | None:
    """(C_max, rho) when every nonzero grid row is C_k j^(-k rho)."""
    cs, rhos = [], []
    for k, s in enumerate(spec.upsilon_grid, start=1):
        if isinstance(s, Zero) or (isinstance(s, PowerLaw) and s.c == 0):
            continue
        if not isinstance(s, PowerLaw):
            return None
        cs.append(s.c ** (1.0 / k))
        rhos.append(s.rho / k)
    if not cs:
        return None
    if max(rhos) - min(rhos) > RHO_TOL * max(rhos):
        return None
    return max(cs), rhos[0]


def reduced_upsilon(spec: SPODSpec) -> WeightSequence:
    """Upsilon'_{j'} = max_k Upsilon_{j,k}^(1/k) for j = ceil(j' / alpha).

    Finitely supported grids give an explicit sequence of length alpha*d.
    Grids of the form C_k j^(-k rho) give C_max ceil(j'/alpha)^-rho.
    """
    a = spec.alpha
    grid = spec.upsilon_grid
    if all(s.support is not None for s in grid):
        d = max(s.support for s in grid)
        if d == 0:
            return Zero()
        roots = np.max([s.terms(d) ** (1.0 / k) for k, s in enumerate(grid, start=1)], axis=0)
        return Explicit(tuple(np.repeat(roots, a)))
    common = _common_rho(spec)
    if common is None:
        raise ValueError("reduced_upsilon supports finitely supported grids or C_k j^(-k rho) grids")
    c_max, rho = common
    if a == 1:
        return PolyDecay(c_max, rho) if rho > 1 else PowerLaw(c_max, rho)
    if not rho > 1:
        raise ValueError(f"reduced sequence is not summable (rho={rho:g})")
    return BlockedPolyDecay(c_max, rho, a)


def root_sum(spec: SPODSpec) -> Interval:
    """Enclosure of sum_j sum_k Upsilon_{j,k}^(1/k)."""
    lo = hi = 0.0
    for k, s in enumerate(spec.upsilon_grid, start=1):
        z = s.root(k).tail_sum(1)
        lo += z.lo
        hi += z.hi
    return Interval(lo, hi)


def per_term_domination(spec: SPODSpec, v, nu, m: float, reduced: WeightSequence | None = None):
    """(log lhs, log rhs) of |nu|! m^|v| prod Upsilon_{j,nu_j} <= |v'|! m^|v'| prod Upsilon'_{j'}."""
    if reduced is None:
        reduced = reduced_upsilon(spec)
    v = sorted(v)
    vp = reduction_map(v, nu, spec.alpha)
    log_m = math.log(m)
    lhs = math.lgamma(sum(nu) + 1) + len(v) * log_m
    for j, n in zip(v, nu):
        t = spec.upsilon_grid[n - 1].term(j)
        lhs += math.log(t) if t > 0 else NEG_INF
    rhs = math.lgamma(len(vp) + 1) + len(vp) * log_m
    for jp in vp:
        t = reduced.term(jp)
        rhs += math.log(t) if t > 0 else NEG_INF
    return lhs, rhs


def dominated(lhs: float, rhs: float, rel: float = 1e-12) -> bool:
    """lhs <= rhs in log domain up to rounding of the k-th root round trip."""
    if lhs == NEG_INF:
        return True
    return lhs <= rhs + rel * max(1.0, abs(rhs))


@dataclass(frozen=True)
class SpodSummability:
    holds: bool
    root_sum: Interval
    checked: int = 0
    violations: int = 0
    worst_excess: float = NEG_INF  # max of log lhs - log rhs over checked samples


def spod_summability(
    spec: SPODSpec,
    m: float = 1.0,
    n_samples: int = 1000,
    seed: int = 0,
    max_index: int = 20,
    max_size: int = 6,
) -> SpodSummability:
    """Evaluate the sufficient condition sum_j sum_k Upsilon_{j,k}^(1/k) < inf.

    When it holds and m >= 1, also checks the per-term domination by the
    reduced POD family on random (v, nu) pairs.
    """
    total = root_sum(spec)
    holds = math.isfinite(total.hi)
    if not holds or m < 1 or n_samples <= 0:
        return SpodSummability(holds, total)
    reduced = reduced_upsilon(spec)
    supports = [s.support for s in spec.upsilon_grid]
    D = max_index if any(s is None for s in supports) else max(max(supports), 1)
    rng = random.Random(seed)
    checked = violations = 0
    worst = NEG_INF
    for _ in range(n_samples):
        size = rng.randint(1, min(max_size, D))
        v = sorted(rng.sample(range(1, D + 1), size))
        nu = [rng.randint(1, spec.alpha) for _ in v]
        lhs, rhs = per_term_domination(spec, v, nu, m, reduced)
        checked += 1
        if lhs > NEG_INF:
            worst = max(worst, lhs - rhs)
        if not dominated(lhs, rhs):
            violations += 1
    return SpodSummability(True, total, checked, violations, worst)


def spod_check_summable(spec: SPODSpec) -> Summability:
    grid, gamma = spec.upsilon_grid, spec.gamma
    if all(s.support is not None for s in grid):
        return Summability(True, "finitely supported coordinate weights")
    if gamma.support is not None and all(s.summable for s in grid):
        return Summability(True, "finitely many orders and every Upsilon_{.,k} summable")
    common = _common_rho(spec)
    if isinstance(gamma, FactorialPower) and common is not None and common[1] > 1:
        rho, sigma = common[1], gamma.sigma
        if isinstance(grid[0], PowerLaw) and grid[0].c > 0:
            if rho > sigma:
                return Summability(True, f"rho={rho:g} > sigma={sigma:g}")
            return Summability(False, f"requires rho > sigma, got rho={rho:g} <= sigma={sigma:g}")
    if isinstance(gamma, FactorialPower) and gamma.sigma <= 1 and math.isfinite(root_sum(spec).hi):
        return Summability(True, "sum_j sum_k Upsilon_{j,k}^(1/k) finite and Gamma <= |nu|!")
    return Summability(None, "no implemented criterion covers this family")


@dataclass(frozen=True)
class SpodAdaptiveResult:
    log_value: float
    d: int
    L: int
    converged: bool
    exact: bool
    last_rel_change: float


def spod_adaptive_sum(
    spec: SPODSpec, m: float, rtol: float = 1e-6, d_cap: int = 1 << 12
) -> SpodAdaptiveResult:
    """Same refinement schedule as the POD adaptive sum."""
    m = _check_m(m)
    s = spod_check_summable(spec)
    if s.summable is not True:
        raise NotSummable(s.reason if s.summable is False else f"not certified: {s.reason}")
    log_m = math.log(m)
    sups = [q.support for q in spec.upsilon_grid]
    d_max = None if any(x is None for x in sups) else max(sups)
    L_max = spec.gamma.support
    d = 1 if d_max is None else min(1, d_max)
    L = d if L_max is None else min(d, L_max)
    value = _spod_truncated(spec, log_m, d, L)
    hits = 0
    while True:
        d2, L2 = _refine(d, L, d_max, L_max)
        if (d2, L2) == (d, L):
            return SpodAdaptiveResult(value, d, L, True, True, 0.0)
        if d2 > d_cap:
            raise BudgetExceeded(
                f"d would exceed cap {d_cap} before relative change < {rtol}", value, d, L
            )
        new = _spod_truncated(spec, log_m, d2, L2)
        rel = _rel_change(value, new)
        d, L, value = d2, L2, new
        hits = hits + 1 if rel < rtol else 0
        if hits >= 2:
            return SpodAdaptiveResult(value, d, L, True, False, rel)


# -- growth constants and bracket ------------------------------------------


@dataclass(frozen=True)
class SpodGrowthConstants:
    alpha: int
    rho: float
    sigma: float
    c_values: tuple[float, ...]
    c_max: float = field(init=False)
    c_prime_alpha_rho: float = field(init=False)
    c_alpha_rho: float = field(init=False)
    ell_star: int = field(init=False)

    def __post_init__(self):
        a = int(self.alpha)
        if a != self.alpha or a < 1:
            raise ValueError(f"alpha must be a positive integer, got {self.alpha!r}")
        cs = tuple(float(c) for c in self.c_values)
        if len(cs) != a or any(not c > 0 for c in cs):
            raise ValueError(f"need {a} positive C_Upsilon,k values, got {self.c_values!r}")
        if not self.rho > 1:
            raise ValueError(f"rho must exceed 1, got {self.rho}")
        if self.sigma < 0:
            raise ValueError(f"sigma must be >= 0, got {self.sigma}")
        if self.rho <= self.sigma:
            raise NotSummable(
                f"S(m) is finite for all m > 0 only if rho > sigma; got rho={self.rho:g}, sigma={self.sigma:g}"
            )
        object.__setattr__(self, "c_values", cs)
        c_max = max(c ** (1.0 / k) for k, c in enumerate(cs, start=1))
        cp = c_prime(a, self.rho)
        c_ar = math.e * a**self.rho * cp
        object.__setattr__(self, "c_max", c_max)
        object.__setattr__(self, "c_prime_alpha_rho", cp)
        object.__setattr__(self, "c_alpha_rho", c_ar)
        object.__setattr__(
            self, "ell_star", math.ceil((2 * c_ar * c_max) ** (1.0 / (self.rho - self.sigma)))
        )

    @property
    def gap(self) -> float:
        return self.rho - self.sigma

    @property
    def lower_const(self) -> float:
        return self.gap * self.c_values[0] ** (1.0 / self.gap)

    @property
    def upper_const(self) -> float:
        return self.gap * (self.c_alpha_rho * self.c_max) ** (1.0 / self.gap)

    def spec(self) -> SPODSpec:
        """The family (|nu|!)^sigma prod C_{nu_j} j^(-nu_j rho)."""
        grid = tuple(PolyDecay(c, k * self.rho) for k, c in enumerate(self.c_values, start=1))
        return SPODSpec(self.alpha, FactorialPower(self.sigma), grid)


def c_prime(alpha: int, rho: float) -> float:
    """A certified C' >= 1 with (alpha/J) sum_{j > floor(J/alpha)} j^-rho <= C' (J/alpha)^-rho.

    max(1, alpha * sup_J (J/alpha)^(rho-1) zeta(floor(J/alpha)+1)); the sup is
    evaluated for J <= 10 alpha. For larger J, floor(x) >= 0.9 x with
    x = J/alpha and the integral bound give (10/9)^(rho-1) / (rho-1).
    """
    J = np.arange(1, 10 * alpha + 1)
    x = J / alpha
    b = J // alpha + 1
    _, zhi = PolyDecay(1.0, rho).tail_sums(int(b.max()))
    sup = float(np.max(x ** (rho - 1.0) * zhi[b - 1]))
    beyond = (10.0 / 9.0) ** (rho - 1.0) / (rho - 1.0)
    return max(1.0, alpha * max(sup, beyond))


@dataclass(frozen=True)
class GrowthPoint:
    m: float
    log_lower: float
    log_upper: float
    lower: float  # m^(-1/(rho-sigma)) * log_lower
    upper: float
    measured: float | None = None  # normalized log of the truncated SPOD sum


def growth_upper_log(constants: SpodGrowthConstants, m: float) -> float:
    """log of S(m, l*) + 2e sum_{ell > l*} (C_{a,r} C_max m)^ell / (ell!)^(rho-sigma)."""
    ts = ThetaSeries(constants.gap)
    K = constants.c_alpha_rho * constants.c_max
    ls = constants.ell_star
    log_m = math.log(m)
    head = [0.0]
    for ell in range(1, ls + 1):
        head.append(1.0 + ell * log_m + theta_series_eval(ts, K, start=ell).log_value)
    tail = math.log(2 * math.e) + theta_series_eval(ts, K * m, start=ls + 1).log_value
    return log_sum(head + [tail])


def spod_growth_bracket(
    constants: SpodGrowthConstants,
    m_grid,
    d: int | None = None,
    L: int | None = None,
) -> list[GrowthPoint]:
    """Lower (embedded k=1 POD) and upper curves, optionally with a measured truncated sum."""
    ts = ThetaSeries(constants.gap)
    spec = constants.spec() if d is not None else None
    out = []
    for m in sorted(float(x) for x in m_grid):
        _check_m(m)
        scale = m ** (1.0 / constants.gap)
        lo = theta_series_eval(ts, constants.c_values[0] * m).log_value
        hi = growth_upper_log(constants, m)
        measured = None
        if spec is not None:
            measured = spod_truncated_sum(spec, m, d, min(L or d, d)) / scale
        out.append(GrowthPoint(m, lo, hi, lo / scale, hi / scale, measured))
    return out


# -- divergence probe -------------------------------------------------------


@dataclass(frozen=True)
class ProbeRow:
    m: float
    L: int
    log_sum: float  # log sum_{ell <= L} (k ell)! m^ell e_ell
    log_device: float  # same with (ell!)^k in place of (k ell)!


def factorial_gap(k: int, ell: int) -> float:
    """log((k ell)!) - k log(ell!), nonnegative."""
    return math.lgamma(k * ell + 1) - k * math.lgamma(ell + 1)


def divergence_probe(
    k: int, seq: WeightSequence, m_grid, L_values=(5, 10, 20, 40), d: int = 200
) -> list[ProbeRow]:
    """Growth table of truncated sum_v (k|v|)! m^|v| prod Upsilon_{j,k}.

    Reports numbers only; whether the full series diverges is not decided.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    Ls = sorted(int(x) for x in L_values)
    L_top = Ls[-1]
    if L_top > d:
        raise ValueError(f"largest L={L_top} exceeds d={d}")
    log_e = log_esp_row(safe_log(seq.terms(d)), L_top)
    ell = np.arange(L_top + 1)
    lg = np.array([math.lgamma(k * i + 1) for i in ell])
    lg_dev = k * np.array([math.lgamma(i + 1) for i in ell])
    rows = []
    for m in sorted(float(x) for x in m_grid):
        log_m = math.log(_check_m(m))
        a = lg + log_e + ell * log_m
        b = lg_dev + log_e + ell * log_m
        for L in Ls:
            rows.append(ProbeRow(m, L, log_sum(a[: L + 1]), log_sum(b[: L + 1])))
    return rows
