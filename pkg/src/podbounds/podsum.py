"""Weighted sums S(m) = sum_v Gamma_|v| m^|v| prod_{j in v} Upsilon_j for POD weights.

Everything is returned in log domain. A truncated sum (coordinates 1..d,
orders up to L) drops only nonnegative terms, so it is always a certified
lower bound; upper certification comes from :func:`theorem1_bound`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from ._logmath import NEG_INF, log_sum
from .errors import BudgetExceeded, NotSummable
from .symfunc import log_esp_row
from .weights import (
    DEFAULT_RTOL,
    FactorialPower,
    Interval,
    OrderProfile,
    PODSpec,
    PowerLaw,
    WeightSequence,
)

DEFAULT_D_CAP = 10**6


def _check_m(m: float) -> float:
    m = float(m)
    if not (m > 0 and math.isfinite(m)):
        raise ValueError(f"m must be a positive finite number, got {m!r}")
    return m


def order_terms(log_gamma: np.ndarray, log_e: np.ndarray, log_m: float) -> np.ndarray:
    """log(Gamma_ell e_ell m^ell) for ell = 0..len(log_e) - 1."""
    ell = np.arange(log_e.size)
    return (log_gamma[: log_e.size] + log_e) + ell * log_m


def _truncated(spec: PODSpec, log_m: float, d: int, L: int) -> float:
    log_e = log_esp_row(spec.upsilon.log_terms(d), L)
    return log_sum(order_terms(spec.gamma.log_values(L), log_e, log_m))


def truncated_sum(spec: PODSpec, m: float, d: int, L: int) -> float:
    """log(Gamma_0 + sum_{ell<=L} Gamma_ell m^ell e_ell(Upsilon_1..Upsilon_d))."""
    m = _check_m(m)
    if d < 1 or L < 1:
        raise ValueError(f"d and L must be positive, got d={d}, L={L}")
    if L > d:
        raise ValueError(f"L={L} exceeds d={d}")
    return _truncated(spec, math.log(m), d, L)


# -- summability ------------------------------------------------------------


@dataclass(frozen=True)
class Summability:
    summable: bool | None  # None: not decided by the implemented criteria
    reason: str


def check_summable(spec: PODSpec) -> Summability:
    """Decide finiteness of S(m) for all m > 0 where a criterion applies."""
    gamma, ups = spec.gamma, spec.upsilon
    if ups.support is not None:
        return Summability(True, "finitely supported coordinate weights")
    if not ups.summable:
        if gamma.support is not None and all(
            v == 0 for v in np.exp(gamma.log_values(gamma.support))[1:]
        ):
            return Summability(True, "only the empty set carries weight")
        return Summability(False, "sum of Upsilon_j diverges, so prod (1 + m Upsilon_j) diverges")
    if gamma.support is not None:
        return Summability(True, "finitely many orders and sum of Upsilon_j finite")
    if isinstance(gamma, FactorialPower):
        if gamma.sigma <= 1:
            return Summability(True, "Gamma_ell <= ell! and sum of Upsilon_j finite")
        if isinstance(ups, PowerLaw):
            if ups.rho > gamma.sigma:
                return Summability(True, f"rho={ups.rho:g} > sigma={gamma.sigma:g}")
            return Summability(
                False, f"requires rho > sigma, got rho={ups.rho:g} <= sigma={gamma.sigma:g}"
            )
    return Summability(None, "no implemented criterion covers this family")


def require_summable(spec: PODSpec) -> Summability:
    s = check_summable(spec)
    if s.summable is not True:
        raise NotSummable(s.reason if s.summable is False else f"not certified: {s.reason}")
    return s


def _is_factorial(gamma: OrderProfile) -> bool:
    return isinstance(gamma, FactorialPower) and gamma.sigma == 1


@dataclass(frozen=True)
class ClassifierResult:
    summable: bool
    root_test: dict[int, float] = field(default_factory=dict)
    witness: dict | None = None


def root_test_sequence(seq: WeightSequence, orders, rtol: float = DEFAULT_RTOL) -> dict[int, float]:
    """r_ell = (prod_{J<=ell} max(J Upsilon_J, zeta_{J+1}))^(1/ell) at each requested ell."""
    orders = sorted(set(int(o) for o in orders))
    if not orders:
        return {}
    n = orders[-1]
    ups = seq.terms(n)
    _, zeta_hi = seq.tail_sums(n + 1, rtol)
    J = np.arange(1, n + 1)
    with np.errstate(divide="ignore"):
        logs = np.log(np.maximum(J * ups, zeta_hi[1:]))
    csum = np.cumsum(logs)
    return {ell: math.exp(csum[ell - 1] / ell) if math.isfinite(csum[ell - 1]) else 0.0 for ell in orders}


def divergence_witness(
    seq: WeightSequence, m: float, threshold: float, n_max: int = 1 << 24
) -> dict:
    """Smallest power-of-two n with prod_{j<=n} (1 + m Upsilon_j) >= threshold.

    Returns ``{"n": n, "log_product": ...}``; ``n`` is None when n_max is
    reached first.
    """
    m = _check_m(m)
    target = math.log(threshold)
    total, j0, n = 0.0, 1, 1
    while n <= n_max:
        total += math.fsum(np.log1p(m * seq.terms(n)[j0 - 1 :]))
        if total >= target:
            return {"n": n, "log_product": total, "threshold": threshold}
        j0, n = n + 1, 2 * n
    return {"n": None, "log_product": total, "threshold": threshold}


def summability_classifier(
    spec: PODSpec,
    orders=(10, 100, 1000),
    m: float = 1.0,
    threshold: float = 1e6,
) -> ClassifierResult:
    """Summability of the ell! family: finite for all m > 0 iff sum Upsilon_j < inf."""
    if not _is_factorial(spec.gamma):
        raise ValueError("classifier applies to Gamma_ell = ell!; use theorem5_bracket for (ell!)^sigma")
    seq = spec.upsilon
    if seq.summable:
        return ClassifierResult(True, root_test_sequence(seq, orders))
    return ClassifierResult(False, witness=divergence_witness(seq, m, threshold))


# -- adaptive evaluation ----------------------------------------------------


@dataclass(frozen=True)
class AdaptiveResult:
    log_value: float
    d: int
    L: int
    converged: bool
    exact: bool  # the truncation already covers every nonzero term
    last_rel_change: float


def _rel_change(old: float, new: float) -> float:
    if old == new:
        return 0.0
    return -math.expm1(old - new)


def _refine(d, L, d_max, L_max):
    d2 = d * 2 if d_max is None else min(d * 2, d_max)
    L2 = min(d2, L + 8)
    if L_max is not None:
        L2 = min(L2, L_max)
    return d2, L2


def adaptive_sum(
    spec: PODSpec,
    m: float,
    rtol: float = 1e-6,
    d_cap: int = DEFAULT_D_CAP,
) -> AdaptiveResult:
    """Refine (d, L) until the relative change is below rtol twice in a row.

    d doubles and L grows by 8 (never beyond d) per step. Raises
    :class:`BudgetExceeded` carrying the last lower bound when d would pass
    ``d_cap``.
    """
    m = _check_m(m)
    require_summable(spec)
    log_m = math.log(m)
    d_max = spec.upsilon.support
    L_max = spec.gamma.support
    d = 1 if d_max is None else min(1, d_max)
    L = min(d, 1) if L_max is None else min(d, 1, L_max)
    value = _truncated(spec, log_m, d, L)
    hits, rel = 0, math.inf
    while True:
        d2, L2 = _refine(d, L, d_max, L_max)
        if (d2, L2) == (d, L):
            return AdaptiveResult(value, d, L, True, True, 0.0)
        if d2 > d_cap:
            raise BudgetExceeded(
                f"d would exceed cap {d_cap} before relative change < {rtol}", value, d, L
            )
        new = _truncated(spec, log_m, d2, L2)
        rel = _rel_change(value, new)
        d, L, value = d2, L2, new
        hits = hits + 1 if rel < rtol else 0
        if hits >= 2:
            return AdaptiveResult(value, d, L, True, False, rel)


# -- closed form and bounds -------------------------------------------------


def product_weight_bracket(seq: WeightSequence, m: float, rtol: float = 1e-13) -> Interval:
    """Enclosure of sum_j log(1 + m Upsilon_j), the log of the product-weight sum."""
    m = _check_m(m)
    if seq.support is not None:
        v = math.fsum(np.log1p(m * seq.terms(seq.support)))
        return Interval(v, v)
    if not seq.summable:
        return Interval(math.inf, math.inf)
    N = 64
    while True:
        partial = math.fsum(np.log1p(m * seq.terms(N - 1)))
        z = seq.tail_sum(N)
        # log(1+x) in [x - x^2/2, x]; sum_{j>=N} Upsilon_j^2 <= Upsilon_N zeta_N
        lo = partial + m * z.lo - 0.5 * m * m * seq.term(N) * z.hi
        hi = partial + m * z.hi
        if hi - lo <= rtol * max(abs(hi), 1e-300) or N >= 1 << 26:
            return Interval(lo, hi)
        N *= 2


def product_weight_sum(seq: WeightSequence, m: float) -> float:
    """log prod_j (1 + m Upsilon_j)."""
    return product_weight_bracket(seq, m).mid


class NaiveStatus(str, enum.Enum):
    FINITE = "finite"
    DIVERGED = "diverged"
    INDETERMINATE = "indeterminate"


@dataclass(frozen=True)
class NaiveBound:
    status: NaiveStatus
    log_value: float | None = None


def naive_bound(spec: PODSpec, m: float) -> NaiveBound:
    """Geometric-series bound sum_ell (m zeta_1)^ell for Gamma_ell = ell!."""
    m = _check_m(m)
    if not _is_factorial(spec.gamma):
        raise ValueError("naive bound is stated for Gamma_ell = ell! only")
    z = spec.upsilon.tail_sum(1)
    if m * z.hi < 1:
        return NaiveBound(NaiveStatus.FINITE, -math.log1p(-m * z.hi))
    if m * z.lo >= 1:
        return NaiveBound(NaiveStatus.DIVERGED)
    return NaiveBound(NaiveStatus.INDETERMINATE)


@dataclass(frozen=True)
class Theorem1Bound:
    log_partial: float  # Gamma_0 plus orders 1..L
    log_value: float  # partial plus certified remainder, +inf if uncertified
    L: int
    certified: bool
    certificate: str

    @property
    def unbounded_at_L(self) -> bool:
        return not self.certified


def _ratio_bound(spec: PODSpec, m: float, ell: int) -> float | None:
    """Upper bound on term(ell+1)/term(ell) valid for every later ell, if known.

    For Gamma = (ell!)^sigma and Upsilon_j = c j^-rho, max(Upsilon_J, zeta_{J+1}/J)
    <= c J^-rho / min(rho-1, 1), giving e m c (ell+1)^(sigma-rho) / min(rho-1, 1),
    which is nonincreasing in ell when rho >= sigma.
    """
    gamma, ups = spec.gamma, spec.upsilon
    if not (isinstance(gamma, FactorialPower) and isinstance(ups, PowerLaw) and ups.summable):
        return None
    if ups.rho < gamma.sigma:
        return None
    return math.e * m * ups.c * (ell + 1) ** (gamma.sigma - ups.rho) / min(ups.rho - 1, 1)


def _vanishing_order(spec: PODSpec) -> int | None:
    """Order beyond which every bound term is zero, if any."""
    cands = [s for s in (spec.upsilon.support, spec.gamma.support) if s is not None]
    return min(cands) if cands else None


AUTO_ORDER_CAP = 2048


def _log_theta_envelope(log_x: float, theta: float) -> float:
    """Closed-form upper bound on log sum_ell x^ell / (ell!)^theta.

    With p = floor(x^(1/theta)) the sum is at most (2p + 1 + 1/(1 - 2^-theta))
    times the peak term, and the peak is at most e^(theta (p+1)) because
    n^n / n! <= e^n.
    """
    if log_x / theta > 700:
        return math.inf
    s = math.exp(log_x / theta)
    return theta * (s + 1) + math.log(2 * s + 1 + 1 / (1 - 2.0 ** (-theta)))


def _power_envelope(spec: PODSpec, m: float) -> float | None:
    """log of e sum_ell (e m K)^ell / (ell!)^(rho - sigma), K = c / min(rho - 1, 1).

    Each factor max(Upsilon_J, zeta_{J+1}/J) is at most K J^-rho, so this
    dominates the whole series; None outside the (ell!)^sigma, c j^-rho family.
    """
    gamma, ups = spec.gamma, spec.upsilon
    if not (isinstance(gamma, FactorialPower) and isinstance(ups, PowerLaw) and ups.summable):
        return None
    if ups.rho <= gamma.sigma or ups.c == 0:
        return None
    K = ups.c / min(ups.rho - 1, 1)
    return 1.0 + _log_theta_envelope(1.0 + math.log(m * K), ups.rho - gamma.sigma)


def default_theorem1_order(spec: PODSpec, m: float) -> int:
    """Smallest L at which the tail certificate is expected to apply."""
    van = _vanishing_order(spec)
    if van is not None:
        return max(van, 1)
    gamma, ups = spec.gamma, spec.upsilon
    if isinstance(gamma, FactorialPower) and isinstance(ups, PowerLaw) and ups.rho > gamma.sigma:
        log_x = math.log(2 * math.e * m * ups.c / min(ups.rho - 1, 1)) / (ups.rho - gamma.sigma)
        return max(1, math.ceil(math.exp(min(log_x, 60.0))))
    return 64


def theorem1_bound(
    spec: PODSpec, m: float, L: int | None = None, rtol: float = DEFAULT_RTOL
) -> Theorem1Bound:
    """log(Gamma_0 + sum_ell e^(ell+1) Gamma_ell m^ell prod_J max(Upsilon_J, zeta_{J+1}/J))."""
    m = _check_m(m)
    auto = L is None
    if auto:
        L = min(default_theorem1_order(spec, m), AUTO_ORDER_CAP)
    if L < 1:
        raise ValueError(f"L must be positive, got {L}")
    ups = spec.upsilon.terms(L)
    _, zeta_hi = spec.upsilon.tail_sums(L + 1, rtol)
    J = np.arange(1, L + 1)
    with np.errstate(divide="ignore"):
        log_max = np.log(np.maximum(ups, zeta_hi[1:] / J))
    log_gamma = spec.gamma.log_values(L)
    ell = np.arange(1, L + 1)
    terms = log_gamma[1:] + (ell + 1) + ell * math.log(m) + np.cumsum(log_max)
    terms = np.where(np.isnan(terms), NEG_INF, terms)
    partial = log_sum(np.concatenate(([log_gamma[0]], terms)))
    if not math.isfinite(partial) and partial > 0:
        return Theorem1Bound(partial, math.inf, L, False, "tail sums diverge")

    van = _vanishing_order(spec)
    if van is not None and van <= L:
        return Theorem1Bound(partial, partial, L, True, f"terms vanish beyond order {van}")
    q = _ratio_bound(spec, m, L)
    if q is not None and q <= 0.5:
        # later terms shrink by at least 1/2 each: remainder <= last term
        value = log_sum([partial, terms[-1]])
        return Theorem1Bound(partial, value, L, True, f"term ratio <= {q:.3g} from order {L}")
    env = _power_envelope(spec, m) if auto else None
    if env is not None and math.isfinite(env):
        return Theorem1Bound(partial, max(env, partial), L, True, "theta-series envelope")
    return Theorem1Bound(partial, math.inf, L, False, "unbounded-at-L")


# -- combined report --------------------------------------------------------


@dataclass(frozen=True)
class BoundReport:
    m: float
    exact_lo: float
    theorem1: Theorem1Bound
    naive: NaiveBound | None
    d: int
    L: int
    rel_change: float
    classifier: Summability


def bound_report(spec: PODSpec, m: float, d: int, L: int, L_bound: int | None = None) -> BoundReport:
    m = _check_m(m)
    L = min(L, d)
    exact = truncated_sum(spec, m, d, L)
    half = max(d // 2, 1)
    coarser = truncated_sum(spec, m, half, min(L, half))
    L_bound = max(L, L_bound if L_bound is not None else default_theorem1_order(spec, m))
    t1 = theorem1_bound(spec, m, L_bound)
    naive = naive_bound(spec, m) if _is_factorial(spec.gamma) else None
    return BoundReport(
        m=m,
        exact_lo=exact,
        theorem1=t1,
        naive=naive,
        d=d,
        L=L,
        rel_change=_rel_change(coarser, exact),
        classifier=check_summable(spec),
    )


__all__ = [
    "AdaptiveResult",
    "BoundReport",
    "ClassifierResult",
    "NaiveBound",
    "NaiveStatus",
    "Summability",
    "Theorem1Bound",
    "adaptive_sum",
    "bound_report",
    "check_summable",
    "divergence_witness",
    "naive_bound",
    "product_weight_bracket",
    "product_weight_sum",
    "require_summable",
    "root_test_sequence",
    "summability_classifier",
    "theorem1_bound",
    "truncated_sum",
]
