"""Growth of f(m) = sum_ell m^ell / (ell!)^theta and the (ell!)^sigma j^-rho rate brackets."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import BudgetExceeded, NotSummable
from .podsum import adaptive_sum, theorem1_bound
from .weights import FactorialPower, PODSpec, PowerLaw

CUTOFF_NATS = 60.0


@dataclass(frozen=True)
class ThetaSeries:
    theta: float

    def __post_init__(self):
        if not (self.theta > 0 and math.isfinite(self.theta)):
            raise ValueError(f"theta must be positive, got {self.theta!r}")


@dataclass(frozen=True)
class ThetaEval:
    log_value: float
    peak_index: int
    log_peak: float
    log_upper: float  # log((2 l* + 1 + 1/(1 - 2^-theta)) * peak); only meaningful for start = 0


def _peak_index(log_m: float, theta: float) -> int:
    """floor(m^(1/theta)), nudged so the term ratio test holds exactly."""
    p = math.floor(math.exp(log_m / theta))
    while p > 0 and log_m - theta * math.log(p) < 0:
        p -= 1
    while log_m - theta * math.log(p + 1) >= 0:
        p += 1
    return p


def _outward_sum(delta: float, theta: float, p: int, direction: int, stop: int) -> float:
    """fsum of exp(log term(p + k*direction) - log term(p)) for k >= 1.

    Uses log(m) - theta*log(p + i) = delta - theta*log1p(i/p), with
    delta = log(m) - theta*log(p), to avoid cancellation for large p.
    """
    parts = []
    acc = 0.0
    k0 = 1
    chunk = 256
    while True:
        if direction < 0:
            k1 = min(k0 + chunk, p - stop + 1)
            if k1 <= k0:
                break
            i = np.arange(k0 - 1, k1 - 1, dtype=float)
            # term(p-k) / term(p-k+1) = 1 / (m (p-k+1)^-theta)
            step = -(delta - theta * np.log1p(-i / p))
        else:
            k1 = k0 + chunk
            i = np.arange(k0, k1, dtype=float)
            step = (delta - theta * np.log1p(i / p)) if p > 0 else (delta - theta * np.log(i))
        rel = acc + np.cumsum(step)
        parts.append(math.fsum(np.exp(rel)))
        acc = float(rel[-1])
        if acc < -CUTOFF_NATS:
            break
        k0 = k1
        chunk *= 2
    return math.fsum(parts)


def theta_series_eval(ts: ThetaSeries, m: float, start: int = 0) -> ThetaEval:
    """log sum_{ell >= start} m^ell / (ell!)^theta.

    theta = 1 from ell = 0 is the exponential series and returns log f = m
    exactly; everything else goes through :func:`theta_series_sum`.
    """
    ev = theta_series_sum(ts, m, start)
    if ts.theta == 1.0 and start == 0:
        return replace(ev, log_value=float(m))
    return ev


def theta_series_sum(ts: ThetaSeries, m: float, start: int = 0) -> ThetaEval:
    """Outward summation from the peak term; terms 60 nats below the peak are dropped."""
    if not (m > 0 and math.isfinite(m)):
        raise ValueError(f"m must be a positive finite number, got {m!r}")
    theta = ts.theta
    log_m = math.log(m)
    p = max(_peak_index(log_m, theta), start)
    log_peak = p * log_m - theta * math.lgamma(p + 1)
    delta = log_m - theta * math.log(p) if p > 0 else log_m
    total = 1.0 + _outward_sum(delta, theta, p, +1, start)
    if p > start:
        total += _outward_sum(delta, theta, p, -1, start)
    # orders 0..2p are each at most the peak; beyond 2p the term ratio m/(l+1)^theta < 2^-theta
    upper = log_peak + math.log(2 * p + 1 + 1.0 / (1.0 - 2.0 ** (-theta)))
    return ThetaEval(log_peak + math.log(total), p, log_peak, upper)


def theta_rate(ts: ThetaSeries, m_grid) -> list[tuple[float, float]]:
    """(m, m^(-1/theta) log f(m)) for each grid point; tends to theta."""
    grid = [float(m) for m in m_grid]
    if not grid:
        raise ValueError("m_grid must be nonempty")
    return [(m, theta_series_eval(ts, m).log_value / m ** (1.0 / ts.theta)) for m in grid]


@dataclass(frozen=True)
class RateBracket:
    rho: float
    sigma: float
    c_upsilon: float
    c_rho: float
    lower_const: float
    upper_const: float

    @property
    def exponent(self) -> float:
        """1 / (rho - sigma), the power of m in log S."""
        return 1.0 / (self.rho - self.sigma)


def theorem5_bracket(rho: float, sigma: float, c_upsilon: float) -> RateBracket:
    """liminf/limsup constants of m^(-1/(rho-sigma)) log S for (|v|!)^sigma prod C j^-rho."""
    if not rho > 1:
        raise ValueError(f"rho must exceed 1, got {rho}")
    if sigma < 0:
        raise ValueError(f"sigma must be >= 0, got {sigma}")
    if not c_upsilon > 0:
        raise ValueError(f"C_Upsilon must be positive, got {c_upsilon}")
    if rho <= sigma:
        raise NotSummable(f"S(m) is finite for all m > 0 only if rho > sigma; got rho={rho:g}, sigma={sigma:g}")
    gap = rho - sigma
    c_rho = math.e / min(rho - 1.0, 1.0)
    return RateBracket(
        rho=rho,
        sigma=sigma,
        c_upsilon=c_upsilon,
        c_rho=c_rho,
        lower_const=gap * c_upsilon ** (1.0 / gap),
        upper_const=gap * (c_rho * c_upsilon) ** (1.0 / gap),
    )


@dataclass(frozen=True)
class RatePoint:
    m: float
    lower_series: float  # normalized log of sum (C m)^ell / (ell!)^(rho-sigma)
    exact_lo: float  # normalized log of the adaptive truncated sum
    exact_converged: bool
    theorem1: float  # normalized log of the certified upper bound (inf if uncertified)


def _power_family(spec: PODSpec) -> tuple[float, float, float]:
    if not (isinstance(spec.gamma, FactorialPower) and isinstance(spec.upsilon, PowerLaw)):
        raise ValueError("empirical_rate needs Gamma = (ell!)^sigma and Upsilon_j = C j^-rho")
    return spec.upsilon.rho, spec.gamma.sigma, spec.upsilon.c


def empirical_rate(
    spec: PODSpec, m_grid, rtol: float = 1e-3, d_cap: int = 1 << 14
) -> list[RatePoint]:
    """Three normalized curves per m: lower theta series, truncated sum, certified upper bound.

    When the adaptive sum hits ``d_cap`` the last truncated value is used; it
    is still a lower bound and the point is marked not converged.
    """
    rho, sigma, c = _power_family(spec)
    bracket = theorem5_bracket(rho, sigma, c)
    ts = ThetaSeries(rho - sigma)
    out = []
    for m in sorted(float(x) for x in m_grid):
        scale = m**bracket.exponent
        lower = theta_series_eval(ts, c * m).log_value
        try:
            res = adaptive_sum(spec, m, rtol=rtol, d_cap=d_cap)
            exact, conv = res.log_value, res.converged
        except BudgetExceeded as exc:
            exact, conv = exc.log_value, False
        upper = theorem1_bound(spec, m).log_value
        out.append(RatePoint(m, lower / scale, exact / scale, conv, upper / scale))
    return out


@dataclass(frozen=True)
class SubexpReport:
    points: list[tuple[float, float]]  # (m, (1/m) * log S upper value)
    decreasing: bool  # |(1/m) log S| nonincreasing along the grid
    last: float


def subexp_check(values) -> SubexpReport:
    """Trend of (1/m) log S(m) along an increasing grid.

    ``values`` holds ``(m, log_S)`` or ``(m, log_lo, log_hi)`` tuples; with an
    enclosure the upper end is used, since sub-exponential growth is a claim
    about upper bounds.
    """
    rows = [tuple(v) for v in values]
    if len(rows) < 3:
        raise ValueError("need at least 3 grid points")
    ms = [r[0] for r in rows]
    if any(b <= a for a, b in zip(ms, ms[1:])):
        raise ValueError("m grid must be strictly increasing")
    pts = [(r[0], r[-1] / r[0]) for r in rows]
    mags = [abs(v) for _, v in pts]
    decreasing = all(b <= a for a, b in zip(mags, mags[1:]))
    return SubexpReport(pts, decreasing, pts[-1][1])
