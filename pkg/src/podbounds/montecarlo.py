"""Monte Carlo check of the distinctness identity behind the symmetric-sum bound.

Draw X_1..X_ell i.i.d. with P(j) = Upsilon_j / zeta_1. The probability that
all draws differ is ell! e_ell / zeta_1^ell.

Sampling is by inverse CDF on the cumulative weight table. Random streams use
numpy's Philox counter-based generator; batch b draws from
``SeedSequence(seed, spawn_key=(b,))``, so the estimate depends only on
(seed, n_samples, batch_size) and not on how batches are spread over workers.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ._logmath import NEG_INF, safe_log
from .errors import ZeroTail
from .symfunc import log_esp_row
from .weights import WeightSequence

RNG_ALGORITHM = "Philox4x64-10 via numpy.random.SeedSequence(seed, spawn_key=(batch,))"
BATCH_SIZE = 1 << 15


@dataclass(frozen=True)
class McConfig:
    n_samples: int
    seed: int
    ell: int
    seq: WeightSequence

    def __post_init__(self):
        if self.n_samples < 1:
            raise ValueError(f"n_samples must be positive, got {self.n_samples}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.ell < 1:
            raise ValueError(f"ell must be >= 1, got {self.ell}")
        if self.seq.support is None:
            raise ValueError("Monte Carlo sampling needs a finitely supported sequence")
        if not self.seq.terms(self.seq.support).sum() > 0:
            raise ValueError("sampling distribution needs zeta_1 > 0")


def _weights(seq: WeightSequence) -> np.ndarray:
    return seq.terms(seq.support)


def _batch_count(cum: np.ndarray, ell: int, n: int, seed: int, batch: int) -> int:
    gen = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(batch,))))
    u = gen.random((n, ell)) * cum[-1]
    # atom i is hit iff cum[i-1] <= u < cum[i]; zero-mass atoms have empty intervals
    idx = np.searchsorted(cum, u, side="right")
    idx = np.minimum(idx, cum.size - 1)
    if ell == 1:
        return n
    s = np.sort(idx, axis=1)
    return int(np.count_nonzero(np.all(s[:, 1:] != s[:, :-1], axis=1)))


def distinctness_estimate(cfg: McConfig, workers: int = 1) -> tuple[float, float]:
    """Fraction of all-distinct draws and its binomial standard error."""
    cum = np.cumsum(_weights(cfg.seq))
    sizes = [BATCH_SIZE] * (cfg.n_samples // BATCH_SIZE)
    if cfg.n_samples % BATCH_SIZE:
        sizes.append(cfg.n_samples % BATCH_SIZE)
    jobs = [(cum, cfg.ell, n, cfg.seed, b) for b, n in enumerate(sizes)]
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            counts = list(pool.map(lambda a: _batch_count(*a), jobs))
    else:
        counts = [_batch_count(*a) for a in jobs]
    p = sum(counts) / cfg.n_samples
    return p, math.sqrt(p * (1 - p) / cfg.n_samples)


def distinctness_exact(seq: WeightSequence, ell: int) -> float:
    """ell! e_ell(Upsilon) / zeta_1^ell."""
    if seq.support is None:
        raise ValueError("exact distinctness needs a finitely supported sequence")
    w = _weights(seq)
    n_pos = int(np.count_nonzero(w))
    if ell > n_pos:
        return 0.0
    zeta1 = math.fsum(w)
    log_e = log_esp_row(safe_log(w), ell)[ell]
    p = math.exp(math.lgamma(ell + 1) + log_e - ell * math.log(zeta1))
    return min(p, 1.0)


@dataclass(frozen=True)
class ChainReport:
    exact: float
    product_bound: float
    holds: bool
    identity_lhs: float  # log zeta_1^ell prod (1 - Upsilon_J/zeta_J)^(ell-J)
    identity_rhs: float  # log prod zeta_J
    identity_residual: float  # relative difference of the two sides


def chain_bound_check(seq: WeightSequence, ell: int, rel: float = 1e-12) -> ChainReport:
    """Compare the exact distinctness probability with the conditional-binomial product.

    prod_J (1 + (ell-J) Upsilon_J/zeta_J) (1 - Upsilon_J/zeta_J)^(ell-J), J = 1..ell.
    """
    if seq.support is None:
        raise ValueError("chain check needs a finitely supported sequence")
    if ell < 1:
        raise ValueError(f"ell must be >= 1, got {ell}")
    lo, _ = seq.tail_sums(max(ell, seq.support))
    zeta = lo[:ell]
    ups = seq.terms(ell)
    bad = np.nonzero(zeta <= 0)[0]
    if bad.size:
        raise ZeroTail(f"zeta_{int(bad[0]) + 1} = 0; the chain needs zeta_J > 0 for J <= {ell}")
    J = np.arange(1, ell + 1)
    q = ups / zeta
    pow_ = ell - J
    with np.errstate(divide="ignore", invalid="ignore"):
        log_keep = np.log1p(-q)
        # (1-q)^0 = 1 even when q = 1
        log_pow = np.where(pow_ == 0, 0.0, pow_ * log_keep)
    log_bound = math.fsum(np.log1p(pow_ * q) + log_pow)
    exact = distinctness_exact(seq, ell)
    bound = math.exp(log_bound)
    lhs = ell * math.log(zeta[0]) + math.fsum(log_pow)
    rhs = math.fsum(np.log(zeta))
    if lhs == rhs:
        resid = 0.0
    elif lhs == NEG_INF or rhs == NEG_INF:
        resid = math.inf
    else:
        resid = abs(math.expm1(lhs - rhs))
    holds = exact <= bound * (1 + rel)
    return ChainReport(exact, bound, holds, lhs, rhs, resid)
