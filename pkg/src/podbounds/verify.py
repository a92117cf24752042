"""Randomized verification suites run by ``podbounds verify``.

Each suite returns a list of :class:`Check` rows (observed value against the
required tolerance). All randomness flows from the suite seed, so a report is
a pure function of (suite, seed, n, samples, spec).
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass

import numpy as np

from . import oracles
from ._logmath import NEG_INF, safe_log
from .errors import ZeroTail
from .montecarlo import McConfig, chain_bound_check, distinctness_estimate, distinctness_exact
from .spod import dominated, per_term_domination, reduced_upsilon, reduction_map, spod_truncated_sum
from .symfunc import lemma2_bound_coarse, lemma2_bound_fine, log_esp_row, log_stirling_factor
from .weights import Explicit, ExplicitOrder, PODSpec, PolyDecay, SPODSpec, WeightSequence

SUITES = ("lemma2", "spod-reduction", "mc")
LOG_SLACK = 1e-12


@dataclass(frozen=True)
class Check:
    name: str
    observed: float
    required: str
    passed: bool

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name}: observed={self.observed!r} required {self.required}"


def log_le(a: float, b: float) -> bool:
    """a <= b in log domain, allowing relative rounding slack."""
    if a == NEG_INF or b == math.inf:
        return True
    if b == NEG_INF:
        return False
    return a <= b + LOG_SLACK * max(1.0, abs(b))


def random_values(rng: random.Random, d: int) -> list[float]:
    """Nonnegative test weights: mixed scales, some exact zeros, last entry positive."""
    style = rng.randrange(3)
    out = []
    for j in range(1, d + 1):
        if style == 0:
            x = rng.random()
        elif style == 1:
            x = math.exp(rng.gauss(-1.0, 1.5))
        else:
            x = rng.random() * j ** (-rng.uniform(1.1, 3.0))
        if j < d and rng.random() < 0.15:
            x = 0.0
        out.append(x)
    return out


def _prefix(seq: WeightSequence, cap: int = 30) -> Explicit:
    n = cap if seq.support is None else min(seq.support, cap)
    return Explicit(tuple(seq.terms(n)))


def lemma2_suite(seed: int, n: int, seqs: list[WeightSequence] | None = None) -> list[Check]:
    rng = random.Random(seed)
    if seqs is None:
        cases = []
        for _ in range(n):
            d = rng.randint(1, 30)
            cases.append((Explicit(random_values(rng, d)), rng.randint(1, d)))
    else:
        cases = []
        for s in seqs:
            p = _prefix(s)
            cases += [(s, ell) for ell in range(1, max(p.support, 1) + 1)]
    chain_bad = 0
    dom_bad = 0
    worst_identity = 0.0
    skipped = 0
    for seq, ell in cases:
        pre = _prefix(seq, max(30, ell))
        exact = log_esp_row(safe_log(pre.terms(max(pre.support, ell))), ell)[ell]
        fine = lemma2_bound_fine(seq, ell)
        coarse = lemma2_bound_coarse(seq, ell)
        if not (log_le(exact, fine) and log_le(fine, coarse)):
            chain_bad += 1
        if seq.support is None:
            continue
        try:
            rep = chain_bound_check(seq, ell)
        except ZeroTail:
            skipped += 1
            continue
        worst_identity = max(worst_identity, rep.identity_residual)
        if not rep.holds:
            dom_bad += 1
    stirling = max(log_stirling_factor(ell) - (ell + 1) for ell in range(1, 201))

    oracle_err = 0.0
    n_oracle = min(n, 200) if seqs is None else 0
    for _ in range(n_oracle):
        d = rng.randint(1, 12)
        vals = random_values(rng, d)
        row = log_esp_row(safe_log(vals), d)
        for ell in range(d + 1):
            ref = oracles.esp(vals, ell)
            got = math.exp(row[ell])
            if ref > 0:
                oracle_err = max(oracle_err, abs(got - ref) / ref)
            elif got != 0:
                oracle_err = math.inf
    return [
        Check("lemma2.chain_violations", chain_bad, f"== 0 over {len(cases)} instances", chain_bad == 0),
        Check("lemma2.product_bound_violations", dom_bad, f"== 0 ({skipped} zero-tail skips)", dom_bad == 0),
        Check("lemma2.identity_residual", worst_identity, "<= 1e-10", worst_identity <= 1e-10),
        Check("lemma2.stirling_excess", stirling, "<= 0 for ell <= 200", stirling <= 0),
        Check("symfunc.oracle_rel_err", oracle_err, f"<= 1e-10 over {n_oracle} instances", oracle_err <= 1e-10),
    ]


def spod_reduction_suite(seed: int, n: int, spec: SPODSpec | None = None) -> list[Check]:
    rng = random.Random(seed)
    collisions = 0
    card_bad = 0
    pairs = 0
    for alpha in (1, 2, 3):
        seen = set()
        for r in range(6):
            for v in itertools.combinations(range(1, 6), r):
                for nu in itertools.product(range(1, alpha + 1), repeat=r):
                    vp = reduction_map(v, nu, alpha)
                    pairs += 1
                    if len(vp) != sum(nu):
                        card_bad += 1
                    if vp in seen:
                        collisions += 1
                    seen.add(vp)

    dom_bad = 0
    for _ in range(n):
        if spec is None:
            alpha = rng.randint(1, 3)
            d = rng.randint(1, 8)
            grid = tuple(Explicit(random_values(rng, d)) for _ in range(alpha))
            s = SPODSpec(alpha, ExplicitOrder((1.0,)), grid)
        else:
            s, d = spec, 8
        reduced = reduced_upsilon(s)
        size = rng.randint(1, d)
        v = sorted(rng.sample(range(1, d + 1), size))
        nu = [rng.randint(1, s.alpha) for _ in v]
        lhs, rhs = per_term_domination(s, v, nu, rng.uniform(1.0, 10.0), reduced)
        if not dominated(lhs, rhs):
            dom_bad += 1

    agg_bad = 0
    agg_cases = 0
    dp_err = 0.0
    if spec is None:
        for _ in range(10):
            alpha = rng.randint(1, 3)
            d = rng.randint(1, 4)
            rows = [random_values(rng, d) for _ in range(alpha)]
            s = SPODSpec(alpha, ExplicitOrder((1.0,)), tuple(Explicit(r) for r in rows))
            red = list(reduced_upsilon(s).terms(alpha * d))
            for ell in range(1, d + 1):
                for lp in range(ell, alpha * ell + 1):
                    agg_cases += 1
                    lhs = oracles.spod_class_sum(rows, ell, lp)
                    rhs = oracles.esp(red, lp)
                    if lhs > rhs * (1 + 1e-12):
                        agg_bad += 1
            g = [1.0 / math.factorial(i) for i in range(alpha * d + 1)]
            s2 = SPODSpec(alpha, ExplicitOrder(tuple(g)), s.upsilon_grid)
            m = rng.uniform(0.5, 3.0)
            ref = oracles.spod_sum(lambda k: g[k], rows, m)
            got = math.exp(spod_truncated_sum(s2, m, d, d))
            dp_err = max(dp_err, abs(got - ref) / ref)
    return [
        Check("spod.reduction_collisions", collisions, f"== 0 over {pairs} pairs", collisions == 0),
        Check("spod.reduction_cardinality", card_bad, "== 0", card_bad == 0),
        Check("spod.per_term_violations", dom_bad, f"== 0 over {n} samples, m in [1, 10]", dom_bad == 0),
        Check("spod.aggregate_violations", agg_bad, f"== 0 over {agg_cases} classes", agg_bad == 0),
        Check("spod.dp_rel_err", dp_err, "<= 1e-10", dp_err <= 1e-10),
    ]


def _run_seed(seed: int, r: int) -> int:
    return int(np.random.SeedSequence([seed, r]).generate_state(1, np.uint64)[0])


def mc_suite(
    seed: int, samples: int = 20000, runs: int = 100, seq: WeightSequence | None = None
) -> list[Check]:
    if seq is None:
        seq = Explicit(tuple(PolyDecay(1.0, 2.0).terms(20)))
    elif seq.support is None:
        seq = _prefix(seq, 20)
    if not seq.terms(max(seq.support, 1)).sum() > 0:
        return [Check("mc.consistency", 0, "trivial: zeta_1 = 0, nothing to sample", True)]
    checks = []
    for ell in (2, 3, 4):
        exact = distinctness_exact(seq, ell)
        ok = 0
        for r in range(runs):
            est, se = distinctness_estimate(McConfig(samples, _run_seed(seed, r), ell, seq))
            ok += abs(est - exact) <= 3 * se if se > 0 else est == exact
        need = math.ceil(0.99 * runs)
        checks.append(Check(f"mc.within_3se.ell{ell}", ok, f">= {need} of {runs}", ok >= need))
    a = distinctness_estimate(McConfig(samples, seed, 3, seq))
    b = distinctness_estimate(McConfig(samples, seed, 3, seq), workers=2)
    checks.append(Check("mc.determinism", int(a == b), "== 1", a == b))
    bad = 0
    for ell in range(1, 5):
        try:
            bad += not chain_bound_check(seq, ell).holds
        except ZeroTail:
            pass
    checks.append(Check("mc.chain_violations", bad, "== 0 for ell <= 4", bad == 0))
    return checks


def run_suite(
    suite: str,
    seed: int = 0,
    n: int = 1000,
    samples: int = 20000,
    spec: PODSpec | SPODSpec | None = None,
) -> list[Check]:
    if suite == "all":
        out = []
        for s in SUITES:
            out += run_suite(s, seed, n, samples, spec)
        return out
    seqs = None
    spod_spec = None
    if spec is not None:
        seqs = list(spec.upsilon_grid) if isinstance(spec, SPODSpec) else [spec.upsilon]
        spod_spec = spec if isinstance(spec, SPODSpec) else SPODSpec(1, spec.gamma, (spec.upsilon,))
    if suite == "lemma2":
        return lemma2_suite(seed, n, seqs)
    if suite == "spod-reduction":
        if spod_spec is not None:
            try:
                reduced_upsilon(spod_spec)
            except ValueError as exc:
                return [Check("spod.reduced_upsilon", 0, f"unsupported grid: {exc}", False)]
        return spod_reduction_suite(seed, n, spod_spec)
    if suite == "mc":
        return mc_suite(seed, samples, seq=seqs[0] if seqs else None)
    raise ValueError(f"unknown suite {suite!r}; choose from {SUITES + ('all',)}")
