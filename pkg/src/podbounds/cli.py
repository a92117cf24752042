"""Command-line interface: ``podbounds {sum,bound,rate,verify}``.

Reports go to stdout as JSON; ``--csv PATH`` also writes the row table.
Every flag falls back to a ``PODSUM_<FLAG>`` environment variable (for
example ``PODSUM_RTOL``, ``PODSUM_SEED``, ``PODSUM_CSV``).

Exit codes: 0 ok, 1 verification failure, 2 bad spec or arguments,
3 not summable, 4 internal dominance check failed.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from ._logmath import finite_or_flag
from .asymptotics import ThetaSeries, empirical_rate, theorem5_bracket, theta_rate
from .config import ConfigError, load_spec, spec_digest
from .errors import BudgetExceeded, NotSummable
from .montecarlo import RNG_ALGORITHM
from .podsum import adaptive_sum, naive_bound, require_summable, theorem1_bound, truncated_sum
from .spod import SpodGrowthConstants, spod_adaptive_sum, spod_growth_bracket
from .verify import run_suite
from .weights import FactorialPower, PODSpec, PolyDecay, SPODSpec

EXIT_OK, EXIT_VERIFY, EXIT_SPEC, EXIT_NOT_SUMMABLE, EXIT_DOMINANCE = 0, 1, 2, 3, 4
ENV_PREFIX = "PODSUM_"


@dataclass
class RunReport:
    command: list[str]
    spec_digest: str | None
    rows: list[dict]
    environment: dict
    extra: dict = field(default_factory=dict)
    wall_time: float | None = None

    def to_dict(self) -> dict:
        out = {
            "command": self.command,
            "spec_digest": self.spec_digest,
            "environment": self.environment,
            **self.extra,
            "rows": self.rows,
        }
        if self.wall_time is not None:
            out["wall_time_s"] = self.wall_time
        return out


def _clean(x):
    if isinstance(x, float):
        return finite_or_flag(x, "inf" if x > 0 else ("-inf" if x < 0 else "nan"))
    if isinstance(x, (np.floating, np.integer)):
        return _clean(x.item())
    if isinstance(x, dict):
        return {k: _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    return x


def _env(name: str, default=None):
    return os.environ.get(ENV_PREFIX + name.upper().replace("-", "_"), default)


def _m_grid(args) -> list[float]:
    if args.m_log is not None:
        a, b, n = args.m_log
        grid = np.geomspace(float(a), float(b), int(n)).tolist()
    elif args.m:
        grid = [float(x) for x in args.m]
    else:
        env = _env("m")
        if env is None:
            raise SystemExit("error: give --m values or --m-log A B N")
        grid = [float(x) for x in env.replace(",", " ").split()]
    if any(not (m > 0 and math.isfinite(m)) for m in grid):
        raise ValueError("every m must be positive and finite")
    return sorted(grid)


def _add_grid(p):
    p.add_argument("--m", nargs="+", help="explicit m values (env PODSUM_M)")
    p.add_argument(
        "--m-log", nargs=3, metavar=("A", "B", "N"),
        help="N log-spaced points from m=A to m=B",
    )


def _add_output(p):
    p.add_argument("--csv", default=_env("csv"), help="also write rows as CSV to PATH")
    p.add_argument("--timing", action="store_true", default=_env("timing") == "1",
                   help="include wall time (breaks byte-identical output)")


def _parse_m_log(args):
    if args.m_log is None:
        env = _env("m_log")
        if env:
            args.m_log = env.replace(",", " ").split()


def _load(path):
    try:
        return load_spec(path)
    except OSError as exc:
        raise ConfigError("$", f"cannot read {path}: {exc.strerror}") from None


def _naive_cell(spec, m):
    if not (isinstance(spec.gamma, FactorialPower) and spec.gamma.sigma == 1):
        return "n/a"
    nb = naive_bound(spec, m)
    return nb.log_value if nb.log_value is not None else nb.status.value


# -- row workers (top level so process pools can pickle them) ---------------


def _sum_row(spec, m, rtol, d_cap):
    try:
        if isinstance(spec, SPODSpec):
            res = spod_adaptive_sum(spec, m, rtol=rtol, d_cap=d_cap)
        else:
            res = adaptive_sum(spec, m, rtol=rtol, d_cap=d_cap)
        row = {"m": m, "log_S_lo": res.log_value, "d": res.d, "L": res.L,
               "converged": res.converged, "rel_change": res.last_rel_change}
    except BudgetExceeded as exc:
        row = {"m": m, "log_S_lo": exc.log_value, "d": exc.d, "L": exc.L,
               "converged": False, "rel_change": "budget-exceeded"}
    if isinstance(spec, PODSpec):
        row["naive"] = _naive_cell(spec, m)
    return row


def _bound_row(spec, m, d, L):
    L_eff = min(L, d)
    exact = truncated_sum(spec, m, d, L_eff)
    t1 = theorem1_bound(spec, m, L)
    row = {
        "m": m,
        "exact_lo": exact,
        "theorem1": t1.log_value if t1.certified else "unbounded-at-L",
        "theorem1_partial": t1.log_partial,
        "certificate": t1.certificate,
        "naive": _naive_cell(spec, m),
        "d": d,
        "L": L,
    }
    slack = 1e-12 * max(1.0, abs(t1.log_partial)) if math.isfinite(t1.log_partial) else 0.0
    row["dominance_ok"] = exact == -math.inf or exact <= t1.log_partial + slack
    return row


def _map(fn, jobs, workers):
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            return list(pool.map(fn, *zip(*jobs)))
    return [fn(*j) for j in jobs]


# -- commands ---------------------------------------------------------------


def cmd_sum(args):
    spec = _load(args.spec)
    if isinstance(spec, PODSpec):
        require_summable(spec)
    grid = _m_grid(args)
    rows = _map(_sum_row, [(spec, m, args.rtol, args.d_cap) for m in grid], args.workers)
    return EXIT_OK, RunReport([], spec_digest(spec), rows, {}, {"rtol": args.rtol})


def cmd_bound(args):
    spec = _load(args.spec)
    if not isinstance(spec, PODSpec):
        raise ConfigError("alpha", "bound supports POD specs only")
    grid = _m_grid(args)
    rows = _map(_bound_row, [(spec, m, args.d, args.L) for m in grid], args.workers)
    code = EXIT_OK if all(r["dominance_ok"] for r in rows) else EXIT_DOMINANCE
    return code, RunReport([], spec_digest(spec), rows, {})


def cmd_rate(args):
    grid = _m_grid(args)
    if args.theta is not None:
        ts = ThetaSeries(args.theta)
        rows = [{"m": m, "normalized_log": v} for m, v in theta_rate(ts, grid)]
        return EXIT_OK, RunReport([], None, rows, {}, {"mode": "theta", "theta": args.theta})
    if args.rho is None or args.sigma is None:
        raise ValueError("rate needs --theta, or --rho and --sigma")
    if args.alpha is not None:
        cs = [float(c) for c in args.c_values] if args.c_values else [1.0] * args.alpha
        consts = SpodGrowthConstants(args.alpha, args.rho, args.sigma, tuple(cs))
        pts = spod_growth_bracket(consts, grid, d=args.d, L=args.L)
        rows = [
            {"m": p.m, "lower": p.lower, "upper": p.upper, "measured": p.measured,
             "lower_const": consts.lower_const, "upper_const": consts.upper_const}
            for p in pts
        ]
        extra = {"mode": "spod", "c_max": consts.c_max, "c_prime_alpha_rho": consts.c_prime_alpha_rho,
                 "c_alpha_rho": consts.c_alpha_rho, "ell_star": consts.ell_star}
        return EXIT_OK, RunReport([], None, rows, {}, extra)
    br = theorem5_bracket(args.rho, args.sigma, args.c_upsilon)
    spec = PODSpec(FactorialPower(args.sigma), PolyDecay(args.c_upsilon, args.rho))
    pts = empirical_rate(spec, grid, rtol=args.rtol, d_cap=args.d_cap)
    rows = [
        {"m": p.m, "lower_series": p.lower_series, "exact_lo": p.exact_lo,
         "exact_converged": p.exact_converged, "theorem1": p.theorem1,
         "lower_const": br.lower_const, "upper_const": br.upper_const}
        for p in pts
    ]
    extra = {"mode": "pod", "c_rho": br.c_rho}
    return EXIT_OK, RunReport([], spec_digest(spec), rows, {}, extra)


def cmd_verify(args):
    spec = _load(args.spec) if args.spec else None
    checks = run_suite(args.suite, seed=args.seed, n=args.n, samples=args.mc_samples, spec=spec)
    rows = [{"check": c.name, "observed": c.observed, "required": c.required, "passed": c.passed}
            for c in checks]
    ok = all(c.passed for c in checks)
    for c in checks:
        print(c.line(), file=sys.stderr)
    rep = RunReport([], spec_digest(spec) if spec else None, rows, {"seed": args.seed},
                    {"suite": args.suite, "passed": ok})
    return (EXIT_OK if ok else EXIT_VERIFY), rep


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="podbounds", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("sum", help="certified lower bounds on S(m) by adaptive truncation")
    s.add_argument("spec")
    _add_grid(s)
    s.add_argument("--rtol", type=float, default=float(_env("rtol", 1e-6)))
    s.add_argument("--d-cap", type=int, default=int(_env("d_cap", 1 << 16)))
    s.add_argument("--workers", type=int, default=int(_env("workers", 1)))
    _add_output(s)
    s.set_defaults(func=cmd_sum)

    b = sub.add_parser("bound", help="truncated sum, certified upper bound and naive bound per m")
    b.add_argument("spec")
    _add_grid(b)
    b.add_argument("--L", type=int, default=int(_env("L", 64)))
    b.add_argument("--d", type=int, default=int(_env("d", 256)))
    b.add_argument("--workers", type=int, default=int(_env("workers", 1)))
    _add_output(b)
    b.set_defaults(func=cmd_bound)

    r = sub.add_parser("rate", help="normalized growth curves and bracket constants")
    _add_grid(r)
    r.add_argument("--theta", type=float, default=_float_env("theta"))
    r.add_argument("--rho", type=float, default=_float_env("rho"))
    r.add_argument("--sigma", type=float, default=_float_env("sigma"))
    r.add_argument("--c-upsilon", type=float, default=float(_env("c_upsilon", 1.0)))
    r.add_argument("--alpha", type=int, default=_int_env("alpha"))
    r.add_argument("--c-values", nargs="+", help="C_Upsilon,k for k = 1..alpha")
    r.add_argument("--d", type=int, default=_int_env("d"), help="SPOD mode: measure truncated sum")
    r.add_argument("--L", type=int, default=_int_env("L"))
    r.add_argument("--rtol", type=float, default=float(_env("rtol", 1e-3)))
    r.add_argument("--d-cap", type=int, default=int(_env("d_cap", 1 << 12)))
    _add_output(r)
    r.set_defaults(func=cmd_rate)

    v = sub.add_parser("verify", help="run randomized verification suites")
    v.add_argument("--suite", choices=["lemma2", "spod-reduction", "mc", "all"],
                   default=_env("suite", "all"))
    v.add_argument("--seed", type=int, default=int(_env("seed", 0)))
    v.add_argument("--n", type=int, default=int(_env("n", 1000)))
    v.add_argument("--mc-samples", type=int, default=int(_env("mc_samples", 20000)))
    v.add_argument("--spec", default=_env("spec"))
    _add_output(v)
    v.set_defaults(func=cmd_verify)
    return p


def _float_env(name):
    v = _env(name)
    return float(v) if v is not None else None


def _int_env(name):
    v = _env(name)
    return int(v) if v is not None else None


def _write_csv(path, rows):
    cols = []
    for r in rows:
        cols += [k for k in r if k not in cols]
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=cols, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: ("" if r.get(k) is None else r.get(k)) for k in cols})


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    if hasattr(args, "m_log"):
        _parse_m_log(args)
    t0 = time.perf_counter()
    try:
        code, report = args.func(args)
    except ConfigError as exc:
        print(f"spec error: {exc}", file=sys.stderr)
        return EXIT_SPEC
    except NotSummable as exc:
        print(f"not summable: {exc}", file=sys.stderr)
        return EXIT_NOT_SUMMABLE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SPEC
    report.command = ["podbounds", *argv]
    report.environment = {"version": __version__, "rng": RNG_ALGORITHM, **report.environment}
    if args.timing:
        report.wall_time = time.perf_counter() - t0
    rows = _clean(report.rows)
    report.rows = rows
    sys.stdout.write(json.dumps(_clean(report.to_dict()), indent=2, sort_keys=True, allow_nan=False) + "\n")
    if args.csv:
        _write_csv(args.csv, rows)
    return code


if __name__ == "__main__":
    raise SystemExit(main())
