"""Command-line entry point.

Exit codes: 0 pass, 1 a certificate or check failed, 2 usage or input error,
3 inconclusive (a resource budget ran out before a verdict).
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction
from pathlib import Path

from . import dp
from .cases import CASE_IDS, run_case
from .casefile import check_envelope, load_case
from .errors import TailcertError
from .exact import Surd, WeightVector, parse_exact, tail_probability
from .prawitz import PrawitzParams, best_prawitz, prawitz_lower_bound
from .search import feedback_iterate

EXIT_PASS, EXIT_FAIL, EXIT_USAGE, EXIT_INCONCLUSIVE = 0, 1, 2, 3
CACHE_ENV = "TAILCERT_CACHE"

SCALES = {
    "desk": {"beta": dp.DESK_BETA, "iterations": dp.DESK_ITERATIONS},
    "paper": {"beta": dp.PAPER_BETA, "iterations": dp.PAPER_ITERATIONS},
}

# Plateaus of y -> inf P(|X| >= y sqrt(Var X)): (left end, right end, value, cases, witness size).
# The witness is n equal weights; its tail just above the left end equals the plateau value.
_R = Surd.sqrt
PLATEAUS = [
    ("0", "1/sqrt(7)", Fraction(1, 2), ("sqrt7",), 2),
    ("1/sqrt(7)", "1/sqrt(5)", Fraction(29, 64), ("sqrt5",), 7),
    ("1/sqrt(5)", "1/sqrt(3)", Fraction(3, 8), ("sqrt3",), 5),
    ("1/sqrt(3)", "2/sqrt(6)", Fraction(1, 4), ("2sqrt6",), 3),
    ("2/sqrt(6)", "1", Fraction(7, 32), ("A", "B", "C", "D", "E", "F", "G", "H"), 6),
    ("1", "inf", Fraction(0), (), 1),
]


class UsageError(TailcertError):
    pass


def cache_dir() -> Path:
    root = os.environ.get(CACHE_ENV)
    path = Path(root) if root else Path.home() / ".cache" / "tailcert"
    path.mkdir(parents=True, exist_ok=True)
    return path


def _table_name(beta: Fraction, iterations: int, x_min, x_max) -> str:
    return f"dp-beta{beta.numerator}_{beta.denominator}-it{iterations}-x{x_min}_{x_max}.tbl"


def obtain_table(scale: str, path=None, log=print):
    """Load the table for ``scale`` from ``path`` or the cache, building it if absent."""
    preset = SCALES[scale]
    if path is None:
        path = cache_dir() / _table_name(preset["beta"], preset["iterations"], -3, 3)
    path = Path(path)
    if path.exists():
        return dp.load(path, expect_beta=preset["beta"])
    log(f"building {scale} table ({path.name}); this is cached for later runs")
    grid = dp.build_table(preset["beta"], preset["iterations"])
    path.parent.mkdir(parents=True, exist_ok=True)
    dp.persist(grid, path)
    return grid


def _num(text: str):
    v = parse_exact(text)
    return v.as_fraction() if isinstance(v, Surd) and v.is_rational else v


def _write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _check_scale(args):
    if getattr(args, "scale", "desk") == "paper" and not args.allow_paper_scale:
        raise UsageError("the paper preset builds a 2000 x 12001 table with 1000 passes (hours of compute); "
                         "pass --allow-paper-scale to run it")


# --- subcommands ------------------------------------------------------------------------------------


def cmd_oracle(args) -> int:
    w = WeightVector.parse(args.w)
    given = [v is not None for v in (args.x, args.x_sq, args.y)]
    if sum(given) != 1:
        raise UsageError("give exactly one of --x, --x-sq, --y")
    if args.x is not None:
        x = _num(args.x)
    elif args.x_sq is not None:
        sq = Fraction(_num(args.x_sq))
        if sq < 0:
            raise UsageError("--x-sq must be non-negative")
        x = Surd.sqrt(sq)
    else:
        x = Surd.of(_num(args.y)) * Surd.sqrt(w.variance)
    tp = tail_probability(w, x, strict=args.strict, two_sided=args.two_sided)
    print(f"{tp.value} {float(tp.value):.12g}")
    return EXIT_PASS


def cmd_prawitz(args) -> int:
    if (args.T is None) != (args.q is None):
        raise UsageError("--T and --q must be given together")
    if args.T is not None:
        v = prawitz_lower_bound(args.a, args.x, PrawitzParams(args.T, args.q, args.subdivisions))
        print(f"{v:.12g}")
    else:
        v, T, q = best_prawitz(args.a, args.x, subdivisions=args.subdivisions)
        print(f"{v:.12g} T={T:.6g} q={q:.6g}")
    return EXIT_PASS


def cmd_dp_build(args) -> int:
    _check_scale(args)
    preset = SCALES[args.scale]
    beta = Fraction(args.beta) if args.beta else preset["beta"]
    iters = args.iterations if args.iterations is not None else preset["iterations"]
    out = Path(args.out) if args.out else cache_dir() / _table_name(beta, iters, args.x_min, args.x_max)
    grid = dp.build_initial(beta, args.x_min, args.x_max, memory_budget=args.memory_budget)
    grid = dp.refine(grid, iters, args.epsilon)
    dp.persist(grid, out)
    last = grid.history[-1] if grid.history else 0.0
    print(f"wrote {out}: beta={beta} passes={grid.iterations_done} last gain={last:.3g}")
    return EXIT_PASS


def cmd_dp_query(args) -> int:
    grid = dp.load(args.table) if args.table else obtain_table("desk", log=_stderr)
    print(f"{dp.query(grid, _num(args.a), _num(args.x)):.12g}")
    return EXIT_PASS


def _stderr(msg):
    print(msg, file=sys.stderr)


def cmd_search(args) -> int:
    spec = load_case(args.case)
    table = dp.load(args.table) if args.table else obtain_table("desk", log=_stderr)
    sched = spec.schedule()
    result, history = feedback_iterate(table, spec.threshold, spec.target, spec.depth, sched[0], len(sched),
                                       spec.constraints, spec.prior_list(), spec.budget, args.workers, sched)
    problems = check_envelope(spec, result.envelope) if result.conclusive else []
    if not result.conclusive:
        verdict = "inconclusive"
    elif problems:
        verdict = "fail"
    else:
        verdict = "pass"
    report = {
        "case": spec.source, "threshold": str(spec.threshold), "target": str(spec.target), "depth": spec.depth,
        "schedule": sched, "verdict": verdict, "conclusive": result.conclusive, "problems": problems,
        "rounds": [{"d": r.d, "survivors": len(r.survivors), "stats": r.stats,
                    "envelope": None if r.envelope is None else [[str(lo), str(hi)] for lo, hi in r.envelope]}
                   for r in history],
        "survivors": [[[str(lo), str(hi)] for lo, hi in b.intervals] for b in result.survivors],
    }
    text = _dump(report)
    if args.out:
        _write(Path(args.out), text)
    env = result.envelope_floats()
    print(f"{verdict}: {len(result.survivors)} surviving boxes at d={result.d}")
    if env:
        for i, (lo, hi) in enumerate(env, 1):
            print(f"  a{i} in [{lo:.6f}, {hi:.6f}]")
    for p in problems:
        print(f"  {p}")
    return {"pass": EXIT_PASS, "fail": EXIT_FAIL, "inconclusive": EXIT_INCONCLUSIVE}[verdict]


def _verdict_code(verdicts) -> int:
    if "fail" in verdicts:
        return EXIT_FAIL
    if "inconclusive" in verdicts:
        return EXIT_INCONCLUSIVE
    return EXIT_PASS


def cmd_reproduce(args) -> int:
    _check_scale(args)
    ids = CASE_IDS if args.case == "all" else (args.case,)
    if args.case != "all" and args.case not in CASE_IDS:
        raise UsageError(f"unknown case {args.case!r}; expected one of: all, {', '.join(CASE_IDS)}")
    table = None
    if "sqrt7" in ids and not args.no_search:
        table = dp.load(args.table) if args.table else obtain_table(args.scale, log=_stderr)
    out = Path(args.out_dir) if args.out_dir else None
    verdicts = []
    for cid in ids:
        rep = run_case(cid, table=table, seed=args.seed, search_budget=args.budget)
        verdicts.append(rep.verdict)
        print(rep.text())
        if out is not None:
            _write(out / f"{cid}.json", _dump(rep.as_dict()))
            _write(out / f"{cid}.txt", rep.text() + "\n")
    return _verdict_code(verdicts)


def plateau_witnesses():
    """Check each plateau's equal-weight witness with the exact oracle."""
    rows = []
    for left, right, value, _, n in PLATEAUS:
        w = WeightVector((1,) * n)
        sigma = Surd.sqrt(w.variance)
        just_above = tail_probability(w, Surd.of(_num(left)) * sigma, strict=True, two_sided=True).value
        at_right = None
        if right != "inf":
            at_right = tail_probability(w, Surd.of(_num(right)) * sigma, two_sided=True).value
        ok = just_above == value and (at_right is None or at_right == value)
        rows.append((left, right, value, n, just_above, at_right, ok))
    return rows


def cmd_report(args) -> int:
    d = Path(args.dir)
    if not d.is_dir():
        raise UsageError(f"{d} is not a directory")
    missing = [c for c in CASE_IDS if not (d / f"{c}.json").exists()]
    if missing:
        raise UsageError(f"missing case reports in {d}: {', '.join(missing)}")
    status = {}
    for c in CASE_IDS:
        with open(d / f"{c}.json", encoding="utf-8") as fh:
            status[c] = json.load(fh)["verdict"]
    lines = ["f(0) = 1  [trivial]"]
    verdicts = []
    for (left, right, value, cases, n, just_above, at_right, ok) in (
            (r[0], r[1], r[2], p[3], r[3], r[4], r[5], r[6]) for r, p in zip(plateau_witnesses(), PLATEAUS)):
        lower = _verdict_code([status[c] for c in cases]) if cases else EXIT_PASS
        v = {EXIT_PASS: "pass", EXIT_FAIL: "fail", EXIT_INCONCLUSIVE: "inconclusive"}[lower]
        if not ok:
            v = "fail"
        verdicts.append(v)
        rb = "]" if right != "inf" else ")"
        lines.append(f"f(y) = {value} for y in ({left}, {right}{rb}  [{v}]  lower bound from "
                     f"{', '.join(cases) if cases else 'trivial'}; witness {n} equal weights gives "
                     f"{just_above}" + ("" if at_right is None else f" (and {at_right} at the right end)"))
    text = "\n".join(lines) + "\n"
    print(text, end="")
    if args.out:
        _write(Path(args.out), text)
    return _verdict_code(verdicts)


# --- argument parsing ----------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="tailcert", description="Certified tail bounds for Rademacher sums.")
    ap.add_argument("--config", help="JSON file whose keys override command-line flags")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("oracle", help="exact tail probability of a weighted sign sum")
    p.add_argument("--w", required=True, help="comma-separated weights, e.g. 2,2,2,1,1,1,1 or 1/2,1/3")
    p.add_argument("--x", help="threshold in the weights' units")
    p.add_argument("--x-sq", dest="x_sq", help="square of the threshold (for irrational thresholds)")
    p.add_argument("--y", help="threshold in standard deviations")
    p.add_argument("--strict", action="store_true", help="P(X > x) instead of P(X >= x)")
    p.add_argument("--two-sided", dest="two_sided", action="store_true", help="use |X|")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("prawitz", help="certified smoothed-inversion lower bound")
    p.add_argument("--a", type=float, required=True, help="bound on the largest weight")
    p.add_argument("--x", type=float, required=True, help="threshold")
    p.add_argument("--T", type=float, help="cut-off frequency")
    p.add_argument("--q", type=float, help="split point in (0, 1)")
    p.add_argument("--subdivisions", type=int, default=1024, help="quadrature panels")
    p.set_defaults(func=cmd_prawitz)

    p = sub.add_parser("dp", help="build or query the bound table")
    dsub = p.add_subparsers(dest="dp_command", required=True)
    b = dsub.add_parser("build", help="build and persist a table")
    b.add_argument("--scale", choices=sorted(SCALES), default="desk")
    b.add_argument("--allow-paper-scale", action="store_true")
    b.add_argument("--beta", help="grid step, overrides the preset (e.g. 1/400)")
    b.add_argument("--iterations", type=int, help="refinement passes, overrides the preset")
    b.add_argument("--epsilon", type=float, default=0.0, help="stop once a pass gains at most this much")
    b.add_argument("--x-min", dest="x_min", type=int, default=-3)
    b.add_argument("--x-max", dest="x_max", type=int, default=3)
    b.add_argument("--memory-budget", dest="memory_budget", type=int, default=dp.DEFAULT_MEMORY_BUDGET)
    b.add_argument("--out", help=f"output path (default: the cache directory, ${CACHE_ENV})")
    b.set_defaults(func=cmd_dp_build)
    q = dsub.add_parser("query", help="certified lower bound at (a, x)")
    q.add_argument("--table", help="table path (default: cached desk table, built if absent)")
    q.add_argument("--a", required=True)
    q.add_argument("--x", required=True)
    q.set_defaults(func=cmd_dp_query)

    p = sub.add_parser("search", help="run a case file through the box search")
    p.add_argument("--case", required=True, help="case file")
    p.add_argument("--table", help="table path (default: cached desk table)")
    p.add_argument("--out", help="JSON report path")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("reproduce", help="re-check the certificates for one case (or 'all')")
    p.add_argument("case", help=f"one of: all, {', '.join(CASE_IDS)}")
    p.add_argument("--scale", choices=sorted(SCALES), default="desk")
    p.add_argument("--allow-paper-scale", action="store_true")
    p.add_argument("--table", help="table path (default: cached table for the scale)")
    p.add_argument("--out-dir", dest="out_dir", help="directory for <case>.json and <case>.txt")
    p.add_argument("--seed", type=int, default=0, help="seed for the sampled variance checks")
    p.add_argument("--budget", type=int, help="box-test budget for search steps")
    p.add_argument("--no-search", dest="no_search", action="store_true", help="skip table-backed search steps")
    p.set_defaults(func=cmd_reproduce)

    p = sub.add_parser("report", help="summarize case reports as the plateau function")
    p.add_argument("--dir", required=True, help="directory written by 'reproduce --out-dir'")
    p.add_argument("--out", help="also write the summary here")
    p.set_defaults(func=cmd_report)
    return ap


def _apply_config(args, ap):
    with open(args.config, encoding="utf-8") as fh:
        cfg = json.load(fh)
    if not isinstance(cfg, dict):
        raise UsageError("config file must hold a JSON object")
    for key, value in cfg.items():
        dest = key.replace("-", "_")
        if dest in ("command", "dp_command", "func", "config") or not hasattr(args, dest):
            raise UsageError(f"config key {key!r} does not apply to this command")
        setattr(args, dest, value)


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        if args.config:
            _apply_config(args, ap)
        return args.func(args)
    except (UsageError, TailcertError, ValueError, OSError) as exc:
        print(f"tailcert: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
