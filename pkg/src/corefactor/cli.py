"""Command line entry point: ``corefactor <subcommand> ...``.

Exit status is 0 on success, 1 on a domain error (a JSON object describing
it goes to stderr) and 2 on a usage error.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from typing import Optional, Sequence

from . import experiments, factor, graph, oracles, thresholds

THREADS_ENV = "COREFACTOR_THREADS"


class UsageError(Exception):
    pass


def _int_range(text: str) -> list[int]:
    """``"5"`` or ``"3..6"`` (inclusive)."""
    try:
        if ".." in text:
            lo, hi = text.split("..", 1)
            lo_i, hi_i = int(lo), int(hi)
            if hi_i < lo_i:
                raise ValueError
            return list(range(lo_i, hi_i + 1))
        return [int(text)]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected K or LO..HI, got {text!r}") from None


def _grid(text: str) -> list[float]:
    """``"lo:hi:step"`` inclusive of ``hi`` up to rounding."""
    try:
        lo, hi, step = (float(x) for x in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected lo:hi:step, got {text!r}") from None
    if step <= 0 or hi < lo:
        raise argparse.ArgumentTypeError("grid needs step > 0 and hi >= lo")
    count = int(round((hi - lo) / step)) + 1
    return [round(lo + i * step, 12) for i in range(count)]


def _critical(text: str) -> tuple[str, int]:
    if text == "exact":
        return ("exact", 0)
    if text.startswith("sampled:"):
        try:
            r = int(text.split(":", 1)[1])
        except ValueError:
            r = -1
        if r >= 1:
            return ("sampled", r)
    raise argparse.ArgumentTypeError("expected 'exact' or 'sampled:R'")


def _target(text: str) -> Optional[int]:
    if text == "core":
        return None
    if text.startswith("factor:"):
        try:
            return int(text.split(":", 1)[1])
        except ValueError:
            pass
    raise argparse.ArgumentTypeError("expected 'core' or 'factor:K'")


def _parallelism(args) -> int:
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise UsageError(f"{THREADS_ENV} must be an integer, got {env!r}") from None
    return max(1, args.parallelism)


def _dump(obj, out) -> None:
    json.dump(obj, out, sort_keys=False)
    out.write("\n")


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_gen(args, out) -> None:
    g = graph.gnp_random(args.n, args.c, args.seed)
    if args.out:
        graph.write_edgelist(g, args.out)
    else:
        graph.write_edgelist(g, out)


def cmd_core(args, out) -> None:
    g = graph.read_edgelist(args.input)
    res = graph.k_core(g, args.k)
    if args.out:
        graph.write_edgelist(res.core, args.out)
    _dump({
        "k": args.k,
        "n": g.n,
        "core_size": res.size,
        "core_edges": res.core.m,
        "kept": res.kept.tolist(),
        "degree_hist": {str(j): c for j, c in sorted(res.degree_histogram().items())},
    }, out)


def cmd_factor(args, out) -> None:
    g = graph.read_edgelist(args.input)
    mode, r = args.critical
    outcome = factor.find_k_factor(g, args.k, critical=mode, samples=r or 30, seed=args.seed)
    _dump(outcome.to_json(), out)


def cmd_thresholds(args, out) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["k", "lambda_k", "c_k", "ck_asymptotic", "residual"])
    for k in args.k:
        th = thresholds.compute_ck(k, args.tol)
        try:
            asy = thresholds.ck_asymptotic(k)
            row = [k, repr(th.lambda_k), repr(th.c_k), repr(asy), repr(th.c_k - asy)]
        except ValueError:
            row = [k, repr(th.lambda_k), repr(th.c_k), "", ""]
        w.writerow(row)


def cmd_predict(args, out) -> None:
    _dump(thresholds.mu_kc(args.k, args.c).to_json(), out)


def cmd_sweep(args, out) -> None:
    par = _parallelism(args)
    summary = experiments.sweep(args.n, args.k, args.factor_k, args.grid, args.trials,
                                args.seed, parallelism=par, samples=args.samples)
    config = {
        "command": "sweep", "n": args.n, "k": args.k, "factor_k": args.factor_k,
        "grid": args.grid, "trials": args.trials, "seed": args.seed,
        "samples": args.samples,
    }
    if args.out:
        experiments.write_sweep(args.out, config, summary)
    experiments.write_summary_csv(summary, out)


def cmd_bisect(args, out) -> None:
    par = _parallelism(args)
    res = experiments.threshold_bisect(args.n, args.k, args.trials, args.c_lo, args.c_hi,
                                       factor_k=args.target, base_seed=args.seed,
                                       resolution=args.resolution, parallelism=par)
    _dump({
        "estimate": res.estimate, "c_lo": res.c_lo, "c_hi": res.c_hi,
        "freq_lo": res.freq_lo, "freq_hi": res.freq_hi, "evaluations": res.evaluations,
    }, out)


def cmd_verify(args, out) -> int:
    results = oracles.run_small_oracles(seed=args.seed, scale=args.scale)
    ok = True
    for r in results:
        status = "PASS" if r.ok else "FAIL"
        ok &= r.ok
        out.write(f"{status} {r.name}: {r.cases} cases, {len(r.disagreements)} disagreements\n")
        for d in r.disagreements[:3]:
            out.write(f"    {d!r}\n")
    return 0 if ok else 1


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="corefactor",
                                description="k-cores, k-factors and thresholds of G(n, c/n)")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("gen", help="sample G(n, c/n) as an edge list")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--c", type=float, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out")
    s.set_defaults(func=cmd_gen)

    s = sub.add_parser("core", help="k-core of an edge-list graph")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--out", help="write the core as an edge list")
    s.set_defaults(func=cmd_core)

    s = sub.add_parser("factor", help="k-factor or k-factor-criticality")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--critical", type=_critical, default=("exact", 0),
                   help="'exact' or 'sampled:R' (used when k*n is odd)")
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_factor)

    s = sub.add_parser("thresholds", help="CSV of c_k and its expansion")
    s.add_argument("--k", type=_int_range, required=True, help="K or LO..HI")
    s.add_argument("--tol", type=float, default=1e-10)
    s.set_defaults(func=cmd_thresholds)

    s = sub.add_parser("predict", help="core size and degree law above c_k")
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--c", type=float, required=True)
    s.set_defaults(func=cmd_predict)

    s = sub.add_parser("sweep", help="Monte Carlo sweep over a grid of c")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--factor-k", type=int, default=None)
    s.add_argument("--grid", type=_grid, required=True, help="lo:hi:step")
    s.add_argument("--trials", type=int, default=10)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--samples", type=int, default=experiments.DEFAULT_SAMPLES)
    s.add_argument("--parallelism", type=int, default=1)
    s.add_argument("--out", help="directory for config.json, trials.jsonl, summary.csv")
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("bisect", help="locate the 1/2-frequency point in c")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--trials", type=int, default=20)
    s.add_argument("--c-lo", type=float, required=True)
    s.add_argument("--c-hi", type=float, required=True)
    s.add_argument("--target", type=_target, default=None, help="'core' or 'factor:K'")
    s.add_argument("--resolution", type=float, default=0.01)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--parallelism", type=int, default=1)
    s.set_defaults(func=cmd_bisect)

    s = sub.add_parser("verify", help="run the brute-force cross-validation suites")
    s.add_argument("--suite", choices=["small-oracles"], default="small-oracles")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--scale", type=float, default=1.0)
    s.set_defaults(func=cmd_verify)
    return p


def dispatch(argv: Optional[Sequence[str]] = None, out=None, err=None) -> int:
    out = out if out is not None else sys.stdout
    err = err if err is not None else sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        code = args.func(args, out)
    except UsageError as exc:
        err.write(f"corefactor: {exc}\n")
        return 2
    except (ValueError, RuntimeError, OSError) as exc:
        json.dump({"error": type(exc).__name__, "message": str(exc)}, err)
        err.write("\n")
        return 1
    return code or 0


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
