"""Command-line entry point: ``robustsbi <subcommand> ...``."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import bench
from .models import BENCHMARK_SV, SvParams, simulate_ma1, simulate_sv
from .rng import RngStream

EPILOG = f"""\
output files:
  samples.csv     {bench.SAMPLES_SCHEMA}
  predictive.csv  {bench.PREDICTIVE_SCHEMA}
  summary.json    top-level keys: {', '.join(bench.REPORT_KEYS)}
  series.csv      (simulate) t, y
config files are INI-style; any section, keys named like the long flags
(n_sims, quantile, m, iters, lam, seed, data, theta0, discrepancy, mode, ...).
flags override file values.
"""


def _common(p: argparse.ArgumentParser, out_default: str):
    p.add_argument("--config", metavar="PATH", help="INI-style experiment config")
    p.add_argument("--seed", type=int, help="unsigned 64-bit master seed")
    p.add_argument("--out", metavar="DIR", default=None, help=f"output directory (default {out_default})")
    p.add_argument("--data", help="'sv' (benchmark), 'ma1' (well-specified) or a path to a series file")
    p.add_argument("--theta0", type=float, help="MA(1) coefficient when --data ma1")
    p.add_argument("--n-rep", type=int, dest="n_rep", help="posterior predictive replicates")


def _chain_flags(p):
    p.add_argument("--m", type=int, help="simulations per likelihood estimate")
    p.add_argument("--iters", type=int, help="MCMC iterations (first 20%% are burn-in)")
    p.add_argument("--proposal-scale", type=float, dest="proposal_scale")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="robustsbi",
        description="Robust simulation-based inference on the misspecified MA(1) benchmark.",
        epilog=EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)
    fmt = dict(epilog=EPILOG, formatter_class=argparse.RawDescriptionHelpFormatter)

    p = sub.add_parser("simulate", help="simulate a series from the SV or MA(1) model", **fmt)
    p.add_argument("--model", choices=("sv", "ma1"), default="sv")
    p.add_argument("--theta", type=float, default=0.5, help="MA(1) coefficient")
    p.add_argument("--T", type=int, default=100)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--out", metavar="PATH", default="series.csv")

    p = sub.add_parser("abc", help="rejection ABC", **fmt)
    _common(p, "out/abc")
    p.add_argument("--method", default=None, help="discrepancy: euclidean, mmd, kl, wasserstein, cvm")
    p.add_argument("--mode", choices=("summaries", "full"), help="compare summaries or the full series")
    p.add_argument("--quantile", type=float, help="acceptance quantile in (0, 1]")
    p.add_argument("--n-sims", type=int, dest="n_sims", help="number of prior draws")

    p = sub.add_parser("bsl", help="Bayesian synthetic likelihood MCMC", **fmt)
    _common(p, "out/bsl")
    _chain_flags(p)

    p = sub.add_parser("rbsl", help="robust BSL with adjustment parameters", **fmt)
    _common(p, "out/rbsl")
    _chain_flags(p)
    p.add_argument("--method", default=None, help="rbsl-m (mean shift, default) or rbsl-v (variance inflation)")
    p.add_argument("--lambda", type=float, dest="lam", help="adjustment prior parameter (default 0.5)")

    p = sub.add_parser("diagnose", help="predictive checks for a finished run directory", **fmt)
    p.add_argument("--out", metavar="DIR", required=True, help="run directory holding summary.json")
    p.add_argument("--seed", type=int)
    p.add_argument("--n-rep", type=int, dest="n_rep")

    p = sub.add_parser("suite", help="run the full benchmark suite", **fmt)
    p.add_argument("--out", metavar="DIR", default="out/suite")
    p.add_argument("--seed", type=int, default=12345)
    p.add_argument("--scale", choices=sorted(bench.BUDGETS), default="full")
    p.add_argument("--workers", type=int, default=None)
    return parser


def _run(args) -> dict:
    cmd = args.command
    if cmd == "simulate":
        stream = RngStream(args.seed).child(bench.DATA_STREAM)
        if args.model == "sv":
            y = simulate_sv(SvParams(*BENCHMARK_SV), args.T, stream)
        else:
            y = simulate_ma1(args.theta, args.T, stream)
        bench.atomic_write(Path(args.out), bench._csv_text(["t", "y"], [(t + 1, float(v)) for t, v in enumerate(y)]))
        return {"written": args.out, "T": int(y.size)}
    if cmd == "diagnose":
        report = bench.diagnose_run(args.out, n_rep=args.n_rep, seed=args.seed)
        return report["results"]
    if cmd == "suite":
        res = bench.reproduce_ma1_suite(args.out, args.seed, args.scale, args.workers)
        return {c["name"]: c["passed"] for c in res["assertions"]}

    overrides = {k: getattr(args, k, None) for k in (
        "seed", "data", "theta0", "n_rep", "quantile", "n_sims", "mode", "m", "iters", "proposal_scale", "lam",
    )}
    overrides["out"] = args.out
    if cmd == "abc":
        overrides["method"] = "abc"
        overrides["discrepancy"] = args.method
    elif cmd == "bsl":
        overrides["method"] = "bsl"
    else:
        method = (args.method or "rbsl-m").lower()
        if method in ("m", "v"):
            method = f"rbsl-{method}"
        if method not in ("rbsl-m", "rbsl-v"):
            raise bench.ConfigError(f"rbsl --method must be rbsl-m or rbsl-v, got {args.method!r}")
        overrides["method"] = method
    if args.config is None and args.out is None:
        overrides["out"] = f"out/{cmd}"
    cfg = bench.load_config(args.config, **overrides)
    bundle = bench.run_experiment(cfg)
    res = bundle.report["results"]
    return {
        "out": str(bundle.outdir),
        "posterior_mean": res["posterior"].get("mean"),
        "acceptance_rate": res.get("acceptance_rate"),
        "warnings": bundle.report["warnings"],
    }


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        result = _run(args)
    except (ValueError, OSError, np.linalg.LinAlgError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return 2
    print(json.dumps(result, default=bench._json_default))
    return 0


if __name__ == "__main__":
    sys.exit(main())
