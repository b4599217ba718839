"""Experiment runner for the misspecified MA(1) benchmark.

An experiment is described by an :class:`ExperimentConfig` (loadable from an
INI-style file) and writes ``samples.csv``, ``summary.json`` and
``predictive.csv`` into its output directory.  :func:`reproduce_ma1_suite`
runs the full set of benchmark experiments and records the acceptance
checks in ``assertions.json``.
"""
from __future__ import annotations

import configparser
import csv
import dataclasses
import io
import json
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .abc import AbcConfig, acceptance_decay, rejection_abc
from .diagnostics import count_modes, posterior_mode, posterior_predictive, prior_posterior_shift
from .models import BENCHMARK_SV, SvParams, UniformPrior, simulate_ma1, simulate_sv
from .rng import RngStream
from .robust import GammaPrior, rbsl_mcmc
from .summaries import autocov_summaries
from .synthetic import bsl_mcmc

METHODS = ("abc", "bsl", "rbsl-m", "rbsl-v")
REPORT_KEYS = ("config", "seed", "results", "warnings")
QUANTILE_SWEEP = (0.1, 0.01, 0.001)

SAMPLES_SCHEMA = "draw_index, theta_1..theta_p, [gamma_1..gamma_d], then discrepancy (abc) or loglik (bsl/rbsl)"
PREDICTIVE_SCHEMA = "row, theta_1..theta_p, summary_1..summary_d"

# Stream layout under the experiment seed.
DATA_STREAM = 0
METHOD_STREAM = 1
PREDICTIVE_STREAM = 2
SHIFT_STREAM = 3


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    method: str = "abc"
    data: str = "sv"
    theta0: float = 0.5
    T: int = 100
    seed: int = 1
    out: str = "out"
    # abc
    discrepancy: str = "euclidean"
    mode: str = "summaries"
    n_sims: int = 100_000
    quantile: float = 0.001
    mmd_bandwidth: float | None = None
    kl_k: int = 1
    # bsl / rbsl
    m: int = 200
    iters: int = 50_000
    proposal_scale: float = 0.1
    lam: float = 0.5
    # diagnostics
    n_rep: int = 1_000

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.method not in METHODS:
            raise ConfigError(f"unknown method {self.method!r}; expected one of {', '.join(METHODS)}")
        for name in ("T", "n_sims", "m", "iters", "n_rep"):
            value = getattr(self, name)
            if not isinstance(value, (int, np.integer)) or value < (0 if name == "n_rep" else 1):
                raise ConfigError(f"{name} must be a positive integer, got {value!r}")
        if self.T < 2:
            raise ConfigError("T must be >= 2")
        if not 0 < self.quantile <= 1:
            raise ConfigError("quantile must lie in (0, 1]")
        if not (self.proposal_scale > 0 and self.lam > 0):
            raise ConfigError("proposal_scale and lam must be positive")
        if not 0 <= int(self.seed) < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        if self.data not in ("sv", "ma1") and not Path(self.data).is_file():
            raise ConfigError(f"data must be 'sv', 'ma1' or an existing file, got {self.data!r}")
        if self.method == "abc":
            try:
                self.abc_config()
            except ValueError as exc:
                raise ConfigError(str(exc)) from None

    def abc_config(self) -> AbcConfig:
        return AbcConfig(
            num_sims=self.n_sims,
            quantile=self.quantile,
            discrepancy=self.discrepancy,
            mode=self.mode,
            kl_k=self.kl_k,
            mmd_bandwidth=self.mmd_bandwidth,
        )

    def echo(self) -> dict:
        d = dataclasses.asdict(self)
        if self.method != "abc":
            for key in ("discrepancy", "mode", "n_sims", "quantile", "mmd_bandwidth", "kl_k"):
                d.pop(key)
        else:
            for key in ("m", "iters", "proposal_scale", "lam"):
                d.pop(key)
        return d


_FIELDS = {f.name: f for f in dataclasses.fields(ExperimentConfig)}


def _coerce(name: str, raw):
    if name not in _FIELDS:
        raise ConfigError(f"unknown config key {name!r}")
    if raw is None or isinstance(raw, (int, float)) and not isinstance(raw, bool):
        return raw
    text = str(raw).strip()
    default = _FIELDS[name].default
    if name == "mmd_bandwidth":
        return None if text.lower() in ("", "none", "median") else float(text)
    try:
        if isinstance(default, bool):
            return text.lower() in ("1", "true", "yes")
        if isinstance(default, int):
            return int(float(text)) if "e" in text.lower() else int(text)
        if isinstance(default, float):
            return float(text)
    except ValueError:
        raise ConfigError(f"bad value for {name}: {text!r}") from None
    return text


def load_config(path=None, **overrides) -> ExperimentConfig:
    """Read an INI-style config; keys may sit in any section.

    Keyword overrides (e.g. from CLI flags) win over file values; ``None``
    overrides are ignored.
    """
    values = {}
    if path is not None:
        parser = configparser.ConfigParser()
        if not parser.read(path, encoding="utf-8"):
            raise ConfigError(f"cannot read config file {path}")
        for section in parser.sections():
            for key, raw in parser.items(section):
                values[key.replace("-", "_")] = raw
    values.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentConfig(**{k: _coerce(k, v) for k, v in values.items()})


def observed_data(cfg: ExperimentConfig) -> np.ndarray:
    stream = RngStream(int(cfg.seed)).child(DATA_STREAM)
    if cfg.data == "sv":
        return simulate_sv(SvParams(*BENCHMARK_SV), cfg.T, stream)
    if cfg.data == "ma1":
        return simulate_ma1(cfg.theta0, cfg.T, stream)
    return read_series(cfg.data)


def read_series(path) -> np.ndarray:
    """Whitespace/comma separated numbers; a non-numeric header line is skipped."""
    values = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            for tok in line.replace(",", " ").split():
                try:
                    values.append(float(tok))
                except ValueError:
                    if values:
                        raise ConfigError(f"non-numeric value {tok!r} in {path}") from None
    series = np.asarray(values)
    if series.size < 2 or not np.all(np.isfinite(series)):
        raise ConfigError(f"{path} must hold at least two finite values")
    return series


def atomic_write(path: Path, text: str):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def _posterior_stats(draws: np.ndarray) -> dict:
    draws = np.asarray(draws, float)
    if draws.size == 0:
        return {"n": 0}
    out = {
        "n": int(draws.shape[0]),
        "mean": draws.mean(axis=0).tolist(),
        "std": draws.std(axis=0, ddof=1).tolist() if draws.shape[0] > 1 else [0.0] * draws.shape[1],
        "quantiles": {
            str(q): np.quantile(draws, q, axis=0).tolist() for q in (0.025, 0.25, 0.5, 0.75, 0.975)
        },
    }
    out["mode"] = [posterior_mode(draws[:, j]) for j in range(draws.shape[1])]
    return out


@dataclass
class Bundle:
    """In-memory result of one experiment (also written to disk)."""

    outdir: Path
    report: dict
    observed: np.ndarray
    posterior: np.ndarray
    gammas: np.ndarray | None = None
    predictive: object = None
    extra: dict = field(default_factory=dict)


def run_experiment(cfg: ExperimentConfig, write: bool = True) -> Bundle:
    cfg.validate()
    seed = int(cfg.seed)
    root = RngStream(seed)
    y = observed_data(cfg)
    s_obs = autocov_summaries(y)
    prior = UniformPrior()
    warnings: list[str] = []
    results: dict = {"observed_summaries": s_obs.tolist()}
    gammas = None

    if cfg.method == "abc":
        res = rejection_abc(cfg.abc_config(), y, prior, root.child(METHOD_STREAM))
        warnings += res.warnings
        posterior = res.accepted_thetas
        header = ["draw_index", "theta_1", "discrepancy"]
        rows = [(i, th[0], d) for i, (th, d) in enumerate(zip(res.thetas, res.discrepancies))]
        results.update(
            epsilon=res.epsilon,
            acceptance_rate=res.acceptance_rate,
            n_accepted=int(res.accepted.sum()),
            **res.info,
        )
        results["quantile_sweep"] = {}
        for q in QUANTILE_SWEEP:
            acc = res.at_quantile(q).accepted_thetas
            results["quantile_sweep"][str(q)] = _posterior_stats(acc) if len(acc) else {"n": 0}
        grid = np.linspace(0.0, np.quantile(res.discrepancies, 0.1), 21)
        decay = acceptance_decay(res.discrepancies, grid)
        results["acceptance_decay"] = {
            "epsilons": decay.epsilons.tolist(),
            "acceptance": decay.acceptance.tolist(),
            "linearity_deviation": decay.linearity_deviation,
        }
        extra = {"abc": res}
    else:
        if cfg.method == "bsl":
            chain = bsl_mcmc(prior, s_obs, cfg.m, cfg.iters, cfg.proposal_scale, root.child(METHOD_STREAM))
        else:
            variant = cfg.method[-1].upper()
            gp = GammaPrior("laplace" if variant == "M" else "exponential", cfg.lam)
            chain = rbsl_mcmc(variant, prior, gp, s_obs, cfg.m, cfg.iters, cfg.proposal_scale, root.child(METHOD_STREAM))
            gammas = chain.gamma
            results["gamma_prior"] = {"variant": gp.variant, "lambda": gp.lam}
            results["gamma_posterior"] = _posterior_stats(gammas)
            results["gamma_prior_ks"] = [
                prior_posterior_shift(gammas[:, j], gp, root.child(SHIFT_STREAM, j)) for j in range(gammas.shape[1])
            ]
        posterior = chain.theta
        results.update(
            acceptance_rate=chain.acceptance_rate,
            burn_in=chain.burn_in,
            final_proposal_scale=chain.proposal_scale,
            n_modes=count_modes(posterior[:, 0]),
        )
        header = ["draw_index", "theta_1"]
        if chain.gammas is not None:
            header += [f"gamma_{j + 1}" for j in range(chain.gammas.shape[1])]
        header.append("loglik")
        rows = []
        for i in range(len(chain)):
            row = [i, chain.thetas[i, 0]]
            if chain.gammas is not None:
                row += list(chain.gammas[i])
            rows.append(row + [chain.logliks[i]])
        extra = {"chain": chain}

    results["posterior"] = _posterior_stats(posterior)
    if len(posterior) and cfg.n_rep > 0:
        table = posterior_predictive(posterior, cfg.n_rep, root.child(PREDICTIVE_STREAM), s_obs)
        results["predictive"] = {
            "intervals_95": table.intervals.tolist(),
            "observed_covered": table.covered.tolist(),
        }
    else:
        table = None
        if cfg.n_rep > 0:
            warnings.append("no posterior draws; predictive check skipped")

    report = {"config": cfg.echo(), "seed": seed, "results": results, "warnings": warnings}
    outdir = Path(cfg.out)
    if write:
        atomic_write(outdir / "samples.csv", _csv_text(header, rows))
        atomic_write(outdir / "summary.json", json.dumps(report, indent=2, default=_json_default) + "\n")
        pred_rows = [] if table is None else [
            [i, *th, *s] for i, (th, s) in enumerate(zip(table.thetas, table.summaries))
        ]
        pred_header = ["row", "theta_1"] + [f"summary_{j + 1}" for j in range(s_obs.size)]
        atomic_write(outdir / "predictive.csv", _csv_text(pred_header, pred_rows))
    return Bundle(outdir, report, y, posterior, gammas, table, extra)


def _json_default(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serialisable: {type(obj).__name__}")


def read_samples(path) -> tuple[list[str], np.ndarray]:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[float(v) for v in row] for row in reader]
    return header, np.asarray(rows, float).reshape(len(rows), len(header))


def diagnose_run(rundir, n_rep: int | None = None, seed: int | None = None) -> dict:
    """Recompute predictive checks and adjustment-parameter shifts of a finished run.

    Reads ``summary.json`` and ``samples.csv`` from ``rundir`` and writes
    ``diagnostics.json`` plus a fresh ``predictive.csv``.
    """
    rundir = Path(rundir)
    try:
        summary = json.loads((rundir / "summary.json").read_text(encoding="utf-8"))
        header, samples = read_samples(rundir / "samples.csv")
    except FileNotFoundError as exc:
        raise ConfigError(f"missing run output: {exc.filename}") from None
    cfg = summary["config"]
    seed = int(summary["seed"] if seed is None else seed)
    n_rep = int(cfg.get("n_rep", 1000) if n_rep is None else n_rep)
    s_obs = np.asarray(summary["results"]["observed_summaries"], float)
    root = RngStream(seed)

    theta_cols = [i for i, h in enumerate(header) if h.startswith("theta_")]
    gamma_cols = [i for i, h in enumerate(header) if h.startswith("gamma_")]
    if cfg["method"] == "abc":
        eps = summary["results"]["epsilon"]
        keep = samples[:, header.index("discrepancy")] <= eps
    else:
        keep = np.arange(len(samples)) >= summary["results"]["burn_in"]
    post = samples[keep][:, theta_cols]

    results = {"posterior": _posterior_stats(post), "n_modes": count_modes(post[:, 0]) if len(post) else 0}
    warnings = []
    rows = []
    if len(post) and n_rep > 0:
        table = posterior_predictive(post, n_rep, root.child(PREDICTIVE_STREAM), s_obs)
        results["predictive"] = {"intervals_95": table.intervals.tolist(), "observed_covered": table.covered.tolist()}
        rows = [[i, *th, *s] for i, (th, s) in enumerate(zip(table.thetas, table.summaries))]
    else:
        warnings.append("no posterior draws; predictive check skipped")
    if gamma_cols:
        gp = summary["results"]["gamma_prior"]
        prior = GammaPrior(gp["variant"], gp["lambda"])
        results["gamma_prior_ks"] = [
            prior_posterior_shift(samples[keep][:, c], prior, root.child(SHIFT_STREAM, j))
            for j, c in enumerate(gamma_cols)
        ]
    header_out = ["row"] + [f"theta_{j + 1}" for j in range(len(theta_cols))]
    header_out += [f"summary_{j + 1}" for j in range(s_obs.size)]
    atomic_write(rundir / "predictive.csv", _csv_text(header_out, rows))
    report = {"config": cfg, "seed": seed, "results": results, "warnings": warnings}
    atomic_write(rundir / "diagnostics.json", json.dumps(report, indent=2, default=_json_default) + "\n")
    return report


# ---------------------------------------------------------------------------
# Benchmark suite

BUDGETS = {
    "full": {"abc_sims": 1_000_000, "full_sims": 20_000, "m": 200, "iters": 50_000, "n_rep": 1_000},
    "quick": {"abc_sims": 50_000, "full_sims": 2_000, "m": 50, "iters": 2_000, "n_rep": 200},
}


def _suite_jobs(outdir: Path, seed: int, budget: dict) -> dict:
    base = dict(seed=seed, T=100, n_rep=budget["n_rep"])
    chain = dict(m=budget["m"], iters=budget["iters"])
    jobs = {
        "fig2_abc": dict(method="abc", data="sv", n_sims=budget["abc_sims"], quantile=0.001),
        "fig3_bsl": dict(method="bsl", data="sv", **chain),
        "fig6_rbsl_m": dict(method="rbsl-m", data="sv", **chain),
        "fig6_rbsl_v": dict(method="rbsl-v", data="sv", **chain),
        "fig8_rbsl_m_wellspecified": dict(method="rbsl-m", data="ma1", theta0=0.5, **chain),
    }
    for kind in ("euclidean", "kl", "mmd"):
        jobs[f"fig5_full_data/{kind}"] = dict(
            method="abc", data="sv", mode="full", discrepancy=kind, n_sims=budget["full_sims"], quantile=0.01
        )
    return {name: ExperimentConfig(out=str(outdir / name), **base, **spec) for name, spec in jobs.items()}


def _run_job(cfg: ExperimentConfig) -> Bundle:
    return run_experiment(cfg)


def _check(name, value, passed):
    return {"name": name, "value": _json_default(value) if isinstance(value, np.generic) else value, "passed": bool(passed)}


def suite_assertions(bundles: dict) -> list[dict]:
    """Acceptance checks computed from the suite's experiment bundles."""
    out = []
    abc = bundles["fig2_abc"].extra["abc"]
    post_01 = abc.at_quantile(0.001).accepted_thetas[:, 0]
    post_1 = abc.at_quantile(0.01).accepted_thetas[:, 0]
    mean_abs = abs(float(post_01.mean()))
    out.append(_check("abc_pseudo_true_mean_abs < 0.1", mean_abs, mean_abs < 0.1))
    out.append(_check("abc_std_q0.1% < abc_std_q1%", [float(post_01.std()), float(post_1.std())], post_01.std() < post_1.std()))

    bsl = bundles["fig3_bsl"]
    frac = float(np.mean(np.abs(bsl.posterior[:, 0]) > 0.2))
    out.append(_check("bsl_mass_abs_theta_gt_0.2 > 0.5", frac, frac > 0.5))
    excluded0 = not bool(bsl.predictive.covered[0])
    out.append(_check("bsl_predictive_excludes_obs_zeta0", excluded0, excluded0))

    for key, label in (("fig6_rbsl_m", "rbsl_m"), ("fig6_rbsl_v", "rbsl_v")):
        b = bundles[key]
        mode = posterior_mode(b.posterior[:, 0])
        out.append(_check(f"{label}_mode_abs < 0.15", abs(mode), abs(mode) < 0.15))
        cov1 = bool(b.predictive.covered[1])
        out.append(_check(f"{label}_predictive_covers_obs_zeta1", cov1, cov1))
        ks = b.report["results"]["gamma_prior_ks"]
        out.append(_check(f"{label}_ks_gamma1 > 0.25", ks[0], ks[0] > 0.25))
        out.append(_check(f"{label}_ks_gamma2 < 0.1", ks[1], ks[1] < 0.1))

    well = bundles["fig8_rbsl_m_wellspecified"]
    ks = well.report["results"]["gamma_prior_ks"]
    out.append(_check("wellspecified_ks_gamma < 0.1", ks, max(ks) < 0.1))
    lo, hi = np.quantile(well.posterior[:, 0], [0.025, 0.975])
    out.append(_check("wellspecified_theta_95ci_covers_0.5", [float(lo), float(hi)], lo <= 0.5 <= hi))

    stds = {k: float(bundles[f"fig5_full_data/{k}"].posterior[:, 0].std()) for k in ("euclidean", "kl", "mmd")}
    means = {k: float(bundles[f"fig5_full_data/{k}"].posterior[:, 0].mean()) for k in ("euclidean", "kl", "mmd")}
    out.append(_check("full_data_std_kl > std_mmd", stds, stds["kl"] > stds["mmd"]))
    out.append(_check("full_data_std_kl > std_euclidean", stds, stds["kl"] > stds["euclidean"]))
    out.append(_check("full_data_mean_abs_mmd_euclidean < 0.1", means, abs(means["mmd"]) < 0.1 and abs(means["euclidean"]) < 0.1))
    return out


def reproduce_ma1_suite(outdir, seed: int = 12345, scale: str = "full", workers: int | None = None) -> dict:
    """Run every benchmark experiment and write ``assertions.json``.

    Sub-experiments run in separate worker processes, each with its own
    stream derived from ``seed``.  ``scale="quick"`` shrinks every budget
    for smoke testing.
    """
    if scale not in BUDGETS:
        raise ValueError(f"scale must be one of {sorted(BUDGETS)}")
    outdir = Path(outdir)
    jobs = _suite_jobs(outdir, int(seed), BUDGETS[scale])
    workers = workers if workers is not None else min(len(jobs), os.cpu_count() or 1)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            bundles = dict(zip(jobs, pool.map(_run_job, jobs.values())))
    else:
        bundles = {name: _run_job(cfg) for name, cfg in jobs.items()}

    checks = suite_assertions(bundles)
    report = {
        "config": {"scale": scale, "budgets": BUDGETS[scale], "experiments": sorted(jobs)},
        "seed": int(seed),
        "results": checks,
        "warnings": [w for b in bundles.values() for w in b.report["warnings"]],
    }
    atomic_write(outdir / "assertions.json", json.dumps(report, indent=2) + "\n")
    return {"bundles": bundles, "assertions": checks}
