"""Command-line front end: ``shrinkcov {mse,beamform,verify}``.

Exit codes: 0 success, 2 usage error, 3 runtime error, 4 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
from dataclasses import asdict, dataclass

import numpy as np

from .beamform import UlaScenario
from .errors import ShrinkageError
from .estimators import Method
from .models import CovModel, ar1_cov, fbm_cov
from .montecarlo import (
    CLAIRVOYANT,
    ExperimentConfig,
    ExperimentResult,
    ResultRow,
    run_mse_experiment,
    run_sinr_experiment,
    verify_haar_moments,
    verify_norm_moment,
    verify_wishart_moments,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_RUNTIME = 3
EXIT_VERIFY = 4

DEFAULT_SEED = 20100
MSE_COLUMNS = ("n", "method", "mean_mse", "ci95", "mean_rho")
SINR_COLUMNS = ("n", "method", "mean_sinr_db", "ci95")
MSE_METHODS = ("oracle", "oas", "rblw", "lw")
SINR_METHODS = ("sample", "lw", "rblw", "oas", CLAIRVOYANT)

log = logging.getLogger("shrinkcov")


@dataclass
class CliConfig:
    subcommand: str
    p: int
    n_grid: tuple[int, ...]
    trials: int
    seed: int
    methods: tuple[str, ...] = ()
    model: str | None = None
    r: float | None = None
    H: float | None = None
    diag: tuple[float, ...] | None = None
    check: str | None = None
    theta_s: float = 20.0
    theta_i1: float = -30.0
    gamma: float = 0.9
    snr_db: float = 10.0
    inr_db: float = 15.0
    dim_override: int | None = None
    out: str | None = None
    fmt: str = "csv"
    workers: int = 1


def parse_n_grid(text: str) -> tuple[int, ...]:
    """``min:max:step`` (inclusive max, incomplete trailing step dropped),
    a comma list, or a single integer."""
    try:
        if ":" in text:
            parts = [int(t) for t in text.split(":")]
            if len(parts) == 2:
                parts.append(1)
            lo, hi, step = parts
            if step < 1 or hi < lo:
                raise ValueError
            grid = tuple(range(lo, hi + 1, step))
        else:
            grid = tuple(int(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid n grid {text!r}; use min:max:step, a,b,c or a single integer")
    if not grid or min(grid) < 1:
        raise argparse.ArgumentTypeError(f"n values must be >= 1, got {text!r}")
    return grid


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _methods(text: str) -> tuple[str, ...]:
    names = tuple(t.strip().lower() for t in text.split(",") if t.strip())
    valid = {m.value for m in Method} | {CLAIRVOYANT}
    bad = [m for m in names if m not in valid]
    if bad or not names:
        raise argparse.ArgumentTypeError(f"unknown method(s) {bad}; choose from {sorted(valid)}")
    return names


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(t) for t in text.split(","))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="shrinkcov", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(sp, p, n, trials):
        sp.add_argument("--p", type=_positive_int, default=p, help=f"dimension (default {p})")
        sp.add_argument("--n", dest="n_grid", type=parse_n_grid if isinstance(n, str) else _positive_int,
                        default=parse_n_grid(n) if isinstance(n, str) else n)
        sp.add_argument("--trials", type=_positive_int, default=trials)
        sp.add_argument("--seed", type=int, default=DEFAULT_SEED)
        sp.add_argument("--out", default=None, help="write results to this path")
        sp.add_argument("--format", dest="fmt", choices=("csv", "json"), default=None,
                        help="output format (default: from --out suffix, else csv)")
        sp.add_argument("--workers", type=_positive_int, default=os.cpu_count() or 1,
                        help="parallel worker processes; results do not depend on it")

    mse = sub.add_parser("mse", help="MSE sweep over n for a covariance model")
    common(mse, 100, "6:30:2", 5000)
    mse.add_argument("--model", choices=("ar1", "fbm"), default="ar1")
    mse.add_argument("--r", type=float, default=None, help="AR(1) coefficient, |r| < 1")
    mse.add_argument("--H", type=float, default=None, help="Hurst exponent in [0.5, 1]")
    mse.add_argument("--methods", type=_methods, default=MSE_METHODS)

    bf = sub.add_parser("beamform", help="Capon beamformer SINR sweep over n")
    common(bf, 10, "10:60:5", 5000)
    bf.add_argument("--theta-s", type=float, default=20.0, help="signal DOA in degrees")
    bf.add_argument("--theta-i1", type=float, default=-30.0, help="first interferer DOA in degrees")
    bf.add_argument("--gamma", type=float, default=0.9, help="second interferer offset in beamwidths")
    bf.add_argument("--snr-db", type=float, default=10.0)
    bf.add_argument("--inr-db", type=float, default=15.0)
    bf.add_argument("--dim-override", type=_positive_int, default=None,
                    help="dimension used in the shrinkage coefficients (default 2p)")
    bf.add_argument("--methods", type=_methods, default=SINR_METHODS)

    ver = sub.add_parser("verify", help="Monte Carlo check of moment identities")
    common(ver, 5, 3, 100_000)
    ver.add_argument("--check", choices=("wishart", "haar", "norm"), required=True)
    ver.add_argument("--model", choices=("identity", "ar1", "fbm", "diag"), default="identity")
    ver.add_argument("--r", type=float, default=None)
    ver.add_argument("--H", type=float, default=None)
    ver.add_argument("--diag", type=_floats, default=None, help="comma-separated diagonal, e.g. 2,1")
    return parser


def parse_args(argv: list[str] | None = None) -> CliConfig:
    parser = build_parser()
    ns = parser.parse_args(argv)
    if ns.verbose:
        logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    fmt = ns.fmt or ("json" if ns.out and ns.out.endswith(".json") else "csv")
    n_grid = ns.n_grid if isinstance(ns.n_grid, tuple) else (ns.n_grid,)
    cfg = CliConfig(ns.subcommand, ns.p, n_grid, ns.trials, ns.seed, out=ns.out, fmt=fmt, workers=ns.workers)

    if ns.subcommand == "mse":
        cfg.methods, cfg.model = ns.methods, ns.model
        if CLAIRVOYANT in cfg.methods:
            parser.error("--methods: 'clairvoyant' only applies to beamform; use 'oracle'")
        if ns.model == "ar1":
            cfg.r = 0.5 if ns.r is None else ns.r
            if not abs(cfg.r) < 1:
                parser.error(f"--r must satisfy |r| < 1, got {cfg.r}")
        else:
            cfg.H = 0.7 if ns.H is None else ns.H
            if not 0.5 <= cfg.H <= 1:
                parser.error(f"--H must lie in [0.5, 1], got {cfg.H}")
        if cfg.p < 2:
            parser.error("--p must be at least 2")
    elif ns.subcommand == "beamform":
        cfg.methods = ns.methods
        if "oracle" in cfg.methods:
            parser.error("--methods: use 'clairvoyant' for the true-covariance beamformer")
        cfg.theta_s, cfg.theta_i1, cfg.gamma = ns.theta_s, ns.theta_i1, ns.gamma
        cfg.snr_db, cfg.inr_db, cfg.dim_override = ns.snr_db, ns.inr_db, ns.dim_override
    else:
        cfg.check, cfg.model, cfg.r, cfg.H, cfg.diag = ns.check, ns.model, ns.r, ns.H, ns.diag
        if ns.trials < 10_000:
            parser.error("--trials must be at least 10000 for verification")
        if cfg.check != "haar":
            if cfg.model == "ar1" and (cfg.r is None or not abs(cfg.r) < 1):
                parser.error("--model ar1 needs --r with |r| < 1")
            if cfg.model == "fbm" and (cfg.H is None or not 0.5 <= cfg.H <= 1):
                parser.error("--model fbm needs --H in [0.5, 1]")
            if cfg.model == "diag":
                if not cfg.diag or min(cfg.diag) < 0:
                    parser.error("--model diag needs --diag with non-negative entries")
                cfg.p = len(cfg.diag)
    return cfg


# ---------------------------------------------------------------------------
# Serialization


def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(x)
    return str(x)


def result_to_csv(result: ExperimentResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if result.kind == "mse":
        w.writerow(MSE_COLUMNS)
        for r in result.rows:
            w.writerow([r.n, r.method, _fmt(r.mean), _fmt(r.ci95), _fmt(r.mean_rho)])
    else:
        w.writerow(SINR_COLUMNS)
        for r in result.rows:
            w.writerow([r.n, r.method, _fmt(r.mean), _fmt(r.ci95)])
    return buf.getvalue()


def result_from_csv(text: str) -> ExperimentResult:
    reader = csv.DictReader(io.StringIO(text))
    kind = "mse" if "mean_mse" in (reader.fieldnames or ()) else "sinr"
    result = ExperimentResult(kind)
    for row in reader:
        mean = float(row["mean_mse" if kind == "mse" else "mean_sinr_db"])
        rho = float(row["mean_rho"]) if kind == "mse" else math.nan
        result.rows.append(ResultRow(int(row["n"]), row["method"], mean, float(row["ci95"]), rho, -1))
    return result


def _json_safe(x):
    if isinstance(x, float) and not math.isfinite(x):
        return None
    if isinstance(x, tuple):
        return list(x)
    return x


def result_to_json(result: ExperimentResult, cfg: CliConfig) -> str:
    rows = []
    for r in result.rows:
        row = {"n": r.n, "method": r.method}
        if result.kind == "mse":
            row.update(mean_mse=r.mean, ci95=r.ci95, mean_rho=r.mean_rho)
        else:
            row.update(mean_sinr_db=r.mean, ci95=r.ci95)
        row.update(trials_used=r.trials_used)
        rows.append({k: _json_safe(v) for k, v in row.items()})
    config = {k: _json_safe(v) for k, v in asdict(cfg).items() if k not in ("out", "workers")}
    return json.dumps({"config": config, "results": rows}, indent=2) + "\n"


def summary_table(result: ExperimentResult) -> str:
    label = "MSE" if result.kind == "mse" else "SINR [dB]"
    methods = result.methods()
    lines = [f"{'n':>4}  " + "  ".join(f"{m:>22}" for m in methods), f"      ({label}: mean +/- 95% CI)"]
    for n in result.n_values():
        cells = []
        for m in methods:
            r = result.get(n, m)
            cells.append(f"{'n/a':>22}" if r.trials_used == 0 else f"{r.mean:>12.4f} +/- {r.ci95:<7.4f}")
        lines.append(f"{n:>4}  " + "  ".join(cells))
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# Running


def _verify_sigma(cfg: CliConfig) -> np.ndarray:
    if cfg.model == "ar1":
        return ar1_cov(cfg.p, cfg.r)
    if cfg.model == "fbm":
        return fbm_cov(cfg.p, cfg.H)
    if cfg.model == "diag":
        return np.diag(cfg.diag)
    return np.eye(cfg.p)


def _write(path: str, text: str) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write results to {path}: {exc.strerror or exc}") from exc


def run(cfg: CliConfig, stdout=None) -> int:
    stdout = stdout or sys.stdout
    try:
        if cfg.subcommand == "verify":
            return _run_verify(cfg, stdout)
        if cfg.subcommand == "mse":
            model = CovModel.ar1(cfg.p, cfg.r) if cfg.model == "ar1" else CovModel.fbm(cfg.p, cfg.H)
            exp = ExperimentConfig(model, cfg.n_grid, cfg.trials, cfg.seed, cfg.methods)
            result = run_mse_experiment(exp, workers=cfg.workers)
            header = f"# {model.describe()}, trials={cfg.trials}, seed={cfg.seed}"
        else:
            scenario = UlaScenario.default(cfg.p, cfg.theta_s, cfg.theta_i1, cfg.gamma, cfg.snr_db, cfg.inr_db)
            exp = ExperimentConfig(scenario, cfg.n_grid, cfg.trials, cfg.seed, cfg.methods, cfg.dim_override)
            result = run_sinr_experiment(exp, workers=cfg.workers)
            header = f"# ULA p={cfg.p}, trials={cfg.trials}, seed={cfg.seed}"
        print(header, file=stdout)
        print(summary_table(result), file=stdout)
        if cfg.out:
            text = result_to_json(result, cfg) if cfg.fmt == "json" else result_to_csv(result)
            _write(cfg.out, text)
            print(f"wrote {cfg.out}", file=stdout)
        return EXIT_OK
    except (ShrinkageError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


def _run_verify(cfg: CliConfig, stdout) -> int:
    n = cfg.n_grid[0]
    if cfg.check == "haar":
        report = verify_haar_moments(cfg.p, n, cfg.trials, cfg.seed)
    elif cfg.check == "wishart":
        report = verify_wishart_moments(_verify_sigma(cfg), n, cfg.trials, cfg.seed)
    else:
        report = verify_norm_moment(_verify_sigma(cfg), n, cfg.trials, cfg.seed)
    print(report.title, file=stdout)
    for c in report.checks:
        status = "PASS" if c.passed else "FAIL"
        print(f"  {status}  {c.name:<44} est={c.estimate:.6g} target={c.target:.6g} z={c.z:+.3f}", file=stdout)
    if cfg.out:
        payload = {"config": {k: _json_safe(v) for k, v in asdict(cfg).items() if k not in ("out", "workers")},
                   "results": [{k: _json_safe(v) for k, v in asdict(c).items()} for c in report.checks]}
        _write(cfg.out, json.dumps(payload, indent=2) + "\n")
    return EXIT_OK if report.passed else EXIT_VERIFY


def main(argv: list[str] | None = None) -> int:
    try:
        cfg = parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
