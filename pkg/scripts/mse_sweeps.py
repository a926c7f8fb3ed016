"""MSE-versus-n sweeps for the AR(1) and FBM models, written as CSV files.

    python3 scripts/mse_sweeps.py --outdir results [--trials 5000] [--workers 1]

One file per model: ar1_r0.1.csv, ..., fbm_H0.8.csv. Each uses the CLI's
CSV schema so the curves can be plotted with any external tool.
"""

import argparse
import pathlib

from shrinkcov.cli import result_to_csv, summary_table
from shrinkcov.models import CovModel
from shrinkcov.montecarlo import ExperimentConfig, run_mse_experiment

MODELS = [("ar1", r) for r in (0.1, 0.5, 0.9)] + [("fbm", h) for h in (0.6, 0.7, 0.8)]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--outdir", default="results")
    ap.add_argument("--p", type=int, default=100)
    ap.add_argument("--trials", type=int, default=5000)
    ap.add_argument("--seed", type=int, default=20100)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()

    out = pathlib.Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)
    for kind, param in MODELS:
        model = CovModel.ar1(args.p, param) if kind == "ar1" else CovModel.fbm(args.p, param)
        cfg = ExperimentConfig(model, tuple(range(6, 31, 2)), args.trials, args.seed)
        res = run_mse_experiment(cfg, workers=args.workers)
        tag = f"{kind}_{'r' if kind == 'ar1' else 'H'}{param}"
        (out / f"{tag}.csv").write_text(result_to_csv(res))
        print(f"# {model.describe()}")
        print(summary_table(res))


if __name__ == "__main__":
    main()
