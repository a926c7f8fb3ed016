"""Mean MSE and mean shrinkage coefficient for FBM increments, H=0.9, p=100, n=20.

    python3 scripts/fbm_reference.py [--trials 5000] [--seed 20100] [--workers 1]
"""

import argparse

from shrinkcov.models import CovModel
from shrinkcov.montecarlo import ExperimentConfig, run_mse_experiment

REFERENCE = {
    "oracle": (428.9972, 0.2675),
    "oas": (475.2691, 0.3043),
    "rblw": (472.8206, 0.2856),
    "lw": (475.5840, 0.2867),
}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=5000)
    ap.add_argument("--seed", type=int, default=20100)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()

    cfg = ExperimentConfig(CovModel.fbm(100, 0.9), (20,), args.trials, args.seed, tuple(REFERENCE))
    res = run_mse_experiment(cfg, workers=args.workers)
    print(f"{'method':<8} {'MSE':>10} {'95% CI':>8} {'ref MSE':>10} {'rel':>7} {'rho':>8} {'ref rho':>8}")
    for m, (ref_mse, ref_rho) in REFERENCE.items():
        r = res.get(20, m)
        rel = (r.mean - ref_mse) / ref_mse
        print(f"{m:<8} {r.mean:>10.4f} {r.ci95:>8.3f} {ref_mse:>10.4f} {rel:>+7.2%} {r.mean_rho:>8.4f} {ref_rho:>8.4f}")


if __name__ == "__main__":
    main()
