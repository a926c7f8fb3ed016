"""Mean Capon output SINR versus snapshot count for the default ULA scenario.

    python3 scripts/beamformer_sweep.py [--out sinr.csv] [--dim 20] [--trials 5000]

``--dim`` sets the dimension used inside the shrinkage coefficients; the
default is 2p, the size of the stacked real problem.
"""

import argparse

from shrinkcov.beamform import UlaScenario
from shrinkcov.cli import result_to_csv, summary_table
from shrinkcov.montecarlo import CLAIRVOYANT, ExperimentConfig, run_sinr_experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default=None)
    ap.add_argument("--dim", type=int, default=None)
    ap.add_argument("--trials", type=int, default=5000)
    ap.add_argument("--seed", type=int, default=20100)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()

    methods = ("sample", "lw", "rblw", "oas", CLAIRVOYANT)
    cfg = ExperimentConfig(UlaScenario.default(), tuple(range(10, 61, 5)), args.trials, args.seed, methods, args.dim)
    res = run_sinr_experiment(cfg, workers=args.workers)
    print(summary_table(res))
    print("\nOAS - LW [dB]: " + " ".join(
        f"{n}:{res.get(n, 'oas').mean - res.get(n, 'lw').mean:+.3f}" for n in res.n_values()
    ))
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(result_to_csv(res))


if __name__ == "__main__":
    main()
