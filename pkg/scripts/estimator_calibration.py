"""Coverage and RMSE of the coupling estimator over many seeded runs."""

import argparse
import math

import numpy as np

from weakmeas.hilbert import FockPointerState, QubitState
from weakmeas.sampling import (
    estimate_g,
    estimate_g_unconditional,
    joint_outcome_probs,
    sample_shots,
    task_seed,
)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--g", type=float, default=0.01)
    ap.add_argument("--shots", type=int, nargs="+", default=[10 ** 4, 10 ** 5, 10 ** 6])
    ap.add_argument("--seeds", type=int, default=200)
    ap.add_argument("--master-seed", type=int, default=2026)
    args = ap.parse_args()

    r = 1 / math.sqrt(2)
    s0, phi0 = QubitState(r, 1j * r), FockPointerState([r, r])
    probs = joint_outcome_probs(s0, phi0, args.g)
    print("shots,rmse,coverage_postselected,coverage_unconditional_of_zero")
    rmse = []
    for n in args.shots:
        err, cov, blind = [], 0, 0
        for k in range(args.seeds):
            rec = sample_shots(probs, n, task_seed(args.master_seed, k))
            est = estimate_g(rec, s0, 1)
            err.append(est.g_hat - args.g)
            cov += est.covers(args.g)
            blind += estimate_g_unconditional(rec, s0, phi0.amps[1], 1).covers(0.0)
        rmse.append(math.sqrt(np.mean(np.square(err))))
        print(f"{n},{rmse[-1]:.4e},{cov / args.seeds:.3f},{blind / args.seeds:.3f}")
    if len(args.shots) > 1:
        slope = np.polyfit(np.log(args.shots), np.log(rmse), 1)[0]
        print(f"# RMSE exponent: {slope:.3f}")


if __name__ == "__main__":
    main()
