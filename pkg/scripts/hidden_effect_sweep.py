"""First-order and exact post-selected intensities versus coupling strength."""

import argparse
import math

import numpy as np

from weakmeas.exact import exact_report
from weakmeas.hilbert import FockPointerState, QubitState
from weakmeas.weak_values import postselected_intensity_first_order


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--g-max", type=float, default=0.1)
    ap.add_argument("--points", type=int, default=11)
    ap.add_argument("--alpha", type=complex, default=complex(1 / math.sqrt(2)))
    ap.add_argument("--beta", type=complex, default=complex(0, 1 / math.sqrt(2)))
    args = ap.parse_args()

    s0 = QubitState.from_unnormalized(args.alpha, args.beta)
    phi0 = FockPointerState([1 / math.sqrt(2), 1 / math.sqrt(2)])
    print("g,I_s_first,I_comp_first,I_s_exact,I_comp_exact,I_unconditional")
    for g in np.linspace(0, args.g_max, args.points):
        first = postselected_intensity_first_order(s0, phi0.amps[1], g, 1)
        ex = exact_report(s0, phi0, g, 1)
        print(f"{g:.4f},{first.i_s:.10f},{first.i_comp:.10f},{ex.i_s:.10f},"
              f"{ex.i_comp:.10f},{ex.i_total:.10f}")


if __name__ == "__main__":
    main()
