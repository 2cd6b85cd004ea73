"""Infidelity of the effective coupling against the full sideband evolution.

For each detuning ratio the script reports the infidelity at the requested
g0 t and its average over one fast-oscillation period starting there.  The
point value oscillates with the pulse area; the average tracks the
(omega0 / delta)^2 envelope.
"""

import argparse
import math

import numpy as np

from weakmeas.hilbert import FockPointerState, QubitState
from weakmeas.ion import PulseSpec, effective_evolve, jc_evolve, prepare_register, stark_compensation


def infidelity(reg, omega0, delta, t):
    g0 = omega0 ** 2 / delta
    pulse = PulseSpec("red_sideband_ion1", omega0, t, detuning=delta)
    full = stark_compensation(jc_evolve(reg, pulse), g0, t)
    eff = effective_evolve(reg, g0, t)
    return 1 - abs(np.vdot(eff.state.amps, full.state.amps)) ** 2


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--ratios", type=float, nargs="+", default=[10, 20, 40, 80])
    ap.add_argument("--g0t", type=float, default=0.05)
    ap.add_argument("--n-max", type=int, default=8)
    ap.add_argument("--samples", type=int, default=200)
    args = ap.parse_args()

    s0 = QubitState(1 / math.sqrt(2), 1j / math.sqrt(2))
    reg = prepare_register(s0, FockPointerState([0.6, 0.8]).padded(args.n_max))
    omega0 = 1.0
    ratios = np.array(args.ratios)
    point, averaged = [], []
    print("delta/omega0,infidelity,period_averaged")
    for r in ratios:
        delta = r * omega0
        t0 = args.g0t * delta / omega0 ** 2
        period = 2 * math.pi / math.hypot(omega0, delta / 2)
        ts = np.linspace(t0, t0 + period, args.samples, endpoint=False)
        point.append(infidelity(reg, omega0, delta, t0))
        averaged.append(np.mean([infidelity(reg, omega0, delta, t) for t in ts]))
        print(f"{r:g},{point[-1]:.6e},{averaged[-1]:.6e}")
    for name, vals in (("point", point), ("period-averaged", averaged)):
        p = -np.polyfit(np.log(ratios), np.log(vals), 1)[0]
        print(f"# fitted exponent ({name}): {p:.3f}")


if __name__ == "__main__":
    main()
