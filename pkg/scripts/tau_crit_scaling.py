"""Scaling of the exact first crossing of the local bound with N.

    python3 scripts/tau_crit_scaling.py --n 50 100 200 500 1000 2000
"""

import argparse
import math

import numpy as np

from oatbell.analytic import log_gaussian_correlator, tau_crit_approx
from oatbell.bell import log2_bell_correlator_oat, tau_crit_exact


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, nargs="+", default=[8, 16, 50, 100, 200, 500, 1000, 2000])
    args = ap.parse_args()

    print(f"{'N':>6} {'tau_crit*N':>12} {'approx*N':>10} {'max|dlnE|':>10}")
    ns, taus = [], []
    for N in args.n:
        tau = tau_crit_exact(N)
        grid = np.linspace(0.5 / N, 4 / N, 200)
        gap = max(abs(log_gaussian_correlator(N, t) - log2_bell_correlator_oat(N, t) * math.log(2))
                  for t in grid)
        print(f"{N:6d} {tau * N:12.6f} {tau_crit_approx(N) * N:10.4f} {gap:10.2f}")
        ns.append(N)
        taus.append(tau)
    if len(ns) > 1:
        slope = np.polyfit(np.log(ns), np.log(taus), 1)[0]
        print(f"log-log slope of tau_crit(N): {slope:.4f}")


if __name__ == "__main__":
    main()
