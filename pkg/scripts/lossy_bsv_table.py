"""Effective squeezing, thermal photons and purity of BSV after loss, exact and large-N forms.

    python scripts/lossy_bsv_table.py [--photons 1e12] [--loss 0.05]
"""

import argparse
import math

from kerr_bsv.bsv import lossy_bsv_params_from_photons


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--photons", type=float, nargs="+", default=[1e4, 1e6, 1e8, 1e10, 1e12])
    ap.add_argument("--loss", type=float, nargs="+", default=[0.01, 0.05, 0.2])
    args = ap.parse_args()
    print(f"{'N':>8} {'R':>5} {'r':>8} {'r~':>8} {'n_th':>11} {'n_th~':>11} {'purity':>10} {'dB':>7}")
    for N in args.photons:
        for R in args.loss:
            p = lossy_bsv_params_from_photons(N, R)
            db = -10 * math.log10(p.var_min)
            print(f"{N:8.0e} {R:5.2f} {p.r:8.4f} {p.r_approx:8.4f} {p.n_th:11.4g} {p.n_th_approx:11.4g} {p.purity:10.3e} {db:7.2f}")


if __name__ == "__main__":
    main()
