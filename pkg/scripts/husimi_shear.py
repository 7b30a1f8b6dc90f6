"""Classical shear of a lossy BSV cloud: polar histograms and per-bin phase law.

Also compares the exact Husimi function of Kerr-evolved squeezed vacuum
(n_s = 4, chi t = 0.02) with a sheared, vacuum-smoothed classical cloud.

    python scripts/husimi_shear.py --out runs/shear
"""

import argparse
import math
from pathlib import Path

import numpy as np

from kerr_bsv.bsv import lossy_bsv_params_from_photons
from kerr_bsv.channels import kerr_apply
from kerr_bsv.fock import squeezed_vacuum_state
from kerr_bsv.phase_space import grid_suggest, husimi, polar_phase_profile
from kerr_bsv.scenarios import HusimiShearConfig, run_husimi_shear
from kerr_bsv.shear import add_vacuum_noise, phase_profile, sample_macroscopic_bsv, shear_map


def ridge_comparison(n_s=4.0, chi_t=0.02, n_r=16, count=10**6, seed=1):
    r = math.asinh(math.sqrt(n_s))
    state = kerr_apply(squeezed_vacuum_state(r, 200), chi_t, corotating=True)
    g = grid_suggest(state, 8, oversample=1)
    _, phase_q, weight_q = polar_phase_profile(husimi(state, g), n_r=n_r)
    cloud = sample_macroscopic_bsv(math.exp(2 * r) / 2, math.exp(-2 * r) / 2, count, seed)
    noisy = add_vacuum_noise(shear_map(cloud, chi_t), seed + 1)
    prof = phase_profile(noisy, n_r, r_max=abs(complex(g.x_max, g.p_max)) / math.sqrt(2), norm=1.0)
    return prof, phase_q, weight_q


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path("runs/shear"))
    ap.add_argument("--photons", type=float, default=1e4)
    ap.add_argument("--loss", type=float, default=0.05)
    ap.add_argument("--seed", type=int, default=2024)
    args = ap.parse_args()

    p = lossy_bsv_params_from_photons(args.photons, args.loss)
    mean_n = (p.var_max + p.var_min) / 4
    chis = [0.0, 0.3 / (2 * mean_n), 1.0 / (2 * mean_n)]
    cfg = HusimiShearConfig(p.var_max / 2, p.var_min / 2, 10**6, chis, seed=args.seed)
    summary = run_husimi_shear(cfg, args.out)
    for ct, err in summary.items():
        print(f"chi_t={ct:>10}  phi_Kerr={2 * float(ct) * mean_n:.2f}  max rel error of phase law {err:.2%}")

    prof, phase_q, weight_q = ridge_comparison()
    print("\nquantum (exact Husimi) vs classical (sheared Wigner cloud + vacuum noise), n_s=4, chi t=0.02")
    print(f"{'|a| from':>9} {'|a| to':>7} {'weight':>7} {'quantum':>9} {'classical':>10} {'rel':>7}")
    for k in range(len(phase_q)):
        if prof.counts[k] < 500:
            continue
        d = math.remainder(prof.mean_phase[k] - phase_q[k], math.pi)
        q = math.remainder(phase_q[k], math.pi)
        print(f"{prof.r_edges[k]:9.2f} {prof.r_edges[k + 1]:7.2f} {weight_q[k] / weight_q.sum():7.3f} "
              f"{q:9.4f} {q + d:10.4f} {abs(d) / abs(q):7.1%}")


if __name__ == "__main__":
    main()
