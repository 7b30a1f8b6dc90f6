"""f-2f round trip accuracy, spectral mode analysis and Gamma-law photon statistics.

    python scripts/f2f_statistics.py --out runs/f2f [--shots 7000] [--noise 0.0]
"""

import argparse
from pathlib import Path

from kerr_bsv.bsv import lossy_bsv_params_from_photons
from kerr_bsv.f2f import photon_statistics
from kerr_bsv.scenarios import F2fRoundtripConfig, ModeAnalysisConfig, run_f2f_roundtrip, run_mode_analysis
from kerr_bsv.shear import sample_macroscopic_bsv


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path("runs/f2f"))
    ap.add_argument("--shots", type=int, default=7000)
    ap.add_argument("--noise", type=float, default=0.0)
    ap.add_argument("--seed", type=int, default=11)
    args = ap.parse_args()

    rt = run_f2f_roundtrip(F2fRoundtripConfig(0.1, 10.0, 9, 8, args.noise, args.seed), args.out / "roundtrip")
    print(f"round trip over 2 decades: amplitude error {rt['max_amp_rel_err']:.2e}, phase error {rt['max_phase_err']:.2e} rad")

    p = lossy_bsv_params_from_photons(1e4, 0.05)
    ma = run_mode_analysis(ModeAnalysisConfig(args.shots, p.var_max / 2, p.var_min / 2, args.noise, args.seed), args.out / "modes")
    print(f"{args.shots} shots: second/first mode weight {ma['second_to_first']:.2e}, "
          f"Var/(2<N>^2) = {ma['variance_ratio']:.3f}, KS = {ma['ks_statistic']:.4f}")

    big = sample_macroscopic_bsv(p.var_max / 2, p.var_min / 2, 10**5, args.seed + 1).energies
    st = photon_statistics(big)
    print(f"1e5 energies: Var/(2<N>^2) = {st.variance_ratio:.4f}, KS = {st.ks_statistic:.4f} (p = {st.ks_pvalue:.2f})")


if __name__ == "__main__":
    main()
