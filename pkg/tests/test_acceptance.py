"""Acceptance criteria 1-10. Each test records one PASS/FAIL line, printed in the terminal summary.

Run alone with ``pytest tests/test_acceptance.py -v``.
"""

import math
import time

import numpy as np
import pytest

from kerr_bsv.bsv import lossy_bsv_params, lossy_bsv_params_from_photons, mixture_params, reconstruct_mixture
from kerr_bsv.channels import kerr_apply, loss_apply
from kerr_bsv.f2f import (
    F2fSetup,
    bsv_spectra,
    covariance_map,
    extract_fringe,
    invert_shg,
    mode_decomposition,
    photon_statistics,
    synth_shot,
)
from kerr_bsv.fock import (
    PAPER,
    FockVector,
    coherent_state,
    fidelity,
    fock_state,
    moments,
    purity,
    squeezed_coherent_state,
    squeezed_thermal_state,
    squeezed_vacuum_state,
    trace_distance,
)
from kerr_bsv.phase_space import (
    gaussian_smooth,
    grid_suggest,
    husimi,
    negativity_volume,
    negativity_with_refinement,
    wigner,
)
from kerr_bsv.scenarios import exponential_fit, negativity_point, sv_negativity_vs_loss
from kerr_bsv.shear import phase_profile, sample_macroscopic_bsv, shear_map

FOCK1_NEG = 2 * math.exp(-0.5) - 1


def test_criterion_1_fock_negativity(criterion):
    t0 = time.perf_counter()
    s = fock_state(1, 4)
    neg = negativity_volume(wigner(s, grid_suggest(s)))
    dt = time.perf_counter() - t0
    ok = abs(neg - FOCK1_NEG) <= 1e-3 and dt < 1.0
    criterion(1, ok, f"N_neg(|1>)={neg:.6f} vs {FOCK1_NEG:.6f}, {dt:.3f} s")
    assert ok


def test_criterion_2_kerr_cat(criterion):
    alpha, dim = 2.0, 60
    out = kerr_apply(coherent_state(alpha, dim), math.pi / 2, corotating=True)
    a, b = (1 - 1j) / 2, (1 + 1j) / 2
    cat = FockVector(a * coherent_state(alpha, dim).amps + b * coherent_state(-alpha, dim).amps)
    f = fidelity(out, cat)
    neg = negativity_volume(wigner(out, grid_suggest(out, 6.5)))
    ok = f > 1 - 1e-8 and neg > 0.1
    criterion(2, ok, f"1-F={1 - f:.1e}, N_neg={neg:.4f}")
    assert ok


def test_criterion_3_photon_number_scan(criterion):
    photons = [25, 50, 75, 100, 125, 150, 175, 200]
    t0 = time.perf_counter()
    neg = {
        fam: np.array([negativity_point(fam, n, 0.6, 700)["negativity"] for n in photons])
        for fam in ("coherent", "squeezed")
    }
    dt = time.perf_counter() - t0
    ratio = neg["squeezed"][-1] / neg["coherent"][-1]
    fits = {fam: exponential_fit(photons, v) for fam, v in neg.items()}
    # the coherent family decays faster
    rate_nls = fits["coherent"].rate_nls / fits["squeezed"].rate_nls
    rate_log = fits["coherent"].rate_loglinear / fits["squeezed"].rate_loglinear
    ok = ratio >= 100 and rate_nls >= 10 and dt < 600
    criterion(
        3,
        ok,
        f"N_neg ratio at 200 = {ratio:.3g}, decay-rate ratio {rate_nls:.3g} (least squares; log-linear {rate_log:.3g}), {dt:.0f} s",
    )
    assert np.all(np.diff(neg["coherent"]) < 0)
    assert ok


def test_criterion_4_squeezed_vacuum_under_loss(criterion):
    losses = [0.0, 0.05, 0.1, 0.2, 0.3, 0.4, 0.45, 0.5]
    t0 = time.perf_counter()
    dim = sv_negativity_vs_loss(4, 0.02, 300, losses)
    bright = sv_negativity_vs_loss(20, 0.004, 700, losses)
    dt = time.perf_counter() - t0
    # Kerr-free run on the same pipeline: the numerical zero of N_neg at R = 0.5
    floor = max(
        sv_negativity_vs_loss(4, 0.02, 300, [0.5], reference=True)[0],
        sv_negativity_vs_loss(20, 0.004, 700, [0.5], reference=True)[0],
    )
    a = bright[0] > dim[0]
    decay_b, decay_d = bright / bright[0], dim / dim[0]
    mid = slice(1, 6)  # 0.05 .. 0.4, where both curves are well above the floor
    faster = bool(np.all(decay_b[mid] < decay_d[mid]))
    crosses = bool(np.any(bright[mid] < dim[mid]))
    b = faster and crosses
    c = bright[-1] > 100 * floor and dim[-1] > 100 * floor
    ok = a and b and c and dt < 120
    criterion(
        4,
        ok,
        f"(a) {'ok' if a else 'no'} {bright[0]:.3f}>{dim[0]:.3f}; (b) {'ok' if b else 'no'}; "
        f"(c) {'ok' if c else 'no'} R=0.5: {bright[-1]:.1e}, {dim[-1]:.1e} vs floor {floor:.1e} "
        f"(R=0.45: {bright[-2]:.1e}, {dim[-2]:.1e}); {dt:.0f} s",
    )
    assert a and b and dt < 120
    # At T = 1/2 the output Wigner function equals a rescaled Husimi function, so it
    # is non-negative for every input state; (c) cannot hold at exactly 50% loss.
    assert c


def test_criterion_5_loss_algebra(criterion):
    t0 = time.perf_counter()
    worst = 0.0
    r0, dim = 0.8, 160
    sv = squeezed_vacuum_state(r0, dim)
    for R in (0.05, 0.2, 0.5, 0.8):
        p = lossy_bsv_params(r0, R)
        out = loss_apply(sv, R)
        vmax, vmin = moments(out, PAPER).principal_variances
        worst = max(
            worst,
            abs(vmax - p.var_max) / p.var_max,
            abs(vmin - p.var_min) / p.var_min,
            abs(purity(out) - p.purity),
            abs((1 + 2 * p.n_th) * math.exp(2 * p.r) - p.var_max) / p.var_max,
            abs((1 + 2 * p.n_th) * math.exp(-2 * p.r) - p.var_min) / p.var_min,
            trace_distance(out, squeezed_thermal_state(p.n_th, p.r, dim)),
        )
    exact_ok = worst < 1e-8
    approx_worst = 0.0
    for N in (1e6, 1e8, 1e10, 1e12):
        for R in (0.01, 0.05, 0.1, 0.2, 0.3, 0.5):
            p = lossy_bsv_params_from_photons(N, R)
            approx_worst = max(approx_worst, p.r_approx_rel_error, p.n_th_approx_rel_error)
    dt = time.perf_counter() - t0
    ok = exact_ok and approx_worst < 0.01 and dt < 1.0
    criterion(5, ok, f"exact laws max err {worst:.1e}, large-N forms max rel err {approx_worst:.2e}, {dt:.2f} s")
    assert ok


def test_criterion_6_mixture(criterion):
    t0 = time.perf_counter()
    p = mixture_params(0.5, 0.4)
    rho = reconstruct_mixture(p, 120, 20000, seed=1234)
    d = trace_distance(rho, squeezed_thermal_state(0.5, 0.4, 120))
    dt = time.perf_counter() - t0
    ok = d < 0.02 and dt < 120
    criterion(6, ok, f"trace distance {d:.4f}, {dt:.1f} s")
    assert ok


def test_criterion_7_classical_shear(criterion):
    t0 = time.perf_counter()
    p = lossy_bsv_params_from_photons(1e4, 0.05)
    ens = sample_macroscopic_bsv(p.var_max / 2, p.var_min / 2, 10**6, seed=2024)
    chi_t = 0.6 / (2 * np.mean(ens.energies))
    prof = phase_profile(shear_map(ens, chi_t), 20)
    dt = time.perf_counter() - t0
    m = prof.populated(500)
    err = float(np.max(prof.relative_error(chi_t)[m]))
    ok = err < 0.05 and dt < 30
    criterion(7, ok, f"max rel err {err:.2%} on {int(m.sum())} bins, {dt:.1f} s")
    assert ok


def test_criterion_8_f2f_round_trip(criterion):
    setup = F2fSetup()
    t0 = time.perf_counter()
    amp_err = phase_err = 0.0
    for a in np.geomspace(0.1, 10.0, 9):
        for phi in np.linspace(-math.pi, math.pi, 8, endpoint=False):
            res = extract_fringe(synth_shot(a * np.exp(1j * phi), setup), setup=setup)
            inv = invert_shg(res["amp_2w"], res["phi_2w"])
            amp_err = max(amp_err, abs(inv["amp_w"] - a) / a)
            phase_err = max(phase_err, min(abs(math.remainder(b - phi, 2 * math.pi)) for b in inv["phi_w"]))
    dt = time.perf_counter() - t0
    ok = amp_err < 0.01 and phase_err < 2e-3 and dt < 10
    criterion(8, ok, f"amp err {amp_err:.1e}, phase err {phase_err:.1e} rad, {dt:.2f} s")
    assert ok


def test_criterion_9_statistics(criterion):
    setup = F2fSetup()
    p = lossy_bsv_params_from_photons(1e4, 0.05)
    t0 = time.perf_counter()
    energies = sample_macroscopic_bsv(p.var_max / 2, p.var_min / 2, 7000, seed=11).energies
    modes = mode_decomposition(covariance_map(bsv_spectra(energies, setup), setup.wavelengths))
    dt = time.perf_counter() - t0
    second = modes.relative_weights()[1]
    big = sample_macroscopic_bsv(p.var_max / 2, p.var_min / 2, 10**5, seed=12).energies
    st = photon_statistics(big)
    var_err = abs(st.variance_ratio - 1)
    ok = second <= 1e-2 and var_err < 0.03 and st.ks_statistic < 0.02 and dt < 60
    criterion(
        9,
        ok,
        f"second/first weight {second:.1e}, |Var/2<N>^2 - 1|={var_err:.3f}, KS={st.ks_statistic:.4f}, 7000-shot map {dt:.2f} s",
    )
    assert ok


def test_criterion_10_cross_checks(criterion):
    s = kerr_apply(squeezed_vacuum_state(math.asinh(2), 150), 0.02)
    g = grid_suggest(s, 9, oversample=1.5)
    q_err = float(np.max(np.abs(gaussian_smooth(wigner(s, g), 1 / math.sqrt(2)).values - husimi(s, g).density)))

    c = squeezed_coherent_state(2.0 + 1j, 0.3, 100)
    kerr_err = float(np.max(np.abs(kerr_apply(c, 0.37).probabilities - c.probabilities)))

    rho = kerr_apply(squeezed_coherent_state(1.0 + 0.5j, 0.4, 100), 0.05).to_density()
    comp_err = 0.0
    for r1, r2 in ((0.1, 0.2), (0.3, 0.5), (0.05, 0.9)):
        a = moments(loss_apply(loss_apply(rho, r1), r2))
        b = moments(loss_apply(rho, 1 - (1 - r1) * (1 - r2)))
        for f in ("mean_n", "mean_x", "mean_p", "var_x", "var_p", "cov_xp"):
            comp_err = max(comp_err, abs(getattr(a, f) - getattr(b, f)))

    bright = kerr_apply(squeezed_vacuum_state(math.asinh(math.sqrt(20)), 700), 0.004)
    _, rel = negativity_with_refinement(bright, grid_suggest(bright, 6.5, oversample=2))

    ok = q_err < 1e-6 and kerr_err < 1e-14 and comp_err < 1e-8 and rel < 0.01
    criterion(
        10,
        ok,
        f"Q-W*vac {q_err:.1e}, Kerr P(n) {kerr_err:.1e}, loss composition {comp_err:.1e}, refinement {rel:.2e}",
    )
    assert ok


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v"]))
