import math
import time

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from kerr_bsv.bsv import make_rng
from kerr_bsv.f2f import (
    F2fSetup,
    ShotRecord,
    bsv_spectra,
    check_fringe_sampling,
    covariance_map,
    extract_fringe,
    fold_half_plane,
    gamma_density,
    invert_shg,
    mode_decomposition,
    omega_of,
    photon_statistics,
    synth_shot,
    synth_shots,
)
from kerr_bsv.shear import sample_macroscopic_bsv

SETUP = F2fSetup()


def _sideband_peak_time(shot):
    w = omega_of(shot.wavelengths)
    order = np.argsort(w)
    wu = np.linspace(w[order][0], w[order][-1], 4 * w.size)
    iu = np.interp(wu, w[order], shot.intensity[order])
    spec = np.abs(np.fft.rfft(iu - iu.mean()))
    t = 2 * np.pi * np.fft.rfftfreq(wu.size, d=wu[1] - wu[0])
    # skip the envelope lobe near t = 0
    keep = t > 0.3 * shot.delay
    return t[keep][np.argmax(spec[keep])]


def test_zero_amplitude_is_fringe_free():
    shot = synth_shot(0.0, SETUP)
    g = SETUP.envelope(omega_of(shot.wavelengths))
    assert np.allclose(shot.intensity, (SETUP.ref_amp * g) ** 2, atol=1e-15)
    res = extract_fringe(shot, setup=SETUP)
    # what remains is leakage of the envelope's DC lobe into the window
    assert res["amp_2w"] < 1e-5
    assert res["low_confidence"]
    assert shot.extracted is res


def test_square_law_modulation():
    a = extract_fringe(synth_shot(0.5, SETUP), setup=SETUP)["amp_2w"]
    b = extract_fringe(synth_shot(1.0, SETUP), setup=SETUP)["amp_2w"]
    assert b / a == pytest.approx(4.0, rel=1e-4)


@given(st.floats(-1.2, 1.2))
@settings(max_examples=20)
def test_phase_doubles(delta):
    base = extract_fringe(synth_shot(0.8, SETUP), setup=SETUP)["phi_2w"]
    moved = extract_fringe(synth_shot(0.8 * np.exp(1j * delta), SETUP), setup=SETUP)["phi_2w"]
    d = moved - base - 2 * delta
    assert abs(math.remainder(d, 2 * math.pi)) < 1e-3


def test_delay_doubling_moves_sideband():
    s1 = synth_shot(1.0, SETUP, delay=400e-15)
    s2 = synth_shot(1.0, SETUP, delay=800e-15)
    t1, t2 = _sideband_peak_time(s1), _sideband_peak_time(s2)
    assert t2 / t1 == pytest.approx(2.0, rel=0.05)
    for s in (s1, s2):
        res = extract_fringe(s, setup=SETUP)
        assert res["amp_2w"] == pytest.approx(1.0, rel=5e-3)
        assert not res["low_confidence"]


@pytest.mark.parametrize("delay", [50e-15, 5e-12])
def test_fringe_precondition(delay):
    with pytest.raises(ValueError, match="under-resolved"):
        synth_shot(1.0, SETUP, delay=delay)


def test_default_setup_sampling_margin():
    per, n = check_fringe_sampling(SETUP.wavelengths, SETUP.delay)
    assert per >= 8 and n >= 6


def test_invert_shg_examples():
    r = invert_shg(4.0, 1.0)
    assert r["amp_w"] == 2.0
    assert r["phi_w"] == pytest.approx((0.5, 0.5 + math.pi))
    assert not r["ambiguous"]
    assert invert_shg(0.0, 2.3)["ambiguous"]
    with pytest.raises(ValueError):
        invert_shg(-1.0, 0.0)


def test_fold_half_plane():
    phi = np.array([0.1, 0.1 + math.pi, -0.1 - math.pi, math.pi / 2])
    assert np.allclose(fold_half_plane(phi), [0.1, 0.1, -0.1, math.pi / 2])


def test_round_trip_two_decades():
    rng = make_rng(3)
    amps = np.geomspace(0.1, 10.0, 9)
    for a in amps:
        for phi in rng.uniform(-math.pi, math.pi, 4):
            alpha = a * np.exp(1j * phi)
            res = extract_fringe(synth_shot(alpha, SETUP), setup=SETUP)
            inv = invert_shg(res["amp_2w"], res["phi_2w"])
            assert abs(inv["amp_w"] - a) / a < 0.01
            err = min(abs(math.remainder(b - phi, 2 * math.pi)) for b in inv["phi_w"])
            assert err < 2e-3


def test_noisy_extraction_is_reproducible():
    a = synth_shot(1.0, SETUP, noise_rms=0.01, seed=4)
    b = synth_shot(1.0, SETUP, noise_rms=0.01, seed=4)
    assert np.array_equal(a.intensity, b.intensity)
    assert np.all(a.intensity >= 0)
    assert extract_fringe(a, setup=SETUP)["amp_2w"] == pytest.approx(1.0, rel=0.05)


def test_shot_record_validation():
    with pytest.raises(ValueError):
        ShotRecord(np.ones(3), np.ones(4), 1e-12)
    with pytest.raises(ValueError):
        ShotRecord(np.ones(3), -np.ones(3), 1e-12)


def test_covariance_identical_shots_zero():
    shots = [synth_shot(1.0, SETUP) for _ in range(5)]
    cm = covariance_map(shots)
    assert np.max(np.abs(cm.cov)) < 1e-28


def test_covariance_grid_mismatch():
    other = F2fSetup(lambda_min=770e-9)
    with pytest.raises(ValueError, match="grid"):
        covariance_map([synth_shot(1.0, SETUP), synth_shot(1.0, other)])
    with pytest.raises(ValueError):
        covariance_map([synth_shot(1.0, SETUP)])


def test_covariance_matches_numpy():
    data = make_rng(5).random((40, 16)) + 1.0
    cm = covariance_map(data, np.arange(16.0))
    assert np.allclose(cm.cov, np.cov(data, rowvar=False), atol=1e-14)


def test_single_mode_ensemble_rank_one():
    energies = sample_macroscopic_bsv(100.0, 0.01, 7000, seed=6).energies
    spectra = bsv_spectra(energies, SETUP)
    ms = mode_decomposition(covariance_map(spectra, SETUP.wavelengths))
    rw = ms.relative_weights()
    assert rw[1] < 1e-3
    assert np.all(np.diff(ms.weights) <= 0)
    assert np.allclose(ms.shapes.T @ ms.shapes, np.eye(ms.shapes.shape[1]), atol=1e-10)


def test_rank_one_input():
    v = np.array([1.0, 2.0, 2.0]) / 3.0
    ms = mode_decomposition(7.0 * np.outer(v, v))
    assert ms.weights[0] == pytest.approx(7.0)
    assert np.allclose(ms.weights[1:], 0, atol=1e-14)
    assert abs(abs(ms.shapes[:, 0] @ v) - 1) < 1e-12


def test_two_mode_ratio():
    n = 512
    x = np.linspace(-4, 4, n)
    v1 = np.exp(-(x**2) / 2)
    v2 = x * np.exp(-(x**2) / 2)
    v1, v2 = v1 / np.linalg.norm(v1), v2 / np.linalg.norm(v2)
    z = make_rng(7).standard_normal((2, 40000))
    shots = (10.0 * z[0])[:, None] * v1 + (1.0 * z[1])[:, None] * v2
    ms = mode_decomposition(covariance_map(shots, x))
    assert ms.weights[0] / ms.weights[1] == pytest.approx(100.0, abs=5.0)
    assert ms.weights.sum() == pytest.approx(np.trace(covariance_map(shots, x).cov), rel=1e-8)


def test_mode_decomposition_rejects_asymmetric():
    with pytest.raises(ValueError, match="symmetric"):
        mode_decomposition(np.array([[1.0, 0.5], [0.0, 1.0]]))


def test_gamma_sampler_consistency():
    mean = 3.0
    e = make_rng(8).gamma(0.5, 2 * mean, 10**5)
    ps = photon_statistics(e)
    assert ps.ks_statistic < 0.01
    assert ps.variance_ratio == pytest.approx(1.0, abs=0.03)
    # the density formula is the scipy shape-1/2 law
    n = np.linspace(0.01, 20, 50)
    assert np.allclose(gamma_density(n, mean), stats.gamma(a=0.5, scale=2 * mean).pdf(n), rtol=1e-12)


def test_shear_energies_follow_gamma():
    ens = sample_macroscopic_bsv(9500.0, 0.0125, 10**5, seed=9)
    ps = photon_statistics(ens.energies)
    assert ps.ks_statistic < 0.02


def test_photon_statistics_from_spectra():
    energies = make_rng(10).gamma(0.5, 2.0, 2000)
    spectra = bsv_spectra(energies, SETUP)
    ps = photon_statistics(spectra, wavelengths=SETUP.wavelengths)
    assert ps.mean == pytest.approx(energies.mean(), rel=1e-3)
    with pytest.raises(ValueError):
        photon_statistics(spectra)
    with pytest.raises(ValueError):
        photon_statistics(np.array([]))


def test_7000_shot_covariance_runtime():
    alphas = sample_macroscopic_bsv(50.0, 0.5, 7000, seed=12).alpha
    t0 = time.perf_counter()
    spectra = synth_shots(alphas, SETUP)
    cm = covariance_map(spectra, SETUP.wavelengths)
    mode_decomposition(cm)
    assert time.perf_counter() - t0 < 60
    assert cm.cov.shape == (512, 512)
    assert np.all(np.diag(cm.cov) >= 0)
