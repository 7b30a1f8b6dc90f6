"""Figure-level experiments: configs, single-point kernels and file-writing runners.

Every runner takes a validated config dataclass and an output directory, writes
CSV files plus ``manifest.json`` and returns a small summary dict.
"""

from __future__ import annotations

import dataclasses
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.optimize import OptimizeWarning, curve_fit

from . import bsv as bsv_mod
from . import f2f, shear
from .channels import chi_t_for_phase, kerr_apply, loss_apply
from .fock import (
    FockVector,
    State,
    coherent_state,
    fock_state,
    moments,
    rotate,
    squeezed_coherent_state,
    squeezed_thermal_state,
    squeezed_vacuum_state,
    thermal_state,
)
from .io import write_csv, write_json, write_manifest, write_matrix_csv
from .phase_space import PhaseGrid, grid_suggest, negativity_volume, wigner

#: squeezing of the phase-squeezed family in the photon-number scan
DEFAULT_SQUEEZE_DB = 8.0
#: probability mass allowed beyond the Fock cutoff before a run is refused
MAX_DEFICIT = 1e-8


def db_to_r(db: float) -> float:
    """Squeezing parameter for a quadrature noise reduction of ``db`` decibels."""
    return db * np.log(10.0) / 20.0


def _pmap(fn, items, threads):
    if threads <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, items))


# ---------------------------------------------------------------------------
# negativity scan (photon-number dependence at fixed Kerr phase)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NegativityScanConfig:
    family: str
    photons: list[float]
    phi_kerr: float
    dim: int
    squeeze_db: float = DEFAULT_SQUEEZE_DB
    loss_before: float = 0.0
    loss_after: float = 0.0
    padding: float = 6.5
    oversample: float = 4.0
    method: str = "auto"

    def __post_init__(self):
        if self.family not in ("coherent", "squeezed"):
            raise ValueError("family must be 'coherent' or 'squeezed'")
        if not self.photons or any(n <= 0 for n in self.photons):
            raise ValueError("photons must be a non-empty list of positive numbers")
        if not (0.0 <= self.loss_before < 1.0 and 0.0 <= self.loss_after < 1.0):
            raise ValueError("losses must lie in [0, 1)")
        if self.dim < 2:
            raise ValueError("dim must be >= 2")


def family_state(family: str, n: float, dim: int, squeeze_db: float = DEFAULT_SQUEEZE_DB) -> FockVector:
    """Coherent |sqrt(n)> or phase-squeezed |sqrt(n), r> with real displacement."""
    beta = np.sqrt(n)
    if family == "coherent":
        return coherent_state(beta, dim)
    return squeezed_coherent_state(beta, db_to_r(squeeze_db), dim)


def _dim_hint(st: State) -> int:
    m = moments(st.renormalized())
    var_n = float(np.sum(np.arange(st.dim) ** 2 * st.probabilities) / max(np.sum(st.probabilities), 1e-300) - m.mean_n**2)
    return int(np.ceil(m.mean_n + 12 * np.sqrt(max(var_n, 0.0)) + 30))


def require_dim(st: State, dim: int, label: str, rebuild=None):
    """Refuse truncated states. ``rebuild(d)`` lets the hint be checked by construction."""
    if st.deficit <= MAX_DEFICIT:
        return
    hint = max(_dim_hint(st), dim + 1)
    if rebuild is not None:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            while hint < 20000 and rebuild(hint).deficit > MAX_DEFICIT:
                hint = int(hint * 1.25) + 1
    raise ValueError(f"dim={dim} truncates {label} (missing probability {st.deficit:.1e}); use dim >= {hint}")


def negativity_point(
    family: str,
    n: float,
    phi_kerr: float,
    dim: int,
    squeeze_db: float = DEFAULT_SQUEEZE_DB,
    loss_before: float = 0.0,
    loss_after: float = 0.0,
    padding: float = 6.5,
    oversample: float = 4.0,
    method: str = "auto",
) -> dict:
    """One point of the scan: build, loss, Kerr, loss, Wigner, N_neg.

    The Kerr strength is chi_t = phi_kerr / (2 n). The final state is rotated
    so that its mean lies on +x, which leaves N_neg unchanged and keeps the
    grid tight.
    """
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        st: State = family_state(family, n, dim, squeeze_db)
    require_dim(st, dim, f"the {family} state with |alpha|^2={n}", lambda d: family_state(family, n, d, squeeze_db))
    chi_t = chi_t_for_phase(phi_kerr, n)
    if loss_before > 0:
        st = loss_apply(st, loss_before)
    st = kerr_apply(st, chi_t)
    if loss_after > 0:
        st = loss_apply(st, loss_after)
    m = moments(st)
    st = rotate(st, -np.arctan2(m.mean_p, m.mean_x))
    grid = grid_suggest(st, padding, symmetric=False, oversample=oversample)
    w = wigner(st, grid, method)
    return {
        "n": n,
        "chi_t": chi_t,
        "negativity": negativity_volume(w),
        "residual": w.normalization_residual,
        "nx": grid.nx,
        "np": grid.np,
        "method": w.meta["method"],
    }


@dataclass(frozen=True)
class ExpFit:
    rate_nls: float  # k of A exp(-k n), least squares on linear values
    amplitude_nls: float
    rate_loglinear: float  # -slope of log N_neg vs n
    intercept_loglinear: float


def exponential_fit(n: np.ndarray, neg: np.ndarray) -> ExpFit:
    """Fit N_neg = A exp(-k n) two ways; NaN when fewer than two positive points."""
    n = np.asarray(n, dtype=float)
    neg = np.asarray(neg, dtype=float)
    ok = neg > 0
    if ok.sum() < 2:
        return ExpFit(np.nan, np.nan, np.nan, np.nan)
    slope, icpt = np.polyfit(n[ok], np.log(neg[ok]), 1)
    p0 = (np.exp(icpt), -slope)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", OptimizeWarning)  # two points leave no covariance
            (a, k), _ = curve_fit(lambda x, a, k: a * np.exp(-k * x), n[ok], neg[ok], p0=p0, maxfev=20000)
    except RuntimeError:
        a, k = np.nan, np.nan
    return ExpFit(float(k), float(a), float(-slope), float(icpt))


def run_negativity_scan(cfg: NegativityScanConfig, out: Path, seed: int | None = None, threads: int = 1) -> dict:
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    kw = {k: getattr(cfg, k) for k in ("phi_kerr", "dim", "squeeze_db", "loss_before", "loss_after", "padding", "oversample", "method")}
    pts = _pmap(lambda n: negativity_point(cfg.family, n, **kw), list(cfg.photons), threads)
    fit = exponential_fit([p["n"] for p in pts], [p["negativity"] for p in pts])
    csv = write_csv(
        out / f"negativity_{cfg.family}.csv",
        ["n", "chi_t", "negativity", "residual", "nx", "np"],
        [[p["n"], p["chi_t"], p["negativity"], p["residual"], p["nx"], p["np"]] for p in pts],
    )
    fitf = write_json(out / f"fit_{cfg.family}.json", dataclasses.asdict(fit))
    summary = {"points": pts, "fit": dataclasses.asdict(fit)}
    write_manifest(out, "negativity-scan", dataclasses.asdict(cfg), seed, [csv, fitf], summary["fit"])
    return summary


# ---------------------------------------------------------------------------
# squeezed vacuum through Kerr and loss
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SvKerrConfig:
    n_s: list[float]
    chi_t: list[float]
    dims: list[int]
    losses: list[float]
    padding: float = 6.5
    oversample: float = 2.0
    method: str = "auto"
    write_wigner: bool = True

    def __post_init__(self):
        if not (len(self.n_s) == len(self.chi_t) == len(self.dims)) or not self.n_s:
            raise ValueError("n_s, chi_t and dims must be non-empty lists of equal length")
        if any(not 0.0 <= R <= 1.0 for R in self.losses) or not self.losses:
            raise ValueError("losses must be a non-empty list in [0, 1]")


def kerr_squeezed_vacuum(n_s: float, chi_t: float, dim: int) -> FockVector:
    r = float(np.arcsinh(np.sqrt(n_s)))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        st = squeezed_vacuum_state(r, dim)
    require_dim(st, dim, f"squeezed vacuum with n_s={n_s}", lambda d: squeezed_vacuum_state(r, d))
    return kerr_apply(st, chi_t)


def sv_negativity_vs_loss(
    n_s: float, chi_t: float, dim: int, losses, padding=6.5, oversample=2.0, method="auto", reference=False
) -> np.ndarray:
    """N_neg of Kerr-evolved squeezed vacuum after each loss value.

    With ``reference=True`` the Kerr step is skipped. The Gaussian result is
    the numerical floor of the pipeline on a comparable grid.
    """
    st = kerr_squeezed_vacuum(n_s, 0.0 if reference else chi_t, dim)
    out = []
    for R in losses:
        s = loss_apply(st, R) if R > 0 else st
        g = grid_suggest(s, padding, symmetric=True, oversample=oversample)
        out.append(negativity_volume(wigner(s, g, method)))
    return np.array(out)


def run_sv_kerr(cfg: SvKerrConfig, out: Path, seed: int | None = None, threads: int = 1) -> dict:
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    files = []
    curves = _pmap(
        lambda k: sv_negativity_vs_loss(cfg.n_s[k], cfg.chi_t[k], cfg.dims[k], cfg.losses, cfg.padding, cfg.oversample, cfg.method),
        range(len(cfg.n_s)),
        threads,
    )
    for k, (ns, ct) in enumerate(zip(cfg.n_s, cfg.chi_t)):
        files.append(
            write_csv(out / f"sv_kerr_ns{ns:g}_chit{ct:g}.csv", ["loss", "negativity"], zip(cfg.losses, curves[k]))
        )
        if cfg.write_wigner:
            st = kerr_squeezed_vacuum(ns, ct, cfg.dims[k])
            g = grid_suggest(st, cfg.padding, symmetric=True, oversample=cfg.oversample)
            files += write_wigner_csv(out, f"wigner_ns{ns:g}_chit{ct:g}", wigner(st, g, cfg.method))
    summary = {f"ns{ns:g}": curves[k].tolist() for k, ns in enumerate(cfg.n_s)}
    write_manifest(out, "sv-kerr", dataclasses.asdict(cfg), seed, files, summary)
    return summary


def write_wigner_csv(out: Path, stem: str, fld) -> list[Path]:
    """x,p,value triples plus a JSON sidecar with the grid definition."""
    X, P = fld.grid.mesh()
    csv = write_csv(out / f"{stem}.csv", ["x", "p", "value"], zip(X.ravel(), P.ravel(), fld.values.ravel()))
    g = fld.grid
    meta = {
        "x_min": g.x_min, "x_max": g.x_max, "p_min": g.p_min, "p_max": g.p_max, "nx": g.nx, "np": g.np,
        "convention": g.convention.name, "kind": fld.kind, "trace": fld.trace,
        "normalization_residual": fld.normalization_residual,
    }
    return [csv, write_json(out / f"{stem}_grid.json", meta)]


# ---------------------------------------------------------------------------
# classical shear of a macroscopic cloud
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HusimiShearConfig:
    var_x: float
    var_p: float
    count: int
    chi_t: list[float]
    seed: int = 0
    n_r: int = 20
    n_phi: int = 72
    min_count: int = 500
    amplitude_cap: float | None = None


def run_husimi_shear(cfg: HusimiShearConfig, out: Path, seed: int | None = None, threads: int = 1) -> dict:
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    seed = cfg.seed if seed is None else seed
    ens = shear.sample_macroscopic_bsv(cfg.var_x, cfg.var_p, cfg.count, seed)
    norm = ens.mean_amplitude
    files, summary = [], {}
    for ct in cfg.chi_t:
        sh = shear.shear_map(ens, ct, cfg.amplitude_cap)
        hist = shear.polar_histogram(sh, cfg.n_r, cfg.n_phi, norm=norm)
        files.append(write_csv(out / f"polar_chit{ct:g}.csv", ["r_center", "phi_center", "count"], hist.rows()))
        prof = shear.phase_profile(sh, cfg.n_r, norm=norm)
        law = prof.shear_law(ct)
        mask = prof.populated(cfg.min_count)
        rows = zip(0.5 * (prof.r_edges[1:] + prof.r_edges[:-1]), prof.counts, prof.mean_rho2, prof.mean_phase, law)
        files.append(write_csv(out / f"profile_chit{ct:g}.csv", ["r_center", "count", "mean_rho2", "mean_phase", "shear_law"], rows))
        rel = prof.relative_error(ct)
        summary[f"{ct:g}"] = float(np.nanmax(rel[mask])) if ct != 0 and mask.any() else 0.0
    write_manifest(out, "husimi-shear", dataclasses.asdict(cfg), seed, files, {"max_rel_error": summary})
    return summary


# ---------------------------------------------------------------------------
# lossy BSV parameters
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BsvParamsConfig:
    photons: list[float]
    losses: list[float]


def run_bsv_params(cfg: BsvParamsConfig, out: Path, seed: int | None = None, threads: int = 1) -> dict:
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    cols = ["N", "R", "r0", "r", "n_th", "purity", "var_min", "var_max", "r_approx", "n_th_approx", "r_approx_rel_error", "n_th_approx_rel_error"]
    rows = []
    for N in cfg.photons:
        for R in cfg.losses:
            d = bsv_mod.lossy_bsv_params_from_photons(N, R).as_dict()
            rows.append([d[c] for c in cols])
    csv = write_csv(out / "bsv_params.csv", cols, rows)
    write_manifest(out, "bsv-params", dataclasses.asdict(cfg), seed, [csv])
    return {"rows": len(rows)}


# ---------------------------------------------------------------------------
# f-2f round trip and ensemble statistics
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class F2fRoundtripConfig:
    amp_min: float
    amp_max: float
    n_amp: int
    n_phase: int
    noise_rms: float = 0.0
    seed: int = 0
    setup: dict = field(default_factory=dict)


def _setup(d: dict) -> f2f.F2fSetup:
    allowed = {f.name for f in dataclasses.fields(f2f.F2fSetup)}
    bad = sorted(set(d) - allowed)
    if bad:
        raise ValueError(f"unknown setup keys: {', '.join(bad)}")
    return f2f.F2fSetup(**d)


def f2f_roundtrip_table(setup: f2f.F2fSetup, amps, phases, noise_rms=0.0, seed=0):
    """(|alpha|, arg alpha, recovered amp, recovered phase, amp rel err, phase err, snr) rows."""
    rows = []
    k = 0
    for a in amps:
        for ph in phases:
            alpha = a * np.exp(1j * ph)
            shot = f2f.synth_shot(alpha, setup, noise_rms=noise_rms, seed=seed + k)
            ex = f2f.extract_fringe(shot, setup=setup)
            inv = f2f.invert_shg(ex["amp_2w"], ex["phi_2w"], setup.kappa)
            # sign ambiguity: keep the branch nearest the truth
            errs = [abs(np.angle(np.exp(1j * (b - ph)))) for b in inv["phi_w"]]
            b = int(np.argmin(errs))
            rows.append([a, ph, inv["amp_w"], inv["phi_w"][b], abs(inv["amp_w"] - a) / a, errs[b], ex["snr"]])
            k += 1
    return np.array(rows)


def run_f2f_roundtrip(cfg: F2fRoundtripConfig, out: Path, seed: int | None = None, threads: int = 1) -> dict:
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    seed = cfg.seed if seed is None else seed
    setup = _setup(cfg.setup)
    amps = np.geomspace(cfg.amp_min, cfg.amp_max, cfg.n_amp)
    phases = np.linspace(-np.pi, np.pi, cfg.n_phase, endpoint=False)
    tab = f2f_roundtrip_table(setup, amps, phases, cfg.noise_rms, seed)
    csv = write_csv(out / "f2f_roundtrip.csv", ["amp", "phase", "amp_rec", "phase_rec", "amp_rel_err", "phase_err", "snr"], tab)
    summary = {"max_amp_rel_err": float(tab[:, 4].max()), "max_phase_err": float(tab[:, 5].max())}
    write_manifest(out, "f2f-roundtrip", dataclasses.asdict(cfg), seed, [csv], summary)
    return summary


@dataclass(frozen=True)
class ModeAnalysisConfig:
    shots: int
    var_x: float
    var_p: float
    noise_rms: float = 0.0
    seed: int = 0
    n_modes_out: int = 10
    hist_bins: int = 100
    setup: dict = field(default_factory=dict)


def single_mode_ensemble(cfg: ModeAnalysisConfig, seed: int):
    """Energies |alpha|^2 of a macroscopic BSV cloud and their single-mode spectra."""
    ens = shear.sample_macroscopic_bsv(cfg.var_x, cfg.var_p, cfg.shots, seed)
    setup = _setup(cfg.setup)
    spectra = f2f.bsv_spectra(ens.energies, setup, cfg.noise_rms, seed + 1)
    return ens.energies, spectra, setup


def run_mode_analysis(cfg: ModeAnalysisConfig, out: Path, seed: int | None = None, threads: int = 1) -> dict:
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    seed = cfg.seed if seed is None else seed
    energies, spectra, setup = single_mode_ensemble(cfg, seed)
    cov = f2f.covariance_map(spectra, setup.wavelengths)
    modes = f2f.mode_decomposition(cov)
    stats_ = f2f.photon_statistics(spectra, bins=cfg.hist_bins, wavelengths=setup.wavelengths)
    k = min(cfg.n_modes_out, modes.weights.size)
    files = [
        write_matrix_csv(out / "covariance.csv", cov.cov, cov.wavelengths),
        write_csv(out / "mode_weights.csv", ["index", "weight", "relative"], zip(range(k), modes.weights[:k], modes.relative_weights()[:k])),
        write_csv(out / "mode_shapes.csv", ["wavelength"] + [f"mode{i}" for i in range(k)], np.column_stack([setup.wavelengths, modes.shapes[:, :k]])),
        write_csv(
            out / "energy_histogram.csv",
            ["left", "right", "density", "gamma_density"],
            zip(stats_.hist_edges[:-1], stats_.hist_edges[1:], stats_.hist_density,
                f2f.gamma_density(0.5 * (stats_.hist_edges[1:] + stats_.hist_edges[:-1]), stats_.mean)),
        ),
    ]
    summary = {
        "second_to_first": float(modes.relative_weights()[1]),
        "variance_ratio": stats_.variance_ratio,
        "ks_statistic": stats_.ks_statistic,
        "mean_energy": stats_.mean,
    }
    write_manifest(out, "mode-analysis", dataclasses.asdict(cfg), seed, files, summary)
    return summary


# ---------------------------------------------------------------------------
# single Wigner function
# ---------------------------------------------------------------------------

STATE_KINDS = ("fock", "coherent", "squeezed_vacuum", "squeezed_coherent", "thermal", "squeezed_thermal")


@dataclass(frozen=True)
class WignerConfig:
    state: str
    dim: int
    n: int = 0
    alpha_re: float = 0.0
    alpha_im: float = 0.0
    r: float = 0.0
    n_th: float = 0.0
    chi_t: float = 0.0
    loss: float = 0.0
    padding: float = 6.5
    oversample: float = 4.0
    method: str = "auto"
    grid: list[float] | None = None  # [x_min, x_max, p_min, p_max, nx, np]

    def __post_init__(self):
        if self.state not in STATE_KINDS:
            raise ValueError(f"state must be one of {', '.join(STATE_KINDS)}")
        if self.grid is not None and len(self.grid) != 6:
            raise ValueError("grid needs [x_min, x_max, p_min, p_max, nx, np]")


def build_state(cfg: WignerConfig) -> State:
    alpha = complex(cfg.alpha_re, cfg.alpha_im)
    builders = {
        "fock": lambda d: fock_state(cfg.n, d),
        "coherent": lambda d: coherent_state(alpha, d),
        "squeezed_vacuum": lambda d: squeezed_vacuum_state(cfg.r, d),
        "squeezed_coherent": lambda d: squeezed_coherent_state(alpha, cfg.r, d),
        "thermal": lambda d: thermal_state(cfg.n_th, d),
        "squeezed_thermal": lambda d: squeezed_thermal_state(cfg.n_th, cfg.r, d),
    }
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        st = builders[cfg.state](cfg.dim)
    require_dim(st, cfg.dim, cfg.state, builders[cfg.state])
    if cfg.chi_t:
        st = kerr_apply(st, cfg.chi_t)
    if cfg.loss:
        st = loss_apply(st, cfg.loss)
    return st


def run_wigner(cfg: WignerConfig, out: Path, seed: int | None = None, threads: int = 1) -> dict:
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    st = build_state(cfg)
    if cfg.grid is None:
        g = grid_suggest(st, cfg.padding, symmetric=True, oversample=cfg.oversample)
    else:
        x0, x1, p0, p1, nx, npp = cfg.grid
        g = PhaseGrid(x0, x1, p0, p1, int(nx), int(npp))
    w = wigner(st, g, cfg.method)
    files = write_wigner_csv(out, "wigner", w)
    summary = {"negativity": negativity_volume(w, None), "normalization_residual": w.normalization_residual}
    write_manifest(out, "wigner", dataclasses.asdict(cfg), seed, files, summary)
    return summary


SCENARIOS = {
    "negativity-scan": (NegativityScanConfig, run_negativity_scan),
    "sv-kerr": (SvKerrConfig, run_sv_kerr),
    "husimi-shear": (HusimiShearConfig, run_husimi_shear),
    "bsv-params": (BsvParamsConfig, run_bsv_params),
    "f2f-roundtrip": (F2fRoundtripConfig, run_f2f_roundtrip),
    "mode-analysis": (ModeAnalysisConfig, run_mode_analysis),
    "wigner": (WignerConfig, run_wigner),
}
