"""Classical Liouville shear of a macroscopic Gaussian amplitude cloud.

Points rotate about the origin at a rate proportional to |alpha|^2, which is
the coarse-grained (first-order) part of the Kerr phase-space flow. This is
what turns an elongated BSV cloud into the 'S' shape seen in polar
histograms of measured amplitude and phase.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bsv import make_rng


@dataclass(frozen=True)
class ClassicalEnsemble:
    alpha: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        a = np.asarray(self.alpha, dtype=complex)
        if a.ndim != 1 or a.size < 1:
            raise ValueError("ensemble needs at least one sample")
        if not np.all(np.isfinite(a)):
            raise ValueError("ensemble contains non-finite amplitudes")
        object.__setattr__(self, "alpha", a)

    def __len__(self):
        return self.alpha.size

    @property
    def energies(self) -> np.ndarray:
        return np.abs(self.alpha) ** 2

    @property
    def mean_amplitude(self) -> float:
        return float(np.mean(np.abs(self.alpha)))


def sample_macroscopic_bsv(var_x: float, var_p: float, count: int, seed: int, workers: int = 1) -> ClassicalEnsemble:
    """alpha = (x + i p)/sqrt(2) with x ~ N(0, var_x), p ~ N(0, var_p).

    ``workers`` > 1 draws contiguous chunks from independent child streams.
    """
    if not (var_x > 0 and var_p > 0):
        raise ValueError("variances must be strictly positive")
    if var_x < var_p:
        raise ValueError("expected var_x >= var_p (anti-squeezed axis along x)")
    if count < 1:
        raise ValueError("count must be >= 1")
    if workers <= 1:
        z = make_rng(seed).standard_normal((2, count))
    else:
        sizes = np.diff(np.linspace(0, count, workers + 1).astype(int))
        z = np.concatenate([make_rng(seed, w).standard_normal((2, n)) for w, n in enumerate(sizes)], axis=1)
    alpha = (np.sqrt(var_x) * z[0] + 1j * np.sqrt(var_p) * z[1]) / np.sqrt(2.0)
    return ClassicalEnsemble(alpha, {"var_x": var_x, "var_p": var_p, "count": count, "seed": seed})


def shear_map(ens: ClassicalEnsemble, chi_t: float, amplitude_cap: float | None = None) -> ClassicalEnsemble:
    """alpha -> alpha exp(-2i chi_t |alpha|^2).

    ``amplitude_cap`` drops samples with |alpha| above the cap. It is a purely
    phenomenological stand-in for the truncated tails seen experimentally and
    is off by default.
    """
    a = ens.alpha
    out = a * np.exp(-2j * chi_t * (a.real**2 + a.imag**2))
    meta = dict(ens.meta, chi_t=chi_t)
    if amplitude_cap is not None:
        keep = np.abs(out) <= amplitude_cap
        meta["dropped_by_cap"] = int(out.size - keep.sum())
        out = out[keep]
    return ClassicalEnsemble(out, meta)


def add_vacuum_noise(ens: ClassicalEnsemble, seed: int) -> ClassicalEnsemble:
    """Add vacuum fluctuations (variance 1/4 per component of alpha).

    Turns samples of a Wigner function into samples of the corresponding
    Husimi function, the distribution a heterodyne-type measurement sees.
    """
    z = make_rng(seed).standard_normal((2, len(ens))) * 0.5
    return ClassicalEnsemble(ens.alpha + z[0] + 1j * z[1], dict(ens.meta, vacuum_noise_seed=seed))


@dataclass(frozen=True)
class PolarHistogram:
    r_edges: np.ndarray  # in units of norm
    phi_edges: np.ndarray
    counts: np.ndarray  # shape (n_r, n_phi)
    norm: float  # mean |alpha| used for the radial axis

    @property
    def r_centers(self):
        return 0.5 * (self.r_edges[1:] + self.r_edges[:-1])

    @property
    def phi_centers(self):
        return 0.5 * (self.phi_edges[1:] + self.phi_edges[:-1])

    def phase_marginal(self) -> np.ndarray:
        return self.counts.sum(axis=0)

    def rows(self):
        """(r_center, phi_center, count) rows for CSV export."""
        rc, pc = np.meshgrid(self.r_centers, self.phi_centers, indexing="ij")
        return np.column_stack([rc.ravel(), pc.ravel(), self.counts.ravel()])


def _radial_edges(rho, n_r, r_max):
    # nudge so the largest sample lands inside the last bin
    top = np.nextafter(float(rho.max()), np.inf) if r_max is None else float(r_max)
    return np.linspace(0.0, top, n_r + 1)


def polar_histogram(
    ens: ClassicalEnsemble, n_r: int, n_phi: int, r_max: float | None = None, norm: float | None = None
) -> PolarHistogram:
    """Joint histogram of |alpha|/<|alpha|> and arg(alpha) over [-pi, pi].

    Samples beyond ``r_max`` (if given) are accumulated in the outermost bin
    so that counts are always conserved.
    """
    if n_r < 4 or n_phi < 4:
        raise ValueError("n_r and n_phi must be >= 4")
    if len(ens) == 0:
        raise ValueError("empty ensemble")
    norm = ens.mean_amplitude if norm is None else float(norm)
    if norm <= 0:
        raise ValueError("ensemble has zero mean amplitude")
    rho = np.abs(ens.alpha) / norm
    phi = np.angle(ens.alpha)
    r_edges = _radial_edges(rho, n_r, r_max)
    phi_edges = np.linspace(-np.pi, np.pi, n_phi + 1)
    ir = np.clip(np.searchsorted(r_edges, rho, side="right") - 1, 0, n_r - 1)
    ip = np.clip(np.searchsorted(phi_edges, phi, side="right") - 1, 0, n_phi - 1)
    counts = np.bincount(ir * n_phi + ip, minlength=n_r * n_phi).reshape(n_r, n_phi)
    return PolarHistogram(r_edges, phi_edges, counts, norm)


@dataclass(frozen=True)
class PhaseProfile:
    """Per-amplitude-bin folded mean phase."""

    r_edges: np.ndarray
    counts: np.ndarray
    mean_rho2: np.ndarray  # <(|alpha|/norm)^2> within each bin
    mean_phase: np.ndarray  # NaN for empty bins
    norm: float

    def shear_law(self, chi_t: float, const: float = 0.0) -> np.ndarray:
        """-2 chi_t <rho^2> norm^2 + const, evaluated with the bin-averaged rho^2."""
        return -2.0 * chi_t * self.mean_rho2 * self.norm**2 + const

    def residual(self, chi_t: float, const: float = 0.0) -> np.ndarray:
        """mean_phase - shear_law, reduced modulo pi (the folded phase has no other meaning)."""
        d = self.mean_phase - self.shear_law(chi_t, const)
        return d - np.pi * np.round(d / np.pi)

    def relative_error(self, chi_t: float, const: float = 0.0) -> np.ndarray:
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.abs(self.residual(chi_t, const)) / np.abs(self.shear_law(chi_t, const))

    def populated(self, min_count: int = 500) -> np.ndarray:
        return self.counts >= min_count


def phase_profile(
    ens: ClassicalEnsemble, n_r: int, r_max: float | None = None, norm: float | None = None
) -> PhaseProfile:
    """Folded circular mean of arg(alpha) in each radial bin.

    The BSV cloud is symmetric under alpha -> -alpha, so phases are folded
    modulo pi (mean of exp(2i phi), halved). The per-bin values are then
    unwrapped outward from the innermost populated bin so that the shear
    can exceed pi/2 at large amplitudes.
    """
    norm = ens.mean_amplitude if norm is None else float(norm)
    a = ens.alpha
    rho = np.abs(a) / norm
    edges = _radial_edges(rho, n_r, r_max)
    idx = np.clip(np.searchsorted(edges, rho, side="right") - 1, 0, n_r - 1)
    counts = np.bincount(idx, minlength=n_r)
    safe = np.where(counts > 0, counts, 1)
    mean_rho2 = np.bincount(idx, weights=rho**2, minlength=n_r) / safe
    u = np.zeros_like(a)
    nz = rho > 0
    u[nz] = (a[nz] / np.abs(a[nz])) ** 2
    res = np.bincount(idx, weights=u.real, minlength=n_r) + 1j * np.bincount(idx, weights=u.imag, minlength=n_r)
    phase = np.full(n_r, np.nan)
    filled = counts > 0
    phase[filled] = np.unwrap(np.angle(res[filled]) / 2.0, period=np.pi)
    mean_rho2[~filled] = np.nan
    return PhaseProfile(edges, counts, mean_rho2, phase, norm)
