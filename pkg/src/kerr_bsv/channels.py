"""Kerr unitary, beamsplitter loss, and medium-parameter conversions."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.constants import c as SPEED_OF_LIGHT
from scipy.constants import hbar as HBAR
from scipy.special import gammaln

from .fock import DensityMatrix, FockVector, State

#: Kraus terms are added until the untransferred trace falls below this
KRAUS_RESIDUAL = 1e-12


@dataclass(frozen=True)
class KerrMediumParams:
    """Bulk medium and beam parameters (SI units).

    omega0 [rad/s], n0 [-], n2 [m^2/W], V_eff [m^3], L [m], I [W/m^2].
    """

    omega0: float
    n0: float
    n2: float
    V_eff: float
    L: float = 1.0
    I: float = 0.0

    def __post_init__(self):
        for name in ("omega0", "n0", "V_eff", "L"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")
        # n2 = 0 and I = 0 are meaningful limits (no nonlinearity / no light)
        if self.n2 < 0 or self.I < 0:
            raise ValueError("n2 and I must be non-negative")


@dataclass(frozen=True)
class LossChannel:
    """Beamsplitter with reflection (loss) R and transmission T = 1 - R."""

    R: float

    def __post_init__(self):
        if not 0.0 <= self.R <= 1.0:
            raise ValueError(f"loss R must lie in [0, 1], got {self.R}")

    @property
    def T(self) -> float:
        return 1.0 - self.R


def kerr_phases(dim: int, chi_t: float, corotating: bool = False) -> np.ndarray:
    n = np.arange(dim, dtype=float)
    if corotating:
        return np.exp(-1j * chi_t * n * n)
    return np.exp(-1j * chi_t * n * (n - 1))


def kerr_apply(state: State, chi_t: float, corotating: bool = False) -> State:
    """Apply exp(-i chi_t a^dag^2 a^2), diagonal in the Fock basis.

    With ``corotating=True`` the result is viewed from a frame rotating at
    angular velocity chi, which removes the rigid rotation carried by the
    linear part of n(n-1); the applied phase is then exp(-i chi_t n^2).
    """
    ph = kerr_phases(state.dim, chi_t, corotating)
    if isinstance(state, FockVector):
        return FockVector(state.amps * ph)
    return DensityMatrix(state.elems * np.outer(ph, ph.conj()))


def _kraus_diagonal(dim, k, R, T):
    """A[m] = sqrt(C(m+k, k)) T^{m/2} R^{k/2} for m = 0..dim-1-k."""
    m = np.arange(dim - k, dtype=float)
    j = m + k
    logc = 0.5 * (gammaln(j + 1) - gammaln(k + 1) - gammaln(m + 1))
    return np.exp(logc + 0.5 * m * np.log(T) + 0.5 * k * np.log(R))


def loss_apply(state: State, ch: LossChannel | float) -> DensityMatrix:
    """Amplitude-damping channel rho -> sum_k K_k rho K_k^dag.

    K_k = sum_n sqrt(C(n, k)) T^{(n-k)/2} R^{k/2} |n-k><n|. Terms are summed in
    increasing k until the remaining input trace is below ``KRAUS_RESIDUAL``.
    """
    if not isinstance(ch, LossChannel):
        ch = LossChannel(float(ch))
    rho = state.to_density().elems
    dim = rho.shape[0]
    if ch.R == 0.0:
        return DensityMatrix(rho.copy())
    tr_in = float(np.real(np.trace(rho)))
    if ch.R == 1.0:
        out = np.zeros_like(rho)
        out[0, 0] = tr_in
        return DensityMatrix(out)
    out = np.zeros_like(rho)
    moved = 0.0
    for k in range(dim):
        a = _kraus_diagonal(dim, k, ch.R, ch.T)
        block = np.outer(a, a) * rho[k:, k:]
        out[: dim - k, : dim - k] += block
        moved += float(np.real(np.trace(block)))
        if tr_in - moved < KRAUS_RESIDUAL * max(tr_in, 1.0):
            break
    return DensityMatrix(out)


def kerr_constant(p: KerrMediumParams) -> float:
    """chi [rad/s] = hbar omega0^2 c n2 / (n0^2 V_eff)."""
    return HBAR * p.omega0**2 * SPEED_OF_LIGHT * p.n2 / (p.n0**2 * p.V_eff)


def classical_kerr_phase(p: KerrMediumParams) -> float:
    """Self-phase modulation phase n2 I L omega0 / c [rad]."""
    return p.n2 * p.I * p.L * p.omega0 / SPEED_OF_LIGHT


def kerr_phase_at_mean(chi_t: float, n_mean: float) -> float:
    """Nonlinear phase 2 chi_t n at photon number n."""
    return 2.0 * chi_t * n_mean


def chi_t_for_phase(phi_kerr: float, n_mean: float) -> float:
    """Inverse of :func:`kerr_phase_at_mean`, used to hold the phase fixed across a scan."""
    if n_mean <= 0:
        raise ValueError("n_mean must be positive")
    return phi_kerr / (2.0 * n_mean)
