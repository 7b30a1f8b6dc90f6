"""Bright squeezed vacuum after linear loss.

A squeezed vacuum with initial squeezing r0 (N = sinh^2 r0 photons) that
passes a beamsplitter with loss R is a squeezed thermal state S(r) rho_th S^dag(r).
The same state is a Gaussian mixture of squeezed coherent states |beta, r>,
which is what :func:`reconstruct_mixture` samples.

Quadrature variances here use the X = a + a^dag normalization (vacuum = 1).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fock import DensityMatrix, squeezed_coherent_amplitudes, squeezed_vacuum_state


@dataclass(frozen=True)
class LossyBsvParams:
    r0: float
    N: float
    R: float
    r: float
    n_th: float
    purity: float
    var_min: float
    var_max: float
    r_approx: float
    n_th_approx: float
    degenerate: str | None = None

    @property
    def T(self) -> float:
        return 1.0 - self.R

    @property
    def r_approx_rel_error(self) -> float:
        return abs(self.r_approx - self.r) / abs(self.r) if self.r else float("nan")

    @property
    def n_th_approx_rel_error(self) -> float:
        return abs(self.n_th_approx - self.n_th) / self.n_th if self.n_th else float("nan")

    def as_dict(self) -> dict:
        d = {k: getattr(self, k) for k in self.__dataclass_fields__}
        d.update(T=self.T, r_approx_rel_error=self.r_approx_rel_error, n_th_approx_rel_error=self.n_th_approx_rel_error)
        return d


def lossy_bsv_params(r0: float, R: float) -> LossyBsvParams:
    """Effective squeezing, thermal photons and purity of BSV after loss R.

    var_min/max = T e^{-+2 r0} + R = (1 + 2 n_th) e^{-+2r}
    e^{2r} = sqrt((T e^{2 r0} + R) / (T e^{-2 r0} + R))
    n_th = (sqrt(1 + 4 R T N) - 1) / 2,  purity = 1 / sqrt(1 + 4 R T N)
    and the large-N forms r ~ r0/2 - ln(R/T)/4, n_th ~ sqrt(R T N).
    R = 0 and R = 1 are returned with ``degenerate`` set.
    """
    if r0 < 0:
        raise ValueError("r0 must be >= 0")
    if not 0.0 <= R <= 1.0:
        raise ValueError("R must lie in [0, 1]")
    T = 1.0 - R
    N = np.sinh(r0) ** 2
    var_max = T * np.exp(2 * r0) + R
    var_min = T * np.exp(-2 * r0) + R
    r = 0.25 * np.log(var_max / var_min)
    x = 4.0 * R * T * N
    # sqrt(1 + x) - 1 without cancellation at small x
    n_th = 0.5 * x / (np.sqrt(1.0 + x) + 1.0)
    purity = 1.0 / np.sqrt(1.0 + x)
    degenerate = None
    if R == 0.0:
        degenerate, r_approx, n_th_approx = "lossless", r0, 0.0
    elif R == 1.0:
        degenerate, r_approx, n_th_approx = "vacuum", 0.0, 0.0
    else:
        r_approx = 0.5 * r0 - 0.25 * np.log(R / T)
        n_th_approx = np.sqrt(R * T * N)
    return LossyBsvParams(
        r0=float(r0),
        N=float(N),
        R=float(R),
        r=float(r),
        n_th=float(n_th),
        purity=float(purity),
        var_min=float(var_min),
        var_max=float(var_max),
        r_approx=float(r_approx),
        n_th_approx=float(n_th_approx),
        degenerate=degenerate,
    )


def lossy_bsv_params_from_photons(N: float, R: float) -> LossyBsvParams:
    return lossy_bsv_params(float(np.arcsinh(np.sqrt(N))), R)


def mixture_params(n_th: float, r: float) -> LossyBsvParams:
    """Parameter record for a squeezed thermal state given directly by (n_th, r)."""
    g = 1.0 + 2.0 * n_th
    return LossyBsvParams(
        r0=float("nan"),
        N=float("nan"),
        R=float("nan"),
        r=float(r),
        n_th=float(n_th),
        purity=1.0 / g,
        var_min=g * np.exp(-2 * r),
        var_max=g * np.exp(2 * r),
        r_approx=float("nan"),
        n_th_approx=float("nan"),
    )


@dataclass(frozen=True)
class MixtureSamples:
    """i.i.d. displacements of the squeezed-coherent mixture, all with squeezing ``r``."""

    beta: np.ndarray
    r: float
    seed: int | None = None

    def __len__(self):
        return self.beta.size

    def mean_photons(self) -> float:
        """Mixture estimate of <n>: mean |beta|^2 plus sinh^2 r."""
        return float(np.mean(np.abs(self.beta) ** 2) + np.sinh(self.r) ** 2)


def make_rng(seed: int, worker: int | None = None) -> np.random.Generator:
    """PCG64 stream for ``seed``; ``worker`` selects an independent child stream."""
    ss = np.random.SeedSequence(seed) if worker is None else np.random.SeedSequence(seed, spawn_key=(worker,))
    return np.random.Generator(np.random.PCG64(ss))


def sample_displacements(params: LossyBsvParams, count: int, seed: int, workers: int = 1) -> MixtureSamples:
    """Draw beta with Var(Re beta) = n_th e^{2r}/2 and Var(Im beta) = n_th e^{-2r}/2.

    With ``workers > 1`` the draws come from ``workers`` child streams,
    concatenated in worker order (so the result depends on ``workers``).
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    if params.n_th <= 0:
        return MixtureSamples(np.zeros(count, dtype=complex), params.r, seed)
    sx = np.sqrt(params.n_th * np.exp(2 * params.r) / 2)
    sp = np.sqrt(params.n_th * np.exp(-2 * params.r) / 2)
    if workers == 1:
        z = make_rng(seed).standard_normal((2, count))
    else:
        sizes = np.diff(np.linspace(0, count, workers + 1).astype(int))
        z = np.concatenate([make_rng(seed, w).standard_normal((2, n)) for w, n in enumerate(sizes)], axis=1)
    return MixtureSamples(sx * z[0] + 1j * sp * z[1], params.r, seed)


def reconstruct_mixture(
    params: LossyBsvParams, dim: int, count: int, seed: int, batch: int = 4096
) -> DensityMatrix:
    """Monte-Carlo average of |beta, r><beta, r| over sampled displacements."""
    if params.n_th <= 0:
        return squeezed_vacuum_state(params.r, dim).to_density()
    samples = sample_displacements(params, count, seed)
    rho = np.zeros((dim, dim), dtype=complex)
    for start in range(0, count, batch):
        amps = squeezed_coherent_amplitudes(samples.beta[start : start + batch], params.r, dim)
        rho += amps @ amps.conj().T
    return DensityMatrix(rho / count)
