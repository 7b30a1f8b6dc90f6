"""Single-mode states in a truncated Fock basis.

Amplitudes are built in the log domain so that dimensions of several hundred
levels (|alpha|^2 ~ 200 and beyond) never touch an overflowing factorial.

Squeezing convention used throughout the package: for real ``r > 0`` the
operator ``S(r) = exp[(r/2)(a^dag^2 - a^2)]`` anti-squeezes the x quadrature
and squeezes p, so a displacement along real beta is phase squeezed.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm
from scipy.special import gammaln

#: deficits above this are flagged on the returned state
TRUNCATION_TOL = 1e-6


class TruncationWarning(UserWarning):
    """Raised (as a warning) when a state loses norm to the Fock cutoff."""


class NumericalError(RuntimeError):
    pass


class QuadratureConvention(enum.Enum):
    """Quadrature normalization.

    ``CANONICAL`` uses x = (a + a^dag)/sqrt(2), vacuum variance 1/2.
    ``PAPER`` uses X = a + a^dag, vacuum variance 1.
    """

    CANONICAL = "canonical"
    PAPER = "paper"

    @property
    def vacuum_variance(self) -> float:
        return 0.5 if self is QuadratureConvention.CANONICAL else 1.0

    @property
    def scale(self) -> float:
        """Factor converting a canonical quadrature value to this convention."""
        return 1.0 if self is QuadratureConvention.CANONICAL else float(np.sqrt(2.0))


CANONICAL = QuadratureConvention.CANONICAL
PAPER = QuadratureConvention.PAPER


def _check_dim(dim):
    if int(dim) != dim or dim < 1:
        raise ValueError(f"dim must be a positive integer, got {dim!r}")
    return int(dim)


def _flag(deficit, what):
    if deficit > TRUNCATION_TOL:
        warnings.warn(
            f"{what}: truncation deficit {deficit:.3e} exceeds {TRUNCATION_TOL:g}",
            TruncationWarning,
            stacklevel=3,
        )


@dataclass(frozen=True)
class FockVector:
    """Pure state as complex amplitudes over Fock levels 0..dim-1."""

    amps: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amps, dtype=complex)
        if amps.ndim != 1 or amps.size < 1:
            raise ValueError("amps must be a non-empty 1-D array")
        object.__setattr__(self, "amps", amps)

    @property
    def dim(self) -> int:
        return self.amps.size

    @property
    def probabilities(self) -> np.ndarray:
        return np.abs(self.amps) ** 2

    @property
    def deficit(self) -> float:
        """Norm lost to the cutoff, ``1 - sum |amps|^2`` (clipped at 0)."""
        return max(0.0, 1.0 - float(np.sum(self.probabilities)))

    @property
    def truncated(self) -> bool:
        return self.deficit > TRUNCATION_TOL

    def renormalized(self) -> FockVector:
        return FockVector(self.amps / np.linalg.norm(self.amps))

    def to_density(self) -> DensityMatrix:
        return DensityMatrix(np.outer(self.amps, self.amps.conj()))


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, (nearly) unit-trace matrix over the truncated Fock space."""

    elems: np.ndarray

    def __post_init__(self):
        elems = np.asarray(self.elems, dtype=complex)
        if elems.ndim != 2 or elems.shape[0] != elems.shape[1] or elems.shape[0] < 1:
            raise ValueError("elems must be a non-empty square matrix")
        object.__setattr__(self, "elems", elems)

    @property
    def dim(self) -> int:
        return self.elems.shape[0]

    @property
    def probabilities(self) -> np.ndarray:
        return np.real(np.diag(self.elems)).copy()

    @property
    def trace(self) -> float:
        return float(np.real(np.trace(self.elems)))

    @property
    def deficit(self) -> float:
        return max(0.0, 1.0 - self.trace)

    @property
    def truncated(self) -> bool:
        return self.deficit > TRUNCATION_TOL

    def renormalized(self) -> DensityMatrix:
        return DensityMatrix(self.elems / self.trace)

    def to_density(self) -> DensityMatrix:
        return self

    def is_hermitian(self, rtol=1e-12) -> bool:
        scale = max(np.abs(self.elems).max(), 1e-300)
        return bool(np.abs(self.elems - self.elems.conj().T).max() <= rtol * scale)

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(0.5 * (self.elems + self.elems.conj().T))


State = FockVector | DensityMatrix


# ---------------------------------------------------------------------------
# constructors
# ---------------------------------------------------------------------------


def fock_state(n: int, dim: int) -> FockVector:
    dim = _check_dim(dim)
    if not 0 <= n < dim:
        raise ValueError(f"level {n} outside 0..{dim - 1}")
    amps = np.zeros(dim, dtype=complex)
    amps[n] = 1.0
    return FockVector(amps)


def vacuum(dim: int) -> FockVector:
    return fock_state(0, dim)


def coherent_state(alpha: complex, dim: int, normalize: bool = False) -> FockVector:
    """Coherent state |alpha> truncated to ``dim`` levels.

    amps[n] = exp(-|alpha|^2/2) alpha^n / sqrt(n!), evaluated as
    exp(log|.|) * exp(i n arg alpha).
    """
    dim = _check_dim(dim)
    alpha = complex(alpha)
    n = np.arange(dim)
    amps = np.zeros(dim, dtype=complex)
    if alpha == 0:
        amps[0] = 1.0
    else:
        logmag = -0.5 * abs(alpha) ** 2 + n * np.log(abs(alpha)) - 0.5 * gammaln(n + 1)
        amps = np.exp(logmag + 1j * n * np.angle(alpha))
    state = FockVector(amps)
    _flag(state.deficit, "coherent_state")
    return state.renormalized() if normalize else state


def squeezed_vacuum_state(r: float, dim: int, theta: float = 0.0, normalize: bool = False) -> FockVector:
    """S(r, theta)|0> with S = exp[(r/2)(e^{i theta} a^dag^2 - e^{-i theta} a^2)].

    amps[2k] = (cosh r)^{-1/2} (e^{i theta} tanh r)^k sqrt((2k)!) / (2^k k!),
    odd amplitudes are exactly zero. ``theta = 0`` squeezes p.
    """
    dim = _check_dim(dim)
    r = float(r)
    amps = np.zeros(dim, dtype=complex)
    if r == 0.0:
        amps[0] = 1.0
        return FockVector(amps)
    sign = 1.0
    if r < 0:
        r, sign = -r, -1.0
    k = np.arange((dim + 1) // 2)
    logmag = (
        -0.5 * np.log(np.cosh(r))
        + k * np.log(np.tanh(r))
        + 0.5 * gammaln(2 * k + 1)
        - k * np.log(2.0)
        - gammaln(k + 1)
    )
    amps[0::2] = np.exp(logmag) * (sign * np.exp(1j * theta)) ** k
    state = FockVector(amps)
    _flag(state.deficit, "squeezed_vacuum_state")
    return state.renormalized() if normalize else state


def displacement_from_alpha(alpha: complex, r: float, theta: float = 0.0) -> complex:
    """Physical displacement beta of S(r) D(alpha)|0>.

    S(r) D(alpha) S(r)^dag = D(beta), beta = alpha cosh r + alpha* e^{i theta} sinh r.
    """
    alpha = complex(alpha)
    return alpha * np.cosh(r) + alpha.conjugate() * np.exp(1j * theta) * np.sinh(r)


def alpha_from_displacement(beta: complex, r: float, theta: float = 0.0) -> complex:
    """Inverse of :func:`displacement_from_alpha`."""
    beta = complex(beta)
    return beta * np.cosh(r) - beta.conjugate() * np.exp(1j * theta) * np.sinh(r)


def squeezed_coherent_amplitudes(betas, r: float, dim: int, theta: float = 0.0) -> np.ndarray:
    """Amplitudes of |beta, r> for an array of displacements, shape (dim, len(betas)).

    Amplitudes follow from the annihilator
    (a - beta) cosh r - (a^dag - beta*) e^{i theta} sinh r, giving the recurrence
    sqrt(n+1) c_{n+1} = (beta - beta* e^{i theta} tanh r) c_n + e^{i theta} tanh r sqrt(n) c_{n-1}.
    The recursion runs on a rescaled mantissa with a per-sample log offset.
    """
    betas = np.atleast_1d(np.asarray(betas, dtype=complex))
    t = np.tanh(r)
    rot = np.exp(1j * theta)
    lin = betas - betas.conj() * rot * t
    log_c0 = -0.5 * np.log(np.cosh(r)) - 0.5 * np.abs(betas) ** 2 + 0.5 * betas.conj() ** 2 * rot * t

    out = np.empty((dim, betas.size), dtype=complex)
    shift = np.zeros(betas.size)
    prev = np.zeros(betas.size, dtype=complex)
    cur = np.ones(betas.size, dtype=complex)
    with np.errstate(under="ignore"):
        out[0] = np.exp(log_c0)
        for n in range(dim - 1):
            nxt = (lin * cur + rot * t * np.sqrt(n) * prev) / np.sqrt(n + 1)
            prev, cur = cur, nxt
            mag = np.abs(cur)
            bad = (mag > 1e150) | ((mag < 1e-150) & (mag > 0))
            if bad.any():
                prev[bad] /= mag[bad]
                cur[bad] /= mag[bad]
                shift[bad] += np.log(mag[bad])
            out[n + 1] = cur * np.exp(shift + log_c0)
    return out


def squeezed_coherent_state(
    beta: complex, r: float, dim: int, theta: float = 0.0, normalize: bool = False
) -> FockVector:
    """|beta, r> := S(r) D(alpha)|0> = D(beta) S(r)|0>, with beta the physical displacement.

    Use :func:`alpha_from_displacement` to go from beta to the pre-squeeze alpha.
    """
    dim = _check_dim(dim)
    beta = complex(beta)
    r = float(r)
    if r == 0.0:
        return coherent_state(beta, dim, normalize=normalize)
    if beta == 0:
        return squeezed_vacuum_state(r, dim, theta=theta, normalize=normalize)
    state = FockVector(squeezed_coherent_amplitudes([beta], r, dim, theta)[:, 0])
    _flag(state.deficit, "squeezed_coherent_state")
    return state.renormalized() if normalize else state


def thermal_state(n_th: float, dim: int) -> DensityMatrix:
    """Diagonal thermal state, p_n = n_th^n / (1 + n_th)^{n+1}."""
    dim = _check_dim(dim)
    if n_th < 0:
        raise ValueError("n_th must be >= 0")
    p = np.zeros(dim)
    if n_th == 0:
        p[0] = 1.0
    else:
        n = np.arange(dim)
        p = np.exp(n * np.log(n_th) - (n + 1) * np.log1p(n_th))
    rho = DensityMatrix(np.diag(p).astype(complex))
    _flag(rho.deficit, "thermal_state")
    return rho


def build_squeeze_matrix(r: float, dim: int, theta: float = 0.0) -> np.ndarray:
    """Matrix exponential of the truncated generator (r/2)(e^{i theta} a^dag^2 - e^{-i theta} a^2).

    The generator is anti-Hermitian, so the result is unitary on the truncated
    space; only the top levels (roughly the last 10%) misrepresent the
    infinite-dimensional operator.
    """
    dim = _check_dim(dim)
    if dim < 2:
        raise ValueError("dim must be >= 2")
    n = np.arange(dim - 2)
    a2 = np.zeros((dim, dim), dtype=complex)
    a2[n, n + 2] = np.sqrt((n + 1.0) * (n + 2.0))
    gen = 0.5 * r * (np.exp(1j * theta) * a2.conj().T - np.exp(-1j * theta) * a2)
    if theta == 0.0:
        gen = gen.real
    u = expm(gen)
    if not np.all(np.isfinite(u)):
        raise NumericalError("squeeze matrix exponential did not converge")
    return u


def _working_dim(dim, r, n_th=0.0):
    # population extends to ~ (1 + 2 n_th) e^{2r}; pad so the corrupted edge stays empty
    spread = (1 + 2 * n_th) * np.exp(2 * abs(r))
    return int(max(2 * dim, dim + 40 * spread + 60))


def squeezed_thermal_state(n_th: float, r: float, dim: int, theta: float = 0.0) -> DensityMatrix:
    """S(r) rho_th(n_th) S(r)^dag, computed in a padded space and cropped to ``dim``."""
    dim = _check_dim(dim)
    if r == 0.0:
        return thermal_state(n_th, dim)
    work = _working_dim(dim, r, n_th)
    u = build_squeeze_matrix(r, work, theta)
    inner = work // 2
    resid = np.abs(u[:, :inner].conj().T @ u[:, :inner] - np.eye(inner)).max()
    if resid > 1e-8:
        raise NumericalError(f"squeeze matrix unitarity residual {resid:.2e}")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        p = thermal_state(n_th, work).probabilities
    keep = p > 1e-300
    uk = u[:dim, : work][:, keep]
    rho = DensityMatrix((uk * p[keep]) @ uk.conj().T)
    _flag(rho.deficit, "squeezed_thermal_state")
    return rho


# ---------------------------------------------------------------------------
# generic manipulation
# ---------------------------------------------------------------------------


def rotate(state: State, angle: float) -> State:
    """Rotate phase space by ``angle``: amps[n] *= exp(i angle n), so <a> -> <a> e^{i angle}."""
    ph = np.exp(1j * angle * np.arange(state.dim))
    if isinstance(state, FockVector):
        return FockVector(state.amps * ph)
    return DensityMatrix(state.elems * np.outer(ph, ph.conj()))


def purity(state: State) -> float:
    if isinstance(state, FockVector):
        return float(np.sum(state.probabilities) ** 2)
    return float(np.real(np.vdot(state.elems, state.elems)))


def fidelity(a: State, b: State) -> float:
    """Fidelity for pure/pure or pure/mixed pairs; Uhlmann fidelity for mixed/mixed."""
    if isinstance(a, FockVector) and isinstance(b, FockVector):
        return float(abs(np.vdot(a.amps, b.amps)) ** 2)
    if isinstance(a, FockVector):
        a, b = b, a
    if isinstance(b, FockVector):
        return float(np.real(b.amps.conj() @ a.elems @ b.amps))
    from scipy.linalg import sqrtm

    sa = sqrtm(a.elems)
    return float(np.real(np.trace(sqrtm(sa @ b.elems @ sa))) ** 2)


def trace_distance(a: State, b: State) -> float:
    diff = a.to_density().elems - b.to_density().elems
    ev = np.linalg.eigvalsh(0.5 * (diff + diff.conj().T))
    return 0.5 * float(np.abs(ev).sum())


@dataclass(frozen=True)
class Moments:
    """First and second moments; quadratures in the requested convention."""

    mean_n: float
    mean_x: float
    mean_p: float
    var_x: float
    var_p: float
    cov_xp: float
    purity: float
    convention: QuadratureConvention = CANONICAL

    @property
    def principal_variances(self) -> tuple[float, float]:
        """(max, min) eigenvalues of the quadrature covariance matrix."""
        cov = np.array([[self.var_x, self.cov_xp], [self.cov_xp, self.var_p]])
        lo, hi = np.linalg.eigvalsh(cov)
        return float(hi), float(lo)


def _ladder_expectations(state):
    """<a>, <a^2>, <a^dag a> and trace, from the first two off-diagonals."""
    n = np.arange(state.dim)
    if isinstance(state, FockVector):
        c = state.amps
        norm = float(np.sum(np.abs(c) ** 2))
        a1 = np.sum(c[:-1].conj() * np.sqrt(n[1:]) * c[1:])
        a2 = np.sum(c[:-2].conj() * np.sqrt(n[2:] * n[1:-1]) * c[2:])
        nn = float(np.sum(n * np.abs(c) ** 2))
    else:
        rho = state.elems
        norm = state.trace
        # Tr(rho a) = sum_n sqrt(n) rho[n, n-1]
        a1 = np.sum(np.sqrt(n[1:]) * np.diagonal(rho, -1))
        a2 = np.sum(np.sqrt(n[2:] * n[1:-1]) * np.diagonal(rho, -2))
        nn = float(np.sum(n * np.real(np.diag(rho))))
    return a1 / norm, a2 / norm, nn / norm


def moments(state: State, convention: QuadratureConvention = CANONICAL) -> Moments:
    """Photon number, quadrature means/variances and purity.

    Expectations are normalized by the state's own trace, so a small
    truncation deficit does not bias the variances.
    """
    a1, a2, nbar = _ladder_expectations(state)
    mean_x = np.sqrt(2.0) * a1.real
    mean_p = np.sqrt(2.0) * a1.imag
    # canonical: <x^2> = Re<a^2> + <n> + 1/2, <p^2> = -Re<a^2> + <n> + 1/2
    var_x = a2.real + nbar + 0.5 - mean_x**2
    var_p = -a2.real + nbar + 0.5 - mean_p**2
    # symmetrized <xp + px>/2 = Im<a^2>
    cov_xp = a2.imag - mean_x * mean_p
    s = convention.scale
    return Moments(
        mean_n=nbar,
        mean_x=float(s * mean_x),
        mean_p=float(s * mean_p),
        var_x=float(s * s * var_x),
        var_p=float(s * s * var_p),
        cov_xp=float(s * s * cov_xp),
        purity=purity(state),
        convention=convention,
    )
