"""Wigner and Husimi functions on rectangular grids, negativity volume, smoothing.

Grid coordinates are canonical quadratures (x, p) with vacuum variance 1/2 and
alpha = (x + i p)/sqrt(2). Two independent Wigner evaluators are provided:

``laguerre``
    Sums rho_{m,m+d} against the Fock kernels W_{m,m+d}(alpha), each diagonal d
    generated by the normalized associated-Laguerre recurrence in m. The
    recurrence is carried as mantissa + per-point log offset so that
    exp(-2|alpha|^2) and (2|alpha|)^d never under/overflow separately.
    Cost O(dim^2 * points); exact at arbitrary points.

``fourier``
    Builds the position-space kernel rho(x + y, x - y) from Hermite functions
    (same rescaling trick) and transforms over y with a chirp-z transform.
    Cost O(points * log) per row; used for large dimensions.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.ndimage import gaussian_filter
from scipy.signal import CZT
from scipy.special import gammaln

from .fock import CANONICAL, DensityMatrix, FockVector, QuadratureConvention, State, moments


class CoverageError(ValueError):
    """The grid misses a measurable part of the phase-space distribution."""


@dataclass(frozen=True)
class PhaseGrid:
    """Uniform (x, p) grid in canonical units, both end points included.

    ``convention`` records how values are reported to external consumers;
    the stored limits are always canonical.
    """

    x_min: float
    x_max: float
    p_min: float
    p_max: float
    nx: int
    np: int
    convention: QuadratureConvention = CANONICAL

    def __post_init__(self):
        if not self.x_max > self.x_min or not self.p_max > self.p_min:
            raise ValueError("grid limits must satisfy max > min")
        if self.nx < 2 or self.np < 2:
            raise ValueError("grid needs at least 2 points per axis")

    @property
    def xs(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.nx)

    @property
    def ps(self) -> np.ndarray:
        return np.linspace(self.p_min, self.p_max, self.np)

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / (self.nx - 1)

    @property
    def dp(self) -> float:
        return (self.p_max - self.p_min) / (self.np - 1)

    @property
    def cell_area(self) -> float:
        return self.dx * self.dp

    def refined(self, factor: int = 2) -> PhaseGrid:
        """Same window with cell sizes divided by ``factor``."""
        return replace(self, nx=factor * (self.nx - 1) + 1, np=factor * (self.np - 1) + 1)

    def mesh(self):
        return np.meshgrid(self.xs, self.ps, indexing="ij")


@dataclass(frozen=True)
class PhaseSpaceField:
    """Real function on a :class:`PhaseGrid`; ``values[i, j]`` sits at (xs[i], ps[j]).

    Wigner values are densities in dx dp. Husimi values follow
    Q(alpha) = <alpha|rho|alpha>/pi, a density in d^2 alpha = dx dp / 2.
    """

    grid: PhaseGrid
    values: np.ndarray
    kind: str = "wigner"
    trace: float = 1.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in ("wigner", "husimi"):
            raise ValueError(f"unknown field kind {self.kind!r}")
        if self.values.shape != (self.grid.nx, self.grid.np):
            raise ValueError("values shape does not match grid")

    @property
    def density(self) -> np.ndarray:
        """Values as a density per unit dx dp."""
        return self.values if self.kind == "wigner" else 0.5 * self.values

    def integral(self) -> float:
        return float(self.density.sum() * self.grid.cell_area)

    @property
    def normalization_residual(self) -> float:
        return abs(self.integral() - self.trace)


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------


def _support_level(state: State, tol=1e-18) -> int:
    """Highest Fock level carrying population above ``tol`` (relative)."""
    p = state.probabilities
    idx = np.nonzero(p > tol * p.max())[0]
    return int(idx[-1]) if idx.size else 0


def _pure_components(state: State, tol=1e-14):
    """Columns v_j with rho = sum_j v_j v_j^dag (eigenvectors scaled by sqrt(lambda))."""
    if isinstance(state, FockVector):
        return state.amps[:, None]
    rho = 0.5 * (state.elems + state.elems.conj().T)
    lam, vec = np.linalg.eigh(rho)
    keep = lam > tol * lam.max()
    return vec[:, keep] * np.sqrt(lam[keep])


def hermite_functions(nmax: int, u: np.ndarray) -> np.ndarray:
    """Normalized Hermite functions phi_n(u), n = 0..nmax, shape (nmax+1, len(u)).

    phi_{n+1} = sqrt(2/(n+1)) u phi_n - sqrt(n/(n+1)) phi_{n-1}, run on a
    rescaled mantissa so exp(-u^2/2) is never formed on its own.
    """
    u = np.asarray(u, dtype=float)
    out = np.empty((nmax + 1, u.size))
    logscale = -0.5 * u * u - 0.25 * np.log(np.pi)
    prev = np.zeros_like(u)
    cur = np.ones_like(u)
    with np.errstate(under="ignore"):
        out[0] = np.exp(logscale)
        for n in range(nmax):
            nxt = np.sqrt(2.0 / (n + 1)) * u * cur - np.sqrt(n / (n + 1.0)) * prev
            prev, cur = cur, nxt
            big = np.abs(cur) > 1e150
            if big.any():
                s = np.abs(cur[big])
                cur[big] /= s
                prev[big] /= s
                logscale[big] += np.log(s)
            out[n + 1] = cur * np.exp(logscale)
    return out


# ---------------------------------------------------------------------------
# Wigner evaluators
# ---------------------------------------------------------------------------


def wigner_points_laguerre(state: State, xs: np.ndarray, ps: np.ndarray) -> np.ndarray:
    """W at arbitrary points (xs, ps arrays of equal shape) via Laguerre diagonals.

    W = sum_m rho_mm K_m^0 + 2 Re sum_{d>0} sum_m rho_{m,m+d} K_m^d with
    K_m^d = ((-1)^m / pi) (2 alpha)^d sqrt(m!/(m+d)!) e^{-2|alpha|^2} L_m^d(4|alpha|^2).
    """
    xs = np.asarray(xs, dtype=float)
    shape = xs.shape
    xs = xs.ravel()
    ps = np.asarray(ps, dtype=float).ravel()
    rho = state.to_density().elems
    nmax = _support_level(state)
    rho = rho[: nmax + 1, : nmax + 1]
    dim = nmax + 1

    alpha = (xs + 1j * ps) / np.sqrt(2.0)
    z = 4.0 * np.abs(alpha) ** 2
    theta = np.angle(alpha)
    at_origin = z == 0.0
    logz = np.log(np.where(at_origin, 1.0, z))
    w = np.zeros(xs.size)
    sign = (-1.0) ** np.arange(dim)

    with np.errstate(under="ignore", over="ignore"):
        for d in range(dim):
            coef = rho[np.arange(dim - d), np.arange(d, dim)] * sign[: dim - d]
            if not np.any(coef):
                continue
            # l_0^d = z^{d/2} e^{-z/2} / sqrt(d!)
            logscale = 0.5 * d * logz - 0.5 * z - 0.5 * gammaln(d + 1)
            cur = np.ones_like(z)
            if d > 0:
                cur[at_origin] = 0.0
            prev = np.zeros_like(z)
            acc = np.zeros(xs.size, dtype=complex)
            phase = np.exp(1j * d * theta)
            for m in range(dim - d):
                if m > 0:
                    nxt = ((2 * m - 1 + d - z) * cur - np.sqrt((m - 1.0) * (m - 1 + d)) * prev) / np.sqrt(
                        m * (m + d)
                    )
                    prev, cur = cur, nxt
                    big = np.abs(cur) > 1e150
                    if big.any():
                        s = np.abs(cur[big])
                        cur[big] /= s
                        prev[big] /= s
                        logscale[big] += np.log(s)
                if coef[m] != 0:
                    acc += coef[m] * (cur * np.exp(logscale))
            term = np.real(acc * phase)
            w += term if d == 0 else 2.0 * term
    return (w / np.pi).reshape(shape)


def _wigner_laguerre(state, grid):
    X, P = grid.mesh()
    return wigner_points_laguerre(state, X, P)


def _wigner_fourier(state, grid, max_block=2**22, max_kernel_bytes=2**30):
    vecs = _pure_components(state)
    nmax = _support_level(state)
    vecs = vecs[: nmax + 1]
    half_width = np.sqrt(2.0 * nmax + 1.0) + 8.0
    pmax = max(abs(grid.p_min), abs(grid.p_max))
    # alias-free y sampling for momenta up to max(half_width, pmax)
    h_target = 0.9 * np.pi / (half_width + max(half_width, pmax))
    s = max(1, int(np.ceil(grid.dx / h_target)))
    h = grid.dx / s

    # lattice u_m = x_min + m h; grid row i sits at m = s i
    m_lo = min(int(np.floor((-half_width - grid.x_min) / h)), 0)
    m_hi = max(int(np.ceil((half_width - grid.x_min) / h)), s * (grid.nx - 1))
    u = grid.x_min + h * np.arange(m_lo, m_hi + 1)
    psi = hermite_functions(nmax, u).T @ vecs  # (M, rank)
    n_k = int(np.ceil(half_width / h)) + 1
    rank = psi.shape[1]

    weights = np.full(n_k, 2.0)
    weights[0] = 1.0
    k = np.arange(n_k)
    # X_j = sum_k g_k exp(-2 i p_j k h), p_j = p_min + j dp
    czt = CZT(n_k, grid.np, w=np.exp(-2j * grid.dp * h), a=np.exp(2j * grid.p_min * h))

    size = psi.shape[0]
    kernel = None
    if rank > 1 and size * size * 16 <= max_kernel_bytes:
        # rho(u, u') for every lattice pair
        kernel = psi @ psi.conj().T
    offset = -m_lo  # lattice index m maps to row m + offset

    out = np.empty((grid.nx, grid.np))
    rows = max(1, int(max_block // (n_k * (1 if kernel is not None else rank))))
    for start in range(0, grid.nx, rows):
        i = np.arange(start, min(start + rows, grid.nx))
        centre = s * i + offset
        plus = centre[:, None] + k[None, :]
        minus = centre[:, None] - k[None, :]
        inside = (plus < size) & (minus >= 0)
        plus = np.where(inside, plus, 0)
        minus = np.where(inside, minus, 0)
        if kernel is not None:
            g = kernel[plus, minus]
        else:
            g = np.einsum("ikj,ikj->ik", psi[plus], psi[minus].conj())
        g[~inside] = 0.0
        out[i] = np.real(czt(g * weights, axis=-1))
    return out * h / np.pi


def wigner(state: State, grid: PhaseGrid, method: str = "auto", check_coverage: bool = True) -> PhaseSpaceField:
    """Wigner function on ``grid`` (canonical units, vacuum peak 1/pi).

    Raises :class:`CoverageError` when the Riemann sum misses the state's
    trace by more than 1e-2 and ``check_coverage`` is set.
    """
    if method == "auto":
        nmax = _support_level(state)
        method = "laguerre" if (nmax + 1) ** 2 * grid.nx * grid.np < 4e7 else "fourier"
    if method == "laguerre":
        values = _wigner_laguerre(state, grid)
    elif method == "fourier":
        values = _wigner_fourier(state, grid)
    else:
        raise ValueError(f"unknown method {method!r}")
    trace = float(np.sum(state.probabilities))
    fld = PhaseSpaceField(grid, values, "wigner", trace, {"method": method})
    if check_coverage and fld.normalization_residual > 1e-2:
        raise CoverageError(
            f"Wigner normalization residual {fld.normalization_residual:.2e} > 1e-2; enlarge the grid"
        )
    return fld


# ---------------------------------------------------------------------------
# Husimi
# ---------------------------------------------------------------------------


def husimi(state: State, grid: PhaseGrid, check_coverage: bool = True, max_block=2**22) -> PhaseSpaceField:
    """Q(alpha) = <alpha|rho|alpha>/pi with coherent overlaps built in the log domain."""
    vecs = _pure_components(state)
    nmax = _support_level(state)
    vecs = vecs[: nmax + 1]
    n = np.arange(nmax + 1)
    lg = 0.5 * gammaln(n + 1)
    X, P = grid.mesh()
    alpha = ((X + 1j * P) / np.sqrt(2.0)).ravel()
    r = np.abs(alpha)
    logr = np.log(np.where(r == 0, 1.0, r))
    th = np.angle(alpha)
    q = np.empty(alpha.size)
    rows = max(1, int(max_block // (nmax + 1)))
    with np.errstate(under="ignore"):
        for start in range(0, alpha.size, rows):
            sl = slice(start, start + rows)
            # <n|alpha> = exp(-|a|^2/2 + n log|a| - log sqrt(n!)) e^{i n theta}
            logmag = -0.5 * r[sl, None] ** 2 + n[None, :] * logr[sl, None] - lg[None, :]
            ov = np.exp(logmag - 1j * n[None, :] * th[sl, None])
            if np.any(r[sl] == 0):
                zero = r[sl] == 0
                ov[zero] = 0.0
                ov[zero, 0] = 1.0
            amp = ov @ vecs  # <alpha|v_j>
            q[sl] = np.sum(np.abs(amp) ** 2, axis=1)
    values = (q / np.pi).reshape(grid.nx, grid.np)
    trace = float(np.sum(state.probabilities))
    fld = PhaseSpaceField(grid, values, "husimi", trace)
    if check_coverage and fld.normalization_residual > 1e-2:
        raise CoverageError(f"Husimi normalization residual {fld.normalization_residual:.2e} > 1e-2")
    return fld


# ---------------------------------------------------------------------------
# analysis
# ---------------------------------------------------------------------------


def negativity_volume(fld: PhaseSpaceField, max_residual: float | None = 1e-3) -> float:
    """-integral of W over the region W < 0 (plain Riemann sum)."""
    if fld.kind != "wigner":
        raise ValueError("negativity volume is defined for Wigner fields only")
    if max_residual is not None and fld.normalization_residual > max_residual:
        raise CoverageError(f"normalization residual {fld.normalization_residual:.2e} > {max_residual:g}")
    neg = np.clip(-fld.values, 0.0, None)
    return float(neg.sum() * fld.grid.cell_area)


def gaussian_smooth(fld: PhaseSpaceField, sigma: float) -> PhaseSpaceField:
    """Convolve with an isotropic Gaussian of standard deviation ``sigma`` (canonical units).

    With sigma = 1/sqrt(2) (the vacuum Wigner function) a Wigner field becomes
    the Husimi density per dx dp.
    """
    if sigma < 0:
        raise ValueError("sigma must be non-negative")
    if sigma == 0:
        return fld
    sig = (sigma / fld.grid.dx, sigma / fld.grid.dp)
    values = gaussian_filter(fld.values, sig, mode="constant", cval=0.0, truncate=10.0)
    return replace(fld, values=values, meta={**fld.meta, "smoothing_sigma": sigma})


def grid_suggest(
    state: State,
    padding: float = 5.0,
    symmetric: bool = True,
    oversample: float = 4.0,
    max_points: int | None = None,
) -> PhaseGrid:
    """Grid spanning mean +- padding sigma per quadrature.

    ``symmetric`` widens each axis to be symmetric about the origin. The cell
    size is 1/oversample of the finest interference-fringe scale pi/(2 R),
    R the largest |coordinate| on the grid.
    """
    if padding < 3:
        raise ValueError("padding must be >= 3")
    m = moments(state)
    sx, sp = np.sqrt(max(m.var_x, 1e-12)), np.sqrt(max(m.var_p, 1e-12))
    if symmetric:
        hx = abs(m.mean_x) + padding * sx
        hp = abs(m.mean_p) + padding * sp
        lims = (-hx, hx, -hp, hp)
    else:
        lims = (m.mean_x - padding * sx, m.mean_x + padding * sx, m.mean_p - padding * sp, m.mean_p + padding * sp)
    reach = max(np.hypot(max(abs(lims[0]), abs(lims[1])), max(abs(lims[2]), abs(lims[3]))), 1.0)
    cell = np.pi / (2.0 * reach) / oversample
    nx = int(np.ceil((lims[1] - lims[0]) / cell)) + 1
    npp = int(np.ceil((lims[3] - lims[2]) / cell)) + 1
    if max_points is not None and nx * npp > max_points:
        f = np.sqrt(nx * npp / max_points)
        nx, npp = max(2, int(nx / f)), max(2, int(npp / f))
    return PhaseGrid(*lims, nx, npp)


def negativity_with_refinement(state: State, grid: PhaseGrid, method: str = "auto") -> tuple[float, float]:
    """Negativity on ``grid`` and on the twice-refined grid.

    Returns (refined value, relative change between the two).
    """
    coarse = negativity_volume(wigner(state, grid, method))
    fine = negativity_volume(wigner(state, grid.refined(2), method))
    denom = max(abs(fine), 1e-300)
    return fine, abs(fine - coarse) / denom


def polar_phase_profile(fld: PhaseSpaceField, n_r: int = 20, fold: bool = True):
    """Weighted mean phase per amplitude bin of a (non-negative) field.

    Returns (mean |alpha|^2 per bin, mean phase per bin, weight per bin).
    Phases are folded onto a half-plane (doubled-angle mean) when ``fold``.
    """
    X, P = fld.grid.mesh()
    alpha = (X + 1j * P) / np.sqrt(2.0)
    rad = np.abs(alpha).ravel()
    ph = np.angle(alpha).ravel()
    wgt = np.clip(fld.values.ravel(), 0.0, None)
    edges = np.linspace(0.0, rad.max(), n_r + 1)
    idx = np.clip(np.digitize(rad, edges) - 1, 0, n_r - 1)
    k = 2.0 if fold else 1.0
    wsum = np.bincount(idx, wgt, n_r)
    r2 = np.bincount(idx, wgt * rad**2, n_r) / np.where(wsum > 0, wsum, 1)
    vec = np.bincount(idx, wgt * np.cos(k * ph), n_r) + 1j * np.bincount(idx, wgt * np.sin(k * ph), n_r)
    return r2, np.angle(vec) / k, wsum
