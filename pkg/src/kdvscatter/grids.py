"""Uniform grids, Fourier conventions, quadrature and the weighted norm zoo.

Conventions used throughout the package:

    F_-(f)(k) = int e^{+2ikx} f(x) dx          (forward transform)
    F_-^{-1}(F)(x) = (1/pi) int e^{-2ikx} F(k) dk

so that F_-^{-1} o F_- = Id on decaying functions.  The +2ik pairing is the
one under which the scattering coefficient S(q, .) is a perturbation of
F_-(q): the plane-wave-normalized Jost expansion of S starts with
int e^{+2ikt} q(t) dt.  All x- and k-integrals are composite trapezoid sums
on the uniform grids, which is spectrally accurate for smooth integrands
that decay below the boundary threshold.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import BoundaryDecayWarning, SymmetryError

#: Default relative boundary-decay threshold (relative to max|f|).
DECAY_THRESHOLD = 1e-10


def _is_power_of_two(n):
    return n > 0 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class SpatialGrid:
    """Uniform grid x_j = -L + j*h, j = 0..n-1, with h = 2L/n.

    The right endpoint +L is excluded (periodized view); n is a power of
    two so fast transforms apply.
    """

    L: float
    n: int

    def __post_init__(self):
        if self.L <= 0:
            raise ValueError("half_width L must be positive")
        if self.n % 2 or not _is_power_of_two(self.n):
            raise ValueError("n must be an even power of two")

    @property
    def h(self):
        return 2.0 * self.L / self.n

    @cached_property
    def nodes(self):
        return -self.L + self.h * np.arange(self.n)

    @property
    def zero_index(self):
        """Index of the node x = 0."""
        return self.n // 2

    def index_of(self, x0):
        """Index of the grid node closest to x0."""
        return int(round((x0 + self.L) / self.h))


@dataclass(frozen=True)
class SpectralGrid:
    """Symmetric k-grid: n_k intervals, n_k+1 nodes linspace(-k_max, k_max).

    n_k is even, so k = 0 is a node and every node k has the partner -k
    (node reversal maps k_j -> -k_j exactly).  The k-grid is independent of
    any spatial grid; callers choose k_max and n_k.
    """

    k_max: float
    n_k: int

    def __post_init__(self):
        if self.k_max <= 0:
            raise ValueError("k_max must be positive")
        if self.n_k <= 0 or self.n_k % 2:
            raise ValueError("n_k must be an even positive integer")

    @property
    def dk(self):
        return 2.0 * self.k_max / self.n_k

    @cached_property
    def nodes(self):
        return np.linspace(-self.k_max, self.k_max, self.n_k + 1)

    @property
    def zero_index(self):
        return self.n_k // 2

    @cached_property
    def trapezoid_weights(self):
        w = np.full(self.n_k + 1, self.dk)
        w[0] = w[-1] = 0.5 * self.dk
        return w

    @staticmethod
    def reflect(values):
        """Samples of f(-k) from samples of f(k) (exact on this grid)."""
        return values[::-1]


@dataclass
class Potential:
    """Real potential samples on a spatial grid with decay/regularity
    metadata (sobolev_order N, weight_order M)."""

    grid: SpatialGrid
    values: np.ndarray
    sobolev_order: int = 0
    weight_order: int = 4

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.n,):
            raise ValueError("values must have one sample per grid node")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("potential samples must be finite")
        if self.weight_order < 4:
            raise ValueError("weight_order M must be >= 4")


@dataclass
class ComplexField:
    """Complex samples over a spatial or spectral grid."""

    grid: "SpatialGrid | SpectralGrid"
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        expected = self.grid.n if isinstance(self.grid, SpatialGrid) else self.grid.n_k + 1
        if self.values.shape != (expected,):
            raise ValueError("values must have one sample per grid node")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("field samples must be finite")


def check_boundary_decay(values, threshold=DECAY_THRESHOLD, label="function"):
    """Warn if the samples at the grid edges exceed threshold * max|f|."""
    vals = np.asarray(values)
    scale = np.max(np.abs(vals))
    if scale == 0.0:
        return True
    edge = max(abs(vals[0]), abs(vals[-1]))
    if edge > threshold * scale:
        warnings.warn(
            f"{label} does not decay at the grid boundary "
            f"(|edge|/max = {edge / scale:.2e} > {threshold:.1e}); "
            "results carry domain-truncation error",
            BoundaryDecayWarning,
            stacklevel=3,
        )
        return False
    return True


def _dual_grid_matches(grid: SpatialGrid, ks: SpectralGrid):
    """True if ks is the canonical dual of grid: k_j = pi*j/(2L), which makes
    e^{-2ikx} a pure DFT kernel."""
    dk_dual = np.pi / (2.0 * grid.L)
    return (
        abs(ks.dk - dk_dual) <= 1e-12 * dk_dual
        and ks.n_k // 2 < grid.n
        and abs(ks.k_max - dk_dual * (ks.n_k // 2)) <= 1e-12 * ks.k_max
    )


def fourier_minus(q: Potential | ComplexField, ks: SpectralGrid,
                  decay_threshold=DECAY_THRESHOLD) -> ComplexField:
    """Forward transform F_-(q)(k) = int e^{+2ikx} q(x) dx on the k-grid.

    Direct O(n * n_k) quadrature; a fast FFT path is taken when ks is the
    canonical dual grid of q.grid.  For real q the output satisfies
    F(-k) = conj(F(k)) to quadrature accuracy.
    """
    grid = q.grid
    if not isinstance(grid, SpatialGrid):
        raise TypeError("fourier_minus expects samples on a spatial grid")
    vals = np.asarray(q.values)
    check_boundary_decay(vals, decay_threshold, label="fourier_minus input")
    if _dual_grid_matches(grid, ks):
        F = _fourier_minus_fft(vals, grid, ks)
    else:
        phase = np.exp(2j * np.outer(ks.nodes, grid.nodes))
        F = phase @ (vals * grid.h)
    return ComplexField(ks, F)


def _fourier_minus_fft(vals, grid: SpatialGrid, ks: SpectralGrid):
    # k_j = j*dk with dk = pi/(2L):  F(k_j) = h * e^{-2ik_j L} * IDFT_j(vals) * n
    spec = np.fft.ifft(vals) * grid.n
    j = np.rint(ks.nodes / ks.dk).astype(int)
    phase = np.exp(-2j * ks.nodes * grid.L)
    return grid.h * phase * spec[j % grid.n]


def inverse_fourier_minus(F: ComplexField, xs: SpatialGrid,
                          symmetry_tol=1e-8, N=0, M=4) -> Potential:
    """Inverse transform (1/pi) int e^{-2ikx} F(k) dk, returned as a real
    Potential on xs.

    Raises SymmetryError when F(-k) and conj(F(k)) differ beyond tolerance
    (the result would be non-real).
    """
    ks = F.grid
    if not isinstance(ks, SpectralGrid):
        raise TypeError("inverse_fourier_minus expects samples on a spectral grid")
    vals = F.values
    asym = np.max(np.abs(vals[::-1] - np.conj(vals)))
    scale = max(np.max(np.abs(vals)), 1.0)
    if asym > symmetry_tol * scale:
        raise SymmetryError(
            f"F(-k) vs conj(F(k)) mismatch {asym:.3e} exceeds tolerance; "
            "inverse transform would be non-real"
        )
    w = ks.trapezoid_weights
    phase = np.exp(-2j * np.outer(xs.nodes, ks.nodes))
    q = (phase @ (vals * w)).real / np.pi
    return Potential(xs, q, sobolev_order=N, weight_order=M)


def trapezoid(values, step):
    """Composite trapezoid with uniform step (half weights at both ends)."""
    v = np.asarray(values)
    return step * (v.sum(axis=-1) - 0.5 * (v[..., 0] + v[..., -1]))


def weighted_l2_norm(values, nodes, M):
    """|| (1+x^2)^{M/2} f ||_{L^2} by composite trapezoid on uniform nodes."""
    values = np.asarray(values)
    nodes = np.asarray(nodes)
    if M < 0:
        raise ValueError("weight order must be >= 0")
    integrand = (1.0 + nodes**2) ** M * np.abs(values) ** 2
    return float(np.sqrt(trapezoid(integrand, nodes[1] - nodes[0])))


def spectral_derivative(values, step, order=1):
    """order-th derivative of periodized uniform samples via FFT."""
    v = np.asarray(values)
    xi = 2j * np.pi * np.fft.fftfreq(v.size, d=step)
    out = np.fft.ifft(xi**order * np.fft.fft(v))
    if np.isrealobj(values):
        return out.real
    return out


def sobolev_norm(values, step, N, decay_threshold=DECAY_THRESHOLD):
    """H^N norm (sum_{j<=N} ||d^j f||^2_{L^2})^{1/2}, derivatives spectral
    on the periodized grid."""
    if N < 0:
        raise ValueError("Sobolev order must be >= 0")
    v = np.asarray(values)
    check_boundary_decay(v, decay_threshold, label="sobolev_norm input")
    n = v.size
    spec = np.fft.fft(v)
    xi = 2.0 * np.pi * np.fft.fftfreq(n, d=step)
    total = 0.0
    for j in range(N + 1):
        total += np.sum(np.abs(xi**j * spec) ** 2)
    return float(np.sqrt(total * step / n))


# Quintic on (1/2, 1) matching value and first two derivatives of the two
# plateaus of the cutoff weight; solved once, deterministically.
def _zeta_quintic_coeffs():
    rows, rhs = [], [0.5, 1.0, 0.0, 1.0, 0.0, 0.0]
    for s, d in [(0.5, 0), (0.5, 1), (0.5, 2), (1.0, 0), (1.0, 1), (1.0, 2)]:
        row = []
        for p in range(6):
            c = 1.0
            for i in range(d):
                c *= p - i
            row.append(c * s ** (p - d) if p >= d else 0.0)
        rows.append(row)
    return np.linalg.solve(np.array(rows), np.array(rhs))


_ZETA_COEFFS = _zeta_quintic_coeffs()


def zeta_weight(k):
    """Odd monotone C^2 cutoff: zeta(k) = k for |k| <= 1/2, sign(k) for
    |k| >= 1, quintic interpolation in between."""
    k = np.asarray(k, dtype=float)
    a = np.abs(k)
    out = np.where(a <= 0.5, a, 1.0)
    mid = (a > 0.5) & (a < 1.0)
    if np.any(mid):
        out = np.array(out, dtype=float)
        out[mid] = np.polyval(_ZETA_COEFFS[::-1], a[mid])
    res = np.sign(k) * out
    return res if res.ndim else float(res)


def h_zeta_norm(field: ComplexField, M, decay_threshold=DECAY_THRESHOLD):
    """Weighted Sobolev norm on the spectral grid:

        ||f||^2 = ||f||^2_{H^{M-1}} + ||zeta * d_k^M f||^2_{L^2}

    with spectral differentiation in k on the periodized grid.
    """
    if M < 1:
        raise ValueError("weight order M must be >= 1")
    ks = field.grid
    if not isinstance(ks, SpectralGrid):
        raise TypeError("h_zeta_norm expects samples on a spectral grid")
    v = field.values
    check_boundary_decay(v, decay_threshold, label="h_zeta_norm input")
    total = 0.0
    for j in range(M):
        dj = spectral_derivative(v, ks.dk, order=j) if j else v
        total += trapezoid(np.abs(dj) ** 2, ks.dk)
    dM = spectral_derivative(v, ks.dk, order=M)
    total += trapezoid(np.abs(zeta_weight(ks.nodes) * dM) ** 2, ks.dk)
    return float(np.sqrt(total))
