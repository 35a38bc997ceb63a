"""Inverse scattering: from a scattering coefficient sigma back to the
potential, via the spectral chain, Marchenko kernels and the
Gelfand-Levitan-Marchenko (GLM) equations.

Chain (all on the symmetric k-grid):

    l(k)     = log( 4(k^2+1) / (4k^2 + sigma(k) sigma(-k)) )
    omega(k) = exp( l/2 + (i/2) H(l) )          (H = Hilbert transform)
    1/w(k)   = omega(k) / (2i(k+i))
    tau(k)   = 2ik / w(k)
    rho+(k)  = sigma(-k) / w(k),   rho-(k) = sigma(k) / w(k)
    R+-(k)   = 2ik rho+-(k)

Kernels and GLM (plus side; the minus side is handled by mirroring):

    F+(y) = (1/pi) int rho+(k) e^{+2iky} dk
    F+(x+y) + E+(x,y) + int_0^inf F+(x+y+z) E+(x,z) dz = 0,   y >= 0
    q+(x) = -d/dx E+(x, 0)

The GLM equation is discretized by Nystrom collocation with trapezoid
weights on y, z in [0, Y] and solved densely per x-node; solves for
distinct x are independent and run on a small thread pool (capped by the
KDVSCATTER_THREADS environment variable, 0 = auto).
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .direct import ScatteringData, check_generic
from .errors import (
    GenericityError,
    NearSingularSystemError,
    OverlapMismatchError,
    PositivityError,
    SymmetryError,
)
from .grids import ComplexField, Potential, SpatialGrid, SpectralGrid
from .hilbert import hilbert_transform, log_bump, log_bump_hilbert

#: Admissibility tolerances: sigma(0) > S2_TOL and
#: Re(4k^2 + sigma(k)sigma(-k)) > POSITIVITY_TOL at every node.
S2_TOL = 1e-8
POSITIVITY_TOL = 1e-10
S1_TOL = 1e-6

#: Condition-number gate for the Nystrom matrix.
CONDITION_LIMIT = 1e12

#: Relative kernel magnitude treated as zero when locating the decay cutoff.
KERNEL_NEGLIGIBLE = 1e-14


@dataclass
class InverseChain:
    """All spectral-side ingredients of the inverse map."""

    ks: SpectralGrid
    sigma: np.ndarray
    l: np.ndarray
    omega: np.ndarray
    w_inv: np.ndarray
    tau: np.ndarray
    rho_plus: np.ndarray
    rho_minus: np.ndarray
    R_plus: np.ndarray
    R_minus: np.ndarray

    def unitarity_residual(self):
        """max_k |tau(k)tau(-k) + rho(k)rho(-k) - 1| over both rho signs."""
        tt = self.tau * self.tau[::-1]
        up = tt + self.rho_plus * self.rho_plus[::-1]
        um = tt + self.rho_minus * self.rho_minus[::-1]
        return float(max(np.max(np.abs(up - 1.0)), np.max(np.abs(um - 1.0))))

    def w_identity_residual(self):
        """max_k |w(k)w(-k) - 4k^2 - sigma(k)sigma(-k)| / (1 + 4k^2)."""
        k = self.ks.nodes
        w = 1.0 / self.w_inv
        lhs = w * w[::-1]
        rhs = 4.0 * k**2 + self.sigma * self.sigma[::-1]
        return float(np.max(np.abs(lhs - rhs) / (1.0 + 4.0 * k**2)))


@dataclass
class MarchenkoKernel:
    """Materialized GLM data for one side: kernel samples over the extended
    argument range and (optionally) the solved surface E(x_i, y_j)."""

    side: str
    x_nodes: np.ndarray
    y_nodes: np.ndarray
    F: np.ndarray
    E: np.ndarray | None = None


class KernelSampler:
    """Evaluates F_side(u) = (1/pi) int rho_side(k) e^{+-2iku} dk at
    arbitrary arguments by quadrature over the chain's k-grid.

    Arguments beyond the automatically detected decay cutoff evaluate to
    exactly zero, which lets the GLM solver skip far-field work.
    """

    def __init__(self, chain: InverseChain, side, reality_tol=1e-7):
        if side not in ("plus", "minus"):
            raise ValueError("side must be 'plus' or 'minus'")
        self.side = side
        self.reality_tol = reality_tol
        rho = chain.rho_plus if side == "plus" else chain.rho_minus
        sign = 1.0 if side == "plus" else -1.0
        self._kphase = sign * 2j * chain.ks.nodes
        self._weighted = rho * chain.ks.trapezoid_weights / np.pi
        self._wk = self._weighted * self._kphase
        self.decay_cutoff = np.inf

    def _raw(self, u, table):
        out = np.exp(np.outer(u, self._kphase)) @ table
        resid = np.max(np.abs(out.imag)) if out.size else 0.0
        scale = max(np.max(np.abs(out)), 1.0) if out.size else 1.0
        if resid > self.reality_tol * scale:
            raise SymmetryError(
                f"Marchenko kernel has imaginary residue {resid:.2e}; "
                "rho violates conjugate symmetry"
            )
        return out.real

    def sample(self, u):
        """Real samples of F(u) (plus side decays as u -> +inf, minus side
        as u -> -inf); raises SymmetryError on a broken reality condition."""
        u = np.atleast_1d(np.asarray(u, dtype=float))
        signed = u if self.side == "plus" else -u
        out = np.zeros(u.size)
        near = signed <= self.decay_cutoff
        if np.any(near):
            out[near] = self._raw(u[near], self._weighted)
        return out

    def sample_derivative(self, u):
        """dF/du by differentiating under the k-integral."""
        u = np.atleast_1d(np.asarray(u, dtype=float))
        return self._raw(u, self._wk)

    def set_cutoff_from_probe(self, u_min, u_max, step=0.25,
                              threshold=KERNEL_NEGLIGIBLE):
        """Scan |F| coarsely on [u_min, u_max] (decay-direction
        coordinates) and freeze the cutoff beyond which F is treated as 0."""
        probe = np.arange(u_min, u_max + step, step)
        signed = probe if self.side == "plus" else -probe
        vals = np.abs(self._raw(signed, self._weighted))
        scale = vals.max()
        if scale == 0.0:
            self.decay_cutoff = u_min
            return self.decay_cutoff
        live = np.nonzero(vals > threshold * scale)[0]
        self.decay_cutoff = probe[live[-1]] + 2.0 * step if live.size else u_min
        return self.decay_cutoff

    __call__ = sample


def _sigma_values(sigma):
    if isinstance(sigma, ScatteringData):
        return sigma.ks, np.asarray(sigma.S, dtype=complex)
    if isinstance(sigma, ComplexField):
        if not isinstance(sigma.grid, SpectralGrid):
            raise TypeError("sigma must live on a spectral grid")
        return sigma.grid, sigma.values
    raise TypeError("sigma must be a ComplexField or ScatteringData")


def build_chain(sigma, extension_factor=4, s1_tol=S1_TOL, s2_tol=S2_TOL,
                positivity_tol=POSITIVITY_TOL) -> InverseChain:
    """Build the full inverse chain from a scattering coefficient.

    Validates the admissibility conditions first: conjugate symmetry
    sigma(-k) = conj(sigma(k)), sigma(0) > 0, and positivity of
    4k^2 + sigma(k)sigma(-k).

    The Hilbert transform of l needs care because l has a slow 1/k^2 tail:
    l is evaluated on a grid extended to extension_factor * k_max (where
    sigma is taken as 0, making the tail analytic), two log-bump models
    are subtracted to cancel both the 1/k^2 tail and the total integral,
    the remainder goes through the periodized multiplier, and the models'
    closed-form transforms are added back.
    """
    ks, sig = _sigma_values(sigma)
    k = ks.nodes

    asym = np.max(np.abs(sig[::-1] - np.conj(sig)))
    if asym > s1_tol * max(np.max(np.abs(sig)), 1.0):
        raise SymmetryError(f"sigma(-k) vs conj(sigma(k)) mismatch {asym:.3e}")
    s0 = sig[ks.zero_index]
    if not (s0.real > s2_tol):
        raise PositivityError(f"sigma(0) = {s0:.3e} fails the positivity condition")
    ss = np.real(sig * sig[::-1])
    denom = 4.0 * k**2 + ss
    if np.min(denom) <= positivity_tol:
        raise PositivityError(
            f"4k^2 + sigma(k)sigma(-k) reaches {np.min(denom):.3e}; "
            "sigma is outside the admissible class"
        )

    l = np.log(4.0 * (k**2 + 1.0) / denom)
    hl = _hilbert_of_l(ks, l, extension_factor)
    omega = np.exp(0.5 * l + 0.5j * hl)
    w_inv = omega / (2j * (k + 1j))
    tau = 2j * k * w_inv
    rho_p = sig[::-1] * w_inv
    rho_m = sig * w_inv
    return InverseChain(
        ks=ks, sigma=sig, l=l, omega=omega, w_inv=w_inv, tau=tau,
        rho_plus=rho_p, rho_minus=rho_m,
        R_plus=2j * k * rho_p, R_minus=2j * k * rho_m,
    )


def _hilbert_of_l(ks: SpectralGrid, l, extension_factor):
    """Hilbert transform of l on the grid nodes.  The tail of l outside the
    data window is the sigma = 0 profile log(1 + 1/k^2); two log-bump
    models absorb the slow 1/k^2 decay and the total integral, leaving a
    zero-mean O(k^-4) remainder for the periodized multiplier."""
    n_ext = max(extension_factor, 1) * (ks.n_k // 2)
    k_ext = np.arange(-n_ext, n_ext + 1) * ks.dk
    l_ext = np.log1p(np.divide(1.0, k_ext**2,
                               where=k_ext != 0.0,
                               out=np.full_like(k_ext, np.inf)))
    lead = n_ext - ks.n_k // 2
    l_ext[lead:lead + ks.n_k + 1] = l

    # int_{|k|>K} log(1+1/k^2) dk = 2*(pi - K log(1+1/K^2) - 2 atan K)
    K = k_ext[-1]
    tail = 2.0 * (np.pi - K * np.log1p(1.0 / K**2) - 2.0 * np.arctan(K))
    integral_l = np.trapezoid(l_ext, dx=ks.dk) + tail

    b1, b2 = 0.5, 0.25
    A = np.array([[1.0 - b1**2, 1.0 - b2**2],
                  [2.0 * np.pi * (1.0 - b1), 2.0 * np.pi * (1.0 - b2)]])
    c1, c2 = np.linalg.solve(A, np.array([1.0, integral_l]))

    d = l_ext - c1 * log_bump(k_ext, b1) - c2 * log_bump(k_ext, b2)
    # d decays like k^-4; the residual edge value is harmless, so the
    # generic decay warning is preempted with a loose threshold.
    hd = hilbert_transform(d, pad_factor=2, decay_threshold=1e-4)
    hd = 0.5 * (hd - hd[::-1])        # enforce oddness (l is even)
    window = hd[lead:lead + ks.n_k + 1]
    return (c1 * log_bump_hilbert(ks.nodes, b1)
            + c2 * log_bump_hilbert(ks.nodes, b2) + window)


def marchenko_kernel(chain: InverseChain, side, u) -> np.ndarray:
    """Real Marchenko kernel samples F_side(u) on the given arguments."""
    return KernelSampler(chain, side).sample(u)


def glm_solve(F, x, Y, n_y, condition_limit=CONDITION_LIMIT,
              truncation_tol=1e-12):
    """Solve the plus-side GLM equation at one x by Nystrom collocation:

        E(x, y_i) + sum_j w_j F(x + y_i + z_j) E(x, z_j) = -F(x + y_i)

    on y_j = j * Y/(n_y - 1), j = 0..n_y-1.  F is a vectorized callable
    u -> F(u).  Returns the row E(x, .).  Raises NearSingularSystemError
    when the 1-norm condition estimate of the Nystrom matrix exceeds
    condition_limit.

    Where the kernel has decayed, E(x, y) = -F(x + y) up to a Neumann
    correction bounded by (sup tail |F|) * (tail L1 mass of F); the dense
    solve is restricted to the indices where that bound exceeds
    truncation_tol times the kernel scale, and the tail is filled with
    -F directly.
    """
    hy = Y / (n_y - 1)
    fvals = np.asarray(F(x + hy * np.arange(2 * n_y - 1)))
    rhs = -fvals[:n_y]
    if not np.any(fvals):
        return rhs
    absf = np.abs(fvals[:n_y])
    scale = max(absf.max(), np.abs(fvals).max())
    suffix_max = np.maximum.accumulate(absf[::-1])[::-1]
    suffix_mass = np.cumsum(absf[::-1])[::-1] * hy
    coupled = suffix_max * suffix_mass > truncation_tol * scale
    m = int(np.nonzero(coupled)[0][-1]) + 1 if np.any(coupled) else 0
    m = min(m + 8, n_y)
    if m < 2:
        return rhs
    weights = np.full(m, hy)
    weights[0] = 0.5 * hy
    if m == n_y:
        weights[-1] = 0.5 * hy
    idx = np.arange(m)
    mat = fvals[idx[:, None] + idx[None, :]] * weights[None, :]
    mat[idx, idx] += 1.0
    anorm = np.max(np.abs(mat).sum(axis=0))
    lu, piv = scipy.linalg.lu_factor(mat, check_finite=False)
    gecon = scipy.linalg.get_lapack_funcs("gecon", (mat,))
    rcond, _ = gecon(lu, anorm, norm="1")
    if rcond <= 0 or 1.0 / rcond > condition_limit:
        raise NearSingularSystemError(
            f"Nystrom matrix condition {1.0 / max(rcond, 1e-300):.2e} exceeds "
            f"{condition_limit:.1e}; sigma may be inadmissible or Y too small"
        )
    out = rhs.copy()
    head = scipy.linalg.lu_solve((lu, piv), rhs[:m], check_finite=False)
    if m < n_y:
        # rows y >= m still see the solved head through the kernel
        tail_idx = np.arange(m, n_y)
        kernel_tail = fvals[tail_idx[:, None] + idx[None, :]] * weights[None, :]
        out[m:] = rhs[m:] - kernel_tail @ head
    out[:m] = head
    return out


def glm_residual(F, x, Y, E_row):
    """Residual of the discretized GLM equation for a solved row."""
    n_y = E_row.size
    hy = Y / (n_y - 1)
    fvals = np.asarray(F(x + hy * np.arange(2 * n_y - 1)))
    weights = np.full(n_y, hy)
    weights[0] = weights[-1] = 0.5 * hy
    idx = np.arange(n_y)
    kernel = fvals[idx[:, None] + idx[None, :]] * weights[None, :]
    return fvals[:n_y] + E_row + kernel @ E_row


def _max_workers():
    env = os.environ.get("KDVSCATTER_THREADS", "0")
    try:
        cap = int(env)
    except ValueError:
        cap = 0
    if cap <= 0:
        return min(os.cpu_count() or 1, 8)
    return cap


def _fourth_order_gradient(f, h):
    """d/dx by 4th-order centered differences, one-sided at the ends."""
    f = np.asarray(f, dtype=float)
    n = f.size
    if n < 6:
        return np.gradient(f, h, edge_order=2)
    out = np.empty_like(f)
    out[2:-2] = (f[:-4] - 8.0 * f[1:-3] + 8.0 * f[3:-1] - f[4:]) / (12.0 * h)
    fwd = np.array([-25.0, 48.0, -36.0, 16.0, -3.0]) / (12.0 * h)
    out[0] = fwd @ f[:5]
    out[1] = fwd @ f[1:6]
    out[-1] = -(fwd @ f[-1:-6:-1])
    out[-2] = -(fwd @ f[-2:-7:-1])
    return out


def _solve_e0_column(F, x_nodes, Y, n_y):
    """E(x, 0) over the x-nodes of one plus-type GLM problem.

    Beyond the kernel's decay cutoff the operator is negligible and
    E(x, 0) = -F(x) directly; interior nodes get the dense solve, fanned
    out over threads (LAPACK releases the GIL).
    """
    e0 = np.empty(x_nodes.size)
    cutoff = getattr(F, "decay_cutoff", np.inf)

    def solve_one(i):
        if x_nodes[i] > cutoff:
            e0[i] = -F(np.array([x_nodes[i]]))[0]
        else:
            e0[i] = glm_solve(F, x_nodes[i], Y, n_y)[0]

    workers = _max_workers()
    if workers > 1 and x_nodes.size > 8:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(solve_one, range(x_nodes.size)))
    else:
        for i in range(x_nodes.size):
            solve_one(i)
    return e0


class _MirroredSampler:
    """Presents u -> F_minus(-u) as a plus-type decaying kernel."""

    def __init__(self, sampler: KernelSampler):
        self._sampler = sampler

    @property
    def decay_cutoff(self):
        return self._sampler.decay_cutoff

    def __call__(self, u):
        return self._sampler.sample(-np.atleast_1d(u))


def reconstruct_half(sigma, side, c, xs: SpatialGrid | None = None,
                     Y=40.0, n_y=512, chain: InverseChain | None = None):
    """Reconstruct the potential on a half line from sigma.

    side 'plus' gives q on [c, L) via q(x) = -d/dx E+(x, 0); side 'minus'
    gives q on (-L, c] via q(x) = +d/dx E-(x, 0).  The minus problem is
    mirrored (u -> -u) onto the plus form and solved by the same core.
    Returns (x_nodes, q_values).
    """
    if side not in ("plus", "minus"):
        raise ValueError("side must be 'plus' or 'minus'")
    if chain is None:
        chain = build_chain(sigma)
    if xs is None:
        xs = SpatialGrid(L=20.0, n=2048)
    x = xs.nodes
    sampler = KernelSampler(chain, side)
    if side == "plus":
        nodes = x[x >= c]
        sampler.set_cutoff_from_probe(nodes[0], nodes[-1] + 2.0 * Y)
        e0 = _solve_e0_column(sampler, nodes, Y, n_y)
        return nodes, -_fourth_order_gradient(e0, xs.h)
    nodes = x[x <= c]
    mirrored = _MirroredSampler(sampler)
    t_nodes = -nodes[::-1]
    sampler.set_cutoff_from_probe(t_nodes[0], t_nodes[-1] + 2.0 * Y)
    e0 = _solve_e0_column(mirrored, t_nodes, Y, n_y)
    # q-(x) = +d/dx E-(x,0); the mirror x -> -x flips the derivative sign.
    q_mirror = -_fourth_order_gradient(e0, xs.h)
    return nodes, q_mirror[::-1]


def glm_surface(sigma, side, x_nodes, Y=40.0, n_y=512,
                chain: InverseChain | None = None) -> MarchenkoKernel:
    """Materialize the solved GLM surface E(x_i, y_j) for inspection and
    residual checks (plus-type coordinates on the minus side)."""
    if chain is None:
        chain = build_chain(sigma)
    sampler = KernelSampler(chain, side)
    F = sampler if side == "plus" else _MirroredSampler(sampler)
    x_nodes = np.atleast_1d(np.asarray(x_nodes, dtype=float))
    ys = np.linspace(0.0, Y, n_y)
    E = np.empty((x_nodes.size, n_y))
    for i, xv in enumerate(x_nodes):
        E[i] = glm_solve(F, xv, Y, n_y)
    Fu = F(x_nodes)
    return MarchenkoKernel(side=side, x_nodes=x_nodes, y_nodes=ys, F=Fu, E=E)


def inverse_scattering(sigma, xs: SpatialGrid | None = None, c_plus=-2.0,
                       c_minus=2.0, c=0.0, Y=40.0, n_y=512,
                       overlap_tol=1e-3, certify=True,
                       kappa_max=10.0, return_diagnostics=False):
    """Full inverse map sigma -> q.

    Reconstructs the plus half on [c_plus, L) and the minus half on
    (-L, c_minus], checks that the two halves agree on [c_plus, c_minus]
    in sup norm (OverlapMismatchError beyond overlap_tol), and glues at c:
    q = q_plus on [c, L), q_minus on (-L, c).  With certify=True the glued
    potential must pass the genericity certificate.

    With return_diagnostics, returns (q, dict) carrying the overlap
    mismatch and the chain identity residuals.
    """
    if not (c_plus <= c <= c_minus):
        raise ValueError("need c_plus <= c <= c_minus")
    chain = build_chain(sigma)
    if xs is None:
        xs = SpatialGrid(L=20.0, n=2048)
    xp, qp = reconstruct_half(sigma, "plus", c_plus, xs, Y, n_y, chain=chain)
    xm, qm = reconstruct_half(sigma, "minus", c_minus, xs, Y, n_y, chain=chain)

    x = xs.nodes
    qp_full = np.zeros(xs.n)
    qm_full = np.zeros(xs.n)
    qp_full[x >= c_plus] = qp
    qm_full[x <= c_minus] = qm
    overlap = (x >= c_plus) & (x <= c_minus)
    mismatch = float(np.max(np.abs(qp_full[overlap] - qm_full[overlap])))
    if mismatch > overlap_tol:
        raise OverlapMismatchError(
            f"half-line reconstructions differ by {mismatch:.3e} on the "
            f"overlap (gate {overlap_tol:.1e})"
        )
    values = np.where(x >= c, qp_full, qm_full)
    q = Potential(xs, values)
    if certify:
        cert = check_generic(q, kappa_max=kappa_max)
        if not cert.passed:
            raise GenericityError(
                "reconstructed potential fails the genericity certificate "
                f"(W(0) = {cert.W_at_zero:.3e}, min W = {cert.min_W_on_axis:.3e})"
            )
    if return_diagnostics:
        diag = {
            "overlap_mismatch": mismatch,
            "chain_unitarity_residual": chain.unitarity_residual(),
            "chain_w_identity_residual": chain.w_identity_residual(),
        }
        return q, diag
    return q
