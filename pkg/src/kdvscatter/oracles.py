"""Independent brute-force references for the production paths.

Every oracle here deliberately avoids the numerical kernels it validates:
the scattering oracle integrates the physical wave equation (not the
plane-wave-normalized form) with Richardson extrapolation, the principal
value oracle does real quadrature instead of FFT multipliers, the simplex
oracle sums the ordered-simplex integral directly, and the conserved
quantities are plain trapezoid sums.
"""

from __future__ import annotations

import numpy as np
from scipy.integrate import quad

from .errors import UnsupportedOrderError
from .grids import Potential, trapezoid
from .jost import JostField

#: Relative magnitude below which q is considered zero when locating its
#: numerical support.
SUPPORT_TOL = 1e-13


def _support_bounds(q: Potential, tol=SUPPORT_TOL):
    vals = np.abs(q.values)
    scale = vals.max()
    if scale == 0.0:
        return None
    live = np.nonzero(vals > tol * scale)[0]
    lo = max(live[0] - 1, 0)
    hi = min(live[-1] + 1, q.grid.n - 1)
    return lo, hi


def _march_psi(q_vals, x_lo, h, k, substeps):
    """RK4 march of psi'' = (q - k^2) psi from the left edge with
    transmitted-wave data psi = e^{-ikx} (right-incidence convention)."""
    x = x_lo
    psi = np.exp(-1j * k * x)
    dpsi = -1j * k * psi
    hs = h / substeps
    for j in range(q_vals.size - 1):
        q0, q1 = q_vals[j], q_vals[j + 1]
        dq = q1 - q0
        for s in range(substeps):
            f0 = q0 + dq * (s / substeps)
            fm = q0 + dq * ((s + 0.5) / substeps)
            f1 = q0 + dq * ((s + 1.0) / substeps)
            c0 = f0 - k**2
            cm = fm - k**2
            c1 = f1 - k**2
            k1a = dpsi
            k1b = c0 * psi
            k2a = dpsi + 0.5 * hs * k1b
            k2b = cm * (psi + 0.5 * hs * k1a)
            k3a = dpsi + 0.5 * hs * k2b
            k3b = cm * (psi + 0.5 * hs * k2a)
            k4a = dpsi + hs * k3b
            k4b = c1 * (psi + hs * k3a)
            psi = psi + (hs / 6.0) * (k1a + 2.0 * (k2a + k3a) + k4a)
            dpsi = dpsi + (hs / 6.0) * (k1b + 2.0 * (k2b + k3b) + k4b)
    return psi, dpsi


def _plane_wave_split(psi, dpsi, x, k):
    # psi = alpha e^{-ikx} + beta e^{+ikx} and its derivative, solved for
    # the two amplitudes.
    alpha = 0.5 * np.exp(1j * k * x) * (psi + 1j * dpsi / k)
    beta = 0.5 * np.exp(-1j * k * x) * (psi - 1j * dpsi / k)
    return alpha, beta


def ode_scattering_oracle(q: Potential, k, substeps=4, divergence_tol=1e-5):
    """Transmission and right-reflection amplitudes (t, r_plus) by direct
    integration of the physical scattering problem.

    A left-moving transmitted plane wave is imposed at the left edge of
    the numerical support of q, marched across it, and matched to
    incident + reflected plane waves at the right edge.  Two fixed-step
    RK4 passes (substeps and 2*substeps per cell) are Richardson
    extrapolated to 6th order; their disagreement is the error estimate.
    """
    if k == 0:
        raise ValueError("oracle requires k != 0")
    bounds = _support_bounds(q)
    if bounds is None:
        return 1.0 + 0.0j, 0.0 + 0.0j
    lo, hi = bounds
    x = q.grid.nodes
    h = q.grid.h
    seg = q.values[lo:hi + 1]
    base = max(substeps, 1)
    results = []
    for m in (base, 2 * base):
        psi, dpsi = _march_psi(seg, x[lo], h, k, m)
        alpha, beta = _plane_wave_split(psi, dpsi, x[hi], k)
        results.append((1.0 / alpha, beta / alpha))
    (t_c, r_c), (t_f, r_f) = results
    t_ex = (16.0 * t_f - t_c) / 15.0
    r_ex = (16.0 * r_f - r_c) / 15.0
    err = max(abs(t_f - t_c), abs(r_f - r_c))
    if err > divergence_tol * max(abs(t_ex), 1.0):
        raise RuntimeError(
            f"oracle extrapolation not converged (step disagreement {err:.2e})"
        )
    return t_ex, r_ex


def pv_hilbert_oracle(v, k, inner=20.0):
    """H(v)(k) = -(1/pi) p.v. int v(k')/(k'-k) dk' for a smooth callable v.

    Uses the symmetric form of the excised integral, whose epsilon -> 0
    limit is the convergent integral of [v(k+s) - v(k-s)]/s over s > 0.
    """
    def integrand(s):
        return (v(k + s) - v(k - s)) / s

    val, _ = quad(integrand, 0.0, inner, limit=400, epsabs=1e-12, epsrel=1e-11)
    tail, _ = quad(integrand, inner, np.inf, limit=400, epsabs=1e-12)
    return -(val + tail) / np.pi


def simplex_quadrature_sn(q: Potential, k, n, stride=None):
    """Direct quadrature of the order-n simplex coefficient

        s_n(q,k) = int_{t_0<=...<=t_n} e^{ikt_0} q(t_0)
                   prod_j [ q(t_j) sin k(t_j - t_{j-1}) ] e^{ikt_n} dt.

    n = 1 sums the full grid; n = 2 subsamples with the given stride
    (default keeps about 256 points) since the triple sum grows fast.
    """
    if n not in (1, 2):
        raise UnsupportedOrderError("simplex oracle supports n in {1, 2} only")
    bounds = _support_bounds(q, tol=1e-30)
    if bounds is None:
        return 0.0 + 0.0j
    x = q.grid.nodes
    qv = q.values
    if n == 1:
        h = q.grid.h
        t0 = x[:, None]
        t1 = x[None, :]
        g = (np.exp(1j * k * t0) * qv[:, None] * qv[None, :]
             * np.sin(k * (t1 - t0)) * np.exp(1j * k * t1))
        w = np.where(t0 < t1, 1.0, 0.0)
        np.fill_diagonal(w, 0.5)
        return complex(np.sum(g * w) * h * h)
    stride = stride or max(1, q.grid.n // 256)
    xs = x[::stride]
    qs = qv[::stride]
    hs = q.grid.h * stride
    m = xs.size
    t0 = xs[:, None]
    t1 = xs[None, :]
    base01 = np.exp(1j * k * t0) * qs[:, None] * qs[None, :] * np.sin(k * (t1 - t0))
    w01 = np.where(t0 < t1, 1.0, 0.0)
    np.fill_diagonal(w01, 0.5)
    layer01 = base01 * w01
    total = 0.0 + 0.0j
    for i2 in range(m):
        w12 = np.where(xs < xs[i2], 1.0, 0.0)
        w12[i2] = 0.5
        col = qs[i2] * np.sin(k * (xs[i2] - xs)) * np.exp(1j * k * xs[i2]) * w12
        total += np.sum(layer01 @ col)
    return complex(total * hs**3)


def kdv_invariants(u: Potential):
    """(mass, momentum, energy) = (int u, int u^2, int (u_x^2/2 + u^3)).

    These are conserved by u_t = -u_xxx + 6 u u_x; u_x is spectral so the
    energy is quadrature-accurate for band-limited samples.
    """
    h = u.grid.h
    vals = u.values
    kappa = 2.0 * np.pi * np.fft.fftfreq(u.grid.n, d=h)
    ux = np.fft.ifft(1j * kappa * np.fft.fft(vals)).real
    mass = float(trapezoid(vals, h))
    momentum = float(trapezoid(vals**2, h))
    energy = float(trapezoid(0.5 * ux**2 + vals**3, h))
    return mass, momentum, energy


def airy_reference(q: Potential, t) -> Potential:
    """Exact exponential integrator of v_t = -v_xxx on the periodized grid
    (the independent oracle for the conjugation-based Airy flow)."""
    kappa = 2.0 * np.pi * np.fft.fftfreq(q.grid.n, d=q.grid.h)
    v_hat = np.exp(1j * kappa**3 * t) * np.fft.fft(q.values)
    return Potential(q.grid, np.fft.ifft(v_hat).real,
                     q.sobolev_order, q.weight_order)


def jost_volterra_residual(field: JostField, q: Potential):
    """Uniform residual of the Volterra form of the Jost equation:

        m(x) = 1 + int D_k q m  with  D_k(y) = (e^{2iky} - 1) / (2ik)

    (D_0(y) = y), the integral running to +inf for the right field and
    from -inf for the left one.  Independent trapezoid quadrature.
    """
    x = field.grid.nodes
    h = field.grid.h
    k = field.k
    qm = q.values * field.m
    if field.side == "right":
        y = x[None, :] - x[:, None]          # t - x, t >= x
    else:
        y = x[:, None] - x[None, :]          # x - t, t <= x
    if k == 0:
        dk = y
    else:
        dk = (np.exp(2j * k * y) - 1.0) / (2j * k)
    mask = np.triu(np.ones((x.size, x.size)), 1) if field.side == "right" \
        else np.tril(np.ones((x.size, x.size)), -1)
    np.fill_diagonal(mask, 0.5)
    rhs = 1.0 + (dk * mask * qm[None, :]).sum(axis=1) * h
    return float(np.max(np.abs(rhs - field.m)))
