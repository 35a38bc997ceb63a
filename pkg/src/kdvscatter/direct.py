"""Direct scattering map: S, W, reflection/transmission, the smoothing
remainder A = S - F_-, Born terms, action densities and the genericity
certificate.

S and W come from Wronskians of the two normalized Jost fields at x = 0:

    S(q,k) = [m1(q,0,k), m2(q,0,-k)]        ([f,g] = f g' - f' g)
    W(q,k) = 2ik m2(q,0,k) m1(q,0,k) + [m2(q,0,k), m1(q,0,k)]

For generic bound-state-free q:  S(0) > 0,  W(0) = -S(0),  and the identity
W(k)W(-k) = 4k^2 + S(k)S(-k) holds on the whole line.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_trapezoid

from . import jost
from .errors import GenericityError, UnsupportedOrderError
from .grids import ComplexField, Potential, SpectralGrid, fourier_minus, trapezoid

#: |W| below this at a real node counts as non-generic input.
WRONSKIAN_FLOOR = 1e-10


@dataclass
class ScatteringData:
    """S and W sampled on a symmetric spectral grid."""

    ks: SpectralGrid
    S: np.ndarray
    W: np.ndarray

    def s_field(self):
        return ComplexField(self.ks, self.S)

    def conjugate_symmetry_residual(self):
        rs = np.max(np.abs(self.S[::-1] - np.conj(self.S)))
        rw = np.max(np.abs(self.W[::-1] - np.conj(self.W)))
        return max(rs, rw)

    def ws_identity_residual(self):
        """max_k |W(k)W(-k) - 4k^2 - S(k)S(-k)| / (1 + 4k^2)."""
        k = self.ks.nodes
        lhs = self.W * self.W[::-1]
        rhs = 4.0 * k**2 + self.S * self.S[::-1]
        return float(np.max(np.abs(lhs - rhs) / (1.0 + 4.0 * k**2)))


@dataclass
class GenericityCertificate:
    W_at_zero: float
    min_W_on_axis: float
    kappa_max: float
    passed: bool
    zero_crossing: float | None = None


def scattering_data(q: Potential, ks: SpectralGrid, substeps=jost.DEFAULT_SUBSTEPS,
                    residual_tol=1e-6) -> ScatteringData:
    """Scattering data of q on the symmetric k-grid.

    Warns when the structural identities (conjugate symmetry, the
    W(k)W(-k) = 4k^2 + S(k)S(-k) identity) exceed residual_tol, which
    signals an under-resolved grid.
    """
    m1, dm1, m2, dm2 = jost.origin_values(q, ks.nodes, substeps)
    # S(k) pairs m1 at +k with m2 at -k: reverse the m2 batch.
    m2r, dm2r = m2[::-1], dm2[::-1]
    S = m1 * dm2r - dm1 * m2r
    W = jost.wronskian_w(m1, dm1, m2, dm2, ks.nodes)
    sd = ScatteringData(ks, S, W)
    resid = max(sd.conjugate_symmetry_residual(), sd.ws_identity_residual())
    if resid > residual_tol:
        warnings.warn(
            f"scattering identities violated at {resid:.2e} (> {residual_tol:.1e}); "
            "grid appears under-resolved",
            stacklevel=2,
        )
    return sd


def reflection_transmission(sd: ScatteringData):
    """Reflection coefficients r+/- and transmission t on the k-grid:

        r+(k) = S(-k)/W(k),  r-(k) = S(k)/W(k),  t(k) = 2ik/W(k)

    for k != 0; at the k = 0 node the generic limits r+-(0) = -1, t(0) = 0
    are stored (forced by W(0) = -S(0) != 0).
    """
    k = sd.ks.nodes
    absW = np.abs(sd.W)
    off = np.abs(k) > 0
    if np.any(absW[off] < WRONSKIAN_FLOOR):
        raise GenericityError("W vanishes at a real node: non-generic input")
    i0 = sd.ks.zero_index
    if absW[i0] < WRONSKIAN_FLOOR:
        raise GenericityError("W(0) = 0: non-generic input (S(0) = 0)")
    r_plus = np.empty_like(sd.S)
    r_minus = np.empty_like(sd.S)
    t = np.empty_like(sd.S)
    r_plus[off] = sd.S[::-1][off] / sd.W[off]
    r_minus[off] = sd.S[off] / sd.W[off]
    t[off] = 2j * k[off] / sd.W[off]
    r_plus[i0] = r_minus[i0] = -1.0
    t[i0] = 0.0
    ks = sd.ks
    return ComplexField(ks, r_plus), ComplexField(ks, r_minus), ComplexField(ks, t)


def smoothing_part(q: Potential, sd: ScatteringData) -> ComplexField:
    """A(q,k) = S(q,k) - F_-(q)(k): the one-smoothing remainder of the
    scattering map over the Fourier transform."""
    F = fourier_minus(q, sd.ks)
    return ComplexField(sd.ks, sd.S - F.values)


def _integral_tails(q: Potential):
    """I1(q)(t) = int_t^inf q,  I2(q)(t) = int_-inf^t q on the grid."""
    h = q.grid.h
    left = np.concatenate(([0.0], cumulative_trapezoid(q.values, dx=h)))
    total = left[-1]
    return total - left, left


def born_s1(q: Potential, ks: SpectralGrid) -> ComplexField:
    """First Born-type coefficient in the large-k expansion of S:

        s1(q,k) = (1/2i) [ F_-(q I2(q)) - F_-(q I1(q)) ](k)

    with I1(f)(t) = int_t^inf f and I2(f)(t) = int_-inf^t f.  The term
    order follows from splitting the sine of the simplex integral into
    exponentials (cross-checked against direct simplex quadrature).  s1 is
    entire in k and S - F_-(q) ~ s1/k at large k.
    """
    i1, i2 = _integral_tails(q)
    f_a = fourier_minus(ComplexField(q.grid, q.values * i2), ks)
    f_b = fourier_minus(ComplexField(q.grid, q.values * i1), ks)
    return ComplexField(ks, (f_a.values - f_b.values) / 2j)


def born_sn(q: Potential, k, n) -> complex:
    """n-th coefficient of the large-k expansion of S at a single k:

        s_n(q,k) = int_{t_0<=...<=t_n} e^{ikt_0} q(t_0)
                   prod_j [ q(t_j) sin k(t_j - t_{j-1}) ] e^{ikt_n} dt

    evaluated by nested cumulative trapezoid sums (O(n_grid) per k after
    expanding each sine factor).  Only n in {1, 2} is supported; the
    magnitude obeys |s_n| <= ||q||_{L^1}^{n+1} / (n+1)!.
    """
    if n not in (1, 2):
        raise UnsupportedOrderError("born_sn supports n in {1, 2} only")
    x = q.grid.nodes
    h = q.grid.h
    qv = q.values
    k = float(k)

    def cum(f):
        return np.concatenate(([0.0 + 0.0j], cumulative_trapezoid(f, dx=h)))

    # Level 1: g1(t) = int_{-inf}^{t} e^{ik t0} q(t0) sin k(t - t0) dt0
    base = np.exp(1j * k * x) * qv
    c_cos = cum(base * np.cos(k * x))
    c_sin = cum(base * np.sin(k * x))
    g1 = np.sin(k * x) * c_cos - np.cos(k * x) * c_sin
    if n == 1:
        return complex(trapezoid(qv * np.exp(1j * k * x) * g1, h))
    # Level 2: g2(t) = int_{-inf}^{t} q(t1) g1(t1) sin k(t - t1) dt1
    mid = qv * g1
    d_cos = cum(mid * np.cos(k * x))
    d_sin = cum(mid * np.sin(k * x))
    g2 = np.sin(k * x) * d_cos - np.cos(k * x) * d_sin
    return complex(trapezoid(qv * np.exp(1j * k * x) * g2, h))


def action_profile(sd: ScatteringData):
    """Action density I(q,k) = (k/pi) log(1 + |S|^2 / 4k^2) at every node,
    evaluated through the regularized form

        I(q,k) = (k/pi) log1p( S(k)S(-k) / 4k^2 ),   I(q,0) = 0.

    Odd in k and >= 0 for k >= 0 when S(k)S(-k) = |S(k)|^2 >= 0.
    """
    k = sd.ks.nodes
    ss = np.real(sd.S * sd.S[::-1])
    out = np.zeros_like(k)
    off = k != 0.0
    out[off] = (k[off] / np.pi) * np.log1p(ss[off] / (4.0 * k[off] ** 2))
    return out


def action_density(sd: ScatteringData, k) -> float:
    """Action density at a single grid node (k must lie on sd.ks)."""
    idx = int(round((k + sd.ks.k_max) / sd.ks.dk))
    if not (0 <= idx <= sd.ks.n_k) or abs(sd.ks.nodes[idx] - k) > 1e-9 * max(1.0, abs(k)):
        raise ValueError("k must be a node of the scattering grid")
    return float(action_profile(sd)[idx])


def check_generic(q: Potential, kappa_max=10.0, n_samples=200,
                  tol=1e-10, substeps=jost.DEFAULT_SUBSTEPS) -> GenericityCertificate:
    """Certify that q is generic and bound-state-free by sampling W(q, i*kappa)
    on [0, kappa_max]: the certificate passes iff W stays strictly negative
    (W ~ -2 kappa at infinity; a bound state is a zero on the axis).

    A failed certificate is a legitimate result, not an error.
    """
    if kappa_max <= 0:
        raise ValueError("kappa_max must be positive")
    kau = np.linspace(0.0, kappa_max, n_samples)
    w = jost.w_imag_axis(q, kau, substeps)
    w0 = float(w[0])
    crossing = None
    sign_change = np.nonzero(np.diff(np.signbit(-w)))[0]
    if sign_change.size:
        lo, hi = kau[sign_change[0]], kau[sign_change[0] + 1]
        for _ in range(40):
            mid = 0.5 * (lo + hi)
            wm = jost.w_imag_axis(q, mid, substeps)
            if (wm < 0) == (w[sign_change[0]] < 0):
                lo = mid
            else:
                hi = mid
        crossing = 0.5 * (lo + hi)
    passed = bool(w0 < -tol and np.all(w < 0) and crossing is None)
    return GenericityCertificate(
        W_at_zero=w0,
        min_W_on_axis=float(np.min(w)),
        kappa_max=float(kappa_max),
        passed=passed,
        zero_crossing=crossing,
    )
