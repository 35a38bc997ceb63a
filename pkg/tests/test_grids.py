import numpy as np
import pytest
from scipy.integrate import quad

from kdvscatter import (
    ComplexField,
    Potential,
    SpatialGrid,
    SpectralGrid,
    fourier_minus,
    h_zeta_norm,
    inverse_fourier_minus,
    sobolev_norm,
    weighted_l2_norm,
    zeta_weight,
)
from kdvscatter.corpus import indicator_box
from kdvscatter.errors import BoundaryDecayWarning, SymmetryError
from kdvscatter.grids import _dual_grid_matches


def test_spatial_grid_nodes():
    g = SpatialGrid(20.0, 2048)
    assert g.h * g.n == pytest.approx(2 * g.L, abs=0)
    assert g.nodes[0] == -20.0
    assert g.nodes[g.zero_index] == 0.0
    assert g.nodes[-1] == pytest.approx(20.0 - g.h)


def test_spatial_grid_rejects_non_power_of_two():
    with pytest.raises(ValueError):
        SpatialGrid(10.0, 1000)
    with pytest.raises(ValueError):
        SpatialGrid(-1.0, 1024)


def test_spectral_grid_symmetry():
    ks = SpectralGrid(16.0, 1024)
    assert ks.nodes.size == 1025
    assert ks.nodes[ks.zero_index] == 0.0
    # every node has its reflection on the grid, exactly
    np.testing.assert_array_equal(ks.nodes[::-1], -ks.nodes)


def test_potential_validation():
    g = SpatialGrid(10.0, 256)
    with pytest.raises(ValueError):
        Potential(g, np.zeros(17))
    with pytest.raises(ValueError):
        Potential(g, np.full(256, np.nan))
    with pytest.raises(ValueError):
        Potential(g, np.zeros(256), weight_order=3)


# --- fourier_minus -----------------------------------------------------------

def test_fourier_zero():
    g = SpatialGrid(16.0, 1024)
    ks = SpectralGrid(8.0, 256)
    F = fourier_minus(Potential(g, np.zeros(g.n)), ks)
    assert np.all(F.values == 0)


def test_fourier_gaussian_closed_form():
    # F(e^{-x^2})(k) = sqrt(pi) e^{-k^2} for either exponent sign
    g = SpatialGrid(16.0, 1024)
    ks = SpectralGrid(6.0, 256)
    q = Potential(g, np.exp(-g.nodes**2))
    F = fourier_minus(q, ks)
    expected = np.sqrt(np.pi) * np.exp(-ks.nodes**2)
    np.testing.assert_allclose(F.values, expected, atol=1e-12)


def test_fourier_indicator_box():
    # edges at +-1 fall on nodes of the L=16 grid; F(k) = sin(2k)/k, F(0)=2
    g = SpatialGrid(16.0, 2048)
    ks = SpectralGrid(6.0, 256)
    q = indicator_box(g)
    F = fourier_minus(q, ks)
    k = ks.nodes
    expected = np.where(k != 0, np.sin(2 * k) / np.where(k != 0, k, 1.0), 2.0)
    # trapezoid through the jump leaves an O(h^2 k) tail even with
    # half-sampled edges
    np.testing.assert_allclose(F.values, expected, atol=1e-3)
    assert abs(F.values[ks.zero_index] - 2.0) < 1e-6


def test_fourier_conjugate_symmetry():
    g = SpatialGrid(16.0, 1024)
    ks = SpectralGrid(8.0, 512)
    rng = np.random.default_rng(7)
    # random band-limited real sample
    vals = np.exp(-g.nodes**2 / 4) * np.cos(rng.uniform(0.5, 2.0) * g.nodes)
    F = fourier_minus(Potential(g, vals), ks)
    np.testing.assert_allclose(F.values[::-1], np.conj(F.values), atol=1e-12)


def test_fourier_phase_orientation():
    # off-center bump pins the exponent sign: F_-(q)(k) = e^{+2ika} F_-(q0)(k)
    g = SpatialGrid(16.0, 1024)
    ks = SpectralGrid(4.0, 128)
    a = 0.75
    q = Potential(g, np.exp(-((g.nodes - a) ** 2)))
    F = fourier_minus(q, ks)
    expected = np.sqrt(np.pi) * np.exp(-ks.nodes**2) * np.exp(2j * ks.nodes * a)
    np.testing.assert_allclose(F.values, expected, atol=1e-12)


def test_fourier_fft_fast_path_matches_direct():
    g = SpatialGrid(16.0, 1024)
    dk = np.pi / (2 * g.L)
    ks = SpectralGrid(dk * 128, 256)
    assert _dual_grid_matches(g, ks)
    q = Potential(g, np.exp(-g.nodes**2) * (1 + 0.3 * np.sin(g.nodes)))
    fast = fourier_minus(q, ks).values
    slow = np.exp(2j * np.outer(ks.nodes, g.nodes)) @ (q.values * g.h)
    np.testing.assert_allclose(fast, slow, atol=1e-12)


def test_fourier_boundary_decay_warning():
    g = SpatialGrid(8.0, 256)
    ks = SpectralGrid(4.0, 64)
    q = Potential(g, np.exp(-g.nodes**2 / 64))  # visibly nonzero at the edge
    with pytest.warns(BoundaryDecayWarning):
        fourier_minus(q, ks)


def test_inverse_fourier_roundtrip_gaussian():
    g = SpatialGrid(20.0, 2048)
    ks = SpectralGrid(12.0, 1024)
    q = Potential(g, np.exp(-g.nodes**2))
    back = inverse_fourier_minus(fourier_minus(q, ks), g)
    assert np.max(np.abs(back.values - q.values)) < 1e-8 * np.max(q.values)


def test_inverse_fourier_roundtrip_sech2():
    g = SpatialGrid(20.0, 2048)
    ks = SpectralGrid(12.0, 1024)
    q = Potential(g, 1.0 / np.cosh(g.nodes) ** 2)
    back = inverse_fourier_minus(fourier_minus(q, ks), g)
    assert np.max(np.abs(back.values - q.values)) < 1e-8


def test_inverse_fourier_rejects_asymmetric():
    g = SpatialGrid(8.0, 256)
    ks = SpectralGrid(4.0, 64)
    vals = np.exp(-ks.nodes**2) + 0.1j * np.exp(-((ks.nodes - 1) ** 2))
    with pytest.raises(SymmetryError):
        inverse_fourier_minus(ComplexField(ks, vals), g)


def test_inverse_fourier_gaussian_pair():
    g = SpatialGrid(16.0, 1024)
    ks = SpectralGrid(8.0, 1024)
    F = ComplexField(ks, np.sqrt(np.pi) * np.exp(-ks.nodes**2))
    q = inverse_fourier_minus(F, g)
    np.testing.assert_allclose(q.values, np.exp(-g.nodes**2), atol=1e-8)


# --- norms -------------------------------------------------------------------

def test_weighted_l2_zero():
    x = np.linspace(-5, 5, 101)
    assert weighted_l2_norm(np.zeros(101), x, 3) == 0.0


def test_weighted_l2_indicator():
    # unit box, M = 0: sqrt(2); sampling a jump costs O(h) no matter the
    # edge convention
    g = SpatialGrid(16.0, 2048)
    q = indicator_box(g)
    val = weighted_l2_norm(q.values, g.nodes, 0)
    assert val == pytest.approx(np.sqrt(2.0), abs=g.h / 4)


def test_weighted_l2_gaussian_vs_quad():
    g = SpatialGrid(16.0, 1024)
    f = np.exp(-g.nodes**2)
    expected = np.sqrt(quad(lambda x: (1 + x**2) * np.exp(-2 * x**2), -16, 16)[0])
    assert weighted_l2_norm(f, g.nodes, 1) == pytest.approx(expected, abs=1e-10)


def test_weighted_equals_sobolev_at_order_zero():
    g = SpatialGrid(16.0, 1024)
    f = np.exp(-g.nodes**2) * (1 + 0.2 * np.sin(3 * g.nodes))
    a = weighted_l2_norm(f, g.nodes, 0)
    b = sobolev_norm(f, g.h, 0)
    assert a == pytest.approx(b, rel=1e-12)


def test_sobolev_zero_order_gaussian():
    # ||e^{-x^2}||_{L^2} = (pi/2)^{1/4}
    g = SpatialGrid(16.0, 1024)
    val = sobolev_norm(np.exp(-g.nodes**2), g.h, 0)
    assert val == pytest.approx((np.pi / 2) ** 0.25, rel=1e-12)


def test_sobolev_first_order_gaussian():
    # ||f||^2_{H^1} = int (1 + 4x^2) e^{-2x^2} dx
    g = SpatialGrid(16.0, 1024)
    val = sobolev_norm(np.exp(-g.nodes**2), g.h, 1)
    expected = np.sqrt(quad(lambda x: (1 + 4 * x**2) * np.exp(-2 * x**2),
                            -np.inf, np.inf)[0])
    assert val == pytest.approx(expected, abs=1e-10)


# --- zeta weight -------------------------------------------------------------

def test_zeta_plateaus():
    assert zeta_weight(0.25) == 0.25
    assert zeta_weight(3.0) == 1.0
    assert zeta_weight(-3.0) == -1.0
    assert zeta_weight(0.5) == 0.5
    assert zeta_weight(1.0) == 1.0


def test_zeta_odd_and_monotone():
    k = np.linspace(-2.5, 2.5, 4001)
    z = zeta_weight(k)
    np.testing.assert_allclose(z, -zeta_weight(-k), atol=0)
    assert np.all(np.diff(z) >= -1e-15)
    mid = zeta_weight(0.75)
    assert 0.5 < mid < 1.0


def test_zeta_c2_joins():
    # second difference stays bounded through the plateau joins
    eps = 1e-4
    for edge in (0.5, 1.0):
        d2 = (zeta_weight(edge + eps) - 2 * zeta_weight(edge)
              + zeta_weight(edge - eps)) / eps**2
        assert abs(d2) < 50.0


# --- weighted spectral norm --------------------------------------------------

def test_h_zeta_zero():
    ks = SpectralGrid(8.0, 256)
    assert h_zeta_norm(ComplexField(ks, np.zeros(257)), 2) == 0.0


def test_h_zeta_gaussian_m1_vs_quad():
    ks = SpectralGrid(12.0, 2048)
    f = ComplexField(ks, np.exp(-ks.nodes**2))
    val = h_zeta_norm(f, 1)
    l2sq = quad(lambda k: np.exp(-2 * k**2), -np.inf, np.inf)[0]

    def top(k):
        return (zeta_weight(k) * (-2 * k) * np.exp(-k**2)) ** 2

    topsq = quad(top, -12, 12, limit=200)[0]
    assert val == pytest.approx(np.sqrt(l2sq + topsq), abs=1e-8)


def test_h_zeta_reflection_invariance():
    ks = SpectralGrid(8.0, 512)
    rng = np.random.default_rng(3)
    f = np.exp(-ks.nodes**2) * (1 + 0.5 * np.cos(rng.uniform(1, 2) * ks.nodes))
    a = h_zeta_norm(ComplexField(ks, f), 2)
    b = h_zeta_norm(ComplexField(ks, np.conj(f[::-1])), 2)
    assert a == pytest.approx(b, rel=1e-12)
