"""Standard test potentials: repulsive barriers scaled to pass the
genericity certificate, plus an attractive well that deliberately fails it.

All barriers decay far below the boundary threshold at |x| = 20.  The
tent-squared barrier is the designated rough datum (C^1 with an algebraic
spectral tail ~ k^-3); its half-width defaults to 1.25 so the kinks fall
on grid nodes of the standard L = 20, n = 2048 grid.
"""

from __future__ import annotations

import numpy as np

from .grids import Potential, SpatialGrid

DESK_GRID = dict(L=20.0, n=2048)


def desk_grid() -> SpatialGrid:
    return SpatialGrid(**DESK_GRID)


def gaussian_barrier(grid, amplitude=0.3, width=1.0, center=0.0,
                     N=4, M=4) -> Potential:
    x = grid.nodes
    return Potential(grid, amplitude * np.exp(-((x - center) / width) ** 2), N, M)


def smooth_box_barrier(grid, amplitude=0.25, half_width=1.5, steepness=3.0,
                       N=4, M=4) -> Potential:
    """Mollified box: tanh edges keep every solver at its nominal order."""
    x = grid.nodes
    vals = 0.5 * amplitude * (np.tanh(steepness * (x + half_width))
                              - np.tanh(steepness * (x - half_width)))
    return Potential(grid, vals, N, M)


def bump_barrier(grid, amplitude=0.4, half_width=2.0, N=4, M=4) -> Potential:
    """C-infinity bump with compact support, normalized peak amplitude."""
    x = grid.nodes
    s = x / half_width
    vals = np.zeros(grid.n)
    inside = np.abs(s) < 1.0
    vals[inside] = amplitude * np.exp(1.0 - 1.0 / (1.0 - s[inside] ** 2))
    return Potential(grid, vals, N, M)


def sech2_barrier(grid, amplitude=0.35, N=4, M=4) -> Potential:
    x = grid.nodes
    return Potential(grid, amplitude / np.cosh(x) ** 2, N, M)


def tent_squared_barrier(grid, amplitude=0.75, half_width=1.25,
                         N=1, M=4) -> Potential:
    x = grid.nodes
    tent = np.maximum(0.0, 1.0 - np.abs(x) / half_width)
    return Potential(grid, amplitude * tent**2, N, M)


def sech2_well(grid, depth=1.5, N=4, M=4) -> Potential:
    """Attractive well -depth*sech^2(x); holds a bound state for depth=1.5,
    so the genericity certificate must fail."""
    x = grid.nodes
    return Potential(grid, -depth / np.cosh(x) ** 2, N, M)


def indicator_box(grid, amplitude=1.0, half_width=1.0, N=0, M=4) -> Potential:
    """Sharp box with jump nodes sampled at the half value (the Fourier
    midpoint convention keeps trapezoid sums second order)."""
    x = grid.nodes
    vals = np.where(np.abs(x) < half_width, amplitude, 0.0)
    on_edge = np.isclose(np.abs(x), half_width, rtol=0.0, atol=1e-12 * grid.h)
    vals[on_edge] = 0.5 * amplitude
    return Potential(grid, vals, N, M)


def default_corpus(grid=None):
    """The five-barrier generic corpus used by the identity suites."""
    if grid is None:
        grid = desk_grid()
    return [
        ("gaussian", gaussian_barrier(grid)),
        ("wide_gaussian", gaussian_barrier(grid, amplitude=0.12, width=2.2)),
        ("smooth_box", smooth_box_barrier(grid)),
        ("sech2", sech2_barrier(grid)),
        ("bump", bump_barrier(grid)),
    ]
