"""Shared fixtures: desk-scale grids, the barrier corpus, and cached
scattering data (scattering a potential once per session keeps the suite
fast)."""

import numpy as np
import pytest

from kdvscatter import SpatialGrid, SpectralGrid, scattering_data
from kdvscatter.corpus import (
    default_corpus,
    gaussian_barrier,
    sech2_well,
    tent_squared_barrier,
)

DESK_L = 20.0
DESK_N = 2048
DESK_KMAX = 16.0
DESK_NK = 1024


@pytest.fixture(scope="session")
def grid():
    return SpatialGrid(DESK_L, DESK_N)


@pytest.fixture(scope="session")
def ks(grid):
    return SpectralGrid(DESK_KMAX, DESK_NK)


@pytest.fixture(scope="session")
def gaussian(grid):
    return gaussian_barrier(grid)


@pytest.fixture(scope="session")
def tent(grid):
    return tent_squared_barrier(grid)


@pytest.fixture(scope="session")
def well(grid):
    return sech2_well(grid)


@pytest.fixture(scope="session")
def corpus(grid):
    return default_corpus(grid)


@pytest.fixture(scope="session")
def corpus_sd(corpus, ks):
    """Scattering data for every corpus member, computed once."""
    return {name: scattering_data(q, ks) for name, q in corpus}


@pytest.fixture(scope="session")
def gaussian_sd(gaussian, ks):
    return scattering_data(gaussian, ks)


def l2_distance(a, b, h):
    d = np.asarray(a) - np.asarray(b)
    return float(np.sqrt(h * np.sum(np.abs(d) ** 2)))
