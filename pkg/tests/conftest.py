import numpy as np
import pytest

from rosenau import (
    GridSpec,
    bernoulli_kernel,
    gaussian_field,
    rosenau_kernel,
)


@pytest.fixture(scope="session")
def grid():
    """Workhorse grid: wide enough for t up to ~10 at unit diffusivity."""
    return GridSpec(length=160.0, points=4096)


@pytest.fixture(scope="session")
def wide_grid():
    """Grid for long-time runs (t up to ~200)."""
    return GridSpec(length=600.0, points=8192)


@pytest.fixture(scope="session")
def ros_kernel():
    return rosenau_kernel(0.3, 1.0)


@pytest.fixture(scope="session")
def cd_kernel():
    return bernoulli_kernel(0.3, 1.0)


@pytest.fixture(scope="session")
def gauss_unit(grid):
    """Gaussian datum with unit second moment on the workhorse grid."""
    return gaussian_field(grid, 1.0)


def simpson_moment(density_fn, k, half, n=400_001, signed=False):
    """Independent moment oracle: Simpson rule on a dense symmetric grid."""
    from scipy.integrate import simpson

    v = np.linspace(-half, half, n)
    w = v**k if signed else np.abs(v) ** k
    return float(simpson(w * density_fn(v), x=v))
