import numpy as np
import pytest

from lociqso import CoefficientMatrix, SimplexPoint


def random_coefficients(rng, m, low=0.0, symmetric=False):
    a = rng.uniform(low, 1.0, size=(m, m))
    if symmetric:
        a = np.triu(a, 1)
        a = a + a.T
    np.fill_diagonal(a, rng.uniform(0.0, 1.0, size=m))  # never read
    return CoefficientMatrix(a)


def random_state(rng, m):
    x = rng.exponential(size=2 * m)
    return SimplexPoint(x / x.sum())


def canonical():
    """Two loci, a12 = a21 = 1/2, started at (1/2, 0, 0, 1/2)."""
    return CoefficientMatrix([[0.0, 0.5], [0.5, 0.0]]), SimplexPoint([0.5, 0.0, 0.0, 0.5])


def example_three(a=0.5, b=0.25):
    return CoefficientMatrix([[0.0, a, b], [a, 0.0, b], [b, b, 0.0]])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
