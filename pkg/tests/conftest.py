import math

import numpy as np
import pytest

from fraclap import analytic_box_basis, basis_from_eigenvalues, make_box


@pytest.fixture(scope="session")
def pi_square():
    """The (0, pi)^2 box at the default quadrature resolution."""
    return make_box([math.pi, math.pi])


@pytest.fixture(scope="session")
def pi_interval():
    return make_box([math.pi])


@pytest.fixture(scope="session")
def square_basis25(pi_square):
    return analytic_box_basis(pi_square, 25)


@pytest.fixture(scope="session")
def square_basis64(pi_square):
    return analytic_box_basis(pi_square, 64)


@pytest.fixture(scope="session")
def small_lambda_basis(pi_interval):
    """Synthetic spectrum with eigenvalues below 1, where M_beta > 1."""
    return basis_from_eigenvalues(
        pi_interval, [0.25, 0.5, 0.9, 1.5, 2.0, 4.0, 9.0, 16.0]
    )


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
