import numpy as np
import pytest

from psagen.dipole import DipoleModel


def random_hermitian(rng, d, scale=1.0):
    m = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return scale * 0.5 * (m + m.conj().T)


def random_density_matrix(rng, d):
    m = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    rho = m @ m.conj().T
    return rho / np.trace(rho).real


@pytest.fixture
def rng():
    return np.random.default_rng(20240814)


@pytest.fixture
def fig_qubit_params():
    """Reference parameters: kT = 0.5 w0, kappa0 = 2, wc = 5 w0, bosonic."""
    return dict(q=+1, omega0=1.0, beta=2.0, kappa0=2.0, omega_c=5.0)


@pytest.fixture
def fig_qubit_threshold(fig_qubit_params):
    return DipoleModel.qubit(sinc_value=0.628, **fig_qubit_params)


@pytest.fixture
def fig_qho_params():
    """Reference parameters: kT = 0.5 w0, kappa0 = 0.1, wc = 5 w0, bosonic."""
    return dict(q=+1, omega0=1.0, beta=2.0, kappa0=0.1, omega_c=5.0)
