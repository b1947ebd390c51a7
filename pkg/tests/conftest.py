import numpy as np
import pytest

from ptdyson.model import ModelParams, RegimeKind
from ptdyson import dynamic_map as dm


@pytest.fixture(scope="session")
def setup_a():
    return ModelParams(m=1.0, omega_x=1.0, omega_y=2.0, lam=1.0)


@pytest.fixture(scope="session")
def setup_b():
    return ModelParams(m=1.0, omega_x=1.0, omega_y=1.0, lam=0.5)


@pytest.fixture(scope="session")
def setup_c():
    return ModelParams(m=1.0, omega_x=1.0, omega_y=np.sqrt(3.0), lam=1.0)


@pytest.fixture(scope="session")
def traj_a(setup_a):
    """Small-oscillation unbroken trajectory from constants (0.1, 0, 0, 0)."""
    k = dm.IntegrationConstants(RegimeKind.UNBROKEN, (0.1, 0.0, 0.0, 0.0))
    branches = dm.select_branches(k, setup_a, 0.0)
    initial = dm.recover(dm.alpha_closed_form(k, setup_a, 0.0), setup_a, branches)
    return dm.integrate(initial, setup_a, (0.0, 5.0), tol=1e-12,
                        n_samples=201, constants=k)


@pytest.fixture(scope="session")
def traj_b(setup_b):
    """Broken-regime trajectory from a moderate chart point; constants are
    fitted from its initial jet (window padded for central differences)."""
    initial = dm.MapCoefficients(
        t=-0.05, alpha_minus=0.1, theta_plus=0.0, alpha_plus=0.0, theta_minus=0.25
    )
    k = dm.constants_from_jet(dm.jet_from_coefficients(initial, setup_b), setup_b)
    return dm.integrate(initial, setup_b, (-0.05, 0.9), tol=1e-12,
                        n_samples=191, constants=k)
