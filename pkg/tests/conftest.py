"""Shared fixtures and independent reference implementations.

The ``ref_*`` helpers go through ``scipy.linalg`` (Schur-based fractional
powers and logarithms) instead of the package's eigendecomposition path, so
agreement between the two is evidence rather than tautology.
"""

import numpy as np
import pytest
import scipy.linalg as sla

from renyi_dpi.states import make_rng, random_density_from


def ref_power(A, p):
    return sla.fractional_matrix_power(np.asarray(A, dtype=complex), p)


def ref_alpha_z(rho, sigma, alpha, z):
    s = ref_power(sigma, (1 - alpha) / (2 * z))
    M = s @ ref_power(rho, alpha / z) @ s
    M = 0.5 * (M + M.conj().T)
    return np.log(np.trace(ref_power(M, z)).real) / (alpha - 1)


def ref_umegaki(rho, sigma):
    return np.trace(rho @ (sla.logm(rho) - sla.logm(sigma))).real


def random_pair(seed, dim):
    rng = make_rng(seed)
    return random_density_from(rng, dim), random_density_from(rng, dim)


@pytest.fixture
def rng():
    return make_rng(12345)


@pytest.fixture
def qutrit_pair():
    return random_pair(7, 3)


# Acceptance criteria register a one-line verdict here; the lines are printed
# at the end of every pytest run that collected them.
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
