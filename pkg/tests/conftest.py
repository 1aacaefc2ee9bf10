import math

import pytest

from gapdiamond.core import Layer, LayerStack, Polarization
from gapdiamond.modes2d import ridge_cross_section, solve_fundamental_2d


def symmetric_slab_neff_oracle(n_core, n_clad, d_nm, lambda_nm, polarization, order):
    """Analytic symmetric-slab effective index, solved by bisection.

    Independent of the transfer-matrix solver: the dispersion relation
    kappa d = m pi + 2 atan(rho gamma / kappa) (rho = 1 for TE,
    (n_core/n_clad)^2 for TM) is monotone in kappa on (0, kappa_max), so
    plain bisection on it is an oracle for mode ``order``.  Returns None
    when that mode is below cutoff.
    """
    k0 = 2 * math.pi / (lambda_nm * 1e-9)
    d = d_nm * 1e-9
    kappa_max = k0 * math.sqrt(n_core**2 - n_clad**2)
    rho = 1.0 if polarization is Polarization.TE else (n_core / n_clad) ** 2

    def g(kappa):
        gamma = math.sqrt(max(kappa_max**2 - kappa**2, 0.0))
        return kappa * d - order * math.pi - 2.0 * math.atan2(rho * gamma, kappa)

    lo, hi = 1e-12 * kappa_max, kappa_max * (1.0 - 1e-14)
    if g(hi) <= 0:
        return None
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if g(mid) > 0:
            hi = mid
        else:
            lo = mid
        if hi - lo <= 1e-13 * kappa_max:
            break
    kappa = 0.5 * (lo + hi)
    return math.sqrt(n_core**2 - (kappa / k0) ** 2)


def symmetric_mode_count_oracle(n_core, n_clad, d_nm, lambda_nm):
    """ceil(V / pi) with V = k0 d sqrt(n_core^2 - n_clad^2)."""
    v = (2 * math.pi / (lambda_nm * 1e-9)) * (d_nm * 1e-9) * math.sqrt(n_core**2 - n_clad**2)
    return math.ceil(v / math.pi)


@pytest.fixture(scope="session")
def gap_on_diamond_120():
    return LayerStack((Layer("air", 1.0), Layer("GaP", 3.3, 120.0), Layer("diamond", 2.4)))


@pytest.fixture(scope="session")
def wide_ridge_section():
    """1 um x 120 nm GaP ridge on flat diamond at a test-friendly pitch."""
    return ridge_cross_section(core_width_nm=1000, core_height_nm=120, pitch_nm=10, padding_nm=1000)


@pytest.fixture(scope="session")
def wide_ridge_te(wide_ridge_section):
    return solve_fundamental_2d(wide_ridge_section, 637.0, Polarization.TE)


@pytest.fixture(scope="session")
def wide_ridge_tm(wide_ridge_section):
    return solve_fundamental_2d(wide_ridge_section, 637.0, Polarization.TM)


@pytest.fixture(scope="session")
def ring_section_coarse():
    """300 x 120 nm GaP on a 120 nm diamond pedestal, coarse pitch."""
    return ridge_cross_section(
        core_width_nm=300, core_height_nm=120, substrate_etch_nm=120, pitch_nm=10, padding_nm=1000
    )


@pytest.fixture(scope="session")
def ring_mode_tm_coarse(ring_section_coarse):
    return solve_fundamental_2d(ring_section_coarse, 637.0, Polarization.TM)
