import pytest

from montecarlo.contacts import (
    RegularPoint,
    ShockSample,
    contact_range,
    histogram,
    parabola_contacts,
    scan_shocks,
)
from solvers.errors import DomainTooSmallError
from solvers.measures import PiecewiseLinear

RIEMANN_PSI = PiecewiseLinear(((-2.0, 2.0), (0.0, 0.0), (2.0, 0.0)))


def test_flat_potential_has_identity_contacts():
    psi = PiecewiseLinear(((-10.0, 0.0), (10.0, 0.0)))
    contact = parabola_contacts(psi, 1.5, 2.0)
    assert isinstance(contact, RegularPoint)
    assert contact.xi == pytest.approx(1.5)
    assert contact.velocity == pytest.approx(0.0)


def test_linear_potential_shifts_the_contact():
    a = 0.75
    psi = PiecewiseLinear(((-10.0, 10.0 * a), (10.0, -10.0 * a)))
    contact = parabola_contacts(psi, 1.0, 2.0)
    assert contact.xi == pytest.approx(1.0 - a * 2.0)
    assert contact.velocity == pytest.approx(a)


def test_riemann_potential_tie_is_a_shock():
    contact = parabola_contacts(RIEMANN_PSI, 0.5, 1.0)
    assert isinstance(contact, ShockSample)
    assert (contact.xi_minus, contact.xi_plus) == pytest.approx((-0.5, 0.5))
    assert contact.mu == pytest.approx(1.0)
    assert contact.nu == pytest.approx(1.0)


def test_contact_on_the_boundary_raises():
    psi = PiecewiseLinear(((-1.0, 0.0), (1.0, 0.0)))
    with pytest.raises(DomainTooSmallError):
        contact_range(psi, 5.0, 1.0)
    with pytest.raises(ValueError):
        contact_range(psi, 0.0, 0.0)


def test_scan_finds_the_shock_between_grid_points():
    grid = [-0.5 + 2.0 * k / 7 for k in range(8)]
    shocks = scan_shocks(RIEMANN_PSI, 1.0, grid)
    assert len(shocks) == 1
    assert shocks[0].x_star == pytest.approx(0.5, abs=1e-8)
    assert shocks[0].mu == pytest.approx(1.0, abs=1e-8)


def test_scan_finds_a_shock_on_a_grid_point():
    shocks = scan_shocks(RIEMANN_PSI, 1.0, [-0.5, 0.0, 0.5, 1.0, 1.5])
    assert len(shocks) == 1
    assert shocks[0].x_star == 0.5
    assert shocks[0].mu == pytest.approx(1.0)


def test_histogram_density_integrates_to_one():
    hist = histogram([0.1, 0.2, 0.9], bins=2, value_range=(0.0, 1.0))
    assert hist["counts"] == [2, 1]
    assert hist["n"] == 3
    assert hist["density"] == pytest.approx([4 / 3, 2 / 3])
    assert hist["edges"] == pytest.approx([0.0, 0.5, 1.0])


def test_histogram_of_nothing():
    hist = histogram([], bins=3, value_range=(0.0, 1.0))
    assert hist["counts"] == [0, 0, 0]
    assert hist["density"] == [0.0, 0.0, 0.0]
