import pytest

from solvers.errors import NonConvexError
from solvers.fronttrack import (
    FluxTable,
    FrontList,
    evolve,
    next_interaction_time,
    rh_residual,
    riemann_solve,
    shock_particles,
    total_variation,
)
from solvers.sticky import evolve as evolve_particles


def test_burgers_table():
    flux = FluxTable.burgers(4)
    assert flux.states == (0.0, 1.0, 2.0, 3.0)
    assert flux.slopes == (0.5, 1.5, 2.5)
    assert flux.convex
    assert flux.speed(3, 0) == pytest.approx(1.5)


def test_flux_table_validation():
    with pytest.raises(ValueError, match="strictly increasing"):
        FluxTable((0.0, 0.0), (0.0, 1.0))
    with pytest.raises(ValueError, match="values"):
        FluxTable((0.0, 1.0), (0.0,))
    with pytest.raises(ValueError, match="Available"):
        FluxTable.burgers(2).index_of(0.5)


def test_sampled_non_convex_flux_is_rejected_by_riemann_solve():
    flux = FluxTable.sampled([0.0, 1.0, 2.0], lambda u: -u * u)
    assert not flux.convex
    with pytest.raises(NonConvexError):
        riemann_solve(flux, 0, 2)


def test_riemann_shock_and_fan():
    flux = FluxTable.burgers(4)
    shock = riemann_solve(flux, 3, 0, position=1.0)
    assert len(shock) == 1
    assert shock[0].speed == pytest.approx(1.5)
    assert shock[0].is_shock
    fan = riemann_solve(flux, 0, 3)
    assert [(f.left, f.right) for f in fan] == [(0, 1), (1, 2), (2, 3)]
    assert [f.speed for f in fan] == pytest.approx([0.5, 1.5, 2.5])
    assert riemann_solve(flux, 2, 2) == []


def test_triple_collision_makes_one_shock():
    flux = FluxTable.burgers(4)
    fl = FrontList.from_blocks(flux, (-1.0, 0.0, 1.0), (3, 2, 1, 0))
    assert next_interaction_time(fl) == pytest.approx(1.0)
    later = evolve(fl, flux, 2.0)
    assert len(later) == 1
    front = later.fronts[0]
    assert (front.left, front.right) == (3, 0)
    assert front.speed == pytest.approx(1.5)
    assert front.time == pytest.approx(1.0)
    assert front.position == pytest.approx(1.5)
    assert later.first_interaction_time == pytest.approx(1.0)
    assert later.sample(3.0) == (3, 0)
    assert later.sample(4.0) == (0, 0)
    assert later.sample(0.0) == (3, 3)


def test_two_shocks_merge():
    flux = FluxTable.burgers(3)
    fl = FrontList.from_blocks(flux, (-1.0, 1.0), (2, 1, 0))
    later = evolve(fl, flux, 3.0)
    assert len(later) == 1
    assert later.fronts[0].position == pytest.approx(2.0)
    assert later.fronts[0].time == pytest.approx(2.0)
    assert later.fronts[0].speed == pytest.approx(1.0)
    assert later.sample(3.0) == (2, 0)
    assert rh_residual(later, flux) == 0.0


def test_rarefaction_fronts_do_not_interact():
    flux = FluxTable.burgers(3)
    fl = FrontList.from_blocks(flux, (0.0,), (0, 2))
    later = evolve(fl, flux, 5.0)
    assert later.positions == pytest.approx([2.5, 7.5])
    assert later.first_interaction_time is None


def test_total_variation_does_not_increase():
    flux = FluxTable.burgers(4)
    fl = FrontList.from_blocks(flux, (-2.0, -1.0, 0.0, 2.0), (0, 3, 1, 2, 0))
    tv0 = total_variation(fl, flux)
    for t in (0.5, 1.0, 2.0, 4.0):
        assert total_variation(evolve(fl, flux, t), flux) <= tv0 + 1e-12


def test_world_lines_and_rows():
    flux = FluxTable.burgers(3)
    fl = evolve(FrontList.from_blocks(flux, (-1.0, 1.0), (2, 1, 0)), flux, 3.0)
    segments = fl.world_lines()
    assert len(segments) == 3
    assert all(s.t1 >= s.t0 for s in segments)
    assert len(list(fl.to_rows())) == 6


def test_shocks_behave_like_sticky_particles():
    flux = FluxTable.burgers(3)
    fl = FrontList.from_blocks(flux, (-1.0, 1.0), (2, 1, 0))
    particles = evolve_particles(shock_particles(fl, flux), 3.0)
    fronts = shock_particles(evolve(fl, flux, 3.0), flux)
    assert particles.positions == pytest.approx(fronts.positions)
    assert particles.velocities == pytest.approx(fronts.velocities)
    assert particles.masses == pytest.approx(fronts.masses)


def test_blocks_need_matching_states():
    flux = FluxTable.burgers(3)
    with pytest.raises(ValueError, match="breakpoints need"):
        FrontList.from_blocks(flux, (0.0,), (2, 1, 0))
    with pytest.raises(ValueError, match="outside the table"):
        FrontList.from_blocks(flux, (0.0,), (5, 0))


def test_evolve_backwards_raises():
    flux = FluxTable.burgers(2)
    fl = evolve(FrontList.from_blocks(flux, (0.0,), (1, 0)), flux, 1.0)
    with pytest.raises(ValueError, match="backwards"):
        evolve(fl, flux, 0.5)
