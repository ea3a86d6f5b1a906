import numpy as np
import pytest

from solvers.genpot import entropy_check, sticky_velocity_field
from solvers.hopflax import flux_A, velocity_profile_a
from solvers.sticky import (
    ParticleSystem,
    evolve,
    evolve_with_history,
    next_collision,
    rankine_hugoniot_residual,
    trajectory,
)

FOUR = ParticleSystem.from_arrays(
    [0.25, 0.25, 1 / 3, 1 / 6],
    [-3.0, -2.0, 1.0, 3.0],
    [2.0, 1.0, -0.5, 1.0],
)


def test_four_particle_collisions():
    _, history = evolve_with_history(FOUR, 3.0)
    events = [ev for ev, _ in history.events]
    assert [ev.time for ev in events] == pytest.approx([1.0, 1.75])
    assert [ev.position for ev in events] == pytest.approx([-1.0, 0.125])
    merged = [cluster for _, cluster in history.events]
    assert merged[0].members == (0, 1)
    assert merged[1].members == (0, 1, 2)


def test_four_particle_state_at_t2():
    final = evolve(FOUR, 2.0)
    assert len(final) == 2
    first, second = final.particles
    assert first.mass == pytest.approx(5 / 6)
    assert first.position == pytest.approx(0.3)
    assert first.velocity == pytest.approx(0.7)
    assert second.mass == pytest.approx(1 / 6)
    assert second.position == pytest.approx(5.0)
    assert second.velocity == pytest.approx(1.0)


def test_mass_and_momentum_are_conserved():
    for t in (0.5, 1.0, 1.5, 2.0, 3.0):
        final = evolve(FOUR, t)
        assert final.total_mass == pytest.approx(FOUR.total_mass, abs=1e-14)
        assert final.momentum == pytest.approx(FOUR.momentum, abs=1e-14)
        assert final.kinetic_energy <= FOUR.kinetic_energy + 1e-14


def test_rankine_hugoniot_residual_is_zero():
    _, history = evolve_with_history(FOUR, 3.0)
    A = flux_A(velocity_profile_a(FOUR))
    assert rankine_hugoniot_residual(history, A) <= 1e-12


def test_trajectory_of_an_original_particle():
    _, history = evolve_with_history(FOUR, 3.0)
    assert trajectory(history, 1, 0.5) == pytest.approx(-1.5)
    # particles 0 and 1 move together at 1.5 after t = 1
    assert trajectory(history, 0, 1.5) == pytest.approx(-0.25)
    assert trajectory(history, 3, 3.0) == pytest.approx(6.0)


def test_history_rows_cover_every_segment():
    _, history = evolve_with_history(FOUR, 2.0)
    rows = list(history.to_rows())
    assert len(rows) == 2 * len(history.segments)
    assert len(list(history.collision_rows())) == 2


def test_simultaneous_triple_collision_is_one_event():
    sys = ParticleSystem.from_arrays([1.0, 1.0, 1.0], [-1.0, 0.0, 1.0], [1.0, 0.0, -1.0])
    ev = next_collision(sys)
    assert (ev.first, ev.last) == (0, 2)
    assert ev.time == pytest.approx(1.0)
    final = evolve(sys, 2.0)
    assert len(final) == 1
    assert final.particles[0].position == pytest.approx(0.0)
    assert final.particles[0].velocity == pytest.approx(0.0)


def test_diverging_particles_never_collide():
    sys = ParticleSystem.from_arrays([1.0, 1.0], [0.0, 1.0], [-1.0, 1.0])
    assert next_collision(sys) is None
    assert evolve(sys, 10.0).positions == pytest.approx((-10.0, 11.0))


def test_evolve_backwards_raises():
    later = evolve(FOUR, 1.0)
    with pytest.raises(ValueError, match="backwards"):
        evolve(later, 0.5)


def test_particle_system_validation():
    with pytest.raises(ValueError, match="non-positive mass"):
        ParticleSystem.from_arrays([0.0], [0.0], [0.0])
    with pytest.raises(ValueError, match="strictly increasing"):
        ParticleSystem.from_arrays([1.0, 1.0], [1.0, 0.0], [0.0, 0.0])
    with pytest.raises(ValueError, match="same length"):
        ParticleSystem.from_arrays([1.0], [0.0, 1.0], [0.0])


def test_whole_history_of_the_four_particles():
    expected_clusters = {0.25: 4, 0.5: 4, 0.75: 4, 1.0: 3, 1.25: 3, 1.5: 3, 1.75: 2, 2.0: 2, 2.5: 2, 3.0: 2}
    for t, count in expected_clusters.items():
        final, history = evolve_with_history(FOUR, t)
        assert len(final) == count, t
        assert final.time == t
        assert final.total_mass == pytest.approx(1.0)
        assert len(history.events) == 4 - count
    final = evolve(FOUR, 3.0)
    assert final.positions == pytest.approx((1.0, 6.0))
    assert final.masses == pytest.approx((5 / 6, 1 / 6))


def test_collision_exactly_at_the_requested_time():
    final, history = evolve_with_history(FOUR, 1.0)
    assert len(history.events) == 1
    assert final.positions[0] == pytest.approx(-1.0)
    assert final.velocities[0] == pytest.approx(1.5)


def test_disjoint_simultaneous_collisions():
    sys = ParticleSystem.from_arrays([1.0, 1.0, 1.0, 1.0], [-1.0, 0.0, 2.0, 3.0], [1.0, 0.0, 0.0, -1.0])
    _, history = evolve_with_history(sys, 4.0)
    events = [ev for ev, _ in history.events]
    assert [ev.time for ev in events] == pytest.approx([1.0, 1.0, 3.0])
    assert [ev.position for ev in events] == pytest.approx([0.0, 2.0, 1.0])

    middle = evolve(sys, 2.0)
    assert middle.positions == pytest.approx((0.5, 1.5))
    assert middle.velocities == pytest.approx((0.5, -0.5))
    assert middle.masses == pytest.approx((2.0, 2.0))

    final = evolve(sys, 4.0)
    assert len(final) == 1
    assert final.particles[0].position == pytest.approx(1.0)
    assert final.particles[0].velocity == pytest.approx(0.0)
    assert final.particles[0].members == (0, 1, 2, 3)


def test_evolution_is_a_semigroup():
    for t1, t2 in ((0.5, 2.0), (1.0, 1.75), (1.2, 3.0), (2.0, 2.0)):
        direct = evolve(FOUR, t2)
        staged = evolve(evolve(FOUR, t1), t2)
        assert staged.masses == pytest.approx(direct.masses)
        assert staged.positions == pytest.approx(direct.positions)
        assert staged.velocities == pytest.approx(direct.velocities)


def test_kinetic_energy_never_increases():
    energies = [evolve(FOUR, t).kinetic_energy for t in np.linspace(0.0, 4.0, 33)]
    assert all(b <= a + 1e-14 for a, b in zip(energies, energies[1:]))
    assert energies[-1] < energies[0]


def test_random_atomic_data_conserves_and_satisfies_the_entropy_bound():
    rng = np.random.default_rng(20240611)
    for _ in range(1000):
        n = int(rng.integers(1, 9))
        positions = np.sort(rng.choice(np.arange(-50, 50), size=n, replace=False) * 0.1 + rng.uniform(0.0, 0.01, n))
        sys = ParticleSystem.from_arrays(rng.uniform(0.1, 1.0, n), positions, rng.normal(0.0, 1.0, n))
        t = float(rng.uniform(0.1, 5.0))
        final, history = evolve_with_history(sys, t)

        assert final.total_mass == pytest.approx(sys.total_mass, abs=1e-12)
        assert final.momentum == pytest.approx(sys.momentum, abs=1e-12)
        assert final.kinetic_energy <= sys.kinetic_energy + 1e-12
        A = flux_A(velocity_profile_a(sys))
        assert rankine_hugoniot_residual(history, A) <= 1e-9
        assert entropy_check(sticky_velocity_field(final), t) <= 1e-9
