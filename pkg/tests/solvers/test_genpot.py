import math

import numpy as np
import pytest

from solvers.genpot import (
    backward_characteristics,
    branch_table,
    branch_values,
    cluster_plateaus,
    entropy_check,
    minimize_F,
    monotonicity_scan,
    potential_F,
    profile,
    sticky_velocity_field,
)
from solvers.flowmap import InitialData
from solvers.measures import Orientation, StepFunction
from solvers.sticky import ParticleSystem, evolve

FOUR = ParticleSystem.from_arrays(
    [0.25, 0.25, 1 / 3, 1 / 6],
    [-3.0, -2.0, 1.0, 3.0],
    [2.0, 1.0, -0.5, 1.0],
)
DATA = InitialData.from_particles(FOUR)


def test_branch_values_table():
    values = branch_values(DATA, 0.0, 1.0)
    assert values.tolist() == pytest.approx([-0.5, -0.25, 0.0, 1 / 6, 5 / 6])


def test_potential_F_agrees_with_branches():
    assert potential_F(DATA, 2.0, 0.0, 1.0) == pytest.approx(1 / 6)
    assert potential_F(DATA, -10.0, 0.0, 1.0) == pytest.approx(-0.5)


def test_minimize_F_table():
    ms = minimize_F(DATA, 0.0, 1.0)
    assert ms.v == pytest.approx(-0.5)
    assert ms.points == ((-math.inf, -3.0),)
    assert ms.branches == (0,)
    assert ms.y_star == ms.y_star_upper == -3.0
    # x = 0 lies right of -3 + 1 * 2, so the right limit is reported
    assert not ms.attained
    assert ms.right_limit_value == pytest.approx(-0.25)
    assert ms.contains(-4.0)
    assert not ms.contains(0.0)


def test_minimize_F_tie_gives_cluster_extent():
    x = cluster_plateaus(DATA, 2.0)[0].position
    ms = minimize_F(DATA, x, 2.0, Orientation.ORIENTED)
    assert ms.branches == (0, 3)
    assert ms.y_star == -3.0
    assert ms.y_star_upper == 1.0
    assert ms.distance(0.0) == pytest.approx(1.0)
    assert ms.contains(2.0)


def test_minimize_F_empty_measure():
    empty = InitialData.from_particles(ParticleSystem(()))
    ms = minimize_F(empty, 1.0, 1.0)
    assert ms.v == 0.0
    assert ms.points == ((-math.inf, math.inf),)
    assert ms.y_star == ms.y_star_upper == 0.0


def test_backward_characteristics():
    x = cluster_plateaus(DATA, 2.0)[0].position
    ms = minimize_F(DATA, x, 2.0, Orientation.ORIENTED)
    lower, upper = backward_characteristics(x, 2.0, ms)
    assert lower.at(0.0) == pytest.approx(-3.0)
    assert upper.at(0.0) == pytest.approx(1.0)
    assert lower.at(2.0) == pytest.approx(x)
    with pytest.raises(ValueError):
        backward_characteristics(x, 0.0, ms)


def test_cluster_plateaus_match_sticky():
    for t in (0.5, 1.0, 1.5, 2.0, 3.0):
        plateaus = cluster_plateaus(DATA, t)
        reference = evolve(FOUR, t).particles
        assert len(plateaus) == len(reference)
        for plateau, p in zip(plateaus, reference):
            assert plateau.position == pytest.approx(p.position, abs=1e-10)
            assert plateau.mass == pytest.approx(p.mass, abs=1e-12)
            assert plateau.velocity == pytest.approx(p.velocity, abs=1e-10)
            assert (plateau.first, plateau.last) == (p.members[0], p.members[-1])


def test_minimizers_move_right():
    assert monotonicity_scan(DATA, 1.0, np.linspace(-5.0, 7.0, 121))
    assert monotonicity_scan(DATA, 2.0, np.linspace(-5.0, 7.0, 121))


def test_entropy_check_on_the_sticky_solution():
    u = sticky_velocity_field(evolve(FOUR, 2.0))
    assert entropy_check(u, 2.0) == pytest.approx(0.3 / 4.7 - 0.5)


def test_entropy_check_flags_a_steep_increase():
    u = StepFunction((0.0, 0.1), (0.0, 0.0, 1.0))
    assert entropy_check(u, 1.0) == pytest.approx(9.0)


def test_entropy_check_single_breakpoint():
    assert entropy_check(StepFunction((0.0,), (1.0, 0.0)), 2.0) == -0.5


def test_profile_and_branch_table_rows():
    rows = profile(DATA, 1.0, [-1.0, 0.0, 1.0])
    assert [r["x"] for r in rows] == [-1.0, 0.0, 1.0]
    assert rows[1]["v"] == pytest.approx(-0.5)
    table = branch_table(DATA, 0.0, 1.0)
    assert [r["branch"] for r in table] == [0, 1, 2, 3, 4]
    assert table[0]["y_lo"] == -math.inf
    assert table[-1]["y_hi"] == math.inf
    assert table[3]["F"] == pytest.approx(1 / 6)


def test_negative_time_raises():
    with pytest.raises(ValueError):
        minimize_F(DATA, 0.0, -1.0)


def _random_data(rng: np.random.Generator) -> InitialData:
    n = int(rng.integers(1, 8))
    positions = np.sort(rng.choice(np.arange(-40, 40), size=n, replace=False)) * 0.25
    sys = ParticleSystem.from_arrays(rng.uniform(0.1, 1.0, n), positions, rng.normal(0.0, 1.5, n))
    return InitialData.from_particles(sys)


def test_minimum_is_finite_on_random_data():
    rng = np.random.default_rng(101)
    for _ in range(1000):
        data = _random_data(rng)
        x, t = float(rng.uniform(-15.0, 15.0)), float(rng.uniform(0.0, 5.0))
        ms = minimize_F(data, x, t)
        assert math.isfinite(ms.v)
        assert ms.v == pytest.approx(branch_values(data, x, t).min())
        for y in rng.uniform(-20.0, 20.0, 5):
            assert potential_F(data, float(y), x, t) >= ms.v - 1e-9


def test_minimizers_stay_close_under_small_perturbations():
    rng = np.random.default_rng(202)
    for _ in range(300):
        data = _random_data(rng)
        x, t = float(rng.uniform(-10.0, 10.0)), float(rng.uniform(0.1, 5.0))
        minset = minimize_F(data, x, t)
        for dx in (-1e-6, 1e-6):
            for dt in (-1e-6, 1e-6):
                nearby = minimize_F(data, x + dx, t + dt)
                assert minset.distance(nearby.y_star) <= 1e-4
                assert minset.distance(nearby.y_star_upper) <= 1e-4


def test_minimizers_near_a_cluster_fall_inside_its_extent():
    for t in (1.0, 2.0, 3.0):
        for plateau in cluster_plateaus(DATA, t):
            minset = minimize_F(DATA, plateau.position, t, Orientation.ORIENTED)
            for dx in (-1e-6, 1e-6):
                nearby = minimize_F(DATA, plateau.position + dx, t + 1e-6, Orientation.ORIENTED)
                assert minset.distance(nearby.y_star) <= 1e-4
                assert minset.distance(nearby.y_star_upper) <= 1e-4


@pytest.mark.parametrize("t0", [2.0, 2.5, 3.0])
def test_minimizer_is_constant_along_backward_lines(t0):
    x0 = cluster_plateaus(DATA, t0)[0].position
    lower, upper = backward_characteristics(x0, t0, minimize_F(DATA, x0, t0, Orientation.ORIENTED))
    for s in np.linspace(0.1, t0 - 0.1, 9):
        along_upper = minimize_F(DATA, upper.at(s), s, Orientation.ORIENTED)
        assert len(along_upper.branches) == 1
        assert along_upper.y_star == pytest.approx(upper.foot, abs=1e-12)
        along_lower = minimize_F(DATA, lower.at(s), s, Orientation.ORIENTED)
        assert len(along_lower.branches) == 1
        assert along_lower.contains(lower.foot)
