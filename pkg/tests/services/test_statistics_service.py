import pytest

from montecarlo.laws import InitialLaw
from services.statistics_service import StatisticsService, shock_statistics
from solvers.fronttrack import FluxTable

FLUX = FluxTable.burgers(2)


@pytest.fixture(scope="module")
def riemann_service():
    law = InitialLaw.riemann(1.0, 0.0, 1.0, seed=11)
    return StatisticsService(law, FLUX, n=2000, seed=11)


def test_oracle_matches_closed_form(riemann_service):
    (row,) = riemann_service.oracle(0.5, [0.0], window=0.2)
    assert row["x"] == 0.0
    assert row["speed"] == pytest.approx(0.5)
    assert row["p1_left"] == pytest.approx(0.625)
    assert row["p2"] == pytest.approx(0.5)


def test_estimate_tracks_the_oracle(riemann_service):
    estimate = riemann_service.estimate(0.5, [0.0], window=0.2)
    (row,) = riemann_service.oracle(0.5, [0.0], window=0.2)
    assert estimate.n == 2000
    assert abs(estimate.p1[0][1] - row["p1_left"]) <= 4 * estimate.p1_stderr[0][1]


def test_default_window_shrinks_with_n(riemann_service):
    assert riemann_service.window(0.3) == 0.3
    assert 0 < riemann_service.window(None) < 0.3


def test_no_oracle_for_block_laws():
    law = InitialLaw.blocks([2.0, 1.0, 0.0], 2.0, (0.5, 1.5), seed=5)
    service = StatisticsService(law, FluxTable.burgers(3), n=10, seed=5)
    assert service.oracle(1.0, [0.0]) is None


def test_shock_statistics_on_brownian_potential():
    law = InitialLaw.brownian_potential(1.0, 0.05, (-10.0, 10.0), seed=2024)
    grid = [-2.0 + 0.1 * i for i in range(41)]
    result = shock_statistics(law, 1.0, grid, paths=2, bins=5)
    shocks = result["shocks"]
    assert shocks
    assert all(s.mu > 0 for s in shocks)
    assert result["mu_hist"]["n"] == len(shocks)
    assert len(result["nu_hist"]["counts"]) == 5
