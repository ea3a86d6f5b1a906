"""
Monte Carlo experiments behind the `mc-stats` and `fm-shocks` commands.
"""
import logging
from typing import Optional, Sequence

import numpy as np

from montecarlo.contacts import ShockSample, histogram, scan_shocks
from montecarlo.ensemble import Ensemble, NPointEstimate, default_window, estimate_p, riemann_oracle
from montecarlo.hierarchy import HierarchyResult, hierarchy_residual_first, hierarchy_residual_second
from montecarlo.laws import InitialLaw, LawKind, sample_potential
from solvers.fronttrack import FluxTable

logger = logging.getLogger(__name__)


class StatisticsService:
    """
    Ensemble statistics for one (law, flux) pair.

        service = StatisticsService(law, flux, n=100_000, seed=11, workers=4)
        estimate = service.estimate(t=0.2, xs=[0.0, 0.2])
        first = service.first_hierarchy(k=0, x=0.0, t=0.2, dt=0.1, w=0.1)
    """

    def __init__(self, law: InitialLaw, flux: FluxTable, n: int, seed: int, workers: int = 1):
        self.law = law
        self.flux = flux
        self.workers = workers
        self.ensemble = Ensemble.generate(law, flux, n, seed)

    def window(self, requested: Optional[float]) -> float:
        if requested:
            return requested
        lo, hi = self.law.domain
        return default_window(hi - lo, len(self.ensemble))

    def estimate(self, t: float, xs: Sequence[float], window: Optional[float] = None) -> NPointEstimate:
        w = self.window(window)
        return estimate_p(self.ensemble.at(t, self.workers), self.flux, t, xs, w)

    def oracle(self, t: float, xs: Sequence[float], window: Optional[float] = None) -> Optional[list[dict]]:
        """Closed-form p1/p2 when the law is a randomized Riemann shock."""
        if self.law.kind is not LawKind.RIEMANN or self.law.location_spread <= 0:
            return None
        u_l, u_r = self.flux.index_of(self.law.u_l), self.flux.index_of(self.law.u_r)
        if not u_l > u_r:
            return None
        w = self.window(window)
        return [
            {"x": x, **riemann_oracle(self.flux, u_l, u_r, self.law.location_spread, x, t, w)}
            for x in xs
        ]

    def first_hierarchy(self, k: int, x: float, t: float, dt: float, w: float, target: float = 0.0) -> HierarchyResult:
        return hierarchy_residual_first(self.ensemble, k, x, t, dt, w, target, self.workers)

    def second_hierarchy(
        self,
        pair: tuple[int, int],
        x: float,
        t: float,
        dt: float,
        w: float,
        eps: Optional[float] = None,
        target: float = 0.0,
    ) -> HierarchyResult:
        return hierarchy_residual_second(self.ensemble, pair, x, t, dt, w, eps, target, self.workers)


def shock_statistics(law: InitialLaw, t: float, x_grid: Sequence[float], paths: int = 1, bins: int = 30) -> dict:
    """
    Parabola-contact shocks of `paths` Brownian potentials drawn from one parent
    Generator; returns the samples and histograms of strength and wavelength.
    """
    rng = np.random.default_rng(law.seed)
    shocks: list[ShockSample] = []
    for _ in range(paths):
        psi = sample_potential(law, rng)
        shocks.extend(scan_shocks(psi, t, x_grid))
    mus = [s.mu for s in shocks]
    nus = [s.nu for s in shocks]
    logger.info("fm-shocks: %d shocks over %d paths at t=%.6g", len(shocks), paths, t)
    return {
        "shocks": shocks,
        "mu_hist": histogram(mus, bins) if mus else histogram([], bins, (0.0, 1.0)),
        "nu_hist": histogram(nus, bins) if nus else histogram([], bins, (0.0, 1.0)),
    }
