"""
Four-way comparison of the exact solvers on one particle system.
Called from the `crosscheck` CLI command and from the tests.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

from solvers.flowmap import InitialData, gvp_reconstruct, inverse_partition
from solvers.genpot import cluster_plateaus
from solvers.hopflax import flux_A, hull_positions, velocity_profile_a
from solvers.sticky import ParticleSystem, evolve

logger = logging.getLogger(__name__)

DEFAULT_TIMES = tuple(0.25 * k for k in range(1, 13))
METHODS = ("sticky", "hopflax", "flowmap", "genpot")


@dataclass
class CrosscheckReport:
    rows: list[dict] = field(default_factory=list)

    @property
    def max_position_diff(self) -> float:
        return max((r["max_position_diff"] for r in self.rows), default=0.0)

    @property
    def max_velocity_diff(self) -> float:
        return max((r["max_velocity_diff"] for r in self.rows), default=0.0)

    @property
    def max_discrepancy(self) -> float:
        return max(self.max_position_diff, self.max_velocity_diff)

    def passed(self, tolerance: float) -> bool:
        return self.max_discrepancy <= tolerance

    def summary(self, tolerance: float) -> dict:
        return {
            "max_position_diff": self.max_position_diff,
            "max_velocity_diff": self.max_velocity_diff,
            "max_discrepancy": self.max_discrepancy,
            "tolerance": tolerance,
            "passed": self.passed(tolerance),
            "times": sorted({r["t"] for r in self.rows}),
        }


class CrosscheckService:
    """
    Runs sticky, hopflax, flowmap and genpot on the same data and compares the
    cluster (position, velocity) lists against the sticky reference.

        service = CrosscheckService(system)
        report = service.run()
        report.passed(1e-10)
    """

    def __init__(self, system: ParticleSystem, far_field: float = 0.0, hull_tol: float = 1e-12):
        self.system = system
        self.data = InitialData.from_particles(system, far_field)
        self.hull_tol = hull_tol
        self._flux = flux_A(velocity_profile_a(system)) if len(system) else None

    # ── One method each ───────────────────────────────────────────────────────

    def sticky(self, t: float) -> list[tuple[float, float]]:
        return [(p.position, p.velocity) for p in evolve(self.system, t).particles]

    def hopflax(self, t: float) -> list[tuple[float, float]]:
        out = []
        for piece in hull_positions(self.system, t, self.hull_tol):
            momentum = self._flux.evaluate(piece.mass_hi) - self._flux.evaluate(piece.mass_lo)
            out.append((piece.position, momentum / piece.mass))
        return out

    def flowmap(self, t: float) -> list[tuple[float, float]]:
        locations = self.data.measure.locations
        return [
            gvp_reconstruct(self.data, t, locations[c.members[0]])
            for c in inverse_partition(self.data, t).clusters
        ]

    def genpot(self, t: float) -> list[tuple[float, float]]:
        return [(p.position, p.velocity) for p in cluster_plateaus(self.data, t)]

    # ── Comparison ────────────────────────────────────────────────────────────

    @staticmethod
    def _diff(reference: list[tuple[float, float]], other: list[tuple[float, float]]) -> tuple[float, float]:
        if len(reference) != len(other):
            return math.inf, math.inf
        dx = max((abs(a[0] - b[0]) for a, b in zip(reference, other)), default=0.0)
        dv = max((abs(a[1] - b[1]) for a, b in zip(reference, other)), default=0.0)
        return dx, dv

    def run(self, times: Optional[Sequence[float]] = None) -> CrosscheckReport:
        times = DEFAULT_TIMES if not times else times
        report = CrosscheckReport()
        for t in times:
            reference = self.sticky(t)
            for method in METHODS:
                result = reference if method == "sticky" else getattr(self, method)(t)
                dx, dv = self._diff(reference, result)
                report.rows.append({
                    "t": t,
                    "method": method,
                    "clusters": len(result),
                    "max_position_diff": dx,
                    "max_velocity_diff": dv,
                })
                if max(dx, dv) > 0:
                    logger.debug("t=%.6g %s differs from sticky by %.3g", t, method, max(dx, dv))
        logger.info("crosscheck: max discrepancy %.3g over %d times", report.max_discrepancy, len(times))
        return report
