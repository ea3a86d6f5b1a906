"""
solvers/hopflax.py
------------------
Convex-hull solver in the mass coordinate.

For a particle system with cumulative masses M_i the construction is

    a(m)    = v_i on (M_{i-1}, M_i]
    A(m)    = integral of a from 0 to m
    Phi0(m) = x_1 m + sum_i (m - M_i)_+ (x_{i+1} - x_i)

and at time t the positions are the slopes of the lower convex hull of Phi0 + tA.
Each maximal linear piece of the hull is one cluster; its mass interval tells which
particles it contains.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from solvers.errors import NonConvexError
from solvers.measures import (
    Continuity,
    PiecewiseLinear,
    StepFunction,
    legendre_transform,
    lower_convex_hull,
    positive_part_sum,
)
from solvers.sticky import ParticleSystem

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class HullPiece:
    mass_lo:  float
    mass_hi:  float
    position: float     # slope of the hull on (mass_lo, mass_hi)

    @property
    def mass(self) -> float:
        return self.mass_hi - self.mass_lo


@dataclass(frozen=True)
class VacuumInterval:
    """x-interval between two consecutive clusters; carries no mass."""
    mass:  float        # cumulative mass at the kink
    x_lo:  float
    x_hi:  float
    vacuum: bool = True


@dataclass(frozen=True)
class AtomCertificate:
    position:                float
    left_slope:              float
    right_slope:             float
    touching_above_vacuous:  bool
    min_margin:              float
    passed:                  bool


@dataclass
class ViscosityReport:
    certificates: list[AtomCertificate] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.certificates)


# =============================================================================
# FLUX AND POTENTIALS
# =============================================================================

def velocity_profile_a(sys: ParticleSystem) -> StepFunction:
    if not len(sys):
        return StepFunction.constant(0.0, (0.0, 0.0))
    cumulative = sys.cumulative_masses()
    return StepFunction(
        cumulative[:-1],
        sys.velocities,
        Continuity.LEFT,
        (0.0, cumulative[-1]),
    )


def flux_A(a: StepFunction) -> PiecewiseLinear:
    lo, hi = a.support
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise ValueError(f"flux_A needs a bounded support, got ({lo}, {hi})")
    edges = [lo] + [b for b in a.breakpoints if lo < b < hi] + [hi]
    knots = [(edges[0], 0.0)]
    pieces = []
    for left, right in zip(edges, edges[1:]):
        pieces.append(a.evaluate(0.5 * (left + right)) * (right - left))
        knots.append((right, math.fsum(pieces)))
    return PiecewiseLinear(tuple(knots))


def potential_psi(sys: ParticleSystem, pad: float = 1.0) -> PiecewiseLinear:
    """
    Psi(x) = integral of M(y) dy, anchored so that Psi = 0 left of the leftmost atom.

    The domain extends `pad` beyond the outermost atoms so both limiting slopes
    (0 and the total mass) are present.
    """
    if not len(sys):
        return positive_part_sum([])
    xs = sys.positions
    return positive_part_sum(
        list(zip(sys.masses, xs)),
        domain=(xs[0] - pad, xs[-1] + pad),
    )


def initial_potential_phi0(sys: ParticleSystem) -> PiecewiseLinear:
    """Phi0 on [0, M] with knots exactly at the cumulative masses."""
    cumulative = sys.cumulative_masses()
    xs = sys.positions

    def phi0(m: float) -> float:
        return xs[0] * m + math.fsum(
            max(m - cumulative[i], 0.0) * (xs[i + 1] - xs[i])
            for i in range(len(xs) - 1)
        )

    return PiecewiseLinear.from_function(phi0, (0.0,) + cumulative)


def conjugate_phi0(sys: ParticleSystem) -> PiecewiseLinear:
    """Phi0 obtained as the Legendre transform of Psi0; agrees with initial_potential_phi0."""
    return legendre_transform(potential_psi(sys))


def hopf_potential(sys0: ParticleSystem, t: float) -> PiecewiseLinear:
    """Phi0 + tA on the common knot set."""
    phi0 = initial_potential_phi0(sys0)
    flux = flux_A(velocity_profile_a(sys0))
    return PiecewiseLinear(tuple(
        (m, v + t * flux.evaluate(m)) for m, v in phi0.knots
    ))


# =============================================================================
# HULL
# =============================================================================

def hull_pieces(hull: PiecewiseLinear, tol: float = 1e-12) -> list[HullPiece]:
    pieces: list[HullPiece] = []
    for (m0, v0), (m1, v1) in zip(hull.knots, hull.knots[1:]):
        slope = (v1 - v0) / (m1 - m0)
        if pieces and abs(slope - pieces[-1].position) <= tol * (1.0 + abs(slope)):
            prev = pieces.pop()
            span = m1 - prev.mass_lo
            # chord over the merged interval
            slope = (v1 - (v0 - prev.position * (m0 - prev.mass_lo))) / span
            pieces.append(HullPiece(prev.mass_lo, m1, slope))
        else:
            pieces.append(HullPiece(m0, m1, slope))
    return pieces


def hull_positions(sys0: ParticleSystem, t: float, tol: float = 1e-12) -> list[HullPiece]:
    """Maximal linear pieces of hull(Phi0 + tA); each slope is a cluster position at t."""
    if t < 0:
        raise ValueError(f"Negative time {t}")
    if not len(sys0):
        return []
    if len(sys0) == 1:
        p = sys0.particles[0]
        return [HullPiece(0.0, p.mass, p.position + t * p.velocity)]
    hull = lower_convex_hull(hopf_potential(sys0, t))
    pieces = hull_pieces(hull, tol)
    logger.debug("hull at t=%.6g: %d pieces", t, len(pieces))
    return pieces


def vacuum_intervals(pieces: Iterable[HullPiece]) -> list[VacuumInterval]:
    pieces = list(pieces)
    return [
        VacuumInterval(left.mass_hi, left.position, right.position)
        for left, right in zip(pieces, pieces[1:])
    ]


# =============================================================================
# VISCOSITY CERTIFICATE
# =============================================================================

def viscosity_certificate(
    psi: PiecewiseLinear,
    flux: PiecewiseLinear,
    atom_positions: Iterable[float],
    samples: int = 64,
    tol: float = 1e-12,
) -> ViscosityReport:
    """
    Sampled check of the viscosity inequalities at each atom position.

    Touching from above is impossible where the slope jumps up. Touching from
    below with slope p in [M_left, M_right] requires A(p) to lie on or above the
    chord of A over the subdifferential, whose slope is the cluster speed.
    """
    if not psi.is_convex():
        raise NonConvexError("viscosity_certificate requires a convex potential")
    lo, hi = flux.domain
    report = ViscosityReport()
    for x in atom_positions:
        m_left = min(max(psi.left_slope(x), lo), hi)
        m_right = min(max(psi.right_slope(x), lo), hi)
        if m_right > m_left:
            a_left = flux.evaluate(m_left)
            speed = (flux.evaluate(m_right) - a_left) / (m_right - m_left)
            margin = min(
                flux.evaluate(float(p)) - a_left - speed * (float(p) - m_left)
                for p in np.linspace(m_left, m_right, samples)
            )
        else:
            margin = 0.0
        cert = AtomCertificate(
            position=x,
            left_slope=m_left,
            right_slope=m_right,
            touching_above_vacuous=m_left < m_right,
            min_margin=margin,
            passed=margin >= -tol,
        )
        if not cert.passed:
            logger.warning("viscosity inequality fails at x=%.6g (margin %.3g)", x, margin)
        report.certificates.append(cert)
    return report
