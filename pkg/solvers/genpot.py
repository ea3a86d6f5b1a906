"""
solvers/genpot.py
-----------------
Generalized potential

    F(y; x, t) = integral from 0+0 to y-0 of (t u0(eta) + eta - x) dm0(eta)

and its minimizers. For atomic data F is piecewise constant in y: branch j is
the interval (a_j, a_{j+1}] between consecutive atoms (a_0 = -inf,
a_{n+1} = +inf), so minimization is an exact enumeration over n + 1 values.

With the ORIENTED convention every branch value is an affine function of
(x, t); the minimizer sets then move monotonically to the right as x grows and
the points where two branches tie are exactly the cluster positions.
"""

import logging
import math
from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from solvers.flowmap import InitialData
from solvers.measures import Continuity, Orientation, StepFunction, stieltjes_integral
from solvers.sticky import ParticleSystem

logger = logging.getLogger(__name__)

GenPotData = InitialData

TIE_TOL = 1e-12


@dataclass(frozen=True)
class MinimizerSet:
    v:            float
    points:       tuple[tuple[float, float], ...]    # closed intervals, ends may be infinite
    y_star:       float
    y_star_upper: float
    branches:     tuple[int, ...]
    attained:     bool          # x <= y0 + t u0(y0) at y0 = y_star
    right_limit_value: float    # F(y0) when attained, F(y0 + 0) otherwise

    def contains(self, y: float) -> bool:
        return any(lo <= y <= hi for lo, hi in self.points)

    def distance(self, y: float) -> float:
        return min(0.0 if lo <= y <= hi else min(abs(y - lo), abs(y - hi)) for lo, hi in self.points)


@dataclass(frozen=True)
class Line:
    """Straight backward characteristic through (x0, t0) and (foot, 0)."""
    x0:   float
    t0:   float
    foot: float

    @property
    def slope(self) -> float:
        return (self.x0 - self.foot) / self.t0

    def at(self, t: float) -> float:
        return self.x0 + self.slope * (t - self.t0)


@dataclass(frozen=True)
class Plateau:
    position: float
    mass:     float
    velocity: float
    first:    int       # atom index range [first, last]
    last:     int


# =============================================================================
# POTENTIAL
# =============================================================================

def potential_F(
    data: GenPotData,
    y: float,
    x: float,
    t: float,
    orientation: Orientation = Orientation.TABLE,
) -> float:
    if t < 0:
        raise ValueError(f"Negative time {t}")
    return stieltjes_integral(data.velocity, data.measure.signed_mass_function(), y, x, t, orientation)


def _weights(data: GenPotData, x: float, t: float) -> tuple[np.ndarray, np.ndarray]:
    locations = np.asarray(data.measure.locations, dtype=float)
    masses = np.asarray(data.measure.masses, dtype=float)
    velocities = np.asarray(data.atom_velocities, dtype=float)
    return locations, (t * velocities + locations - x) * masses


def branch_values(
    data: GenPotData,
    x: float,
    t: float,
    orientation: Orientation = Orientation.TABLE,
) -> np.ndarray:
    """F on each of the n + 1 branches."""
    locations, w = _weights(data, x, t)
    n = len(w)
    prefix = np.concatenate(([0.0], np.cumsum(w)))
    if Orientation(orientation) is Orientation.ORIENTED:
        return prefix - w[locations <= 0].sum()
    positive = np.where(locations > 0, w, 0.0)
    negative = np.where(locations < 0, w, 0.0)
    pos_prefix = np.concatenate(([0.0], np.cumsum(positive)))
    neg_suffix = np.concatenate((np.cumsum(negative[::-1])[::-1], [0.0]))
    return pos_prefix[: n + 1] + neg_suffix


def branch_bounds(data: GenPotData, j: int) -> tuple[float, float]:
    locations = data.measure.locations
    lo = locations[j - 1] if j > 0 else -math.inf
    hi = locations[j] if j < len(locations) else math.inf
    return lo, hi


def _representative(data: GenPotData, j: int) -> float:
    lo, hi = branch_bounds(data, j)
    if math.isfinite(lo):
        return lo
    if math.isfinite(hi):
        return hi
    return 0.0


def minimize_F(
    data: GenPotData,
    x: float,
    t: float,
    orientation: Orientation = Orientation.TABLE,
    tol: float = TIE_TOL,
) -> MinimizerSet:
    """
    Exact minimization over branches.

    y_star / y_star_upper are the outermost atoms of the cluster reaching x when
    several branches tie; with a single minimizing branch both equal its lower end
    (its finite end when unbounded below).
    """
    if t < 0:
        raise ValueError(f"Negative time {t}")
    if not len(data.measure):
        return MinimizerSet(0.0, ((-math.inf, math.inf),), 0.0, 0.0, (0,), True, 0.0)

    values = branch_values(data, x, t, orientation)
    _, w = _weights(data, x, t)
    v = float(values.min())
    slack = tol * (1.0 + float(np.abs(w).sum()))
    argmin = tuple(int(j) for j in np.flatnonzero(values <= v + slack))

    points: list[tuple[float, float]] = []
    for j in argmin:
        lo, hi = branch_bounds(data, j)
        if points and points[-1][1] == lo:
            points[-1] = (points[-1][0], hi)
        else:
            points.append((lo, hi))

    if len(argmin) > 1:
        y_star = branch_bounds(data, argmin[0])[1]
        y_star_upper = branch_bounds(data, argmin[-1])[0]
    else:
        y_star = y_star_upper = _representative(data, argmin[0])

    locations = data.measure.locations
    attained = x <= y_star + t * data.velocity.evaluate(y_star)
    at = bisect_left(locations, y_star) if attained else bisect_right(locations, y_star)
    return MinimizerSet(
        v=v,
        points=tuple(points),
        y_star=y_star,
        y_star_upper=y_star_upper,
        branches=argmin,
        attained=attained,
        right_limit_value=float(values[at]),
    )


def backward_characteristics(x0: float, t0: float, minset: MinimizerSet) -> tuple[Line, Line]:
    if t0 <= 0:
        raise ValueError(f"backward_characteristics needs t0 > 0, got {t0}")
    return Line(x0, t0, minset.y_star), Line(x0, t0, minset.y_star_upper)


# =============================================================================
# ENTROPY AND MONOTONICITY
# =============================================================================

def entropy_check(u: StepFunction, t: float) -> float:
    """Max over breakpoint pairs of (u(x2) - u(x1)) / (x2 - x1) minus 1/t; <= 0 passes."""
    if t <= 0:
        raise ValueError(f"entropy_check needs t > 0, got {t}")
    xs = np.asarray(u.breakpoints, dtype=float)
    if len(xs) < 2:
        return -1.0 / t
    us = np.asarray([u.evaluate(x) for x in xs])
    dx = xs[None, :] - xs[:, None]
    du = us[None, :] - us[:, None]
    upper = np.triu_indices(len(xs), k=1)
    return float((du[upper] / dx[upper]).max() - 1.0 / t)


def sticky_velocity_field(sys: ParticleSystem) -> StepFunction:
    """Velocity of an evolved system: cluster velocities, constant between clusters."""
    if not len(sys):
        return StepFunction.constant(0.0)
    return StepFunction(sys.positions, (sys.velocities[0],) + sys.velocities, Continuity.RIGHT)


def monotonicity_scan(data: GenPotData, t: float, xs: Iterable[float]) -> bool:
    if t <= 0:
        raise ValueError(f"monotonicity_scan needs t > 0, got {t}")
    previous: Optional[MinimizerSet] = None
    for x in sorted(xs):
        current = minimize_F(data, x, t, Orientation.ORIENTED)
        if previous is not None and previous.y_star_upper > current.y_star:
            logger.info("monotonicity fails before x=%.6g", x)
            return False
        previous = current
    return True


# =============================================================================
# CLUSTERS FROM TIES
# =============================================================================

def cluster_plateaus(data: GenPotData, t: float) -> list[Plateau]:
    """
    Walk the lower envelope of the ORIENTED branch lines F_j(x) = C_j - x M_j.

    Each breakpoint of the envelope is a cluster position; the branches tying there
    delimit its atoms.
    """
    n = len(data.measure)
    if not n:
        return []
    locations, masses = data.measure.locations, data.measure.masses
    velocities = data.atom_velocities
    lagrangian = [(a + t * u) * m for a, u, m in zip(locations, velocities, masses)]
    M = np.concatenate(([0.0], np.cumsum(masses)))
    C = np.concatenate(([0.0], np.cumsum(lagrangian)))

    plateaus: list[Plateau] = []
    j = 0
    while j < n:
        ks = np.arange(j + 1, n + 1)
        crossings = (C[ks] - C[j]) / (M[ks] - M[j])
        x_break = float(crossings.min())
        ties = minimize_F(data, x_break, t, Orientation.ORIENTED).branches
        k = ties[-1] if ties[-1] > j else int(ks[np.flatnonzero(crossings == x_break)[-1]])
        first, last = j, k - 1
        mass = math.fsum(masses[first : last + 1])
        velocity = math.fsum(m * u for m, u in zip(masses[first : last + 1], velocities[first : last + 1])) / mass
        plateaus.append(Plateau(x_break, mass, velocity, first, last))
        j = k
    return plateaus


def profile(
    data: GenPotData,
    t: float,
    xs: Sequence[float],
    orientation: Orientation = Orientation.TABLE,
) -> list[dict]:
    """Rows (x, v, y_star, y_star_upper) for CSV output."""
    rows = []
    for x in xs:
        ms = minimize_F(data, x, t, orientation)
        rows.append({"x": x, "v": ms.v, "y_star": ms.y_star, "y_star_upper": ms.y_star_upper})
    return rows


def branch_table(
    data: GenPotData,
    x: float,
    t: float,
    orientation: Orientation = Orientation.TABLE,
) -> list[dict]:
    values = branch_values(data, x, t, orientation)
    rows = []
    for j, value in enumerate(values):
        lo, hi = branch_bounds(data, j)
        rows.append({"branch": j, "y_lo": lo, "y_hi": hi, "F": float(value)})
    return rows
