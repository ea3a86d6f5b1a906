"""
solvers/measures.py
-------------------
Foundational numerics for the exact solvers.

Types:
    AtomicMeasure    finite list of (location, mass) atoms
    StepFunction     piecewise constant function with a declared continuity side
    PiecewiseLinear  continuous function given by its knots on a closed interval

Operations:
    stieltjes_integral   sum of an integrand against the jumps of m0
    legendre_transform   convex conjugate of a convex piecewise-linear function
    lower_convex_hull    greatest convex minorant (monotone chain over knots)
    positive_part_sum    x -> sum c_i (x - a_i)_+

All types are frozen dataclasses; operations are pure functions.
"""

import logging
import math
from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from solvers.errors import NonConvexError

logger = logging.getLogger(__name__)


class Continuity(str, Enum):
    LEFT = "left"
    RIGHT = "right"


class Orientation(str, Enum):
    """Atom-inclusion rule for the integral from 0+0 to y-0."""
    TABLE = "table"        # (0, y) for y > 0, [y, 0) for y < 0, unsigned
    ORIENTED = "oriented"  # sum over eta < y minus sum over eta <= 0


# =============================================================================
# ATOMIC MEASURE
# =============================================================================

@dataclass(frozen=True)
class Atom:
    location: float
    mass: float


@dataclass(frozen=True)
class AtomicMeasure:
    atoms: tuple[Atom, ...] = ()

    def __post_init__(self):
        atoms = tuple(a if isinstance(a, Atom) else Atom(float(a[0]), float(a[1])) for a in self.atoms)
        object.__setattr__(self, "atoms", atoms)
        for i, atom in enumerate(atoms):
            if not math.isfinite(atom.location):
                raise ValueError(f"Atom {i} has non-finite location {atom.location}")
            if not atom.mass > 0 or not math.isfinite(atom.mass):
                raise ValueError(f"Atom {i} at {atom.location} has non-positive mass {atom.mass}")
            if i > 0 and atom.location <= atoms[i - 1].location:
                raise ValueError(
                    f"Atom locations must be strictly increasing: "
                    f"{atoms[i - 1].location} then {atom.location}"
                )

    @classmethod
    def from_arrays(cls, locations: Sequence[float], masses: Sequence[float]) -> "AtomicMeasure":
        if len(locations) != len(masses):
            raise ValueError(f"{len(locations)} locations but {len(masses)} masses")
        return cls(tuple(Atom(float(x), float(m)) for x, m in zip(locations, masses)))

    def __len__(self) -> int:
        return len(self.atoms)

    @property
    def locations(self) -> tuple[float, ...]:
        return tuple(a.location for a in self.atoms)

    @property
    def masses(self) -> tuple[float, ...]:
        return tuple(a.mass for a in self.atoms)

    @property
    def total_mass(self) -> float:
        return math.fsum(self.masses)

    @property
    def first_moment(self) -> float:
        return math.fsum(a.location * a.mass for a in self.atoms)

    def cumulative_mass(self, x: float) -> float:
        """M(x) = mass of (-inf, x], right-continuous."""
        k = bisect_right(self.locations, x)
        return math.fsum(self.masses[:k])

    def signed_mass_function(self) -> "StepFunction":
        """
        m0(x) = mass of [0, x) for x > 0 and -(mass of [x, 0)) for x < 0.

        Left-continuous, jumps by each atom's mass at its location.
        """
        locations = self.locations
        negative = math.fsum(a.mass for a in self.atoms if a.location < 0)
        values = [-negative]
        for atom in self.atoms:
            values.append(values[-1] + atom.mass)
        return StepFunction(locations, tuple(values), Continuity.LEFT)


# =============================================================================
# STEP FUNCTION
# =============================================================================

@dataclass(frozen=True)
class StepFunction:
    breakpoints: tuple[float, ...]
    values: tuple[float, ...]
    continuity: Continuity = Continuity.RIGHT
    support: tuple[float, float] = (-math.inf, math.inf)

    def __post_init__(self):
        bps = tuple(float(b) for b in self.breakpoints)
        vals = tuple(float(v) for v in self.values)
        object.__setattr__(self, "breakpoints", bps)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "continuity", Continuity(self.continuity))
        if len(vals) != len(bps) + 1:
            raise ValueError(f"StepFunction needs {len(bps) + 1} values, got {len(vals)}")
        for i in range(1, len(bps)):
            if bps[i] <= bps[i - 1]:
                raise ValueError(f"Breakpoints must be strictly increasing: {bps[i - 1]} then {bps[i]}")
        lo, hi = self.support
        if lo > hi:
            raise ValueError(f"Empty support ({lo}, {hi})")

    @classmethod
    def constant(cls, value: float, support: tuple[float, float] = (-math.inf, math.inf)) -> "StepFunction":
        return cls((), (value,), Continuity.RIGHT, support)

    def _index(self, x: float) -> int:
        if self.continuity is Continuity.RIGHT:
            return bisect_right(self.breakpoints, x)
        return bisect_left(self.breakpoints, x)

    def evaluate(self, x: float) -> float:
        return self.values[self._index(x)]

    __call__ = evaluate

    def left_limit(self, x: float) -> float:
        return self.values[bisect_left(self.breakpoints, x)]

    def right_limit(self, x: float) -> float:
        return self.values[bisect_right(self.breakpoints, x)]

    def jumps(self) -> list[tuple[float, float]]:
        """(breakpoint, right value - left value) for every breakpoint with a nonzero jump."""
        out = []
        for i, b in enumerate(self.breakpoints):
            delta = self.values[i + 1] - self.values[i]
            if delta != 0.0:
                out.append((b, delta))
        return out

    def sup_norm(self) -> float:
        return max(abs(v) for v in self.values)


# =============================================================================
# PIECEWISE LINEAR
# =============================================================================

@dataclass(frozen=True)
class PiecewiseLinear:
    knots: tuple[tuple[float, float], ...]

    def __post_init__(self):
        knots = tuple((float(m), float(v)) for m, v in self.knots)
        object.__setattr__(self, "knots", knots)
        if not knots:
            raise ValueError("PiecewiseLinear needs at least one knot")
        for i in range(1, len(knots)):
            if knots[i][0] <= knots[i - 1][0]:
                raise ValueError(
                    f"Knot abscissae must be strictly increasing: {knots[i - 1][0]} then {knots[i][0]}"
                )

    @classmethod
    def from_function(cls, fn: Callable[[float], float], abscissae: Iterable[float]) -> "PiecewiseLinear":
        xs = sorted(set(float(x) for x in abscissae))
        return cls(tuple((x, fn(x)) for x in xs))

    @property
    def domain(self) -> tuple[float, float]:
        return self.knots[0][0], self.knots[-1][0]

    @property
    def abscissae(self) -> tuple[float, ...]:
        return tuple(k[0] for k in self.knots)

    @property
    def ordinates(self) -> tuple[float, ...]:
        return tuple(k[1] for k in self.knots)

    def slopes(self) -> tuple[float, ...]:
        return tuple(
            (v1 - v0) / (m1 - m0)
            for (m0, v0), (m1, v1) in zip(self.knots, self.knots[1:])
        )

    def is_convex(self, tol: float = 1e-12) -> bool:
        s = self.slopes()
        return all(s[i + 1] >= s[i] - tol * (1.0 + abs(s[i])) for i in range(len(s) - 1))

    def evaluate(self, m: float) -> float:
        lo, hi = self.domain
        if m < lo or m > hi:
            raise ValueError(f"{m} outside domain [{lo}, {hi}]")
        xs = self.abscissae
        k = bisect_left(xs, m)
        if xs[k] == m:
            return self.knots[k][1]
        (m0, v0), (m1, v1) = self.knots[k - 1], self.knots[k]
        return v0 + (v1 - v0) * (m - m0) / (m1 - m0)

    __call__ = evaluate

    def right_slope(self, m: float) -> float:
        """Slope of the piece to the right of m (last slope at the right end)."""
        s = self.slopes()
        if not s:
            return 0.0
        k = bisect_right(self.abscissae, m) - 1
        return s[min(max(k, 0), len(s) - 1)]

    def left_slope(self, m: float) -> float:
        s = self.slopes()
        if not s:
            return 0.0
        k = bisect_left(self.abscissae, m) - 1
        return s[min(max(k, 0), len(s) - 1)]

    def add(self, other: "PiecewiseLinear", scale: float = 1.0) -> "PiecewiseLinear":
        """self + scale * other on the union of both knot sets (domains must match)."""
        if self.domain != other.domain:
            raise ValueError(f"Domains differ: {self.domain} vs {other.domain}")
        xs = sorted(set(self.abscissae) | set(other.abscissae))
        return PiecewiseLinear(tuple((x, self.evaluate(x) + scale * other.evaluate(x)) for x in xs))

    def sample(self, points: int = 201) -> tuple[np.ndarray, np.ndarray]:
        lo, hi = self.domain
        xs = np.linspace(lo, hi, points)
        return xs, np.interp(xs, self.abscissae, self.ordinates)


# =============================================================================
# OPERATIONS
# =============================================================================

def _included(eta: float, y: float, orientation: Orientation) -> float:
    """Sign with which an atom at eta enters the integral up to y (0 when excluded)."""
    if orientation is Orientation.TABLE:
        if y > 0:
            return 1.0 if 0 < eta < y else 0.0
        if y < 0:
            return 1.0 if y <= eta < 0 else 0.0
        return 0.0
    if y > 0:
        return 1.0 if 0 < eta < y else 0.0
    return -1.0 if y <= eta <= 0 else 0.0


def stieltjes_integral(
    g: StepFunction,
    m0: StepFunction,
    y: float,
    x: float,
    t: float,
    orientation: Orientation = Orientation.TABLE,
) -> float:
    """
    Integral of (t*g(eta) + eta - x) dm0(eta) from 0+0 to y-0.

    m0 is a cumulative mass function; its jumps are the atoms. g is evaluated at
    the atom itself. Empty ranges give 0.
    """
    orientation = Orientation(orientation)
    terms = []
    for eta, mass in m0.jumps():
        sign = _included(eta, y, orientation)
        if sign:
            terms.append(sign * (t * g.evaluate(eta) + eta - x) * mass)
    return math.fsum(terms)


def legendre_transform(psi: PiecewiseLinear, tol: float = 1e-12) -> PiecewiseLinear:
    """
    Phi(m) = sup_x { x m - psi(x) } on the slope range of psi.

    For m equal to a slope of psi the supremum is reached on the whole segment with
    that slope, so Phi(m) = x_r m - psi(x_r) with x_r its right end. Collinear
    segments are merged first; the result has one knot per distinct slope.

    Outside the slope range the dual is not represented, so the end knots of psi
    leave no slope behind: transforming twice gives psi back on its interior
    knots only, psi.knots[1:-1] once collinear knots are dropped.
    """
    if len(psi.knots) < 2:
        raise ValueError("legendre_transform needs at least two knots")
    if not psi.is_convex(tol):
        raise NonConvexError("legendre_transform requires a convex input; take the lower hull first")

    slopes = psi.slopes()
    groups: list[tuple[float, int]] = []  # (slope, index of right knot)
    for j, s in enumerate(slopes):
        if groups and abs(s - groups[-1][0]) <= tol * (1.0 + abs(s)):
            groups[-1] = (groups[-1][0], j + 1)
        else:
            groups.append((s, j + 1))

    knots = []
    for s, right in groups:
        xr, vr = psi.knots[right]
        knots.append((s, xr * s - vr))
    return PiecewiseLinear(tuple(knots))


def _cross(o: tuple[float, float], a: tuple[float, float], b: tuple[float, float]) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def lower_convex_hull(f: PiecewiseLinear) -> PiecewiseLinear:
    """Greatest convex minorant of f; knots are a subset of f's knots."""
    hull: list[tuple[float, float]] = []
    for p in f.knots:
        while len(hull) >= 2 and _cross(hull[-2], hull[-1], p) <= 0:
            hull.pop()
        hull.append(p)
    return PiecewiseLinear(tuple(hull))


def positive_part_sum(
    terms: Sequence[tuple[float, float]],
    domain: Optional[tuple[float, float]] = None,
) -> PiecewiseLinear:
    """x -> sum of c * (x - a)_+ over (c, a) in terms."""
    thresholds = sorted({float(a) for _, a in terms})
    if domain is None:
        domain = (thresholds[0] - 1.0, thresholds[-1] + 1.0) if thresholds else (-1.0, 1.0)
    lo, hi = domain

    def value(x: float) -> float:
        return math.fsum(c * max(x - a, 0.0) for c, a in terms)

    xs = [lo] + [a for a in thresholds if lo < a < hi] + [hi]
    return PiecewiseLinear.from_function(value, xs)
