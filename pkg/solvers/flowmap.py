"""
solvers/flowmap.py
------------------
Flow map, inverse-map partition of the line and mass-averaged reconstruction.

The forward map is the characteristic map y -> y + t u0(y). Clusters come from the
left-endpoint criterion alone: atom k opens a cluster at time t exactly when every
average of eta + t u0(eta) over atoms left of it is below every average over atoms
from it rightwards. The inverse partition then follows the mass-carrying flow:
points without mass stay where they are until a
cluster sweeps over them, and from then on they belong to that cluster. Every
initial point therefore ends up either untouched (regular, identity image) or in
the element of exactly one cluster (shock when the element is a nondegenerate
interval). Swept points that are not a cluster position have no preimage (gaps).
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from solvers.errors import VacuumError
from solvers.measures import AtomicMeasure, Continuity, StepFunction
from solvers.sticky import ParticleSystem

logger = logging.getLogger(__name__)


# =============================================================================
# INITIAL DATA
# =============================================================================

@dataclass(frozen=True)
class InitialData:
    """P0 together with the velocity field u0 (right-continuous step function)."""
    measure:  AtomicMeasure
    velocity: StepFunction

    @classmethod
    def from_particles(cls, sys: ParticleSystem, far_field: float = 0.0) -> "InitialData":
        """u0 = far_field left of the first atom and v_i on [x_i, x_{i+1})."""
        measure = AtomicMeasure.from_arrays(sys.positions, sys.masses)
        velocity = StepFunction(sys.positions, (far_field,) + sys.velocities, Continuity.RIGHT)
        return cls(measure, velocity)

    @property
    def atom_velocities(self) -> tuple[float, ...]:
        return tuple(self.velocity.evaluate(x) for x in self.measure.locations)


# =============================================================================
# FORWARD MAP
# =============================================================================

@dataclass(frozen=True)
class Branch:
    lo:     float
    hi:     float
    point:  bool        # True for the single breakpoint lo == hi
    offset: float       # phi_t(y) = y + offset on this branch


@dataclass(frozen=True)
class FlowMap:
    t:        float
    branches: tuple[Branch, ...]

    def __call__(self, y: float) -> float:
        for b in self.branches:
            if (b.point and y == b.lo) or (not b.point and b.lo < y < b.hi):
                return y + b.offset
        raise ValueError(f"No branch contains {y}")

    @property
    def is_identity(self) -> bool:
        return all(b.offset == 0.0 for b in self.branches)


def forward_map(u0: StepFunction, t: float) -> FlowMap:
    """phi_t(y) = y + t u0(y) as open-interval branches plus explicit breakpoint values."""
    if t < 0:
        raise ValueError(f"Negative time {t}")
    edges = (-math.inf,) + u0.breakpoints + (math.inf,)
    branches = []
    for i in range(len(edges) - 1):
        if i > 0:
            b = edges[i]
            branches.append(Branch(b, b, True, t * u0.evaluate(b)))
        branches.append(Branch(edges[i], edges[i + 1], False, t * u0.values[i]))
    return FlowMap(t, tuple(branches))


# =============================================================================
# PARTITION
# =============================================================================

@dataclass(frozen=True)
class Interval:
    lo:        float
    hi:        float
    lo_closed: bool = True
    hi_closed: bool = True

    def contains(self, x: float) -> bool:
        above = x > self.lo or (self.lo_closed and x == self.lo)
        below = x < self.hi or (self.hi_closed and x == self.hi)
        return above and below

    @property
    def empty(self) -> bool:
        return self.lo > self.hi or (self.lo == self.hi and not (self.lo_closed and self.hi_closed))

    @property
    def degenerate(self) -> bool:
        return self.lo == self.hi


@dataclass(frozen=True)
class PartitionElement:
    interval: Interval
    image:    Optional[float]          # None for regular pieces (identity image)
    mass:     float = 0.0
    velocity: float = 0.0
    members:  tuple[int, ...] = ()

    @property
    def regular(self) -> bool:
        return self.image is None


@dataclass(frozen=True)
class Partition:
    t:        float
    elements: tuple[PartitionElement, ...]
    gaps:     tuple[Interval, ...]

    @property
    def clusters(self) -> tuple[PartitionElement, ...]:
        return tuple(e for e in self.elements if not e.regular)

    def element_of(self, y: float) -> PartitionElement:
        for e in self.elements:
            if e.interval.contains(y):
                return e
        raise ValueError(f"{y} is not covered by the partition")

    def image(self, y: float) -> float:
        e = self.element_of(y)
        return y if e.regular else e.image

    def classify(self, x: float) -> str:
        for c in self.clusters:
            if c.image == x:
                return "regular" if c.interval.degenerate else "shock"
        if any(g.contains(x) for g in self.gaps):
            return "gap"
        return "regular"

    def preimage(self, x: float) -> Optional[Interval]:
        for c in self.clusters:
            if c.image == x:
                return c.interval
        if any(g.contains(x) for g in self.gaps):
            return None
        return Interval(x, x)


# =============================================================================
# CLUSTERS FROM THE LEFT-ENDPOINT CRITERION
# =============================================================================

TIE_TOL = 1e-12


def _averages(data: InitialData, members: Sequence[int], t: float) -> tuple[float, float]:
    """Mass averages of eta + t u0(eta) and of u0 over the given atoms."""
    xs, us = data.measure.locations, data.atom_velocities
    if len(members) == 1:
        i = members[0]
        return xs[i] + t * us[i], us[i]
    masses = [data.measure.masses[i] for i in members]
    total = math.fsum(masses)
    phi = math.fsum(m * (xs[i] + t * us[i]) for m, i in zip(masses, members)) / total
    u = math.fsum(m * us[i] for m, i in zip(masses, members)) / total
    return phi, u


def merge_times(data: InitialData) -> tuple[float, ...]:
    """
    Entry k - 1 is the first time atom k stops being a left endpoint.

    Each inequality of the left-endpoint criterion compares two averages that are
    affine in t, so it fails from an explicit time on; the earliest such time over
    all atom ranges [a, k) and [k, b] closes the boundary for good.
    """
    n = len(data.measure)
    times = []
    for k in range(1, n):
        earliest = math.inf
        for a in range(k):
            x_l, u_l = _averages(data, range(a, k), 0.0)
            for b in range(k, n):
                x_r, u_r = _averages(data, range(k, b + 1), 0.0)
                if u_l > u_r:
                    earliest = min(earliest, (x_r - x_l) / (u_l - u_r))
        times.append(earliest)
    return tuple(times)


def _blocks(n: int, closing: Sequence[float], t: float) -> list[tuple[int, int]]:
    """Atom index ranges [first, last] of the clusters at time t."""
    slack = TIE_TOL * (1.0 + abs(t))
    blocks, first = [], 0
    for k in range(1, n):
        if t < closing[k - 1] - slack:
            blocks.append((first, k - 1))
            first = k
    blocks.append((first, n - 1))
    return blocks


@dataclass(frozen=True)
class Cluster:
    first:    int
    last:     int
    mass:     float
    position: float
    velocity: float

    @property
    def members(self) -> tuple[int, ...]:
        return tuple(range(self.first, self.last + 1))


def clusters_at(data: InitialData, t: float, closing: Optional[Sequence[float]] = None) -> list[Cluster]:
    """Clusters at time t: atoms between consecutive left endpoints, mass-averaged."""
    if t < 0:
        raise ValueError(f"Negative time {t}")
    n = len(data.measure)
    if not n:
        return []
    closing = merge_times(data) if closing is None else closing
    out = []
    for first, last in _blocks(n, closing, t):
        members = range(first, last + 1)
        position, velocity = _averages(data, members, t)
        mass = math.fsum(data.measure.masses[first : last + 1])
        out.append(Cluster(first, last, mass, position, velocity))
    return out


def _trajectory_vertices(data: InitialData, closing: Sequence[float], index: int, t: float) -> list[tuple[float, float]]:
    """Piecewise-linear path of atom `index` on [0, t]; kinks only at merge times."""
    kinks = sorted({s for s in closing if 0.0 < s < t})
    vertices = []
    for s in [0.0] + kinks + [t]:
        block = next(c for c in clusters_at(data, s, closing) if c.first <= index <= c.last)
        vertices.append((s, block.position))
    return vertices


def _running_extreme(vertices: list[tuple[float, float]], sign: float) -> list[tuple[float, float]]:
    """Vertices of s -> max (sign=+1) or min (sign=-1) of the trajectory over [0, s]."""
    s0, x0 = vertices[0]
    out = [(s0, x0)]
    best = sign * x0
    for (sa, xa), (sb, xb) in zip(vertices, vertices[1:]):
        if sign * xb > best:
            if sign * xa < best:
                sc = sa + (best - sign * xa) / (sign * xb - sign * xa) * (sb - sa)
                out.append((sc, sign * best))
            out.append((sb, xb))
            best = sign * xb
        else:
            out.append((sb, sign * best))
    return out


def _value_at(vertices: list[tuple[float, float]], s: float) -> float:
    times = [v[0] for v in vertices]
    values = [v[1] for v in vertices]
    return float(np.interp(s, times, values))


def _first_arrival(vertices: list[tuple[float, float]], level: float, sign: float) -> float:
    """First time the monotone frontier reaches `level`."""
    s0, x0 = vertices[0]
    if sign * x0 >= sign * level:
        return s0
    for (sa, xa), (sb, xb) in zip(vertices, vertices[1:]):
        if sign * xb >= sign * level:
            return sa + (level - xa) / (xb - xa) * (sb - sa)
    return math.inf


def _split(right_front: list, left_front: list) -> tuple[float, bool]:
    """
    Meeting point of a rightward frontier (running max of the left atom) and a
    leftward one (running min of the right atom), and whether the right cluster
    owns it (it arrived there first).
    """
    times = sorted({v[0] for v in right_front} | {v[0] for v in left_front})
    gaps = [_value_at(right_front, s) - _value_at(left_front, s) for s in times]
    k = next(i for i, d in enumerate(gaps) if d >= 0)
    if k == 0:
        s_star = times[0]
    else:
        sa, sb, da, db = times[k - 1], times[k], gaps[k - 1], gaps[k]
        s_star = sa + (0.0 - da) / (db - da) * (sb - sa)
    y_star = _value_at(left_front, s_star)
    right_first = _first_arrival(left_front, y_star, -1.0) < _first_arrival(right_front, y_star, 1.0)
    return y_star, right_first


def _subtract_points(interval: Interval, points: Sequence[float]) -> list[Interval]:
    pieces = [interval]
    for p in sorted(points):
        nxt = []
        for piece in pieces:
            if piece.contains(p):
                nxt.append(Interval(piece.lo, p, piece.lo_closed, False))
                nxt.append(Interval(p, piece.hi, False, piece.hi_closed))
            else:
                nxt.append(piece)
        pieces = nxt
    return [piece for piece in pieces if not piece.empty]


def inverse_partition(data: InitialData, t: float) -> Partition:
    if t < 0:
        raise ValueError(f"Negative time {t}")
    if not len(data.measure):
        return Partition(t, (PartitionElement(Interval(-math.inf, math.inf, False, False), None),), ())

    n = len(data.measure)
    closing = merge_times(data)
    clusters = clusters_at(data, t, closing)
    tracks = [_trajectory_vertices(data, closing, i, t) for i in range(n)]
    maxima = [_running_extreme(v, 1.0) for v in tracks]
    minima = [_running_extreme(v, -1.0) for v in tracks]

    # boundary between atom i and i+1 when they sit in different clusters
    right_edge: dict[int, tuple[float, bool]] = {}
    left_edge: dict[int, tuple[float, bool]] = {}
    for i in range(n - 1):
        reach_right = _value_at(maxima[i], t)
        reach_left = _value_at(minima[i + 1], t)
        if reach_right < reach_left:
            right_edge[i] = (reach_right, True)
            left_edge[i + 1] = (reach_left, True)
        else:
            y_star, right_first = _split(maxima[i], minima[i + 1])
            right_edge[i] = (y_star, not right_first)
            left_edge[i + 1] = (y_star, right_first)
    left_edge[0] = (_value_at(minima[0], t), True)
    right_edge[n - 1] = (_value_at(maxima[n - 1], t), True)

    elements: list[PartitionElement] = []
    previous_hi = Interval(-math.inf, -math.inf, False, False)
    for cluster in clusters:
        lo, lo_closed = left_edge[cluster.first]
        hi, hi_closed = right_edge[cluster.last]
        regular = Interval(previous_hi.hi, lo, not previous_hi.hi_closed, not lo_closed)
        if not regular.empty:
            elements.append(PartitionElement(regular, None))
        element = Interval(lo, hi, lo_closed, hi_closed)
        elements.append(PartitionElement(
            element, cluster.position, cluster.mass, cluster.velocity, cluster.members,
        ))
        previous_hi = element
    tail = Interval(previous_hi.hi, math.inf, not previous_hi.hi_closed, False)
    if not tail.empty:
        elements.append(PartitionElement(tail, None))

    images = [c.position for c in clusters]
    gaps: list[Interval] = []
    for e in elements:
        if not e.regular:
            gaps.extend(_subtract_points(e.interval, images))
    logger.debug("partition at t=%.6g: %d clusters, %d gaps", t, len(clusters), len(gaps))
    return Partition(t, tuple(elements), tuple(gaps))


# =============================================================================
# RECONSTRUCTION
# =============================================================================

def gvp_reconstruct(data: InitialData, t: float, y: float) -> tuple[float, float]:
    """Mass-averaged position and velocity of the element containing y."""
    element = inverse_partition(data, t).element_of(y)
    if element.regular:
        raise VacuumError(f"The element containing y={y} at t={t} carries no mass")
    return _averages(data, element.members, t)


def left_endpoint_test(data: InitialData, t: float, y: float) -> bool:
    """
    Strict inequality between the averages of eta + t u0(eta) over [y-, y) and
    [y, y+], for every choice of atom-delimited y- < y <= y+. Ties within
    TIE_TOL count as a failure, so a collision at exactly t has already merged.
    """
    if t <= 0:
        raise ValueError(f"left_endpoint_test needs t > 0, got {t}")
    xs = data.measure.locations
    left = [i for i, x in enumerate(xs) if x < y]
    right = [i for i, x in enumerate(xs) if x >= y]
    if not left or not right:
        return True
    for a in left:
        left_avg, _ = _averages(data, [i for i in left if i >= a], t)
        for b in right:
            right_avg, _ = _averages(data, [i for i in right if i <= b], t)
            if not left_avg < right_avg - TIE_TOL * (1.0 + abs(right_avg)):
                return False
    return True


def assert_bounded_velocity(u0: StepFunction) -> float:
    """Step data are bounded; returns the sup norm and rejects non-finite values."""
    norm = u0.sup_norm()
    if not math.isfinite(norm):
        raise ValueError("Initial velocity must be bounded")
    return norm


# =============================================================================
# WEAK FORMULATION
# =============================================================================

@dataclass(frozen=True)
class BumpFunction:
    """(1 - ((x - center)/radius)^2)^power inside the support, 0 outside."""
    center: float
    radius: float
    power:  int = 3

    def __call__(self, x: float) -> float:
        z = (x - self.center) / self.radius
        return (1.0 - z * z) ** self.power if abs(z) < 1.0 else 0.0

    def derivative(self, x: float) -> float:
        z = (x - self.center) / self.radius
        if abs(z) >= 1.0:
            return 0.0
        return -2.0 * self.power * z * (1.0 - z * z) ** (self.power - 1) / self.radius


def _slab_integral(fn, x0: float, v: float, ta: float, tb: float, edges: Sequence[float], nodes: int) -> float:
    """Integral over [ta, tb] of fn(x0 + v (tau - ta)), split where the path crosses an edge."""
    cuts = {ta, tb}
    if v != 0.0:
        for e in edges:
            tau = ta + (e - x0) / v
            if ta < tau < tb:
                cuts.add(tau)
    cuts = sorted(cuts)
    z, w = np.polynomial.legendre.leggauss(nodes)
    total = []
    for a, b in zip(cuts, cuts[1:]):
        half, mid = 0.5 * (b - a), 0.5 * (b + a)
        total.append(half * math.fsum(
            wi * fn(x0 + v * (mid + half * zi - ta)) for zi, wi in zip(z, w)
        ))
    return math.fsum(total)


def weak_form_residual(
    data: InitialData,
    test_functions: Sequence[BumpFunction],
    t1: float,
    t2: float,
    nodes: int = 8,
) -> float:
    """
    Max over test functions of the mass and momentum weak-form residuals

        int f dP_t2 - int f dP_t1 - int_t1^t2 int f' u dP dtau
        int f dI_t2 - int f dI_t1 - int_t1^t2 int f' u dI dtau
    """
    if not 0 <= t1 < t2:
        raise ValueError(f"Need 0 <= t1 < t2, got {t1}, {t2}")
    closing = merge_times(data)
    at_t1 = clusters_at(data, t1, closing)
    at_t2 = clusters_at(data, t2, closing)
    cuts = [t1] + sorted({s for s in closing if t1 < s < t2}) + [t2]
    # clusters are fixed on each slab between consecutive merge times
    slabs = [(ta, tb, clusters_at(data, ta, closing)) for ta, tb in zip(cuts, cuts[1:])]

    worst = 0.0
    for f in test_functions:
        edges = (f.center - f.radius, f.center + f.radius)
        mass_flux, momentum_flux = [], []
        for ta, tb, clusters in slabs:
            for c in clusters:
                integral = _slab_integral(f.derivative, c.position, c.velocity, ta, tb, edges, nodes)
                mass_flux.append(c.mass * c.velocity * integral)
                momentum_flux.append(c.mass * c.velocity ** 2 * integral)

        mass_residual = (
            math.fsum(p.mass * f(p.position) for p in at_t2)
            - math.fsum(p.mass * f(p.position) for p in at_t1)
            - math.fsum(mass_flux)
        )
        momentum_residual = (
            math.fsum(p.mass * p.velocity * f(p.position) for p in at_t2)
            - math.fsum(p.mass * p.velocity * f(p.position) for p in at_t1)
            - math.fsum(momentum_flux)
        )
        worst = max(worst, abs(mass_residual), abs(momentum_residual))
    return worst
