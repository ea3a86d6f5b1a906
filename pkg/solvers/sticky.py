"""
solvers/sticky.py
-----------------
Event-driven exact simulation of sticky particles.

Particles move ballistically and merge on contact, conserving mass and momentum.
Meeting times come from closed-form linear solves; there is no time stepping.

    sys = ParticleSystem.from_arrays(masses, positions, velocities)
    final, history = evolve_with_history(sys, 2.0)
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Iterator, Optional, Sequence

from solvers.measures import PiecewiseLinear

logger = logging.getLogger(__name__)

# Relative tolerance used to group meetings that happen at the same instant.
SIMULTANEITY_TOL = 1e-12


# =============================================================================
# DOMAIN TYPES
# =============================================================================

@dataclass(frozen=True)
class Particle:
    mass:       float
    position:   float
    velocity:   float
    cluster_id: int = 0
    members:    tuple[int, ...] = ()    # indices of the original particles, contiguous

    @property
    def momentum(self) -> float:
        return self.mass * self.velocity


@dataclass(frozen=True)
class ParticleSystem:
    particles: tuple[Particle, ...]
    time:      float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "particles", tuple(self.particles))
        for i, p in enumerate(self.particles):
            if not p.mass > 0:
                raise ValueError(f"Particle {i} has non-positive mass {p.mass}")
            if i > 0 and p.position <= self.particles[i - 1].position:
                raise ValueError(
                    f"Positions must be strictly increasing at t={self.time}: "
                    f"{self.particles[i - 1].position} then {p.position}"
                )
        if self.time < 0:
            raise ValueError(f"Negative time {self.time}")

    @classmethod
    def from_arrays(
        cls,
        masses: Sequence[float],
        positions: Sequence[float],
        velocities: Sequence[float],
        time: float = 0.0,
    ) -> "ParticleSystem":
        if not len(masses) == len(positions) == len(velocities):
            raise ValueError("masses, positions and velocities must have the same length")
        return cls(
            tuple(
                Particle(float(m), float(x), float(v), i, (i,))
                for i, (m, x, v) in enumerate(zip(masses, positions, velocities))
            ),
            float(time),
        )

    def __len__(self) -> int:
        return len(self.particles)

    @property
    def masses(self) -> tuple[float, ...]:
        return tuple(p.mass for p in self.particles)

    @property
    def positions(self) -> tuple[float, ...]:
        return tuple(p.position for p in self.particles)

    @property
    def velocities(self) -> tuple[float, ...]:
        return tuple(p.velocity for p in self.particles)

    @property
    def total_mass(self) -> float:
        return math.fsum(self.masses)

    @property
    def momentum(self) -> float:
        return math.fsum(p.momentum for p in self.particles)

    @property
    def kinetic_energy(self) -> float:
        return math.fsum(0.5 * p.mass * p.velocity ** 2 for p in self.particles)

    def cumulative_masses(self) -> tuple[float, ...]:
        """M_1, ..., M_n."""
        out, acc = [], []
        for m in self.masses:
            acc.append(m)
            out.append(math.fsum(acc))
        return tuple(out)

    def next_cluster_id(self) -> int:
        return max((p.cluster_id for p in self.particles), default=-1) + 1

    @classmethod
    def _unchecked(cls, particles: Sequence[Particle], time: float) -> "ParticleSystem":
        # Mid-event states: particles meeting at this instant share a position
        sys = object.__new__(cls)
        object.__setattr__(sys, "particles", tuple(particles))
        object.__setattr__(sys, "time", time)
        return sys

    def drifted(self, t: float, validate: bool = True) -> "ParticleSystem":
        """Ballistic positions at t, ignoring collisions."""
        dt = t - self.time
        moved = tuple(
            Particle(p.mass, p.position + p.velocity * dt, p.velocity, p.cluster_id, p.members)
            for p in self.particles
        )
        return ParticleSystem(moved, t) if validate else ParticleSystem._unchecked(moved, t)


@dataclass(frozen=True)
class CollisionEvent:
    time:     float
    first:    int       # index range [first, last] of the particles that meet
    last:     int
    position: float

    @property
    def indices(self) -> range:
        return range(self.first, self.last + 1)


@dataclass(frozen=True)
class Segment:
    """One straight piece of a cluster world-line."""
    cluster_id: int
    members:    tuple[int, ...]
    mass:       float
    velocity:   float
    t0:         float
    x0:         float
    t1:         float

    @property
    def x1(self) -> float:
        return self.x0 + self.velocity * (self.t1 - self.t0)

    def position(self, t: float) -> float:
        return self.x0 + self.velocity * (t - self.t0)


@dataclass
class History:
    initial:  ParticleSystem
    segments: list[Segment] = field(default_factory=list)
    events:   list[tuple[CollisionEvent, Particle]] = field(default_factory=list)

    def to_rows(self) -> Iterator[dict]:
        """World-line rows (t, x, mass, velocity, cluster_id), two per segment."""
        for s in self.segments:
            yield {"t": s.t0, "x": s.x0, "mass": s.mass, "velocity": s.velocity, "cluster_id": s.cluster_id}
            yield {"t": s.t1, "x": s.x1, "mass": s.mass, "velocity": s.velocity, "cluster_id": s.cluster_id}

    def collision_rows(self) -> Iterator[dict]:
        for ev, merged in self.events:
            yield {
                "t": ev.time,
                "x": ev.position,
                "mass": merged.mass,
                "velocity": merged.velocity,
                "cluster_id": merged.cluster_id,
                "members": " ".join(str(i) for i in merged.members),
            }

    def mass_bounds(self, members: tuple[int, ...]) -> tuple[float, float]:
        """Cumulative initial mass to the left of and through the member range."""
        masses = self.initial.masses
        lo = math.fsum(masses[: members[0]])
        return lo, lo + math.fsum(masses[members[0] : members[-1] + 1])


# =============================================================================
# OPERATIONS
# =============================================================================

def _meeting_time(left: Particle, right: Particle, now: float) -> Optional[float]:
    closing = left.velocity - right.velocity
    if closing <= 0:
        return None
    return now + max(right.position - left.position, 0.0) / closing


def next_collision(sys: ParticleSystem) -> Optional[CollisionEvent]:
    """Earliest meeting of adjacent particles, simultaneous neighbours grouped."""
    times = [
        _meeting_time(a, b, sys.time)
        for a, b in zip(sys.particles, sys.particles[1:])
    ]
    finite = [tau for tau in times if tau is not None]
    if not finite:
        return None

    earliest = min(finite)
    slack = SIMULTANEITY_TOL * (1.0 + abs(earliest))

    def hits(i: int) -> bool:
        return times[i] is not None and times[i] <= earliest + slack

    first = next(i for i in range(len(times)) if hits(i))
    last = first
    while last < len(times) and hits(last):
        last += 1

    p = sys.particles[first]
    position = p.position + p.velocity * (earliest - sys.time)
    return CollisionEvent(earliest, first, last, position)


def merge(sys: ParticleSystem, ev: CollisionEvent) -> ParticleSystem:
    """Replace the particles in ev's index range by one cluster at the meeting point."""
    if ev.first == ev.last:
        return sys
    moved = sys.drifted(ev.time, validate=False).particles
    group = moved[ev.first : ev.last + 1]
    mass = math.fsum(p.mass for p in group)
    velocity = math.fsum(p.momentum for p in group) / mass
    members = tuple(i for p in group for i in p.members)
    cluster = Particle(mass, ev.position, velocity, sys.next_cluster_id(), members)

    energy_before = math.fsum(0.5 * p.mass * p.velocity ** 2 for p in group)
    logger.debug(
        "merge t=%.6g x=%.6g members=%s kinetic energy %.6g -> %.6g",
        ev.time, ev.position, members, energy_before, 0.5 * mass * velocity ** 2,
    )
    # Another group may still be coincident at ev.time; it is merged by the next zero-delay event
    return ParticleSystem._unchecked(moved[: ev.first] + (cluster,) + moved[ev.last + 1 :], ev.time)


def evolve_with_history(sys: ParticleSystem, t: float) -> tuple[ParticleSystem, History]:
    """Advance through every collision up to t, recording world-line segments."""
    if t < sys.time:
        raise ValueError(f"Cannot evolve backwards: t={t} < system time {sys.time}")

    history = History(initial=sys)
    starts = {p.cluster_id: (sys.time, p.position) for p in sys.particles}
    slack = SIMULTANEITY_TOL * (1.0 + abs(t))

    def close(p: Particle, t_end: float) -> None:
        t0, x0 = starts.pop(p.cluster_id)
        history.segments.append(Segment(p.cluster_id, p.members, p.mass, p.velocity, t0, x0, t_end))

    current = sys
    while True:
        ev = next_collision(current)
        if ev is None or ev.time > t + slack:
            break
        for i in ev.indices:
            close(current.particles[i], ev.time)
        current = merge(current, ev)
        cluster = current.particles[ev.first]
        starts[cluster.cluster_id] = (ev.time, cluster.position)
        history.events.append((ev, cluster))
        logger.debug("collision at t=%.17g x=%.17g -> cluster %d", ev.time, ev.position, cluster.cluster_id)

    final = current.drifted(t) if current.time != t else current
    for p in current.particles:
        close(p, final.time)
    return final, history


def evolve(sys: ParticleSystem, t: float) -> ParticleSystem:
    return evolve_with_history(sys, t)[0]


def rankine_hugoniot_residual(history: History, flux: PiecewiseLinear) -> float:
    """Max |segment slope - (A(M_r) - A(M_l)) / (M_r - M_l)| over recorded segments."""
    worst = 0.0
    for s in history.segments:
        m_lo, m_hi = history.mass_bounds(s.members)
        sigma = (flux.evaluate(m_hi) - flux.evaluate(m_lo)) / (m_hi - m_lo)
        worst = max(worst, abs(s.velocity - sigma))
    return worst


def trajectory(history: History, index: int, t: float) -> float:
    """Position at time t of original particle `index`."""
    for s in history.segments:
        if index in s.members and s.t0 <= t <= s.t1:
            return s.position(t)
    raise ValueError(f"No recorded segment for particle {index} at t={t}")
