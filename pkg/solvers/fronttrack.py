"""
solvers/fronttrack.py
---------------------
Exact front tracking for u_t + f(u)_x = 0 with f continuous and piecewise linear
on a finite state set u_1 < ... < u_M.

Solutions stay piecewise constant with values in the state set. Each
discontinuity (front) moves at its Rankine-Hugoniot speed; when fronts meet,
the group is replaced by the solution of the Riemann problem between its
outermost states.

    flux = FluxTable.burgers(4)
    fl = FrontList.from_blocks(flux, breakpoints=(-1.0, 0.0, 1.0), states=(3, 2, 1, 0))
    later = evolve(fl, flux, 2.0)
    later.sample(3.0)       # (3, 0)

States are indices into the table, never raw values.
"""

import heapq
import itertools
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Iterator, Optional, Sequence

from solvers.errors import NonConvexError
from solvers.sticky import ParticleSystem

logger = logging.getLogger(__name__)

# Fronts closer than this (relative) at one instant are treated as one collision.
COINCIDENCE_TOL = 1e-12


# =============================================================================
# FLUX TABLE
# =============================================================================

@dataclass(frozen=True)
class FluxTable:
    states: tuple[float, ...]
    values: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(float(u) for u in self.states))
        object.__setattr__(self, "values", tuple(float(f) for f in self.values))
        if not self.states:
            raise ValueError("FluxTable needs at least one state")
        if len(self.states) != len(self.values):
            raise ValueError(
                f"FluxTable has {len(self.states)} states but {len(self.values)} values"
            )
        for k, (a, b) in enumerate(zip(self.states, self.states[1:])):
            if not b > a:
                raise ValueError(f"States must be strictly increasing: u[{k}]={a}, u[{k + 1}]={b}")

    @classmethod
    def burgers(cls, n: int) -> "FluxTable":
        """States 0..n-1 with f(u) = u^2 / 2."""
        if n < 1:
            raise ValueError(f"burgers table needs n >= 1, got {n}")
        return cls(tuple(range(n)), tuple(k * k / 2 for k in range(n)))

    @classmethod
    def sampled(cls, states: Sequence[float], f: Callable[[float], float]) -> "FluxTable":
        return cls(tuple(states), tuple(f(u) for u in states))

    def __len__(self) -> int:
        return len(self.states)

    @property
    def slopes(self) -> tuple[float, ...]:
        """c_k between states k and k+1."""
        return tuple(
            (f1 - f0) / (u1 - u0)
            for (u0, f0), (u1, f1) in zip(
                zip(self.states, self.values), zip(self.states[1:], self.values[1:])
            )
        )

    def is_convex(self, tol: float = 1e-12) -> bool:
        c = self.slopes
        return all(b >= a - tol * (1.0 + abs(a)) for a, b in zip(c, c[1:]))

    @property
    def convex(self) -> bool:
        return self.is_convex()

    def check_index(self, k: int) -> int:
        if not 0 <= k < len(self.states):
            raise ValueError(f"State index {k} outside the table (0..{len(self.states) - 1})")
        return int(k)

    def index_of(self, u: float) -> int:
        try:
            return self.states.index(float(u))
        except ValueError:
            raise ValueError(f"Value {u} is not a table state. Available: {list(self.states)}") from None

    def speed(self, left: int, right: int) -> float:
        """Rankine-Hugoniot speed between two distinct states."""
        if left == right:
            raise ValueError(f"No front between equal states {left}")
        return (self.values[left] - self.values[right]) / (self.states[left] - self.states[right])


# =============================================================================
# FRONTS
# =============================================================================

@dataclass(frozen=True)
class Front:
    position: float     # at `time`
    left:     int
    right:    int
    speed:    float
    time:     float = 0.0
    id:       int = 0

    def position_at(self, t: float) -> float:
        return self.position + self.speed * (t - self.time)

    @property
    def is_shock(self) -> bool:
        return self.left > self.right


@dataclass(frozen=True)
class FrontSegment:
    front_id: int
    left:     int
    right:    int
    speed:    float
    t0:       float
    x0:       float
    t1:       float

    @property
    def x1(self) -> float:
        return self.x0 + self.speed * (self.t1 - self.t0)


@dataclass
class FrontList:
    fronts:                  list[Front]
    time:                    float
    left_state:              int
    history:                 list[FrontSegment] = field(default_factory=list)
    first_interaction_time:  Optional[float] = None

    @classmethod
    def from_blocks(
        cls,
        flux: FluxTable,
        breakpoints: Sequence[float],
        states: Sequence[int],
        time: float = 0.0,
    ) -> "FrontList":
        """Block data: states[i] between breakpoints[i-1] and breakpoints[i]."""
        if len(states) != len(breakpoints) + 1:
            raise ValueError(
                f"{len(breakpoints)} breakpoints need {len(breakpoints) + 1} states, got {len(states)}"
            )
        for a, b in zip(breakpoints, breakpoints[1:]):
            if not b > a:
                raise ValueError(f"Breakpoints must be strictly increasing: {a} then {b}")
        states = [flux.check_index(k) for k in states]
        ids = itertools.count()
        fronts: list[Front] = []
        for x, left, right in zip(breakpoints, states, states[1:]):
            for front in riemann_solve(flux, left, right, position=float(x), time=time):
                fronts.append(replace(front, id=next(ids)))
        return cls(fronts, float(time), states[0])

    def __len__(self) -> int:
        return len(self.fronts)

    @property
    def positions(self) -> list[float]:
        return [f.position_at(self.time) for f in self.fronts]

    @property
    def right_state(self) -> int:
        return self.fronts[-1].right if self.fronts else self.left_state

    def sample(self, x: float) -> tuple[int, int]:
        """(u(x-), u(x+)) as state indices."""
        below, at_or_below = self.left_state, self.left_state
        for front in self.fronts:
            p = front.position_at(self.time)
            if p < x:
                below = front.right
            if p <= x:
                at_or_below = front.right
            else:
                break
        return below, at_or_below

    def fronts_in(self, lo: float, hi: float) -> list[Front]:
        """Fronts with position in [lo, hi)."""
        return [f for f in self.fronts if lo <= f.position_at(self.time) < hi]

    def world_lines(self) -> list[FrontSegment]:
        """Closed history plus the open fronts up to the current time."""
        open_segments = [
            FrontSegment(f.id, f.left, f.right, f.speed, f.time, f.position, self.time)
            for f in self.fronts
        ]
        return self.history + open_segments

    def to_rows(self) -> Iterator[dict]:
        for s in self.world_lines():
            yield {"t": s.t0, "x": s.x0, "u_l": s.left, "u_r": s.right, "front_id": s.front_id}
            yield {"t": s.t1, "x": s.x1, "u_l": s.left, "u_r": s.right, "front_id": s.front_id}


# =============================================================================
# OPERATIONS
# =============================================================================

def riemann_solve(
    flux: FluxTable,
    u_l: int,
    u_r: int,
    position: float = 0.0,
    time: float = 0.0,
) -> list[Front]:
    """Entropy solution of the Riemann problem: one shock, or a fan of contacts."""
    u_l, u_r = flux.check_index(u_l), flux.check_index(u_r)
    if not flux.convex:
        raise NonConvexError("riemann_solve supports convex flux tables only")
    if u_l == u_r:
        return []
    if u_l > u_r:
        return [Front(position, u_l, u_r, flux.speed(u_l, u_r), time)]
    c = flux.slopes
    return [Front(position, k, k + 1, c[k], time) for k in range(u_l, u_r)]


def _meeting(a: Front, b: Front, now: float) -> Optional[float]:
    closing = a.speed - b.speed
    if closing <= 0:
        return None
    gap = max(b.position_at(now) - a.position_at(now), 0.0)
    return now + gap / closing


def next_interaction_time(fl: FrontList) -> float:
    times = [_meeting(a, b, fl.time) for a, b in zip(fl.fronts, fl.fronts[1:])]
    return min((tau for tau in times if tau is not None), default=math.inf)


def evolve(fl: FrontList, flux: FluxTable, t: float) -> FrontList:
    """Advance to time t, resolving every front collision on the way."""
    if t < fl.time:
        raise ValueError(f"Cannot evolve backwards: t={t} < front list time {fl.time}")

    fronts = list(fl.fronts)
    history = list(fl.history)
    first = fl.first_interaction_time
    ids = itertools.count(max((f.id for f in fronts), default=-1) + 1)
    queue: list[tuple[float, float, int, int]] = []

    def schedule(i: int, now: float) -> None:
        if 0 <= i and i + 1 < len(fronts):
            a, b = fronts[i], fronts[i + 1]
            tau = _meeting(a, b, now)
            if tau is not None:
                heapq.heappush(queue, (tau, a.position_at(tau), a.id, b.id))

    for i in range(len(fronts) - 1):
        schedule(i, fl.time)

    slack_t = COINCIDENCE_TOL * (1.0 + abs(t))
    while queue and queue[0][0] <= t + slack_t:
        tau, x, left_id, right_id = heapq.heappop(queue)
        i = next((k for k, f in enumerate(fronts) if f.id == left_id), None)
        if i is None or i + 1 >= len(fronts) or fronts[i + 1].id != right_id:
            continue

        slack = COINCIDENCE_TOL * (1.0 + abs(x))
        lo, hi = i, i + 1
        while lo > 0 and abs(fronts[lo - 1].position_at(tau) - x) <= slack:
            lo -= 1
        while hi + 1 < len(fronts) and abs(fronts[hi + 1].position_at(tau) - x) <= slack:
            hi += 1

        group = fronts[lo : hi + 1]
        for f in group:
            history.append(FrontSegment(f.id, f.left, f.right, f.speed, f.time, f.position, tau))
        outgoing = [
            replace(f, id=next(ids))
            for f in riemann_solve(flux, group[0].left, group[-1].right, position=x, time=tau)
        ]
        fronts[lo : hi + 1] = outgoing
        if first is None:
            first = tau
        logger.debug(
            "interaction t=%.17g x=%.17g: %d fronts -> %d (%d|%d)",
            tau, x, len(group), len(outgoing), group[0].left, group[-1].right,
        )
        for k in range(lo - 1, lo + max(len(outgoing), 1)):
            schedule(k, tau)

    return FrontList(fronts, float(t), fl.left_state, history, first)


def rh_residual(fl: FrontList, flux: FluxTable) -> float:
    return max(
        (abs(f.speed - flux.speed(f.left, f.right)) for f in fl.fronts),
        default=0.0,
    )


def total_variation(fl: FrontList, flux: FluxTable) -> float:
    return math.fsum(abs(flux.states[f.right] - flux.states[f.left]) for f in fl.fronts)


def shock_particles(fl: FrontList, flux: FluxTable) -> ParticleSystem:
    """Shocks as sticky particles: mass is the state jump, velocity the front speed."""
    shocks = [f for f in fl.fronts if f.is_shock]
    return ParticleSystem.from_arrays(
        [flux.states[f.left] - flux.states[f.right] for f in shocks],
        [f.position_at(fl.time) for f in shocks],
        [f.speed for f in shocks],
        time=fl.time,
    )
