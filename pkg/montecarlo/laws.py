"""
montecarlo/laws.py
------------------
Random initial data. Every law samples from a numpy Generator; a law with the
same seed always produces the same paths.

    law = InitialLaw.riemann(u_l=1.0, u_r=0.0, location_spread=1.0, seed=7)
    sampled = sample_initial(law)
    sampled.path(-2.0), sampled.path(2.0)
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from solvers.errors import InvalidLawError
from solvers.fronttrack import FluxTable
from solvers.measures import PiecewiseLinear, StepFunction

logger = logging.getLogger(__name__)

ROW_SUM_TOL = 1e-9


class LawKind(str, Enum):
    RIEMANN             = "riemann"
    MARKOV_CHAIN        = "markov_chain"
    SPECTRALLY_NEGATIVE = "spectrally_negative"
    BROWNIAN_POTENTIAL  = "brownian_potential"
    BLOCKS              = "blocks"


@dataclass(frozen=True)
class InitialLaw:
    kind:            LawKind
    seed:            int = 0
    domain:          tuple[float, float] = (-1.0, 1.0)
    # riemann
    u_l:             float = 1.0
    u_r:             float = 0.0
    location_spread: float = 0.0
    # markov chain / blocks
    states:          tuple[float, ...] = ()
    transition:      tuple[tuple[float, ...], ...] = ()
    rate:            float = 1.0
    initial:         Optional[tuple[float, ...]] = None
    gap_range:       tuple[float, float] = (0.0, 0.0)
    # spectrally negative
    drift:           float = 0.0
    start:           float = 0.0
    jump_mean:       float = 1.0
    # spectrally negative / brownian potential
    grid_step:       float = 0.01
    variance:        float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "kind", LawKind(self.kind))
        lo, hi = self.domain
        if not hi > lo:
            raise InvalidLawError(f"Empty domain ({lo}, {hi})")
        if self.location_spread < 0:
            raise InvalidLawError(f"location_spread must be >= 0, got {self.location_spread}")
        if self.kind is LawKind.MARKOV_CHAIN:
            self._validate_chain()
        if self.kind in (LawKind.SPECTRALLY_NEGATIVE, LawKind.BROWNIAN_POTENTIAL) and not self.grid_step > 0:
            raise InvalidLawError(f"grid_step must be positive, got {self.grid_step}")
        if self.kind is LawKind.SPECTRALLY_NEGATIVE and (self.rate < 0 or self.jump_mean <= 0):
            raise InvalidLawError("spectrally negative law needs rate >= 0 and jump_mean > 0")
        if self.kind is LawKind.BROWNIAN_POTENTIAL and self.variance < 0:
            raise InvalidLawError(f"variance must be >= 0, got {self.variance}")
        if self.kind is LawKind.BLOCKS:
            if len(self.states) < 2:
                raise InvalidLawError("blocks law needs at least two states")
            g_lo, g_hi = self.gap_range
            if not 0 < g_lo <= g_hi:
                raise InvalidLawError(f"gap_range must satisfy 0 < lo <= hi, got {self.gap_range}")

    def _validate_chain(self) -> None:
        n = len(self.states)
        P = np.asarray(self.transition, dtype=float)
        if n == 0 or P.shape != (n, n):
            raise InvalidLawError(f"transition matrix must be {n}x{n}, got shape {P.shape}")
        if (P < 0).any():
            raise InvalidLawError("transition matrix has negative entries")
        sums = P.sum(axis=1)
        bad = np.flatnonzero(np.abs(sums - 1.0) > ROW_SUM_TOL)
        if bad.size:
            raise InvalidLawError(f"transition row {int(bad[0])} sums to {sums[bad[0]]}, not 1")
        if self.initial is not None:
            p0 = np.asarray(self.initial, dtype=float)
            if p0.shape != (n,) or (p0 < 0).any() or abs(p0.sum() - 1.0) > ROW_SUM_TOL:
                raise InvalidLawError(f"initial distribution must be a probability vector of length {n}")
        if self.rate < 0:
            raise InvalidLawError(f"rate must be >= 0, got {self.rate}")

    # ── Constructors ──────────────────────────────────────────────────────────

    @classmethod
    def riemann(cls, u_l: float, u_r: float, location_spread: float = 0.0, seed: int = 0) -> "InitialLaw":
        spread = max(location_spread, 1.0)
        return cls(LawKind.RIEMANN, seed, (-spread - 1.0, spread + 1.0),
                   u_l=u_l, u_r=u_r, location_spread=location_spread)

    @classmethod
    def markov_chain(
        cls,
        states: Sequence[float],
        transition: Sequence[Sequence[float]],
        rate: float,
        domain: tuple[float, float],
        initial: Optional[Sequence[float]] = None,
        seed: int = 0,
    ) -> "InitialLaw":
        return cls(
            LawKind.MARKOV_CHAIN, seed, tuple(domain),
            states=tuple(states),
            transition=tuple(tuple(row) for row in transition),
            rate=rate,
            initial=tuple(initial) if initial is not None else None,
        )

    @classmethod
    def spectrally_negative(
        cls,
        drift: float,
        rate: float,
        jump_mean: float,
        domain: tuple[float, float],
        grid_step: float = 0.01,
        start: float = 0.0,
        seed: int = 0,
    ) -> "InitialLaw":
        return cls(LawKind.SPECTRALLY_NEGATIVE, seed, tuple(domain),
                   drift=drift, rate=rate, jump_mean=jump_mean, grid_step=grid_step, start=start)

    @classmethod
    def brownian_potential(
        cls,
        variance: float,
        grid_step: float,
        domain: tuple[float, float],
        seed: int = 0,
    ) -> "InitialLaw":
        return cls(LawKind.BROWNIAN_POTENTIAL, seed, tuple(domain), variance=variance, grid_step=grid_step)

    @classmethod
    def blocks(
        cls,
        states: Sequence[float],
        location_spread: float,
        gap_range: tuple[float, float],
        seed: int = 0,
    ) -> "InitialLaw":
        return cls(LawKind.BLOCKS, seed, (-location_spread - 1.0, location_spread + 1.0),
                   states=tuple(states), location_spread=location_spread, gap_range=tuple(gap_range))

    @property
    def initial_distribution(self) -> np.ndarray:
        if self.initial is not None:
            return np.asarray(self.initial, dtype=float)
        return stationary_distribution(self.transition)


@dataclass(frozen=True)
class SampledPath:
    path:  StepFunction
    jumps: tuple[float, ...] = ()     # signed jump sizes of the jump component


# =============================================================================
# HELPERS
# =============================================================================

def stationary_distribution(transition: Sequence[Sequence[float]]) -> np.ndarray:
    """pi with pi P = pi, sum(pi) = 1, by least squares."""
    P = np.asarray(transition, dtype=float)
    n = P.shape[0]
    A = np.vstack([P.T - np.eye(n), np.ones((1, n))])
    b = np.zeros(n + 1)
    b[-1] = 1.0
    pi, *_ = np.linalg.lstsq(A, b, rcond=None)
    pi = np.clip(pi, 0.0, None)
    return pi / pi.sum()


def _uniform(rng: np.random.Generator, spread: float) -> float:
    return float(rng.uniform(-spread, spread)) if spread > 0 else 0.0


def _compress(breakpoints: Sequence[float], values: Sequence[float]) -> StepFunction:
    """Drop breakpoints across which the value does not change."""
    bps, vals = [], [values[0]]
    for b, v in zip(breakpoints, values[1:]):
        if v != vals[-1]:
            bps.append(b)
            vals.append(v)
    return StepFunction(tuple(bps), tuple(vals))


def snap_to_states(path: StepFunction, flux: FluxTable) -> tuple[tuple[float, ...], tuple[int, ...]]:
    """Breakpoints and nearest-state indices of a path; equal neighbours are merged."""
    states = np.asarray(flux.states)
    indices = [int(np.abs(states - v).argmin()) for v in path.values]
    bps, idx = [], [indices[0]]
    for b, k in zip(path.breakpoints, indices[1:]):
        if k != idx[-1]:
            bps.append(b)
            idx.append(k)
    return tuple(bps), tuple(idx)


# =============================================================================
# SAMPLERS
# =============================================================================

def _sample_riemann(law: InitialLaw, rng: np.random.Generator) -> SampledPath:
    s = _uniform(rng, law.location_spread)
    return SampledPath(StepFunction((s,), (law.u_l, law.u_r)), (law.u_r - law.u_l,))


def _sample_markov(law: InitialLaw, rng: np.random.Generator) -> SampledPath:
    lo, hi = law.domain
    P = np.asarray(law.transition, dtype=float)
    state = int(rng.choice(len(law.states), p=law.initial_distribution))
    breakpoints, values = [], [law.states[state]]
    x = lo
    while law.rate > 0:
        x += float(rng.exponential(1.0 / law.rate))
        if x >= hi:
            break
        state = int(rng.choice(len(law.states), p=P[state]))
        breakpoints.append(x)
        values.append(law.states[state])
    path = _compress(breakpoints, values)
    return SampledPath(path, tuple(delta for _, delta in path.jumps()))


def _sample_spectrally_negative(law: InitialLaw, rng: np.random.Generator) -> SampledPath:
    lo, hi = law.domain
    jump_at, x = [], lo
    while law.rate > 0:
        x += float(rng.exponential(1.0 / law.rate))
        if x >= hi:
            break
        jump_at.append(x)
    sizes = rng.exponential(law.jump_mean, size=len(jump_at))

    grid = lo + law.grid_step * np.arange(1, int(math.ceil((hi - lo) / law.grid_step)))
    breakpoints = np.unique(np.concatenate([grid, np.asarray(jump_at, dtype=float)]))
    # drift frozen on grid cells, jumps applied where they occur
    levels = law.drift * law.grid_step * np.searchsorted(grid, breakpoints, side="right")
    dropped = np.concatenate([[0.0], np.cumsum(sizes)])[np.searchsorted(jump_at, breakpoints, side="right")]
    values = np.concatenate([[law.start], law.start + levels - dropped])
    return SampledPath(StepFunction(tuple(breakpoints.tolist()), tuple(values.tolist())), tuple((-sizes).tolist()))


def sample_potential(law: InitialLaw, rng: Optional[np.random.Generator] = None) -> PiecewiseLinear:
    """Brownian path psi on the grid lo + k h with psi(lo) = 0, linearly interpolated."""
    if law.kind is not LawKind.BROWNIAN_POTENTIAL:
        raise InvalidLawError(f"sample_potential needs a brownian_potential law, got {law.kind.value}")
    rng = rng if rng is not None else np.random.default_rng(law.seed)
    lo, hi = law.domain
    n = int(math.ceil((hi - lo) / law.grid_step))
    xs = lo + law.grid_step * np.arange(n + 1)
    increments = rng.normal(0.0, math.sqrt(law.variance * law.grid_step), size=n)
    psi = np.concatenate([[0.0], np.cumsum(increments)])
    return PiecewiseLinear(tuple(zip(xs.tolist(), psi.tolist())))


def _sample_brownian_velocity(law: InitialLaw, rng: np.random.Generator) -> SampledPath:
    psi = sample_potential(law, rng)
    velocity = tuple(-s for s in psi.slopes())
    path = StepFunction(psi.abscissae[1:-1], velocity)
    return SampledPath(path, tuple(delta for _, delta in path.jumps()))


def _sample_blocks(law: InitialLaw, rng: np.random.Generator) -> SampledPath:
    """Blocks states[0] | states[1] | ...; the rightmost front uniform, gaps uniform."""
    g_lo, g_hi = law.gap_range
    right = _uniform(rng, law.location_spread)
    gaps = rng.uniform(g_lo, g_hi, size=len(law.states) - 2)
    breakpoints = right - np.concatenate([np.cumsum(gaps[::-1])[::-1], [0.0]])
    path = StepFunction(tuple(breakpoints.tolist()), law.states)
    return SampledPath(path, tuple(delta for _, delta in path.jumps()))


_SAMPLERS = {
    LawKind.RIEMANN:             _sample_riemann,
    LawKind.MARKOV_CHAIN:        _sample_markov,
    LawKind.SPECTRALLY_NEGATIVE: _sample_spectrally_negative,
    LawKind.BROWNIAN_POTENTIAL:  _sample_brownian_velocity,
    LawKind.BLOCKS:              _sample_blocks,
}


def sample_initial(law: InitialLaw, rng: Optional[np.random.Generator] = None) -> SampledPath:
    """One path of the law. Without an explicit Generator the law's own seed is used."""
    rng = rng if rng is not None else np.random.default_rng(law.seed)
    return _SAMPLERS[law.kind](law, rng)
