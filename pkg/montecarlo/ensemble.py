"""
montecarlo/ensemble.py
----------------------
Ensembles of front-tracking solutions and n-point estimates.

    flux = FluxTable.burgers(2)
    law = InitialLaw.riemann(1.0, 0.0, location_spread=1.0, seed=3)
    ens = Ensemble.generate(law, flux, n=10_000)
    est = estimate_p(ens.at(0.2), flux, t=0.2, xs=[0.0], window=0.1)

Counts are integers and are reduced in realization order, so the result does not
depend on the worker count.
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from pydantic import BaseModel, Field

from montecarlo.laws import InitialLaw, sample_initial, snap_to_states
from solvers.errors import EmptyEnsembleError
from solvers.fronttrack import FluxTable, FrontList, evolve
from solvers.measures import StepFunction

logger = logging.getLogger(__name__)


def standard_error(samples: np.ndarray) -> float:
    """Sample std / sqrt(N); nan below two samples."""
    samples = np.asarray(samples, dtype=float)
    if len(samples) < 2:
        return float("nan")
    return float(np.std(samples, ddof=1) / math.sqrt(len(samples)))


def _indicator_stderr(count: int, n: int) -> float:
    if n < 2:
        return float("nan")
    p = count / n
    return math.sqrt(p * (1.0 - p) * n / (n - 1) / n)


def default_window(domain_length: float, n: int) -> float:
    return domain_length / math.sqrt(max(n, 1))


def front_list_from_path(path: StepFunction, flux: FluxTable, time: float = 0.0) -> FrontList:
    breakpoints, indices = snap_to_states(path, flux)
    return FrontList.from_blocks(flux, breakpoints, indices, time)


def _evolve_chunk(args: tuple[list[FrontList], FluxTable, float]) -> list[FrontList]:
    chunk, flux, t = args
    return [evolve(fl, flux, t) for fl in chunk]


@dataclass
class Ensemble:
    flux:         FluxTable
    realizations: list[FrontList]
    seed:         Optional[int] = None

    @classmethod
    def generate(cls, law: InitialLaw, flux: FluxTable, n: int, seed: Optional[int] = None) -> "Ensemble":
        """n paths from one parent Generator seeded with `seed` (the law's seed by default)."""
        seed = law.seed if seed is None else seed
        rng = np.random.default_rng(seed)
        realizations = [
            front_list_from_path(sample_initial(law, rng).path, flux)
            for _ in range(n)
        ]
        logger.info("generated %d realizations of %s (seed %d)", n, law.kind.value, seed)
        return cls(flux, realizations, seed)

    @classmethod
    def deterministic(cls, fl: FrontList, flux: FluxTable, n: int) -> "Ensemble":
        return cls(flux, [fl] * n)

    def __len__(self) -> int:
        return len(self.realizations)

    def at(self, t: float, workers: int = 1) -> list[FrontList]:
        if workers <= 1 or len(self.realizations) < 2 * workers:
            return _evolve_chunk((self.realizations, self.flux, t))
        size = math.ceil(len(self.realizations) / workers)
        chunks = [self.realizations[i : i + size] for i in range(0, len(self.realizations), size)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = pool.map(_evolve_chunk, [(c, self.flux, t) for c in chunks])
            return [fl for part in parts for fl in part]


# =============================================================================
# ESTIMATES
# =============================================================================

class NPointEstimate(BaseModel):
    """One-point fractions p1 and two-point window densities p2 on a position grid."""
    t:              float
    window:         float
    n:              int
    states:         list[float]
    xs:             list[float]
    p1_counts:      list[list[int]] = Field(description="[x][state] realizations with u(x-) = state")
    p1:             list[list[float]]
    p1_stderr:      list[list[float]]
    p2_counts:      list[list[list[int]]] = Field(description="[x][left][right] fronts in [x, x+w)")
    p2:             list[list[list[float]]]
    p2_stderr:      list[list[list[float]]]
    interpretation: list[str] = Field(default_factory=lambda: ["P1", "P2_DENSITY"])

    def to_rows(self) -> list[dict]:
        rows = []
        for i, x in enumerate(self.xs):
            for l, u in enumerate(self.states):
                rows.append({
                    "x": x, "kind": "p1", "u_l": l, "u_m": "",
                    "count": self.p1_counts[i][l], "value": self.p1[i][l], "stderr": self.p1_stderr[i][l],
                })
            for l in range(len(self.states)):
                for m in range(len(self.states)):
                    if l != m and self.p2_counts[i][l][m]:
                        rows.append({
                            "x": x, "kind": "p2", "u_l": l, "u_m": m,
                            "count": self.p2_counts[i][l][m], "value": self.p2[i][l][m],
                            "stderr": self.p2_stderr[i][l][m],
                        })
        return rows


def window_counts(fl: FrontList, lo: float, hi: float, n_states: int) -> np.ndarray:
    """[left][right] number of fronts of each type in [lo, hi)."""
    counts = np.zeros((n_states, n_states), dtype=int)
    for front in fl.fronts_in(lo, hi):
        counts[front.left, front.right] += 1
    return counts


def estimate_p(
    solutions: Sequence[FrontList],
    flux: FluxTable,
    t: float,
    xs: Sequence[float],
    window: float,
) -> NPointEstimate:
    if not solutions:
        raise EmptyEnsembleError("estimate_p needs at least one realization")
    if window <= 0:
        raise ValueError(f"window must be positive, got {window}")
    n, M = len(solutions), len(flux)
    p1_counts, p1, p1_err = [], [], []
    p2_counts, p2, p2_err = [], [], []
    for x in xs:
        c1 = np.zeros(M, dtype=int)
        c2 = np.zeros((M, M), dtype=int)
        sq2 = np.zeros((M, M), dtype=int)
        for fl in solutions:
            c1[fl.sample(x)[0]] += 1
            k = window_counts(fl, x, x + window, M)
            c2 += k
            sq2 += k * k
        p1_counts.append(c1.tolist())
        p1.append((c1 / n).tolist())
        p1_err.append([_indicator_stderr(int(c), n) for c in c1])
        p2_counts.append(c2.tolist())
        mean = c2 / n
        p2.append((mean / window).tolist())
        if n > 1:
            var = (sq2 - n * mean ** 2) / (n - 1)
            err = np.sqrt(np.clip(var, 0.0, None) / n) / window
        else:
            err = np.full((M, M), np.nan)
        p2_err.append(err.tolist())
    return NPointEstimate(
        t=t, window=window, n=n, states=list(flux.states), xs=list(xs),
        p1_counts=p1_counts, p1=p1, p1_stderr=p1_err,
        p2_counts=p2_counts, p2=p2, p2_stderr=p2_err,
    )


def riemann_oracle(
    flux: FluxTable,
    u_l: int,
    u_r: int,
    spread: float,
    x: float,
    t: float,
    window: float,
) -> dict:
    """
    Exact p1 and p2 for a Riemann shock whose initial location is uniform on
    [-spread, spread] (u_l > u_r, so the solution is a single shock).
    """
    if not u_l > u_r:
        raise ValueError(f"riemann_oracle needs a shock (u_l > u_r), got {u_l}, {u_r}")
    if spread <= 0:
        raise ValueError(f"spread must be positive, got {spread}")
    c = flux.speed(u_l, u_r)
    shifted = x - c * t
    p_left = min(max((spread - shifted) / (2 * spread), 0.0), 1.0)
    overlap = max(0.0, min(shifted + window, spread) - max(shifted, -spread))
    return {
        "speed": c,
        "p1_left": p_left,
        "p1_right": 1.0 - p_left,
        "p2": overlap / (2 * spread * window),
    }
