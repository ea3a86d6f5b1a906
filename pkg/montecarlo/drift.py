"""
montecarlo/drift.py
-------------------
Drift of a spectrally negative initial process under a convex flux:

    db/dt = -f''(y) b^2,   b(y, 0) = b0(y)   =>   b(y, t) = b0 / (1 + t f'' b0)

The closed form is checked against a numeric integration (scipy DOP853).
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Optional

from scipy.integrate import solve_ivp

from solvers.errors import BlowupError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SmoothFlux:
    f:      Callable[[float], float]
    fprime: Callable[[float], float]
    fpp:    Callable[[float], float]

    @classmethod
    def burgers(cls) -> "SmoothFlux":
        return cls(lambda u: 0.5 * u * u, lambda u: u, lambda u: 1.0)

    @classmethod
    def linear(cls, a: float) -> "SmoothFlux":
        return cls(lambda u: a * u, lambda u: a, lambda u: 0.0)


def critical_time(b0: float, fpp: float) -> float:
    """First t with 1 + t f'' b0 = 0; infinite when the drift never blows up."""
    product = fpp * b0
    return -1.0 / product if product < 0 else math.inf


def drift_value(b0: float, fpp: float, t: float) -> float:
    denominator = 1.0 + t * fpp * b0
    if denominator <= 0:
        tc = critical_time(b0, fpp)
        raise BlowupError(f"drift blows up at t={tc:.17g} (requested t={t})", tc)
    return b0 / denominator


def drift_evolution(
    b0: Callable[[float], float],
    fpp: Callable[[float], float],
    t: float,
    ys: Optional[Iterable[float]] = None,
) -> Callable[[float], float]:
    """
    b(., t) as a function of y. When `ys` is given the blow-up condition is checked
    eagerly on that set; otherwise BlowupError surfaces on evaluation.
    """
    if t < 0:
        raise ValueError(f"Negative time {t}")
    if ys is not None:
        for y in ys:
            drift_value(b0(y), fpp(y), t)

    def b(y: float) -> float:
        return drift_value(b0(y), fpp(y), t)

    return b


def integrate_drift_numeric(b0: float, fpp: float, t: float, rtol: float = 1e-12) -> float:
    if t == 0:
        return b0
    sol = solve_ivp(
        lambda _, b: -fpp * b ** 2,
        (0.0, t),
        [b0],
        method="DOP853",
        rtol=rtol,
        atol=1e-14,
    )
    if not sol.success:
        raise BlowupError(f"numeric drift integration failed: {sol.message}", critical_time(b0, fpp))
    return float(sol.y[0, -1])


def coalescence_velocities(
    flux: SmoothFlux,
    y: float,
    z: float,
    b_y: float,
    b_z: float,
) -> tuple[float, float]:
    """(V_y, V_z): chord slope minus the local characteristic speed, scaled by the drift."""
    if y == z:
        raise ValueError(f"coalescence_velocities needs y != z, got {y}")
    chord = (flux.f(y) - flux.f(z)) / (y - z)
    return (chord - flux.fprime(y)) * b_y, (chord - flux.fprime(z)) * b_z
