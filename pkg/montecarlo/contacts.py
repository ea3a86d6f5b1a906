"""
montecarlo/contacts.py
----------------------
Shocks of Burgers' equation read off the initial potential psi by sliding the
parabola (x - y)^2 / 2t down onto psi:

    xi(x, t) = argmin_y  (x - y)^2 / (2t) - psi(y)

A point is regular when the contact is unique; two or more contacts give a shock
with strength mu = xi_plus - xi_minus and wavelength nu = x* - xi_minus.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from solvers.errors import DomainTooSmallError
from solvers.measures import PiecewiseLinear

logger = logging.getLogger(__name__)

CONTACT_TOL = 1e-12


@dataclass(frozen=True)
class ShockSample:
    x_star:   float
    xi_minus: float
    xi_plus:  float

    @property
    def mu(self) -> float:
        return self.xi_plus - self.xi_minus

    @property
    def nu(self) -> float:
        return self.x_star - self.xi_minus


@dataclass(frozen=True)
class RegularPoint:
    x_star:   float
    xi:       float
    velocity: float


Contact = Union[ShockSample, RegularPoint]


def _candidates(psi: PiecewiseLinear, x: float, t: float) -> np.ndarray:
    ys = list(psi.abscissae)
    for (y0, _), (y1, _), s in zip(psi.knots, psi.knots[1:], psi.slopes()):
        y = x + t * s
        if y0 < y < y1:
            ys.append(y)
    return np.asarray(ys)


def contact_range(psi: PiecewiseLinear, x: float, t: float, tol: float = CONTACT_TOL) -> tuple[float, float]:
    """Least and greatest minimizer of the parabola functional."""
    if t <= 0:
        raise ValueError(f"parabola contacts need t > 0, got {t}")
    ys = _candidates(psi, x, t)
    F = (x - ys) ** 2 / (2 * t) - np.asarray([psi.evaluate(float(y)) for y in ys])
    best = float(F.min())
    minimizers = ys[F <= best + tol * (1.0 + abs(best))]
    lo, hi = float(minimizers.min()), float(minimizers.max())
    d_lo, d_hi = psi.domain
    if lo <= d_lo or hi >= d_hi:
        raise DomainTooSmallError(
            f"contact at the boundary of [{d_lo}, {d_hi}] for x={x}, t={t}; widen the path"
        )
    return lo, hi


def parabola_contacts(psi: PiecewiseLinear, x_star: float, t: float, tol: float = CONTACT_TOL) -> Contact:
    lo, hi = contact_range(psi, x_star, t, tol)
    if hi > lo:
        return ShockSample(x_star, lo, hi)
    return RegularPoint(x_star, lo, (x_star - lo) / t)


def scan_shocks(
    psi: PiecewiseLinear,
    t: float,
    x_grid: Sequence[float],
    xtol: float = 1e-10,
    min_strength: float = 1e-9,
) -> list[ShockSample]:
    """
    Shocks between grid points, located by bisection.

    Away from shocks xi grows by at most the distance travelled in x, so an excess
    of xi growth over x growth marks a jump of xi inside the cell.
    """
    xs = sorted(float(x) for x in x_grid)
    ranges = [contact_range(psi, x, t) for x in xs]
    shocks = [ShockSample(x, lo, hi) for x, (lo, hi) in zip(xs, ranges) if hi > lo + min_strength]
    for (a, (_, xi_a)), (b, (xi_b, _)) in zip(zip(xs, ranges), zip(xs[1:], ranges[1:])):
        if xi_b - xi_a <= (b - a) + min_strength:
            continue
        while b - a > xtol:
            m = 0.5 * (a + b)
            xi_m_lo, xi_m_hi = contact_range(psi, m, t)
            if xi_m_hi > xi_m_lo + min_strength:
                a = b = m
                xi_a, xi_b = xi_m_lo, xi_m_hi
                break
            left_excess = (xi_m_lo - xi_a) - (m - a)
            right_excess = (xi_b - xi_m_hi) - (b - m)
            if left_excess >= right_excess:
                b, xi_b = m, xi_m_lo
            else:
                a, xi_a = m, xi_m_hi
        shocks.append(ShockSample(0.5 * (a + b), xi_a, xi_b))
    shocks.sort(key=lambda s: s.x_star)
    logger.debug("scan_shocks t=%.6g: %d shocks on %d grid points", t, len(shocks), len(xs))
    return shocks


def histogram(values: Sequence[float], bins: int = 30, value_range: Optional[tuple[float, float]] = None) -> dict:
    """Counts and density on fixed edges; JSON-ready."""
    counts, edges = np.histogram(np.asarray(values, dtype=float), bins=bins, range=value_range)
    widths = np.diff(edges)
    total = counts.sum()
    density = counts / (total * widths) if total else np.zeros_like(widths)
    return {
        "edges": edges.tolist(),
        "counts": counts.astype(int).tolist(),
        "density": density.tolist(),
        "n": int(total),
    }
