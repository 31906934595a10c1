"""The Kies distribution on (0, 1).

The Kies law is the Weibull law pushed through ``t = y / (1 + y)``:

    H(t) = 1 - exp(-lam * (t / (1 - t)) ** beta)

All evaluation functions accept scalars or array-likes and return a float or
an ``ndarray`` accordingly.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from ._numeric import (
    as_array,
    bisect,
    check_closed_unit,
    check_open_unit,
    odds_power,
    unwrap,
)

__all__ = [
    "KiesParams",
    "ShapeCase",
    "ShapeReport",
    "kies_cdf",
    "kies_ccdf",
    "kies_pdf",
    "kies_quantile",
    "kies_left_limit",
    "classify_shape",
]


@dataclass(frozen=True)
class KiesParams:
    """Scale ``lam`` and power ``beta`` of a Kies distribution."""

    lam: float
    beta: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.lam) and self.lam > 0.0):
            raise ValueError(f"lam must be a positive finite number, got {self.lam!r}")
        if not (math.isfinite(self.beta) and self.beta > 0.0):
            raise ValueError(f"beta must be a positive finite number, got {self.beta!r}")


def _scaled_odds(p: KiesParams, t: np.ndarray) -> np.ndarray:
    # lam * (t/(1-t))**beta in log space; overflows cleanly to inf
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        return np.exp(p.beta * (np.log(t) - np.log1p(-t)) + math.log(p.lam))


def kies_cdf(p: KiesParams, t):
    t, scalar = as_array(t)
    check_closed_unit(t)
    out = -np.expm1(-_scaled_odds(p, t))
    return unwrap(out, scalar)


def kies_ccdf(p: KiesParams, t):
    t, scalar = as_array(t)
    check_closed_unit(t)
    out = np.exp(-_scaled_odds(p, t))
    return unwrap(out, scalar)


def kies_left_limit(p: KiesParams) -> float:
    """Limit of the density at ``t -> 0``: 0, ``lam`` or ``inf``."""
    if p.beta > 1.0:
        return 0.0
    if p.beta == 1.0:
        return p.lam
    return math.inf


def kies_pdf(p: KiesParams, t):
    """Density.  The endpoints return their limits (``h(1) = 0`` always)."""
    t, scalar = as_array(t)
    check_closed_unit(t)
    out = np.empty_like(t)
    inner = (t > 0.0) & (t < 1.0)
    ti = t[inner]
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        log_h = (
            math.log(p.lam * p.beta)
            + (p.beta - 1.0) * np.log(ti)
            - (p.beta + 1.0) * np.log1p(-ti)
            - _scaled_odds(p, ti)
        )
        out[inner] = np.exp(log_h)
    out[t == 0.0] = kies_left_limit(p)
    out[t == 1.0] = 0.0
    return unwrap(out, scalar)


def kies_quantile(p: KiesParams, u):
    u, scalar = as_array(u)
    check_open_unit(u, "u")
    y = (-np.log1p(-u) / p.lam) ** (1.0 / p.beta)
    out = y / (1.0 + y)
    return unwrap(out, scalar)


class ShapeCase(str, enum.Enum):
    BETA_ABOVE_1 = "BetaAbove1"
    BETA_EQ_1_DECREASING = "BetaEq1Decreasing"
    BETA_EQ_1_PEAKED = "BetaEq1Peaked"
    BETA_BELOW_1_DECREASING = "BetaBelow1Decreasing"
    BETA_BELOW_1_BIMODAL = "BetaBelow1Bimodal"


@dataclass(frozen=True)
class ShapeReport:
    """Monotonicity structure of a Kies density.

    ``critical_points`` are the interior extrema of the density in increasing
    order; ``monotone_segments`` pairs each sub-interval of (0, 1) with
    ``"increasing"`` or ``"decreasing"``.
    """

    case_label: ShapeCase
    left_value: float
    critical_points: tuple[float, ...]
    monotone_segments: tuple[tuple[tuple[float, float], str], ...]

    def to_dict(self) -> dict:
        return {
            "case_label": self.case_label.value,
            "left_value": self.left_value,
            "critical_points": list(self.critical_points),
            "monotone_segments": [
                {"interval": [lo, hi], "direction": d}
                for (lo, hi), d in self.monotone_segments
            ],
        }


_ROOT_TOL = 1e-12


def _alpha(p: KiesParams, t: float) -> float:
    """Sign function of the density slope: h'(t) has the sign of -alpha(t)."""
    s = float(odds_power(np.float64(t), p.beta))
    return p.lam * p.beta * s - (2.0 * t + p.beta - 1.0)


def _alpha_prime(p: KiesParams, t: float) -> float:
    with np.errstate(over="ignore"):
        v = np.exp((p.beta - 1.0) * np.log(np.float64(t)) - (p.beta + 1.0) * np.log1p(-t))
    return float(p.lam * p.beta**2 * v - 2.0)


def _segments(points: list[float], directions: list[str]):
    edges = [0.0, *points, 1.0]
    return tuple(((edges[i], edges[i + 1]), d) for i, d in enumerate(directions))


def classify_shape(p: KiesParams) -> ShapeReport:
    """Case analysis of the density shape.

    The density slope has the sign of ``-alpha(t)`` where
    ``alpha(t) = lam*beta*(t/(1-t))**beta - (2t + beta - 1)``.  Interior
    roots are found by bisection on brackets where the relevant function is
    monotone, to an absolute tolerance of 1e-12.
    """
    left = kies_left_limit(p)
    hi = 1.0 - 1e-15
    if p.beta > 1.0:
        # alpha(0) = 1 - beta < 0 and alpha -> inf at 1: single root
        t2 = bisect(lambda t: _alpha(p, t), 0.0, hi, xtol=_ROOT_TOL)
        return ShapeReport(
            ShapeCase.BETA_ABOVE_1, left, (t2,), _segments([t2], ["increasing", "decreasing"])
        )
    if p.beta == 1.0:
        if p.lam >= 2.0:
            return ShapeReport(
                ShapeCase.BETA_EQ_1_DECREASING, left, (), _segments([], ["decreasing"])
            )
        t2 = 1.0 - p.lam / 2.0
        return ShapeReport(
            ShapeCase.BETA_EQ_1_PEAKED, left, (t2,), _segments([t2], ["increasing", "decreasing"])
        )

    decreasing = ShapeReport(
        ShapeCase.BETA_BELOW_1_DECREASING, left, (), _segments([], ["decreasing"])
    )
    t_bar = (1.0 - p.beta) / 2.0
    if _alpha_prime(p, t_bar) >= 0.0:
        return decreasing
    # alpha' decreases on (0, t_bar) and increases on (t_bar, 1)
    tb2 = bisect(lambda t: _alpha_prime(p, t), t_bar, hi, xtol=_ROOT_TOL)
    if _alpha(p, tb2) >= 0.0:
        return decreasing
    # for beta close to 1 the root of alpha' near 0 lies below the smallest
    # double; alpha is then decreasing on the whole representable (0, tb2)
    tiny = 5e-324
    if _alpha_prime(p, tiny) <= 0.0:
        tb1 = tiny
    else:
        tb1 = bisect(lambda t: _alpha_prime(p, t), tiny, t_bar, xtol=_ROOT_TOL)
    # alpha has a local max at tb1 (positive, since alpha(0) = 1 - beta > 0)
    # and a local min at tb2 (negative here)
    t1 = bisect(lambda t: _alpha(p, t), tb1, tb2, xtol=_ROOT_TOL)
    t2 = bisect(lambda t: _alpha(p, t), tb2, hi, xtol=_ROOT_TOL)
    return ShapeReport(
        ShapeCase.BETA_BELOW_1_BIMODAL,
        left,
        (t1, t2),
        _segments([t1, t2], ["decreasing", "increasing", "decreasing"]),
    )
