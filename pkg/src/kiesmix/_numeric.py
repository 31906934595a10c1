"""Small numerical helpers shared across the package: array coercion and
bracketing root finders."""

from __future__ import annotations

from collections.abc import Callable

import numpy as np


class DomainError(ValueError):
    """Argument outside the mathematical domain of a function."""


def as_array(x) -> tuple[np.ndarray, bool]:
    """Return ``x`` as a float64 array and whether the input was scalar."""
    arr = np.asarray(x, dtype=np.float64)
    return arr, arr.ndim == 0


def unwrap(values: np.ndarray, scalar: bool):
    if scalar:
        return float(values)
    return values


def check_closed_unit(t: np.ndarray, name: str = "t") -> None:
    if np.any(np.isnan(t)) or np.any((t < 0.0) | (t > 1.0)):
        raise DomainError(f"{name} must lie in [0, 1]")


def check_open_unit(t: np.ndarray, name: str = "t") -> None:
    if np.any(np.isnan(t)) or np.any((t <= 0.0) | (t >= 1.0)):
        raise DomainError(f"{name} must lie in the open interval (0, 1)")


def odds_power(t: np.ndarray, beta: float) -> np.ndarray:
    """``(t / (1 - t)) ** beta`` evaluated through logarithms.

    Gives 0 at ``t = 0`` and ``inf`` at ``t = 1`` without warnings.
    """
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        return np.exp(beta * (np.log(t) - np.log1p(-t)))


def bisect(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    xtol: float = 1e-12,
    maxiter: int = 200,
) -> float:
    """Bisection for a sign change of ``f`` on ``[lo, hi]``.

    Iterates until the bracket is narrower than ``xtol`` or the midpoint no
    longer moves in floating point.  ``f(lo)`` and ``f(hi)`` must differ in
    sign (zero at an endpoint is accepted and returned).
    """
    flo = f(lo)
    if flo == 0.0:
        return lo
    fhi = f(hi)
    if fhi == 0.0:
        return hi
    if (flo < 0.0) == (fhi < 0.0):
        raise ValueError(f"no sign change on [{lo!r}, {hi!r}]")
    neg_at_lo = flo < 0.0
    for _ in range(maxiter):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi or hi - lo <= xtol:
            break
        fm = f(mid)
        if fm == 0.0:
            return mid
        if (fm < 0.0) == neg_at_lo:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def expand_bracket(
    f: Callable[[float], float],
    hi: float = 1.0,
    max_doublings: int = 20,
) -> float:
    """Double ``hi`` until ``f(hi) > 0``; ``f`` is assumed increasing and
    negative near zero.  Returns the first positive upper end."""
    for _ in range(max_doublings + 1):
        if f(hi) > 0.0:
            return hi
        hi *= 2.0
    raise RuntimeError(f"no sign change found below {hi / 2.0:g}")


def bisect_increasing(
    f: Callable[[np.ndarray], np.ndarray],
    target: np.ndarray,
    lo: float,
    hi: float,
    maxiter: int = 200,
) -> np.ndarray:
    """Vectorised bisection for ``f(x) = target`` with ``f`` nondecreasing.

    Runs to floating-point resolution of the bracket.
    """
    target = np.asarray(target, dtype=np.float64)
    a = np.full(target.shape, lo, dtype=np.float64)
    b = np.full(target.shape, hi, dtype=np.float64)
    for _ in range(maxiter):
        mid = 0.5 * (a + b)
        active = (mid > a) & (mid < b)
        if not np.any(active):
            break
        below = f(mid) < target
        a = np.where(active & below, mid, a)
        b = np.where(active & ~below, mid, b)
    return 0.5 * (a + b)
