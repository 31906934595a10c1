"""Gamma-family functions and the confluent hypergeometric function 1F1.

Only the region needed by beta mixing laws is supported for 1F1:
``b > a > 0`` and ``x <= 0``.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import special as sc

from ._numeric import DomainError, as_array, unwrap

__all__ = ["ln_gamma", "beta_fn", "hyp1f1", "hyp1f1_deriv", "hyp1f1_asymptotic"]

SERIES_CROSSOVER = 30.0
SERIES_TERM_CAP = 500
SERIES_RTOL = 1e-14


def ln_gamma(x):
    """Natural logarithm of the gamma function for ``x > 0``."""
    arr, scalar = as_array(x)
    if np.any(~(arr > 0.0)):
        raise DomainError("ln_gamma requires x > 0")
    return unwrap(sc.gammaln(arr), scalar)


def beta_fn(a: float, b: float) -> float:
    if not (a > 0.0 and b > 0.0):
        raise DomainError("beta_fn requires positive arguments")
    return math.exp(ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b))


def hyp1f1_asymptotic(a: float, b: float, x):
    """Leading term ``Gamma(b)/Gamma(b-a) * |x|**(-a)`` for large negative x."""
    arr, scalar = as_array(x)
    out = np.exp(math.lgamma(b) - math.lgamma(b - a) - a * np.log(-arr))
    return unwrap(out, scalar)


def _asymptotic_expansion(a: float, b: float, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """``1F1(a, b, -y)`` for large ``y`` from the algebraic asymptotic series

        Gamma(b)/Gamma(b-a) * y**(-a) * sum_n (a)_n (a-b+1)_n / n! * y**(-n)

    truncated at its smallest term.  Also returns a mask of entries where
    both the truncation error and the omitted exponentially small part,
    ``exp(-y) y**(2a-b) Gamma(b-a)/Gamma(a)`` relative to the leading term,
    are below the series tolerance.
    """
    total = np.ones_like(y)
    term = np.ones_like(y)
    err = np.zeros_like(y)
    active = np.ones(y.shape, dtype=bool)
    for n in range(SERIES_TERM_CAP):
        nxt = term * ((a + n) * (a - b + 1.0 + n) / (n + 1.0)) / y
        # stop at the smallest term (divergent tail) or at convergence
        stop = active & ~((np.abs(nxt) < np.abs(term)) & (np.abs(nxt) > SERIES_RTOL * np.abs(total)))
        err[stop] = np.abs(nxt[stop])
        active &= ~stop
        if not active.any():
            break
        term = np.where(active, nxt, term)
        total = total + np.where(active, nxt, 0.0)
    else:
        err[active] = np.abs(term[active])
    truncation = err <= SERIES_RTOL * np.abs(total)
    log_omitted = -y + (2.0 * a - b) * np.log(y) + math.lgamma(b - a) - math.lgamma(a)
    reliable = truncation & (log_omitted < math.log(SERIES_RTOL))
    return hyp1f1_asymptotic(a, b, -y) * total, reliable


def _kummer_series(c: float, b: float, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Sum of ``sum_k (c)_k / (b)_k * y**k / k!`` for ``y >= 0``.

    All terms are positive; past ``k ~ y`` they shrink geometrically, so
    ``y + 12 sqrt(y) + 40`` terms (capped at 500) are summed at once.
    Returns the sums and a mask of entries whose last term fell below the
    relative tolerance.
    """
    if y.size == 0:
        return y.copy(), np.ones(0, dtype=bool)
    y_max = float(y.max())
    n_terms = int(min(SERIES_TERM_CAP, math.ceil(y_max + 12.0 * math.sqrt(y_max) + 40.0)))
    k = np.arange(n_terms, dtype=float)[:, None]
    with np.errstate(over="ignore", invalid="ignore"):
        terms = np.cumprod((c + k) / (b + k) * y[None, :] / (k + 1.0), axis=0)
        total = 1.0 + terms.sum(axis=0)
        converged = (terms[-1] <= SERIES_RTOL * total) & (n_terms > y)
    return total, converged


def _check_params(a: float, b: float, x: np.ndarray) -> None:
    if not (b > a > 0.0):
        raise DomainError(f"hyp1f1 requires b > a > 0, got a={a!r}, b={b!r}")
    if np.any(np.isnan(x)) or np.any(x > 0.0):
        raise DomainError("hyp1f1 is only supported for x <= 0")


def hyp1f1(a: float, b: float, x):
    """Confluent hypergeometric function ``1F1(a; b; x)`` for ``x <= 0``.

    For ``|x| <= 30`` the Kummer transformation
    ``1F1(a,b,x) = e**x 1F1(b-a,b,-x)`` gives a power series with positive
    terms only, summed to relative tolerance 1e-14.  For ``|x| > 30`` the
    large-|x| asymptotic expansion is used wherever its error bound meets the
    same tolerance, and the series (up to 500 terms) everywhere else.  The
    leading asymptotic term alone (:func:`hyp1f1_asymptotic`) carries a
    relative error of order ``a*(b-a-1)/|x|``, so the correction terms are
    summed as well.
    """
    arr, scalar = as_array(x)
    _check_params(a, b, arr)
    y = -np.atleast_1d(arr).ravel()
    out = np.empty_like(y)
    inf = np.isinf(y)
    out[inf] = 0.0
    use_series = y <= SERIES_CROSSOVER
    big = ~use_series & ~inf
    if np.any(big):
        vals, reliable = _asymptotic_expansion(a, b, y[big])
        out[big] = vals
        idx = np.flatnonzero(big)
        use_series[idx[~reliable]] = True
    if np.any(use_series):
        ys = y[use_series]
        series, converged = _kummer_series(b - a, b, ys)
        with np.errstate(over="ignore", invalid="ignore"):
            vals = np.exp(-ys) * series
        # where even the series fails, keep the asymptotic value already stored
        keep = converged & np.isfinite(vals)
        keep |= ys <= SERIES_CROSSOVER
        idx = np.flatnonzero(use_series)
        out[idx[keep]] = vals[keep]
    return unwrap(out.reshape(arr.shape), scalar)


def hyp1f1_deriv(a: float, b: float, x):
    """Derivative in ``x``: ``(a/b) * 1F1(a+1, b+1, x)``."""
    arr, scalar = as_array(x)
    _check_params(a, b, arr)
    return unwrap((a / b) * hyp1f1(a + 1.0, b + 1.0, arr), scalar)
