"""Hausdorff saturation of a Kies mixture.

The saturation ``d`` is the max-norm Hausdorff distance between the graph of
the CDF and the corner curve through (0, 0), (0, 1) and (1, 1).  It is the
unique root of ``F(d) + d = 1``.  Writing ``d = x/(x+1)`` turns this into

    gamma(x) = x * (1 / E[exp(-lam * x**beta)] - 1) = 1,

which is the route taken by :func:`saturation_algorithm1`; the direct
fixed-point equation is solved independently by :func:`saturation_fixed_point`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import singledispatch

import numpy as np

from ._numeric import DomainError, bisect, expand_bracket
from .laws import (
    BetaLaw,
    DiscreteTable,
    Exponential,
    Gamma,
    Geometric,
    MixingLaw,
    ShiftedBinomial,
)
from .mixture import MixedKies, mix_cdf
from .special import hyp1f1

__all__ = [
    "SaturationMethod",
    "SaturationResult",
    "saturation_fixed_point",
    "gamma_of_x",
    "saturation_algorithm1",
    "saturation_exponential_closed",
]


class SaturationMethod(str, enum.Enum):
    FIXED_POINT = "FixedPoint"
    ALGORITHM1 = "Algorithm1"
    CLOSED_FORM = "ClosedForm"


@dataclass(frozen=True)
class SaturationResult:
    """Solved saturation.

    Attributes
    ----------
    x_bar : float
        Root of ``gamma(x) = 1`` (for the fixed-point method, ``d / (1 - d)``).
    d : float
        The saturation, in (0, 1).
    residual : float
        ``F(d) + d - 1`` evaluated with the mixture CDF.
    tau : tuple of float or None
        ``lam_i * x_bar**beta_i`` for laws with finitely many atoms.
    method : SaturationMethod
    mean_exp_tau : float or None
        ``E[exp(-lam * x_bar**beta)]``, which equals ``d``; reported for laws
        without a finite atom table.
    """

    x_bar: float
    d: float
    residual: float
    tau: tuple[float, ...] | None
    method: SaturationMethod
    mean_exp_tau: float | None = None

    def to_dict(self) -> dict:
        return {
            "x_bar": self.x_bar,
            "d": self.d,
            "residual": self.residual,
            "tau": None if self.tau is None else list(self.tau),
            "method": self.method.value,
            "mean_exp_tau": self.mean_exp_tau,
        }


def _residual(m: MixedKies, d: float) -> float:
    return float(mix_cdf(m, d)) + d - 1.0


def saturation_fixed_point(m: MixedKies) -> SaturationResult:
    """Solve ``F(d) + d = 1`` by bisection on [0, 1].

    ``F(t) + t - 1`` increases strictly from -1 to 1, so the root is unique.
    """
    d = bisect(lambda t: _residual(m, t), 0.0, 1.0, xtol=0.0)
    return SaturationResult(
        x_bar=d / (1.0 - d),
        d=d,
        residual=_residual(m, d),
        tau=None,
        method=SaturationMethod.FIXED_POINT,
    )


def _mean_exp(m: MixedKies, x: float) -> float:
    """``E[exp(-lam * x**beta)]``, with per-component powers for tables."""
    if m.per_component:
        lams, probs = np.asarray(m.law.lams), np.asarray(m.law.probs)
        return float(probs @ np.exp(-lams * x ** np.asarray(m.beta)))
    return float(m.law.mgf(-(x**m.beta)))


def gamma_of_x(m: MixedKies, x: float) -> float:
    """``gamma(x) = x * (1 / E[exp(-lam * x**beta)] - 1)`` for ``x > 0``.

    Increases from 0 to infinity; ``inf`` once the expectation underflows.
    """
    if not (x > 0.0):
        raise DomainError(f"gamma_of_x requires x > 0, got {x!r}")
    if math.isinf(x):
        return math.inf
    mean = _mean_exp(m, x)
    if mean == 0.0:
        return math.inf
    return x * (1.0 / mean - 1.0)


# Family-specific forms of gamma(x) - 1.  Each is increasing in x with a
# negative value at 0, so the same bracket/bisection applies.

@singledispatch
def _gamma_equation(law: MixingLaw, beta: float, x: float) -> float:
    return x * (1.0 / float(law.mgf(-(x**beta))) - 1.0) - 1.0


@_gamma_equation.register
def _(law: DiscreteTable, beta, x):
    lams, probs = np.asarray(law.lams), np.asarray(law.probs)
    with np.errstate(over="ignore", divide="ignore"):
        return x * (1.0 / float(probs @ np.exp(-lams * x ** np.asarray(beta))) - 1.0) - 1.0


@_gamma_equation.register
def _(law: ShiftedBinomial, beta, x):
    y = x**beta
    with np.errstate(over="ignore"):
        ratio = np.exp(y) / (1.0 - law.p + law.p * np.exp(-y)) ** law.n
    return x * (float(ratio) - 1.0) - 1.0


@_gamma_equation.register
def _(law: Geometric, beta, x):
    with np.errstate(over="ignore"):
        return x * float(np.expm1(x**beta)) - law.p


@_gamma_equation.register
def _(law: Exponential, beta, x):
    return x ** (beta + 1.0) / law.theta - 1.0


@_gamma_equation.register
def _(law: Gamma, beta, x):
    th_a = law.theta**law.alpha
    return x * ((law.theta + x**beta) ** law.alpha - th_a) - th_a


@_gamma_equation.register
def _(law: BetaLaw, beta, x):
    val = float(hyp1f1(law.alpha, law.alpha + law.theta, -(x**beta)))
    if val == 0.0:
        return math.inf
    return x * (1.0 / val - 1.0) - 1.0


def saturation_algorithm1(m: MixedKies) -> SaturationResult:
    """Saturation from the root of ``gamma(x) = 1``.

    1. Expand ``[0, 2**k]`` until ``gamma(2**k) > 1`` (at most ``2**20``) and
       bisect for ``x_bar``.
    2. For laws with finitely many atoms report ``tau_i = lam_i * x_bar**beta_i``.
    3. ``d = x_bar / (x_bar + 1)``.

    The exponential law with ``beta = 1`` falls outside the regime this
    derivation assumes, so it is delegated to :func:`saturation_fixed_point`.
    """
    if not m.density_is_mixture_average:
        return saturation_fixed_point(m)

    def g(x: float) -> float:
        if x == 0.0:
            return -1.0
        return _gamma_equation(m.law, m.beta, x)

    hi = expand_bracket(g, hi=1.0)
    lo = 0.0 if hi == 1.0 else hi / 2.0
    x_bar = bisect(g, lo, hi, xtol=0.0)
    d = x_bar / (x_bar + 1.0)

    tau = None
    mean_exp = None
    atoms = m.law.atoms()
    if atoms is not None:
        lams, _ = atoms
        betas = np.asarray(m.beta) if m.per_component else m.beta
        tau = tuple(float(v) for v in lams * x_bar**betas)
    else:
        mean_exp = _mean_exp(m, x_bar)
    return SaturationResult(
        x_bar=x_bar,
        d=d,
        residual=_residual(m, d),
        tau=tau,
        method=SaturationMethod.ALGORITHM1,
        mean_exp_tau=mean_exp,
    )


def saturation_exponential_closed(theta: float, beta: float) -> SaturationResult:
    """Exact saturation for an exponential scale with rate ``theta``.

    ``gamma(x) = x**(beta+1) / theta``, so ``x_bar = theta**(1/(beta+1))``.
    Defined for every ``beta > 0``; the residual uses the closed-form CDF
    ``t**beta / (theta*(1-t)**beta + t**beta)``.
    """
    law = Exponential(theta)
    if not (math.isfinite(beta) and beta > 0.0):
        raise ValueError(f"beta must be positive and finite, got {beta!r}")
    x_bar = theta ** (1.0 / (beta + 1.0))
    d = x_bar / (x_bar + 1.0)
    u = d**beta
    cdf = u / (theta * (1.0 - d) ** beta + u)
    return SaturationResult(
        x_bar=x_bar,
        d=d,
        residual=cdf + d - 1.0,
        tau=None,
        method=SaturationMethod.CLOSED_FORM,
        mean_exp_tau=float(law.mgf(-(x_bar**beta))),
    )
