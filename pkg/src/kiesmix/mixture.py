"""Kies mixtures: the CDF is the average of Kies CDFs over a random scale
``lam`` (and, for finite tables, a random power ``beta``).

With a deterministic power the CCDF is the moment generating function of
``lam`` taken at ``-(t/(1-t))**beta``.  Every family additionally has a
dedicated closed form, written to stay finite as ``t -> 1``; those are the
values returned by :func:`mix_ccdf` and :func:`mix_pdf`, while
:func:`mgf_ccdf` and :func:`mgf_pdf` evaluate the generic MGF route.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass
from functools import cached_property, singledispatch

import numpy as np

from ._numeric import as_array, check_closed_unit, check_open_unit, odds_power, unwrap
from .kies import KiesParams, kies_cdf, kies_ccdf, kies_left_limit, kies_pdf
from .laws import (
    Affine,
    BetaLaw,
    Binomial,
    Degenerate,
    DiscreteTable,
    Exponential,
    Gamma,
    Geometric,
    MixingLaw,
    ShiftedBinomial,
    law_from_dict,
)
from .special import hyp1f1, ln_gamma

__all__ = [
    "InvalidModelError",
    "ValidityReport",
    "MixedKies",
    "validate",
    "mix_cdf",
    "mix_ccdf",
    "mix_pdf",
    "mgf_ccdf",
    "mgf_pdf",
    "left_endpoint",
    "right_endpoint",
    "beta_right_endpoint",
]


class InvalidModelError(ValueError):
    """The mixing law and power fail the conditions that make the mixture
    (and its density representation) well defined."""


@dataclass(frozen=True)
class ValidityReport:
    """Outcome of the three moment conditions on ``(lam, beta)``.

    ``inverse_moment`` is ``E[beta * lam**(-1/beta) * ((beta+1)/beta)**((beta+1)/beta)]``,
    ``mean_lam`` is ``E[lam]`` and ``mean_lam_beta`` is ``E[lam * beta]``.
    """

    inverse_moment: float
    mean_lam: float
    mean_lam_beta: float
    caveat: str | None = None

    @property
    def conditions(self) -> tuple[bool, bool, bool]:
        return (
            math.isfinite(self.inverse_moment),
            math.isfinite(self.mean_lam),
            math.isfinite(self.mean_lam_beta),
        )

    @property
    def all_pass(self) -> bool:
        return all(self.conditions)

    @property
    def ok(self) -> bool:
        """True when the model may be constructed (possibly with a caveat)."""
        return self.all_pass or self.caveat is not None

    def to_dict(self) -> dict:
        c1, c2, c3 = self.conditions
        return {
            "inverse_moment": c1,
            "mean_lam": c2,
            "mean_lam_beta": c3,
            "caveat": self.caveat,
        }


def _power_constant(beta):
    beta = np.asarray(beta, dtype=float)
    return beta * ((beta + 1.0) / beta) ** ((beta + 1.0) / beta)


def _exponential_rate(law: MixingLaw) -> float | None:
    """Rate of ``lam`` when it is exponential (possibly scaled), else None."""
    if isinstance(law, Exponential):
        return law.theta
    if isinstance(law, Affine) and law.b == 0.0 and isinstance(law.inner, Exponential):
        return law.inner.theta / law.a
    return None


_EXPONENTIAL_UNIT_POWER = (
    "exponential scale with beta = 1: the CDF is still a distribution, but the "
    "density is not the average of Kies densities and f(1) = theta"
)


def _check_per_component(law: MixingLaw, beta) -> bool:
    """True for a per-component power list (validated against the law)."""
    if isinstance(beta, Sequence) and not isinstance(beta, str):
        if not isinstance(law, DiscreteTable) or len(beta) != len(law.lams):
            raise ValueError("per-component powers need a DiscreteTable of the same length")
        return True
    return False


def _exponential_unit_power(law: MixingLaw, beta) -> bool:
    return beta == 1.0 and _exponential_rate(law) is not None


def validate(law: MixingLaw, beta: float | Sequence[float]) -> ValidityReport:
    """Evaluate the moment conditions for a mixing law and power(s).

    Never raises for well-formed inputs; the report flags each condition.
    """
    if _check_per_component(law, beta):
        b = np.asarray(beta, dtype=float)
        lam, p = np.asarray(law.lams), np.asarray(law.probs)
        inv = float(p @ (_power_constant(b) * lam ** (-1.0 / b)))
        return ValidityReport(inv, law.mean(), float(p @ (lam * b)))

    beta = float(beta)
    neg = law.neg_moment(beta)
    inv = float(_power_constant(beta)) * neg if math.isfinite(neg) else math.inf
    mean = law.mean()
    caveat = None
    if not math.isfinite(inv) and _exponential_unit_power(law, beta):
        caveat = _EXPONENTIAL_UNIT_POWER
    return ValidityReport(inv, mean, mean * beta, caveat)


@dataclass(frozen=True)
class MixedKies:
    """A Kies mixture: a law for ``lam`` and either one fixed power ``beta``
    or, for a :class:`DiscreteTable`, one power per component.

    Raises :class:`InvalidModelError` when the moment conditions fail, except
    for the exponential law with ``beta = 1`` which is accepted with a caveat.
    Construction decides the conditions analytically; the numerical values
    are computed on first access to :attr:`report`.
    """

    law: MixingLaw
    beta: float | tuple[float, ...]

    def __post_init__(self):
        if not isinstance(self.law, MixingLaw):
            raise TypeError("law must be a MixingLaw")
        if not self.law.positive_support:
            raise ValueError(f"{self.law.family} law puts mass at lam = 0")
        beta = self.beta
        if isinstance(beta, (list, tuple, np.ndarray)):
            beta = tuple(float(b) for b in beta)
            if any(not (math.isfinite(b) and b > 0.0) for b in beta):
                raise ValueError("powers must be positive and finite")
            if len(set(beta)) == 1 and not isinstance(self.law, DiscreteTable):
                beta = beta[0]
        else:
            beta = float(beta)
            if not (math.isfinite(beta) and beta > 0.0):
                raise ValueError(f"beta must be positive and finite, got {beta!r}")
        object.__setattr__(self, "beta", beta)
        if _check_per_component(self.law, beta):
            return  # finite tables satisfy every condition
        if not self.law.neg_moment_finite(beta) and not _exponential_unit_power(self.law, beta):
            raise InvalidModelError(
                f"{self.law.family} law with beta={beta!r} violates the moment "
                f"conditions (E[lam^(-1/beta)] diverges)"
            )

    @cached_property
    def report(self) -> ValidityReport:
        return validate(self.law, self.beta)

    @property
    def per_component(self) -> bool:
        return isinstance(self.beta, tuple)

    @property
    def density_is_mixture_average(self) -> bool:
        """False only for the exponential ``beta = 1`` special family."""
        return self.per_component or not _exponential_unit_power(self.law, self.beta)

    def component_betas(self) -> np.ndarray:
        """Power of every table component (repeated when fixed)."""
        if self.per_component:
            return np.asarray(self.beta)
        assert isinstance(self.law, DiscreteTable)
        return np.full(len(self.law.lams), self.beta)

    def cdf(self, t):
        return mix_cdf(self, t)

    def ccdf(self, t):
        return mix_ccdf(self, t)

    def pdf(self, t):
        return mix_pdf(self, t)

    def to_dict(self) -> dict:
        beta = list(self.beta) if self.per_component else self.beta
        return {"law": self.law.to_dict(), "beta": beta}

    @classmethod
    def from_dict(cls, doc: dict) -> MixedKies:
        try:
            law_doc, beta = doc["law"], doc["beta"]
        except (KeyError, TypeError) as exc:
            raise ValueError(f"model document needs 'law' and 'beta': {doc!r}") from exc
        if isinstance(beta, list):
            beta = tuple(beta)
        elif not isinstance(beta, (int, float)) or isinstance(beta, bool):
            raise ValueError(f"beta must be a number or a list of numbers, got {beta!r}")
        return cls(law_from_dict(law_doc), beta)


# --- helpers on t -------------------------------------------------------------

def _neg_exp(c: float, s: np.ndarray) -> np.ndarray:
    """``exp(-c * s)``, exactly 1 when ``c == 0`` even for infinite ``s``."""
    if c == 0.0:
        return np.ones_like(s)
    return np.exp(-c * s)


def _slope(t: np.ndarray, beta: float) -> np.ndarray:
    """``d/dt (t/(1-t))**beta = beta * t**(beta-1) / (1-t)**(beta+1)``."""
    return np.exp(math.log(beta) + (beta - 1.0) * np.log(t) - (beta + 1.0) * np.log1p(-t))


# --- closed-form CCDFs --------------------------------------------------------

@singledispatch
def _ccdf_closed(law: MixingLaw, beta: float, t: np.ndarray, s: np.ndarray) -> np.ndarray:
    return law._mgf(-s)


@_ccdf_closed.register
def _(law: Degenerate, beta, t, s):
    return np.exp(-law.lam0 * s)


@_ccdf_closed.register
def _(law: ShiftedBinomial, beta, t, s):
    e = np.exp(-s)
    return e * (1.0 - law.p + law.p * e) ** law.n


@_ccdf_closed.register
def _(law: Geometric, beta, t, s):
    e = np.exp(-s)
    return law.p * e / (1.0 - (1.0 - law.p) * e)


@_ccdf_closed.register
def _(law: Exponential, beta, t, s):
    v = law.theta * (1.0 - t) ** beta
    return v / (v + t**beta)


@_ccdf_closed.register
def _(law: Gamma, beta, t, s):
    v = law.theta * (1.0 - t) ** beta
    return (v / (v + t**beta)) ** law.alpha


@_ccdf_closed.register
def _(law: BetaLaw, beta, t, s):
    return hyp1f1(law.alpha, law.alpha + law.theta, -s)


@_ccdf_closed.register
def _(law: Affine, beta, t, s):
    a, b, inner = law.a, law.b, law.inner
    off = _neg_exp(b, s)
    if isinstance(inner, (Binomial, ShiftedBinomial)):
        b_eff = b + a * inner.shift
        return _neg_exp(b_eff, s) * (1.0 - inner.p + inner.p * np.exp(-a * s)) ** inner.n
    if isinstance(inner, Geometric):
        e = np.exp(-a * s)
        return inner.p * _neg_exp(a + b, s) / (1.0 - (1.0 - inner.p) * e)
    if isinstance(inner, Exponential):
        v = inner.theta * (1.0 - t) ** beta
        return off * v / (v + a * t**beta)
    if isinstance(inner, Gamma):
        v = inner.theta * (1.0 - t) ** beta
        return off * (v / (v + a * t**beta)) ** inner.alpha
    if isinstance(inner, BetaLaw):
        return off * hyp1f1(inner.alpha, inner.alpha + inner.theta, -a * s)
    return law._mgf(-s)


# --- closed-form densities ----------------------------------------------------

@singledispatch
def _pdf_closed(law: MixingLaw, beta: float, t: np.ndarray, s: np.ndarray) -> np.ndarray:
    return _slope(t, beta) * law._mgf_deriv(-s)


@_pdf_closed.register
def _(law: Degenerate, beta, t, s):
    return kies_pdf(KiesParams(law.lam0, beta), t)


@_pdf_closed.register
def _(law: ShiftedBinomial, beta, t, s):
    e = np.exp(-s)
    q = 1.0 - law.p
    return _slope(t, beta) * e * (q + law.p * e) ** (law.n - 1) * (q + law.p * (law.n + 1) * e)


@_pdf_closed.register
def _(law: Geometric, beta, t, s):
    e = np.exp(-s)
    return _slope(t, beta) * law.p * e / (1.0 - (1.0 - law.p) * e) ** 2


@_pdf_closed.register
def _(law: Exponential, beta, t, s):
    th = law.theta
    return (
        th * beta * t ** (beta - 1.0) * (1.0 - t) ** (beta - 1.0)
        / (th * (1.0 - t) ** beta + t**beta) ** 2
    )


@_pdf_closed.register
def _(law: Gamma, beta, t, s):
    al, th = law.alpha, law.theta
    log_f = (
        math.log(al * beta)
        + al * math.log(th)
        + (beta - 1.0) * np.log(t)
        + (al * beta - 1.0) * np.log1p(-t)
        - (al + 1.0) * np.log(th * (1.0 - t) ** beta + t**beta)
    )
    return np.exp(log_f)


@_pdf_closed.register
def _(law: BetaLaw, beta, t, s):
    al, th = law.alpha, law.theta
    return (
        al * beta / (al + th)
        * hyp1f1(al + 1.0, al + th + 1.0, -s)
        * t ** (beta - 1.0) / (1.0 - t) ** (beta + 1.0)
    )


@_pdf_closed.register
def _(law: Affine, beta, t, s):
    a, b, inner = law.a, law.b, law.inner
    k = _slope(t, beta)
    off = _neg_exp(b, s)
    if isinstance(inner, (Binomial, ShiftedBinomial)):
        # a shifted binomial is a plain binomial with offset b + a
        b_eff = b + a * inner.shift
        p, n = inner.p, inner.n
        e = np.exp(-a * s)
        return (
            k * _neg_exp(b_eff, s) * (1.0 - p + p * e) ** (n - 1)
            * (b_eff - b_eff * p + p * (n * a + b_eff) * e)
        )
    if isinstance(inner, Geometric):
        p = inner.p
        e = np.exp(-a * s)
        num = (a + b) * _neg_exp(a + b, s) - b * (1.0 - p) * _neg_exp(2.0 * a + b, s)
        return k * p * num / (1.0 - (1.0 - p) * e) ** 2
    if isinstance(inner, Exponential):
        th = inner.theta
        den = th * (1.0 - t) ** beta + a * t**beta
        return (
            th * beta * t ** (beta - 1.0) * (1.0 - t) ** (beta - 1.0) * off / den**2
            * (b * (th + a * s) + a)
        )
    if isinstance(inner, Gamma):
        al, th = inner.alpha, inner.theta
        den = th * (1.0 - t) ** beta + a * t**beta
        log_core = (
            al * math.log(th)
            + math.log(beta)
            + (beta - 1.0) * np.log(t)
            + (al * beta - 1.0) * np.log1p(-t)
            - (al + 1.0) * np.log(den)
        )
        return np.exp(log_core) * off * (b * (th + a * s) + a * al)
    if isinstance(inner, BetaLaw):
        al, th = inner.alpha, inner.theta
        return k * off * (
            b * hyp1f1(al, al + th, -a * s)
            + al * a / (al + th) * hyp1f1(al + 1.0, al + th + 1.0, -a * s)
        )
    return k * law._mgf_deriv(-s)


# --- public evaluation --------------------------------------------------------

def _table_sum(m: MixedKies, t: np.ndarray, fn) -> np.ndarray:
    law = m.law
    out = np.zeros_like(t)
    for lam, p, b in zip(law.lams, law.probs, m.component_betas()):
        out += p * fn(KiesParams(lam, float(b)), t)
    return out


def mix_ccdf(m: MixedKies, t):
    """Complementary CDF ``1 - F(t)`` on ``[0, 1]``."""
    t, scalar = as_array(t)
    check_closed_unit(t)
    if isinstance(m.law, DiscreteTable):
        out = _table_sum(m, t, kies_ccdf)
    else:
        s = odds_power(t, m.beta)
        with np.errstate(all="ignore"):
            out = _ccdf_closed(m.law, m.beta, t, s)
        out = np.where(np.isfinite(s), out, 0.0)
    out = np.clip(out, 0.0, 1.0)
    out = np.where(t == 0.0, 1.0, np.where(t == 1.0, 0.0, out))
    return unwrap(out, scalar)


def mix_cdf(m: MixedKies, t):
    """CDF on ``[0, 1]``; exactly 0 at ``t = 0`` and 1 at ``t = 1``."""
    t, scalar = as_array(t)
    check_closed_unit(t)
    if isinstance(m.law, DiscreteTable):
        out = _table_sum(m, t, kies_cdf)
    elif isinstance(m.law, Exponential):
        with np.errstate(all="ignore"):
            u = t**m.beta
            out = u / (m.law.theta * (1.0 - t) ** m.beta + u)
    else:
        out = 1.0 - np.asarray(mix_ccdf(m, t))
    out = np.clip(out, 0.0, 1.0)
    out = np.where(t == 0.0, 0.0, np.where(t == 1.0, 1.0, out))
    return unwrap(out, scalar)


def mix_pdf(m: MixedKies, t):
    """Density on the open interval (0, 1); see :func:`left_endpoint` and
    :func:`right_endpoint` for the endpoint limits."""
    t, scalar = as_array(t)
    check_open_unit(t)
    if isinstance(m.law, DiscreteTable):
        out = _table_sum(m, t, kies_pdf)
    else:
        s = odds_power(t, m.beta)
        with np.errstate(all="ignore"):
            out = _pdf_closed(m.law, m.beta, t, s)
        out = np.where(np.isfinite(s), out, 0.0)
    return unwrap(out, scalar)


def _require_fixed(m: MixedKies) -> float:
    if m.per_component:
        raise ValueError("the MGF route needs a deterministic power")
    return m.beta


def mgf_ccdf(m: MixedKies, t):
    """CCDF through the MGF of ``lam`` (fixed power only)."""
    beta = _require_fixed(m)
    t, scalar = as_array(t)
    check_closed_unit(t)
    s = odds_power(t, beta)
    out = np.asarray(m.law.mgf(-s), dtype=float)
    return unwrap(out, scalar)


def mgf_pdf(m: MixedKies, t):
    """Density through the MGF derivative of ``lam`` (fixed power only)."""
    beta = _require_fixed(m)
    t, scalar = as_array(t)
    check_open_unit(t)
    s = odds_power(t, beta)
    with np.errstate(all="ignore"):
        out = _slope(t, beta) * np.asarray(m.law.mgf_deriv(-s), dtype=float)
    out = np.where(np.isfinite(s), out, 0.0)
    return unwrap(out, scalar)


# --- endpoints ----------------------------------------------------------------

def left_endpoint(m: MixedKies) -> float:
    """Limit of the density at ``t -> 0``.

    0 when every power exceeds 1, the ``lam``-mean over the unit-power
    components when no power is below 1, and ``inf`` otherwise.
    """
    if m.per_component:
        betas = np.asarray(m.beta)
        if np.any(betas < 1.0):
            return math.inf
        unit = betas == 1.0
        if not np.any(unit):
            return 0.0
        lams, probs = np.asarray(m.law.lams), np.asarray(m.law.probs)
        return float(probs[unit] @ lams[unit])
    if m.beta > 1.0:
        return 0.0
    if m.beta < 1.0:
        return math.inf
    return m.law.mean()


def beta_right_endpoint(alpha: float, theta: float, beta: float) -> float:
    """Density limit at ``t -> 1`` for a beta-distributed scale.

    ``inf`` for ``beta < 1/alpha``, ``alpha*beta*Gamma(alpha+theta)/Gamma(theta)``
    at equality and 0 above.
    """
    crit = alpha * beta
    if crit < 1.0:
        return math.inf
    if crit == 1.0:
        return crit * math.exp(ln_gamma(alpha + theta) - ln_gamma(theta))
    return 0.0


def right_endpoint(m: MixedKies) -> float:
    """Limit of the density at ``t -> 1``."""
    if not m.per_component:
        rate = _exponential_rate(m.law)
        if rate is not None and m.beta == 1.0:
            return rate
        if isinstance(m.law, BetaLaw):
            return beta_right_endpoint(m.law.alpha, m.law.theta, m.beta)
    return 0.0


def component_left_limits(m: MixedKies) -> list[float]:
    """Left density limits of each table component (tables only)."""
    return [
        kies_left_limit(KiesParams(lam, float(b)))
        for lam, b in zip(m.law.lams, m.component_betas())
    ]
