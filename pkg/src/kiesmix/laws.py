"""Probability laws for the randomised Kies scale parameter ``lam``.

Each law exposes its moment generating function ``E[exp(x * lam)]`` and the
derivative on ``x <= 0`` (the only region a Kies mixture ever touches),
together with the moments needed to check that a mixture is well defined and
an exact sampler.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import ClassVar

import numpy as np
from scipy import integrate, stats

from ._numeric import DomainError, as_array, unwrap
from .special import beta_fn, hyp1f1, hyp1f1_deriv, ln_gamma

__all__ = [
    "MixingLaw",
    "Degenerate",
    "DiscreteTable",
    "ShiftedBinomial",
    "Binomial",
    "Geometric",
    "Exponential",
    "Gamma",
    "BetaLaw",
    "Affine",
    "law_from_dict",
]

_PROB_SUM_TOL = 1e-12
# geometric tail mass below this is dropped from infinite sums
_TAIL_TOL = 1e-17


def _check_nonpositive(x: np.ndarray) -> None:
    if np.any(np.isnan(x)) or np.any(x > 0.0):
        raise DomainError("moment generating functions are evaluated on x <= 0 only")


def _positive(name: str, value: float) -> float:
    value = float(value)
    if not (math.isfinite(value) and value > 0.0):
        raise ValueError(f"{name} must be positive and finite, got {value!r}")
    return value


def _probability(name: str, value: float, *, allow_one: bool = False) -> float:
    value = float(value)
    upper_ok = value <= 1.0 if allow_one else value < 1.0
    if not (value > 0.0 and upper_ok):
        bound = "(0, 1]" if allow_one else "(0, 1)"
        raise ValueError(f"{name} must lie in {bound}, got {value!r}")
    return value


class MixingLaw:
    """Base class for laws of ``lam``."""

    family: ClassVar[str]
    positive_support: ClassVar[bool] = True

    def mgf(self, x):
        """``E[exp(x * lam)]`` for ``x <= 0``."""
        arr, scalar = as_array(x)
        _check_nonpositive(arr)
        with np.errstate(over="ignore", under="ignore"):
            out = self._mgf(arr)
        # exact normalisation, which closed forms can miss by an ulp
        return unwrap(np.where(arr == 0.0, 1.0, out), scalar)

    def mgf_deriv(self, x):
        """``E[lam * exp(x * lam)]`` for ``x <= 0``."""
        arr, scalar = as_array(x)
        _check_nonpositive(arr)
        with np.errstate(over="ignore", under="ignore"):
            return unwrap(self._mgf_deriv(arr), scalar)

    def mean(self) -> float:
        raise NotImplementedError

    def neg_moment(self, beta: float) -> float:
        """``E[lam ** (-1/beta)]``; ``math.inf`` when the integral diverges."""
        raise NotImplementedError

    def neg_moment_finite(self, beta: float) -> bool:
        """Whether ``E[lam ** (-1/beta)]`` is finite, decided analytically."""
        return True

    def sample(self, rng: np.random.Generator, size=None):
        """Draw from the law using the caller's generator."""
        raise NotImplementedError

    def atoms(self) -> tuple[np.ndarray, np.ndarray] | None:
        """Support points and weights for finite discrete laws, else None."""
        return None

    def params(self) -> dict:
        raise NotImplementedError

    def to_dict(self) -> dict:
        return {"family": self.family, "params": self.params()}

    def _mgf(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _mgf_deriv(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError


@dataclass(frozen=True)
class Degenerate(MixingLaw):
    """Point mass at ``lam0``."""

    lam0: float
    family: ClassVar[str] = "degenerate"

    def __post_init__(self):
        object.__setattr__(self, "lam0", _positive("lam0", self.lam0))

    def _mgf(self, x):
        return np.exp(self.lam0 * x)

    def _mgf_deriv(self, x):
        return self.lam0 * np.exp(self.lam0 * x)

    def mean(self):
        return self.lam0

    def neg_moment(self, beta):
        return self.lam0 ** (-1.0 / beta)

    def sample(self, rng, size=None):
        if size is None:
            return self.lam0
        return np.full(size, self.lam0)

    def atoms(self):
        return np.array([self.lam0]), np.array([1.0])

    def params(self):
        return {"lambda": self.lam0}


@dataclass(frozen=True)
class DiscreteTable(MixingLaw):
    """Finite table of scale values ``lams`` with probabilities ``probs``."""

    lams: tuple[float, ...]
    probs: tuple[float, ...]
    family: ClassVar[str] = "discrete"

    def __post_init__(self):
        lams = tuple(_positive("lams[i]", v) for v in self.lams)
        probs = tuple(float(v) for v in self.probs)
        if len(lams) == 0 or len(lams) != len(probs):
            raise ValueError("lams and probs must be non-empty and of equal length")
        if any(not (p > 0.0) for p in probs):
            raise ValueError("all probabilities must be positive")
        if abs(math.fsum(probs) - 1.0) > _PROB_SUM_TOL:
            raise ValueError(f"probabilities sum to {math.fsum(probs)!r}, not 1")
        object.__setattr__(self, "lams", lams)
        object.__setattr__(self, "probs", probs)

    @property
    def _lam(self):
        return np.asarray(self.lams)

    @property
    def _p(self):
        return np.asarray(self.probs)

    def _mgf(self, x):
        return np.exp(np.multiply.outer(x, self._lam)) @ self._p

    def _mgf_deriv(self, x):
        return np.exp(np.multiply.outer(x, self._lam)) @ (self._p * self._lam)

    def mean(self):
        return float(self._p @ self._lam)

    def neg_moment(self, beta):
        return float(self._p @ self._lam ** (-1.0 / beta))

    def sample_index(self, rng: np.random.Generator, size=None):
        return rng.choice(len(self.lams), size=size, p=self._p)

    def sample(self, rng, size=None):
        idx = self.sample_index(rng, size)
        return self._lam[idx] if size is not None else float(self._lam[idx])

    def atoms(self):
        return self._lam.copy(), self._p.copy()

    def params(self):
        return {"lambdas": list(self.lams), "probs": list(self.probs)}


@dataclass(frozen=True)
class _BinomialBase(MixingLaw):
    n: int
    p: float
    shift: ClassVar[int] = 0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "p", _probability("p", self.p))

    def _base(self, x):
        return 1.0 - self.p + self.p * np.exp(x)

    def _shifted(self, x):
        return np.exp(x) if self.shift else np.ones_like(x)

    def _mgf(self, x):
        return self._shifted(x) * self._base(x) ** self.n

    def _mgf_deriv(self, x):
        ex = np.exp(x)
        return (
            self._shifted(x)
            * self._base(x) ** (self.n - 1)
            * (self.shift * (1.0 - self.p) + self.p * (self.n + self.shift) * ex)
        )

    def mean(self):
        return self.shift + self.n * self.p

    def neg_moment(self, beta):
        values, weights = self.atoms()
        with np.errstate(divide="ignore"):
            return float(weights @ values ** (-1.0 / beta))

    def sample(self, rng, size=None):
        draw = rng.binomial(self.n, self.p, size=size) + self.shift
        return draw.astype(float) if size is not None else float(draw)

    def atoms(self):
        k = np.arange(self.n + 1)
        return (k + self.shift).astype(float), stats.binom.pmf(k, self.n, self.p)

    def params(self):
        return {"n": self.n, "p": self.p}


@dataclass(frozen=True)
class ShiftedBinomial(_BinomialBase):
    """``lam = 1 + Binomial(n, p)``, supported on ``{1, ..., n + 1}``."""

    family: ClassVar[str] = "shifted_binomial"
    shift: ClassVar[int] = 1


@dataclass(frozen=True)
class Binomial(_BinomialBase):
    """Plain ``Binomial(n, p)`` on ``{0, ..., n}``.

    It puts mass at zero, so it is only usable as the inner law of an
    :class:`Affine` with a positive offset.
    """

    family: ClassVar[str] = "binomial"
    positive_support: ClassVar[bool] = False


def _geometric_terms(p: float) -> tuple[np.ndarray, np.ndarray]:
    """Support ``1..K`` and pmf of the geometric law, truncated where the
    remaining tail mass drops below ``_TAIL_TOL``."""
    if p == 1.0:
        return np.array([1.0]), np.array([1.0])
    k_max = int(math.ceil(math.log(_TAIL_TOL) / math.log1p(-p))) + 1
    i = np.arange(1, k_max + 1, dtype=float)
    return i, p * np.exp((i - 1.0) * math.log1p(-p))


@dataclass(frozen=True)
class Geometric(MixingLaw):
    """``P(lam = i) = p (1 - p)**(i - 1)`` for ``i = 1, 2, ...``."""

    p: float
    family: ClassVar[str] = "geometric"

    def __post_init__(self):
        object.__setattr__(self, "p", _probability("p", self.p, allow_one=True))

    def _mgf(self, x):
        ex = np.exp(x)
        return self.p * ex / (1.0 - (1.0 - self.p) * ex)

    def _mgf_deriv(self, x):
        ex = np.exp(x)
        return self.p * ex / (1.0 - (1.0 - self.p) * ex) ** 2

    def mean(self):
        return 1.0 / self.p

    def neg_moment(self, beta):
        i, w = _geometric_terms(self.p)
        return float(w @ i ** (-1.0 / beta))

    def sample(self, rng, size=None):
        if self.p == 1.0:
            return np.ones(size) if size is not None else 1.0
        # inverse CDF: smallest i with 1 - (1-p)**i >= U
        u = 1.0 - rng.random(size)
        draw = np.maximum(np.ceil(np.log(u) / math.log1p(-self.p)), 1.0)
        return draw if size is not None else float(draw)

    def params(self):
        return {"p": self.p}


@dataclass(frozen=True)
class Exponential(MixingLaw):
    """Exponential law with intensity (rate) ``theta``."""

    theta: float
    family: ClassVar[str] = "exponential"

    def __post_init__(self):
        object.__setattr__(self, "theta", _positive("theta", self.theta))

    def _mgf(self, x):
        return self.theta / (self.theta - x)

    def _mgf_deriv(self, x):
        return self.theta / (self.theta - x) ** 2

    def mean(self):
        return 1.0 / self.theta

    def neg_moment(self, beta):
        r = 1.0 / beta
        if r >= 1.0:
            return math.inf
        return self.theta**r * math.gamma(1.0 - r)

    def neg_moment_finite(self, beta):
        return beta > 1.0

    def density(self, x):
        return self.theta * np.exp(-self.theta * x)

    def sample(self, rng, size=None):
        u = 1.0 - rng.random(size)
        draw = -np.log(u) / self.theta
        return draw if size is not None else float(draw)

    def params(self):
        return {"theta": self.theta}


@dataclass(frozen=True)
class Gamma(MixingLaw):
    """Gamma law with shape ``alpha`` and rate ``theta``."""

    alpha: float
    theta: float
    family: ClassVar[str] = "gamma"

    def __post_init__(self):
        object.__setattr__(self, "alpha", _positive("alpha", self.alpha))
        object.__setattr__(self, "theta", _positive("theta", self.theta))

    def _mgf(self, x):
        return (self.theta / (self.theta - x)) ** self.alpha

    def _mgf_deriv(self, x):
        return (
            self.alpha
            / self.theta
            * (self.theta / (self.theta - x)) ** (self.alpha + 1.0)
        )

    def mean(self):
        return self.alpha / self.theta

    def neg_moment(self, beta):
        r = 1.0 / beta
        if r >= self.alpha:
            return math.inf
        return math.exp(r * math.log(self.theta) + ln_gamma(self.alpha - r) - ln_gamma(self.alpha))

    def neg_moment_finite(self, beta):
        return 1.0 / beta < self.alpha

    def density(self, x):
        return stats.gamma.pdf(x, self.alpha, scale=1.0 / self.theta)

    def sample(self, rng, size=None):
        draw = rng.gamma(self.alpha, 1.0 / self.theta, size=size)
        return draw if size is not None else float(draw)

    def params(self):
        return {"alpha": self.alpha, "theta": self.theta}


@dataclass(frozen=True)
class BetaLaw(MixingLaw):
    """Beta law on (0, 1) with shape parameters ``alpha`` and ``theta``."""

    alpha: float
    theta: float
    family: ClassVar[str] = "beta"

    def __post_init__(self):
        object.__setattr__(self, "alpha", _positive("alpha", self.alpha))
        object.__setattr__(self, "theta", _positive("theta", self.theta))

    def _mgf(self, x):
        return hyp1f1(self.alpha, self.alpha + self.theta, x)

    def _mgf_deriv(self, x):
        return hyp1f1_deriv(self.alpha, self.alpha + self.theta, x)

    def mean(self):
        return self.alpha / (self.alpha + self.theta)

    def neg_moment(self, beta):
        r = 1.0 / beta
        if r >= self.alpha:
            return math.inf
        return beta_fn(self.alpha - r, self.theta) / beta_fn(self.alpha, self.theta)

    def neg_moment_finite(self, beta):
        return 1.0 / beta < self.alpha

    def density(self, x):
        return stats.beta.pdf(x, self.alpha, self.theta)

    def sample(self, rng, size=None):
        draw = rng.beta(self.alpha, self.theta, size=size)
        return draw if size is not None else float(draw)

    def params(self):
        return {"alpha": self.alpha, "theta": self.theta}


@dataclass(frozen=True)
class Affine(MixingLaw):
    """``lam = a * xi + b`` for an inner law ``xi``; ``a > 0``, ``b >= 0``."""

    a: float
    b: float
    inner: MixingLaw
    family: ClassVar[str] = "affine"

    def __post_init__(self):
        object.__setattr__(self, "a", _positive("a", self.a))
        b = float(self.b)
        if not (math.isfinite(b) and b >= 0.0):
            raise ValueError(f"b must be non-negative and finite, got {b!r}")
        object.__setattr__(self, "b", b)
        if not isinstance(self.inner, MixingLaw):
            raise TypeError("inner must be a MixingLaw")
        if isinstance(self.inner, Affine):
            raise ValueError("an Affine law cannot wrap another Affine law")
        if b == 0.0 and not self.inner.positive_support:
            raise ValueError(f"b must be positive for a {self.inner.family} inner law")

    def _offset(self, x):
        if self.b == 0.0:
            return np.ones_like(x)
        return np.exp(self.b * x)

    def _mgf(self, x):
        return self._offset(x) * self.inner._mgf(self.a * x)

    def _mgf_deriv(self, x):
        ax = self.a * x
        return self._offset(x) * (
            self.b * self.inner._mgf(ax) + self.a * self.inner._mgf_deriv(ax)
        )

    def mean(self):
        return self.a * self.inner.mean() + self.b

    def neg_moment(self, beta):
        r = 1.0 / beta
        if self.b == 0.0:
            inner = self.inner.neg_moment(beta)
            return inner * self.a ** (-r) if math.isfinite(inner) else math.inf
        atoms = self.atoms()
        if atoms is not None:
            values, weights = atoms
            return float(weights @ values ** (-r))
        inner = self.inner
        if isinstance(inner, Geometric):
            i, w = _geometric_terms(inner.p)
            return float(w @ (self.a * i + self.b) ** (-r))
        quad = dict(epsabs=1e-13, epsrel=1e-12, limit=200)
        if isinstance(inner, BetaLaw):
            # algebraic endpoint weights carry the beta density singularities
            val, _ = integrate.quad(
                lambda x: (self.a * x + self.b) ** (-r), 0.0, 1.0,
                weight="alg", wvar=(inner.alpha - 1.0, inner.theta - 1.0), **quad,
            )
            return val / beta_fn(inner.alpha, inner.theta)
        if isinstance(inner, (Gamma, Exponential)):
            # in u = theta * xi the integrand is (c u + b)**(-r) u**(k-1) e**(-u)
            k = inner.alpha if isinstance(inner, Gamma) else 1.0
            c = self.a / inner.theta
            g = lambda u: (c * u + self.b) ** (-r) * math.exp(-u)  # noqa: E731
            head, _ = integrate.quad(g, 0.0, 1.0, weight="alg", wvar=(k - 1.0, 0.0), **quad)
            tail, _ = integrate.quad(lambda u: g(u) * u ** (k - 1.0), 1.0, math.inf, **quad)
            return (head + tail) * math.exp(-ln_gamma(k))
        raise TypeError(f"unsupported inner law {inner.family}")

    def neg_moment_finite(self, beta):
        # a positive offset keeps lam away from zero
        return self.b > 0.0 or self.inner.neg_moment_finite(beta)

    def sample(self, rng, size=None):
        draw = self.a * np.asarray(self.inner.sample(rng, size)) + self.b
        return draw if size is not None else float(draw)

    def atoms(self):
        inner = self.inner.atoms()
        if inner is None:
            return None
        values, weights = inner
        return self.a * values + self.b, weights

    def params(self):
        return {"a": self.a, "b": self.b, "inner": self.inner.to_dict()}


_FAMILIES: dict[str, type[MixingLaw]] = {
    cls.family: cls
    for cls in (
        Degenerate, DiscreteTable, ShiftedBinomial, Binomial, Geometric,
        Exponential, Gamma, BetaLaw, Affine,
    )
}


def law_from_dict(doc: dict) -> MixingLaw:
    """Inverse of :meth:`MixingLaw.to_dict`.

    Raises ``ValueError`` for unknown families or malformed parameters.
    """
    try:
        family = doc["family"]
        params = dict(doc.get("params", {}))
    except (KeyError, TypeError, AttributeError) as exc:
        raise ValueError(f"malformed law document: {doc!r}") from exc
    try:
        if family == "degenerate":
            return Degenerate(params["lambda"])
        if family == "discrete":
            return DiscreteTable(tuple(params["lambdas"]), tuple(params["probs"]))
        if family in ("shifted_binomial", "binomial"):
            return _FAMILIES[family](params["n"], params["p"])
        if family == "geometric":
            return Geometric(params["p"])
        if family == "exponential":
            return Exponential(params["theta"])
        if family in ("gamma", "beta"):
            return _FAMILIES[family](params["alpha"], params["theta"])
        if family == "affine":
            return Affine(params["a"], params["b"], law_from_dict(params["inner"]))
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed parameters for {family!r}: {params!r}") from exc
    raise ValueError(f"unknown mixing law family {family!r}")
