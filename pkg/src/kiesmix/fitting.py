"""Histogram calibration of Kies mixtures.

Raw observations are rescaled into the unit interval, binned into ``m``
equal sub-intervals, and turned into an empirical density ``l_i = m N_i / N``
at the bin centres.  A model is scored with the log-corrected absolute
deviation

    L = sum_i | ln(l_i_emp + eps) - ln(l_i_th + eps) |

and fitted by multi-start Nelder-Mead over unconstrained transforms of its
parameters.

Model families
--------------
========  =============================================  ==========================
family    scale law                                      parameters
========  =============================================  ==========================
A1        point mass                                     lambda, beta
A2        two-point table, one power per component       lambda_i, beta_i, p_i
A3        k-point table (k = 3 by default)               lambda_i, beta_i, p_i
A4        a * Binomial(n, p) + b                         beta, a, b, p, n
A5        a * Geometric(p) + b                           beta, a, b, p
A6        a * Exponential(theta) + b                     beta, a, b, theta
A7        a * Gamma(alpha, theta) + b                    beta, a, b, theta, alpha
A8        a * Beta(alpha, theta) + b                     beta, a, b, theta, alpha
========  =============================================  ==========================
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .laws import (
    Affine,
    BetaLaw,
    Binomial,
    Degenerate,
    DiscreteTable,
    Exponential,
    Gamma,
    Geometric,
)
from .mixture import MixedKies, mix_pdf

__all__ = [
    "FAMILIES",
    "Histogram",
    "EmpiricalPdf",
    "FitConfig",
    "FitResult",
    "rescale_minmax",
    "rescale_divide",
    "bin_data",
    "cost_function",
    "model_from_parameters",
    "objective",
    "fit",
]

FAMILIES = ("A1", "A2", "A3", "A4", "A5", "A6", "A7", "A8")

PENALTY = 1e10

DEFAULT_BOXES: dict[str, tuple[float, float]] = {
    "lambda": (1e-2, 1e3),
    "beta": (0.3, 5.0),
    "a": (1e-2, 1e3),
    "b": (1e-3, 1e2),
    "theta": (1e-4, 1e2),
    "alpha": (0.1, 10.0),
    "p": (0.02, 0.98),
}


# --- preprocessing ------------------------------------------------------------

def rescale_minmax(data) -> np.ndarray:
    """Map ``S`` to ``(S - min S) / (1.5 (max S - min S))``, i.e. onto [0, 2/3]."""
    s = np.asarray(data, dtype=float)
    if s.ndim != 1 or s.size < 2:
        raise ValueError("need at least two observations")
    lo, hi = s.min(), s.max()
    if not hi > lo:
        raise ValueError("degenerate data: all observations are equal")
    out = (s - lo) / (1.5 * (hi - lo))
    out[s == hi] = 2.0 / 3.0
    return out


def rescale_divide(data, c: float) -> np.ndarray:
    """Divide by ``c``; every result must land strictly inside (0, 1)."""
    if not (c > 0.0 and math.isfinite(c)):
        raise ValueError(f"divisor must be positive and finite, got {c!r}")
    out = np.asarray(data, dtype=float) / c
    if np.any(~((out > 0.0) & (out < 1.0))):
        raise ValueError(f"dividing by {c:g} leaves values outside (0, 1)")
    return out


@dataclass(frozen=True)
class Histogram:
    m: int
    counts: np.ndarray
    n_total: int
    centers: np.ndarray


@dataclass(frozen=True)
class EmpiricalPdf:
    """Histogram density ``m N_i / N`` placed at the bin centres."""

    centers: np.ndarray
    values: np.ndarray

    @property
    def m(self) -> int:
        return len(self.centers)


def bin_data(data, m: int) -> tuple[Histogram, EmpiricalPdf]:
    """Bin into ``m`` equal sub-intervals of [0, 1].

    Bin ``i`` (1-based) is ``[(i-1)/m, i/m)``; the last bin also holds 1.
    Observations must lie in [0, 1] (min-max rescaling maps the minimum to 0).
    """
    if int(m) != m or m < 2:
        raise ValueError(f"m must be an integer >= 2, got {m!r}")
    m = int(m)
    x = np.asarray(data, dtype=float).ravel()
    if x.size == 0:
        raise ValueError("no observations to bin")
    if np.any(~((x >= 0.0) & (x <= 1.0))):
        raise ValueError("observations must lie in [0, 1]")
    idx = np.minimum(np.floor(x * m).astype(int), m - 1)
    counts = np.bincount(idx, minlength=m)
    centers = (np.arange(1, m + 1) - 0.5) / m
    hist = Histogram(m, counts, int(x.size), centers)
    return hist, EmpiricalPdf(centers, m * counts / x.size)


def cost_function(model: MixedKies, emp: EmpiricalPdf, epsilon: float = 0.01) -> float:
    """``sum |ln(l_emp + eps) - ln(l_th + eps)|`` with ``l_th`` the model
    density at the bin centres."""
    if not epsilon > 0.0:
        raise ValueError("epsilon must be positive")
    l_th = np.asarray(mix_pdf(model, emp.centers), dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        diff = np.log(emp.values + epsilon) - np.log(l_th + epsilon)
    return float(np.sum(np.abs(diff)))


# --- parameterisation ---------------------------------------------------------

@dataclass(frozen=True)
class _Layout:
    """Names and transforms of the continuous parameters of a family."""

    positive: tuple[str, ...]
    probabilities: tuple[str, ...] = ()
    simplex: tuple[str, ...] = ()  # softmax weights; the last logit is fixed at 0

    @property
    def size(self) -> int:
        return len(self.positive) + len(self.probabilities) + max(len(self.simplex) - 1, 0)


def _layout(family: str, components: int) -> _Layout:
    if family == "A1":
        return _Layout(("lambda", "beta"))
    if family in ("A2", "A3"):
        k = 2 if family == "A2" else components
        names = tuple(f"lambda_{i}" for i in range(1, k + 1)) + tuple(
            f"beta_{i}" for i in range(1, k + 1)
        )
        return _Layout(names, simplex=tuple(f"p_{i}" for i in range(1, k + 1)))
    if family in ("A4", "A5"):
        return _Layout(("beta", "a", "b"), probabilities=("p",))
    if family == "A6":
        return _Layout(("beta", "a", "b", "theta"))
    if family in ("A7", "A8"):
        return _Layout(("beta", "a", "b", "theta", "alpha"))
    raise ValueError(f"unknown family {family!r}; expected one of {', '.join(FAMILIES)}")


def _box_key(name: str) -> str:
    return name.split("_")[0]


def _decode(layout: _Layout, z: np.ndarray) -> dict[str, float]:
    out: dict[str, float] = {}
    i = 0
    for name in layout.positive:
        out[name] = float(np.exp(z[i]))
        i += 1
    for name in layout.probabilities:
        out[name] = float(1.0 / (1.0 + np.exp(-z[i])))
        i += 1
    if layout.simplex:
        logits = np.append(z[i:], 0.0)
        w = np.exp(logits - logits.max())
        w /= w.sum()
        out.update({name: float(v) for name, v in zip(layout.simplex, w)})
    return out


def _random_start(layout: _Layout, boxes: dict, rng: np.random.Generator) -> np.ndarray:
    z = []
    for name in layout.positive:
        lo, hi = boxes[_box_key(name)]
        z.append(rng.uniform(math.log(lo), math.log(hi)))
    for name in layout.probabilities:
        lo, hi = boxes[_box_key(name)]
        p = rng.uniform(lo, hi)
        z.append(math.log(p / (1.0 - p)))
    if layout.simplex:
        z.extend(rng.normal(0.0, 1.0, len(layout.simplex) - 1))
    return np.asarray(z, dtype=float)


def model_from_parameters(family: str, params: dict) -> MixedKies:
    """Build the mixture of a family from its named parameters."""
    if family == "A1":
        return MixedKies(Degenerate(params["lambda"]), params["beta"])
    if family in ("A2", "A3"):
        k = sum(1 for key in params if key.startswith("lambda_"))
        lams = tuple(params[f"lambda_{i}"] for i in range(1, k + 1))
        probs = np.asarray([params[f"p_{i}"] for i in range(1, k + 1)], dtype=float)
        betas = tuple(params[f"beta_{i}"] for i in range(1, k + 1))
        return MixedKies(DiscreteTable(lams, tuple(probs / probs.sum())), betas)
    a, b, beta = params["a"], params["b"], params["beta"]
    if family == "A4":
        inner = Binomial(int(params["n"]), params["p"])
    elif family == "A5":
        inner = Geometric(params["p"])
    elif family == "A6":
        inner = Exponential(params["theta"])
    elif family == "A7":
        inner = Gamma(params["alpha"], params["theta"])
    elif family == "A8":
        inner = BetaLaw(params["alpha"], params["theta"])
    else:
        raise ValueError(f"unknown family {family!r}")
    return MixedKies(Affine(a, b, inner), beta)


def objective(family: str, params: dict, emp: EmpiricalPdf, epsilon: float) -> float:
    """Cost of a parameter set, or a large penalty if it does not define a
    valid model or gives a non-finite cost."""
    try:
        model = model_from_parameters(family, params)
        value = cost_function(model, emp, epsilon)
    except (ValueError, TypeError, OverflowError, ArithmeticError):
        return PENALTY
    return value if math.isfinite(value) else PENALTY


# --- optimisation -------------------------------------------------------------

@dataclass(frozen=True)
class FitConfig:
    """Settings for :func:`fit`.

    ``boxes`` overrides the ranges from which restarts are drawn (positive
    parameters log-uniformly, probabilities uniformly); keys are the base
    names ``lambda``, ``beta``, ``a``, ``b``, ``theta``, ``alpha``, ``p``.
    ``integer_n_search`` is the inclusive range of binomial ``n`` values.
    """

    family: str
    epsilon: float = 0.01
    restarts: int = 32
    max_iterations: int = 4000
    seed: int = 0
    integer_n_search: tuple[int, int] = (1, 2000)
    n_grid_points: int = 12
    components: int = 3
    boxes: dict | None = None

    def __post_init__(self):
        _layout(self.family, self.components)
        if not self.epsilon > 0.0:
            raise ValueError("epsilon must be positive")
        if self.restarts < 1:
            raise ValueError("restarts must be at least 1")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if self.components < 2:
            raise ValueError("components must be at least 2")
        lo, hi = self.integer_n_search
        if not (1 <= lo <= hi):
            raise ValueError("integer_n_search must satisfy 1 <= lo <= hi")

    def resolved_boxes(self) -> dict[str, tuple[float, float]]:
        boxes = dict(DEFAULT_BOXES)
        boxes.update(self.boxes or {})
        return boxes


@dataclass(frozen=True)
class FitResult:
    """Best parameters found, with the cost recomputed at those parameters.

    ``restart_costs`` holds the final cost of every local search that was run.
    """

    family: str
    parameters: dict
    cost: float
    converged: bool
    evaluations: int
    restart_costs: tuple[float, ...] = field(default=(), repr=False)

    def model(self) -> MixedKies:
        return model_from_parameters(self.family, self.parameters)

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "parameters": dict(self.parameters),
            "cost": self.cost,
            "converged": self.converged,
            "evaluations": self.evaluations,
        }


@dataclass
class _Search:
    """Best point and bookkeeping for the continuous part of one fit."""

    f: object
    max_iterations: int
    best_z: np.ndarray | None = None
    best_cost: float = math.inf
    converged: bool = False
    evaluations: int = 0
    costs: list = field(default_factory=list)

    def local(self, z0: np.ndarray) -> tuple[np.ndarray, float, bool]:
        res = optimize.minimize(
            self.f, z0, method="Nelder-Mead",
            options={
                "maxiter": self.max_iterations,
                "maxfev": 2 * self.max_iterations,
                "xatol": 1e-10,
                "fatol": 1e-12,
                "adaptive": len(z0) > 3,
            },
        )
        self.evaluations += int(res.nfev)
        cost = float(res.fun)
        self.costs.append(cost)
        if cost < self.best_cost:
            self.best_z, self.best_cost, self.converged = np.asarray(res.x), cost, bool(res.success)
        return np.asarray(res.x), cost, bool(res.success)

    def polish(self, max_rounds: int = 20) -> None:
        """Restart the simplex at the incumbent until the cost stops falling."""
        for _ in range(max_rounds):
            before = self.best_cost
            self.local(self.best_z)
            if not self.best_cost < before - 1e-12 * max(1.0, abs(before)):
                break


def _continuous_search(
    family: str,
    layout: _Layout,
    emp: EmpiricalPdf,
    config: FitConfig,
    rng: np.random.Generator,
    restarts: int,
    fixed: dict | None = None,
    warm: np.ndarray | None = None,
) -> _Search:
    fixed = fixed or {}
    boxes = config.resolved_boxes()

    def f(z):
        if not np.all(np.isfinite(z)):
            return PENALTY
        return objective(family, {**_decode(layout, z), **fixed}, emp, config.epsilon)

    search = _Search(f, config.max_iterations)
    starts = [] if warm is None else [warm]
    starts += [_random_start(layout, boxes, rng) for _ in range(restarts)]
    for z0 in starts:
        search.local(z0)
    search.polish()
    return search


def _integer_grid(lo: int, hi: int, points: int) -> list[int]:
    if hi - lo + 1 <= points:
        return list(range(lo, hi + 1))
    grid = np.unique(np.round(np.geomspace(lo, hi, points)).astype(int))
    return [int(v) for v in grid]


def _fit_binomial(layout, emp, config) -> tuple[dict, _Search, int, list]:
    lo, hi = config.integer_n_search
    coarse_restarts = max(2, config.restarts // 4)
    results: dict[int, _Search] = {}
    evaluations = 0
    costs: list[float] = []

    def run(n: int, restarts: int, warm=None) -> _Search:
        nonlocal evaluations
        rng = np.random.default_rng(np.random.SeedSequence(config.seed, spawn_key=(n, restarts)))
        s = _continuous_search("A4", layout, emp, config, rng, restarts, {"n": n}, warm)
        evaluations += s.evaluations
        costs.extend(s.costs)
        if n not in results or s.best_cost < results[n].best_cost:
            results[n] = s
        return s

    grid = _integer_grid(lo, hi, config.n_grid_points)
    for n in grid:
        run(n, coarse_restarts)
    best_n = min(results, key=lambda k: results[k].best_cost)

    # integer hill climb with a halving step, warm-started from the incumbent
    pos = grid.index(best_n)
    neighbours = [grid[j] for j in (pos - 1, pos + 1) if 0 <= j < len(grid)]
    step = max((abs(v - best_n) for v in neighbours), default=1) // 2
    while step >= 1:
        improved = False
        for cand in (best_n - step, best_n + step):
            if lo <= cand <= hi and cand not in results:
                run(cand, 1, warm=results[best_n].best_z)
                if results[cand].best_cost < results[best_n].best_cost:
                    best_n, improved = cand, True
        if not improved:
            step //= 2

    final = run(best_n, config.restarts, warm=results[best_n].best_z)
    best = results[best_n] if results[best_n].best_cost <= final.best_cost else final
    params = {**_decode(layout, best.best_z), "n": best_n}
    return params, best, evaluations, costs


def fit(family: str, emp: EmpiricalPdf, config: FitConfig | None = None) -> FitResult:
    """Minimise the histogram cost over the parameters of ``family``.

    Each restart draws a start point from the configured boxes and runs
    Nelder-Mead on log (positive), logit (probability) and softmax (table
    weight) coordinates; the best point is then re-polished until the cost
    stops decreasing.  The binomial ``n`` is searched on an integer grid with
    a continuous fit for each candidate.  Deterministic for a given seed.
    """
    config = config or FitConfig(family)
    if config.family != family:
        config = FitConfig(**{**config.__dict__, "family": family})
    layout = _layout(family, config.components)

    if family == "A4":
        params, best, evaluations, costs = _fit_binomial(layout, emp, config)
    else:
        rng = np.random.default_rng(np.random.SeedSequence(config.seed))
        best = _continuous_search(family, layout, emp, config, rng, config.restarts)
        params, evaluations, costs = _decode(layout, best.best_z), best.evaluations, best.costs

    cost = objective(family, params, emp, config.epsilon)
    return FitResult(
        family=family,
        parameters=params,
        cost=cost,
        converged=best.converged and cost < PENALTY,
        evaluations=evaluations,
        restart_costs=tuple(costs),
    )
