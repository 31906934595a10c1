"""Quantiles and exact two-stage sampling of Kies mixtures.

A draw first picks the scale ``lam`` (and, for per-component tables, the
power ``beta``) from the mixing law, then pushes an independent uniform
through the closed-form Kies quantile.

Random numbers come from counter-based Philox generators.  Draw ``i`` belongs
to block ``i // BLOCK_SIZE``, and every block owns two substreams derived from
``SeedSequence(seed, spawn_key=(block, stream))``: one for the mixing law and
one for the uniforms.  A batch is therefore a pure function of
``(seed, model, n)``, blocks can be generated in any order, and a shorter
batch is a prefix of a longer one.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._numeric import as_array, bisect_increasing, check_open_unit, unwrap
from .laws import DiscreteTable
from .mixture import MixedKies, mix_cdf

__all__ = [
    "BLOCK_SIZE",
    "SampleBatch",
    "mix_quantile",
    "sample",
    "mc_cdf",
    "write_csv",
    "batch_to_csv",
]

BLOCK_SIZE = 4096
_LAW_STREAM = 0
_UNIFORM_STREAM = 1
_TINY = np.finfo(np.float64).tiny
_BELOW_ONE = np.nextafter(1.0, 0.0)


@dataclass(frozen=True)
class SampleBatch:
    """Draws from a mixture together with what produced them."""

    values: np.ndarray
    seed: int
    law_descriptor: dict

    def __len__(self) -> int:
        return len(self.values)


def mix_quantile(m: MixedKies, u):
    """Inverse of the mixture CDF by bisection on ``(ulp, 1 - ulp)``.

    Runs until the bracket cannot be split further in floating point.
    """
    u, scalar = as_array(u)
    check_open_unit(u, "u")
    t = bisect_increasing(lambda x: np.asarray(mix_cdf(m, x)), u, _TINY, _BELOW_ONE, maxiter=1100)
    return unwrap(t, scalar)


def _block_generators(seed: int, block: int) -> tuple[np.random.Generator, np.random.Generator]:
    def make(stream: int) -> np.random.Generator:
        ss = np.random.SeedSequence(seed, spawn_key=(block, stream))
        return np.random.Generator(np.random.Philox(ss))

    return make(_LAW_STREAM), make(_UNIFORM_STREAM)


def _draw_block(m: MixedKies, seed: int, block: int, size: int) -> np.ndarray:
    rng_law, rng_u = _block_generators(seed, block)
    law = m.law
    if m.per_component:
        assert isinstance(law, DiscreteTable)
        idx = law.sample_index(rng_law, size)
        lam = np.asarray(law.lams)[idx]
        beta = np.asarray(m.beta)[idx]
    else:
        lam = np.asarray(law.sample(rng_law, size), dtype=float)
        beta = m.beta
    # standard exponential from a uniform on (0, 1]; y is then Weibull(lam, beta)
    e = -np.log1p(-rng_u.random(size))
    with np.errstate(divide="ignore", over="ignore"):
        y = (e / lam) ** (1.0 / beta)
        t = y / (1.0 + y)
    t = np.where(np.isinf(y), 1.0, t)
    # extreme tails that round onto an endpoint are pulled back inside (0, 1)
    return np.clip(t, _TINY, _BELOW_ONE)


def sample(m: MixedKies, seed: int, n: int) -> SampleBatch:
    """Draw ``n`` values from the mixture; bitwise reproducible per seed."""
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    n = int(n)
    seed = int(seed)
    if seed < 0:
        raise ValueError("seed must be non-negative")
    chunks = []
    for block, start in enumerate(range(0, n, BLOCK_SIZE)):
        chunks.append(_draw_block(m, seed, block, min(BLOCK_SIZE, n - start)))
    return SampleBatch(np.concatenate(chunks), seed, m.to_dict())


def mc_cdf(batch: SampleBatch, t):
    """Empirical CDF: the fraction of values at or below ``t``."""
    if len(batch) == 0:
        raise ValueError("empty batch")
    t, scalar = as_array(t)
    ordered = np.sort(batch.values)
    out = np.searchsorted(ordered, t, side="right") / len(ordered)
    return unwrap(out.astype(float), scalar)


def batch_to_csv(batch: SampleBatch) -> str:
    """One value per line under a header ``x``, 15 significant digits."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["x"])
    writer.writerows([f"{v:.15g}"] for v in batch.values)
    return buf.getvalue()


def write_csv(batch: SampleBatch, path: str | Path) -> None:
    Path(path).write_text(batch_to_csv(batch), encoding="utf-8")
