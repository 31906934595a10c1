"""Command-line front-end.

Subcommands::

    kiesmix eval --model M [--which pdf|cdf|ccdf] [--grid N]
    kiesmix saturation --model M
    kiesmix sample --model M --n N --seed S [--out FILE]
    kiesmix fit DATA --family A1..A8 --preprocess divide:C|minmax [--bins M] [--out PREFIX]
    kiesmix shape --lambda L --beta B

``--model`` takes either an inline JSON document ``{"law": ..., "beta": ...}``
or the path of a file containing one.  Exit codes: 0 on success, 2 for usage
or input errors, 3 when the model fails its validity conditions.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from .fitting import FAMILIES, FitConfig, bin_data, fit, rescale_divide, rescale_minmax
from .kies import KiesParams, classify_shape
from .mixture import (
    InvalidModelError,
    MixedKies,
    left_endpoint,
    mix_ccdf,
    mix_cdf,
    mix_pdf,
    right_endpoint,
)
from .sampling import batch_to_csv, sample
from .saturation import saturation_algorithm1, saturation_fixed_point

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INVALID_MODEL = 3

AGREEMENT_TOL = 1e-9


class UsageError(Exception):
    """Bad input detected after argument parsing; maps to exit code 2."""


def _fmt(value: float) -> str:
    return f"{value:.15g}"


def _clean(obj):
    """Round floats to 15 significant digits and spell non-finite ones out."""
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return float(_fmt(v))
    return obj


def _dump(obj) -> str:
    return json.dumps(_clean(obj), indent=2, allow_nan=False) + "\n"


def _load_model(text: str) -> MixedKies:
    source = text.strip()
    if not source.startswith("{"):
        path = Path(source)
        try:
            source = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise UsageError(f"cannot read model file {text!r}: {exc}") from exc
    try:
        doc = json.loads(source)
    except json.JSONDecodeError as exc:
        raise UsageError(f"model is not valid JSON: {exc}") from exc
    try:
        return MixedKies.from_dict(doc)
    except InvalidModelError:
        raise
    except (ValueError, TypeError) as exc:
        raise UsageError(f"invalid model: {exc}") from exc


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def _nonnegative_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {value}")
    return value


def _positive_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not (value > 0.0 and math.isfinite(value)):
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text!r}")
    return value


def _int_range(text: str) -> tuple[int, int]:
    try:
        lo, hi = (int(v) for v in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO:HI, got {text!r}") from None
    if not 1 <= lo <= hi:
        raise argparse.ArgumentTypeError("range must satisfy 1 <= LO <= HI")
    return lo, hi


# --- commands -----------------------------------------------------------------

def cmd_eval(args, out) -> int:
    model = _load_model(args.model)
    fn = {"pdf": mix_pdf, "cdf": mix_cdf, "ccdf": mix_ccdf}[args.which]
    t = np.arange(1, args.grid + 1) / (args.grid + 1.0)
    values = np.asarray(fn(model, t), dtype=float)
    out.write(f"# left_endpoint={_fmt(left_endpoint(model))}\n")
    out.write(f"# right_endpoint={_fmt(right_endpoint(model))}\n")
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["t", args.which])
    writer.writerows([_fmt(a), _fmt(b)] for a, b in zip(t, values))
    return EXIT_OK


def cmd_saturation(args, out) -> int:
    model = _load_model(args.model)
    alg = saturation_algorithm1(model)
    fixed = saturation_fixed_point(model)
    doc = {
        "x_bar": alg.x_bar,
        "d": alg.d,
        "residual": alg.residual,
        "tau": None if alg.tau is None else list(alg.tau),
        "method": alg.method.value,
        "fixed_point_d": fixed.d,
        "methods_agree": abs(alg.d - fixed.d) <= AGREEMENT_TOL,
    }
    out.write(_dump(doc))
    return EXIT_OK


def cmd_sample(args, out) -> int:
    model = _load_model(args.model)
    batch = sample(model, args.seed, args.n)
    text = batch_to_csv(batch)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        out.write(text)
    return EXIT_OK


def read_observations(path: str) -> np.ndarray:
    """First column of a CSV file; a single non-numeric header row is skipped."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise UsageError(f"cannot read data file {path!r}: {exc}") from exc
    rows = [row for row in csv.reader(io.StringIO(text)) if row and row[0].strip()]
    values = []
    for i, row in enumerate(rows):
        try:
            values.append(float(row[0]))
        except ValueError:
            if i == 0:
                continue
            raise UsageError(f"non-numeric value {row[0]!r} on data row {i + 1}") from None
    if not values:
        raise UsageError(f"data file {path!r} holds no observations")
    data = np.asarray(values)
    if not np.all(np.isfinite(data)):
        raise UsageError("data contains non-finite values")
    return data


def _preprocess(data: np.ndarray, spec: str) -> np.ndarray:
    try:
        if spec == "minmax":
            return rescale_minmax(data)
        if spec.startswith("divide:"):
            return rescale_divide(data, float(spec.split(":", 1)[1]))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    raise UsageError(f"unknown preprocessing {spec!r}; use 'minmax' or 'divide:C'")


def cmd_fit(args, out) -> int:
    data = _preprocess(read_observations(args.data), args.preprocess)
    try:
        _, emp = bin_data(data, args.bins)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    config = FitConfig(
        family=args.family,
        epsilon=args.epsilon,
        restarts=args.restarts,
        max_iterations=args.max_iterations,
        seed=args.seed,
        integer_n_search=args.n_range,
        components=args.components,
    )
    result = fit(args.family, emp, config)
    doc = {**result.to_dict(), "bins": args.bins, "epsilon": args.epsilon}
    text = _dump(doc)
    if args.out:
        Path(f"{args.out}.json").write_text(text, encoding="utf-8")
        l_th = np.asarray(mix_pdf(result.model(), emp.centers), dtype=float)
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["center", "l_emp", "l_th"])
        writer.writerows(
            [_fmt(c), _fmt(e), _fmt(t)] for c, e, t in zip(emp.centers, emp.values, l_th)
        )
        Path(f"{args.out}_bins.csv").write_text(buf.getvalue(), encoding="utf-8")
    out.write(text)
    return EXIT_OK


def cmd_shape(args, out) -> int:
    try:
        params = KiesParams(args.lam, args.beta)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    out.write(_dump(classify_shape(params).to_dict()))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kiesmix", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", help="evaluate pdf/cdf/ccdf on a uniform grid")
    p.add_argument("--model", required=True, help="inline JSON or path to a model file")
    p.add_argument("--which", choices=("pdf", "cdf", "ccdf"), default="pdf")
    p.add_argument("--grid", type=_positive_int, default=99, help="interior points k/(N+1)")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("saturation", help="Hausdorff saturation by both methods")
    p.add_argument("--model", required=True)
    p.set_defaults(func=cmd_saturation)

    p = sub.add_parser("sample", help="draw a reproducible sample")
    p.add_argument("--model", required=True)
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--seed", type=_nonnegative_int, default=0)
    p.add_argument("--out", help="write the CSV here instead of stdout")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("fit", help="calibrate a model family to data")
    p.add_argument("data", help="single-column CSV of raw observations")
    p.add_argument("--family", choices=FAMILIES, required=True)
    p.add_argument("--preprocess", default="minmax", help="'minmax' or 'divide:C'")
    p.add_argument("--bins", type=_positive_int, default=50)
    p.add_argument("--epsilon", type=_positive_float, default=0.01)
    p.add_argument("--seed", type=_nonnegative_int, default=0)
    p.add_argument("--restarts", type=_positive_int, default=32)
    p.add_argument("--max-iterations", type=_positive_int, default=4000)
    p.add_argument("--components", type=_positive_int, default=3, help="A3 table size")
    p.add_argument("--n-range", type=_int_range, default=(1, 2000), help="binomial n as LO:HI")
    p.add_argument("--out", help="prefix for PREFIX.json and PREFIX_bins.csv")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("shape", help="shape classification of a Kies density")
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.set_defaults(func=cmd_shape)
    return parser


def main(argv: list[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args, out)
    except InvalidModelError as exc:
        print(f"kiesmix: invalid model: {exc}", file=sys.stderr)
        return EXIT_INVALID_MODEL
    except UsageError as exc:
        print(f"kiesmix: {exc}", file=sys.stderr)
        return EXIT_USAGE
