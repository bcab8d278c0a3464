"""
Command-line front end

    speeduplab speedup   (MODEL | --fraction F) [--g EXPR | --n N] [--p-min --p-max --points]
    speeduplab exponent  MODEL (--g EXPR | --n N) [--p-min --p-max --points]
    speeduplab classify  MODEL [--family EXPR ...] [--tol T]
    speeduplab superlinear (--p P [--speedup S] | --C C --n N)
    speeduplab fit       TEMPLATE MEASUREMENTS.csv [--classify [--family EXPR ...]]
    speeduplab fig4      [--p-min --p-max --points]

MODEL is a bundled model name (trapezoid, matvec, fft) or a model file.
Curves are written as CSV (header p,<quantity>), reports as JSON; logs
go to stderr.

Exit codes: 0 success, 2 usage, 3 evaluation or model error, 4 data error.
"""

import argparse
import csv
import io
import json
import logging
import math
import sys
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional, Sequence, TextIO, Tuple, Union

from speeduplab import __version__
from speeduplab.amdahl_core import Outcome, speedup_from_fraction
from speeduplab.asymptotics import Schedule, exponent_at_ratio
from speeduplab.classifier import classification_to_dict, classify, geometric_grid
from speeduplab.config import configure_logging, get_settings
from speeduplab.errors import (
    ConfigurationError,
    DataError,
    ExprSyntaxError,
    SpeedupLabError,
    UsageError,
)
from speeduplab.fitting import (
    BUNDLED_TEMPLATES,
    fit,
    get_template,
    model_from_fit,
    read_measurements_csv,
)
from speeduplab.model_library import (
    GrowthFunction,
    default_family,
    growth_function,
    model_speedup,
    resolve_model,
)
from speeduplab.superlinear import (
    fft_superlinear_pmax,
    fft_superlinear_scan,
    superlinear_report,
    superlinear_threshold_approx,
    superlinear_threshold_exact,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_EVALUATION = 3
EXIT_DATA = 4

NOT_APPLICABLE = "not_applicable"

CurveValue = Union[float, str]


@dataclass(frozen=True)
class CurveSeries:
    label: str
    points: Tuple[Tuple[float, CurveValue], ...]


# Curve CSV

def format_curve(series: CurveSeries) -> str:
    """CSV text with header p,<label>; floats use repr so values round-trip"""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["p", series.label])
    for x, y in series.points:
        writer.writerow([repr(x), y if isinstance(y, str) else repr(y)])
    return buffer.getvalue()


def read_curve_csv(stream: TextIO) -> CurveSeries:
    """
    Parse curve CSV written by format_curve

    Raises:
        DataError: Wrong header, unparsable values or p not strictly increasing
    """
    reader = csv.reader(stream)
    header = next(reader, None)
    if not header or len(header) != 2 or header[0] != "p":
        raise DataError(f"Expected curve header 'p,<quantity>', got {header!r}")
    points: List[Tuple[float, CurveValue]] = []
    for row in reader:
        if not row:
            continue
        try:
            x = float(row[0])
            y: CurveValue = row[1] if row[1] == NOT_APPLICABLE else float(row[1])
        except (ValueError, IndexError) as e:
            raise DataError(f"Bad curve row at line {reader.line_num}: {e}")
        if points and x <= points[-1][0]:
            raise DataError(f"p not strictly increasing at line {reader.line_num}")
        points.append((x, y))
    return CurveSeries(header[1], tuple(points))


# Argument helpers

def _grid(args: argparse.Namespace) -> List[float]:
    if not args.p_min > 1:
        raise UsageError(f"--p-min must exceed 1, got {args.p_min!r}")
    if not args.p_max > args.p_min:
        raise UsageError("--p-max must exceed --p-min")
    if args.points < 2:
        raise UsageError("--points must be >= 2")
    return geometric_grid(args.p_min, args.p_max, args.points)


def _growth(source: str) -> GrowthFunction:
    try:
        return growth_function(source)
    except ExprSyntaxError as e:
        raise UsageError(f"Invalid growth expression {source!r}: {e}") from e


def _dimension(args: argparse.Namespace) -> Callable[[float], float]:
    if (args.g is None) == (args.n is None):
        raise UsageError("give exactly one of --g and --n")
    if args.g is not None:
        return _growth(args.g)
    n = args.n
    if not (math.isfinite(n) and n >= 1):
        raise UsageError(f"--n must be >= 1, got {n!r}")
    return lambda p: n


def _family(sources: Optional[Sequence[str]]) -> Tuple[GrowthFunction, ...]:
    if not sources:
        return default_family()
    return tuple(_growth(source) for source in sources)


def _print_json(document: Dict[str, Any], out: TextIO) -> None:
    out.write(json.dumps(document, indent=2) + "\n")


# Commands

def cmd_speedup(args: argparse.Namespace, out: TextIO) -> int:
    grid = _grid(args)
    if args.fraction is not None:
        if args.model is not None or args.g is not None or args.n is not None:
            raise UsageError("--fraction takes no model, --g or --n")
        if not 0 < args.fraction <= 1:
            raise UsageError(f"--fraction must lie in (0, 1], got {args.fraction!r}")
        points = tuple((p, speedup_from_fraction(args.fraction, p)) for p in grid)
    else:
        if args.model is None:
            raise UsageError("give a model or --fraction")
        model = resolve_model(args.model)
        dimension = _dimension(args)
        points = tuple((p, model_speedup(model, p, dimension(p))) for p in grid)
    out.write(format_curve(CurveSeries("speedup", points)))
    return EXIT_OK


def cmd_exponent(args: argparse.Namespace, out: TextIO) -> int:
    grid = _grid(args)
    model = resolve_model(args.model)
    dimension = _dimension(args)
    boundary = get_settings().limit_tol

    points = []
    for p in grid:
        value = exponent_at_ratio(model.time_ratio(p, dimension(p)), boundary)
        points.append((p, NOT_APPLICABLE if value is Outcome.NOT_APPLICABLE else value))
    out.write(format_curve(CurveSeries("exponent", tuple(points))))
    return EXIT_OK


def cmd_classify(args: argparse.Namespace, out: TextIO) -> int:
    model = resolve_model(args.model)
    tol = args.tol if args.tol is not None else get_settings().zero_tolerance
    result = classify(model, _family(args.family), Schedule.default(), tol)
    document = {"model": model.name, **classification_to_dict(result)}
    _print_json(document, out)
    return EXIT_OK


def cmd_superlinear(args: argparse.Namespace, out: TextIO) -> int:
    if args.p is not None:
        if args.c is not None or args.n is not None:
            raise UsageError("--p cannot be combined with --C/--n")
        if not (math.isfinite(args.p) and args.p > 1):
            raise UsageError(f"p must exceed 1, got {args.p!r}")
        document: Dict[str, Any] = {
            "p": args.p,
            "threshold_exact": superlinear_threshold_exact(args.p),
            "threshold_approx": superlinear_threshold_approx(args.p),
        }
        if args.speedup is not None:
            if not (math.isfinite(args.speedup) and args.speedup > 0):
                raise UsageError(f"--speedup must be positive, got {args.speedup!r}")
            document["report"] = superlinear_report(args.speedup, args.p).to_dict()
    else:
        if args.c is None or args.n is None:
            raise UsageError("give --p, or both --C and --n")
        if args.speedup is not None:
            raise UsageError("--speedup needs --p")
        if not (math.isfinite(args.c) and args.c > 0):
            raise UsageError(f"--C must be positive, got {args.c!r}")
        if not (math.isfinite(args.n) and args.n >= 1):
            raise UsageError(f"--n must be >= 1, got {args.n!r}")
        document = {
            "C": args.c,
            "n": args.n,
            "p_bound": fft_superlinear_pmax(args.c, args.n),
            "p_max_integer": fft_superlinear_scan(args.c, args.n),
        }
    _print_json(document, out)
    return EXIT_OK


def cmd_fit(args: argparse.Namespace, out: TextIO) -> int:
    if args.family and not args.classify:
        raise UsageError("--family needs --classify")
    tmpl = get_template(args.template)
    samples = read_measurements_csv(args.measurements)
    result = fit(tmpl, samples)
    document: Dict[str, Any] = {"fit": result.to_dict()}
    if args.classify:
        tol = args.tol if args.tol is not None else get_settings().zero_tolerance
        classification = classify(model_from_fit(tmpl, result), _family(args.family),
                                  Schedule.default(), tol)
        document["classification"] = classification_to_dict(classification)
    _print_json(document, out)
    return EXIT_OK


def cmd_fig4(args: argparse.Namespace, out: TextIO) -> int:
    if not args.p_min >= 2:
        raise UsageError(f"--p-min must be >= 2, got {args.p_min!r}")
    grid = _grid(args)
    points = tuple((p, superlinear_threshold_approx(p)) for p in grid)
    out.write(format_curve(CurveSeries("threshold", points)))
    return EXIT_OK


def _add_grid_arguments(parser: argparse.ArgumentParser, p_max: float) -> None:
    parser.add_argument("--p-min", type=float, default=2.0, help="Smallest processor count (default: 2)")
    parser.add_argument("--p-max", type=float, default=p_max, help=f"Largest processor count (default: {p_max:g})")
    parser.add_argument("--points", type=int, default=50, help="Number of grid points (default: 50)")


def build_arg_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="speeduplab",
        description="Speedup, exponent of parallelism and parallelism classification of cost models",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--log-level", default=None, help="Override SPEEDUPLAB_LOG_LEVEL")
    commands = parser.add_subparsers(dest="command", required=True)

    speedup = commands.add_parser("speedup", help="Speedup curve as p,speedup CSV")
    speedup.add_argument("model", nargs="?", help="Bundled model name or model file")
    speedup.add_argument("--fraction", type=float, help="Classical Amdahl model with this parallel fraction")
    speedup.add_argument("--g", help="Growth expression n = g(p)")
    speedup.add_argument("--n", type=float, help="Fixed problem dimension")
    _add_grid_arguments(speedup, 2.0 ** 20)
    speedup.set_defaults(handler=cmd_speedup)

    exponent = commands.add_parser("exponent", help="Exponent of parallelism as p,exponent CSV")
    exponent.add_argument("model", help="Bundled model name or model file")
    exponent.add_argument("--g", help="Growth expression n = g(p)")
    exponent.add_argument("--n", type=float, help="Fixed problem dimension")
    _add_grid_arguments(exponent, 2.0 ** 20)
    exponent.set_defaults(handler=cmd_exponent)

    classify_parser = commands.add_parser("classify", help="Classify a model as JSON")
    classify_parser.add_argument("model", help="Bundled model name or model file")
    classify_parser.add_argument("--family", nargs="+", help="Growth expressions (default: p, p*log(p), p^2, 100*p, p^3)")
    classify_parser.add_argument("--tol", type=float, help="Zero tolerance for exponent limits")
    classify_parser.set_defaults(handler=cmd_classify)

    superlinear = commands.add_parser("superlinear", help="Superlinearity thresholds and FFT processor bound")
    superlinear.add_argument("--p", type=float, help="Processor count")
    superlinear.add_argument("--speedup", type=float, help="Measured speedup to test against the thresholds")
    superlinear.add_argument("--C", dest="c", type=float, help="FFT constant ratio A/B")
    superlinear.add_argument("--n", type=float, help="FFT problem dimension")
    superlinear.set_defaults(handler=cmd_superlinear)

    fit_parser = commands.add_parser("fit", help="Fit template constants from a measurement CSV")
    fit_parser.add_argument("template", choices=sorted(BUNDLED_TEMPLATES), help="Model template")
    fit_parser.add_argument("measurements", help="CSV with header p,n,time_seconds")
    fit_parser.add_argument("--classify", action="store_true", help="Also classify the fitted model")
    fit_parser.add_argument("--family", nargs="+", help="Growth expressions for --classify")
    fit_parser.add_argument("--tol", type=float, help="Zero tolerance for exponent limits")
    fit_parser.set_defaults(handler=cmd_fit)

    fig4 = commands.add_parser("fig4", help="Approximate superlinearity threshold as p,threshold CSV")
    _add_grid_arguments(fig4, 1000.0)
    fig4.set_defaults(handler=cmd_fig4)

    return parser


def exit_code_for(error: SpeedupLabError) -> int:
    if isinstance(error, (UsageError, ConfigurationError)):
        return EXIT_USAGE
    if isinstance(error, DataError):
        return EXIT_DATA
    return EXIT_EVALUATION


def main(argv: Optional[Sequence[str]] = None, out: Optional[TextIO] = None) -> int:
    """
    Run one command

    Args:
        argv: Arguments without the program name, default sys.argv[1:]
        out: Stream for CSV/JSON output, default stdout

    Returns:
        int: Process exit code
    """
    out = out or sys.stdout
    parser = build_arg_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE

    try:
        level = args.log_level.upper() if args.log_level else None
        if level is not None and not isinstance(logging.getLevelName(level), int):
            raise UsageError(f"unknown log level: {args.log_level}")
        configure_logging(level)
        logger.info(f"[CLI] Running {args.command}")
        code = args.handler(args, out)
        logger.info(f"[CLI] ✓ {args.command} finished")
        return code
    except SpeedupLabError as e:
        code = exit_code_for(e)
        logger.error(f"[CLI] ✗ {args.command} failed: {e}")
        print(f"error: {e}", file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())
