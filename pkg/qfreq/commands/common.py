"""
Flags and curve loading shared by every command
"""
import argparse
import logging
from typing import Any

from pydantic import ValidationError

from qfreq.config import settings
from qfreq.curve_eval import load_curve, make_f_eps, make_g_eps
from qfreq.errors import QFreqError, UsageError
from qfreq.models.covering import CoveringConfig
from qfreq.models.curve import AlgebraicCurve
from qfreq.models.run import RunConfig

logger = logging.getLogger(__name__)

# z_i used by --example f when --zi is not given
DEFAULT_Z_LIST = (0.3 + 0j, -0.15 + 0.3j, -0.15 - 0.3j)


def parse_complex(text: str) -> complex:
    """'x,y' or a single real number"""
    parts = text.split(",")
    try:
        if len(parts) == 1:
            return complex(float(parts[0]), 0.0)
        if len(parts) == 2:
            return complex(float(parts[0]), float(parts[1]))
    except ValueError:
        pass
    raise argparse.ArgumentTypeError(f"expected x,y but got {text!r}")


def common_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(add_help=False)
    source = parser.add_argument_group("curve")
    source.add_argument("--curve", dest="curve_file", help="JSON curve descriptor")
    source.add_argument("--example", choices=["f", "g"], help="built-in example family")
    source.add_argument("--eps", type=float, default=0.1)
    source.add_argument("--zi", dest="z_list", type=parse_complex, nargs="+", help="points z_i as x,y")
    parser.add_argument("--center", type=parse_complex, default=0j)
    parser.add_argument("--rmin", type=float, default=0.01)
    parser.add_argument("--rmax", type=float, default=2.0)
    parser.add_argument("--samples", type=int, default=20)
    parser.add_argument("--lambda", dest="lambda_", type=float, default=settings.LAMBDA)
    parser.add_argument("--delta", type=float, default=settings.DELTA)
    parser.add_argument("--max-depth", type=int, default=settings.MAX_DEPTH)
    parser.add_argument("--radius", type=float, default=0.5)
    parser.add_argument("--resolution", type=int, default=40)
    parser.add_argument("--max-iter", type=int, default=settings.MINIMIZE_MAX_ITER)
    parser.add_argument("--weighting", choices=["cotangent", "uniform"], default="cotangent")
    parser.add_argument("--collapse-tol", type=float, default=settings.COLLAPSE_TOL)
    parser.add_argument("--extrapolation-tol", type=float, default=settings.EXTRAPOLATION_TOL)
    parser.add_argument("--flux-rtol", type=float, default=settings.FLUX_RTOL)
    parser.add_argument("--out", default=settings.OUTPUT_DIR)
    return parser


def build_run_config(args: argparse.Namespace) -> RunConfig:
    """Validate the flags before anything is computed"""
    fields: dict[str, Any] = {
        "curve_file": args.curve_file,
        "example": args.example,
        "eps": args.eps,
        "z_list": list(args.z_list) if args.z_list else list(DEFAULT_Z_LIST),
        "center": args.center,
        "rmin": args.rmin,
        "rmax": args.rmax,
        "samples": args.samples,
        "lambda_": args.lambda_,
        "delta": args.delta,
        "max_depth": args.max_depth,
        "radius": args.radius,
        "resolution": args.resolution,
        "max_iter": args.max_iter,
        "weighting": args.weighting,
        "collapse_tol": args.collapse_tol,
        "extrapolation_tol": args.extrapolation_tol,
        "flux_rtol": args.flux_rtol,
        "out": args.out,
    }
    try:
        return RunConfig(**fields)
    except ValidationError as e:
        raise UsageError(f"invalid configuration: {e.errors()[0]['msg']}")


def apply_tolerances(config: RunConfig) -> None:
    """Push the run tolerances into the shared settings"""
    settings.COLLAPSE_TOL = config.collapse_tol
    settings.EXTRAPOLATION_TOL = config.extrapolation_tol
    settings.FLUX_RTOL = config.flux_rtol


def load_source(config: RunConfig) -> AlgebraicCurve:
    if config.curve_file is not None:
        if not config.curve_file.is_file():
            raise UsageError("curve file not found", path=str(config.curve_file))
        try:
            return load_curve(config.curve_file)
        except QFreqError:
            raise
        except (ValidationError, ValueError) as e:
            raise UsageError(f"invalid curve descriptor: {e}", path=str(config.curve_file))
    if config.example == "g":
        return make_g_eps(config.eps)
    return make_f_eps(config.eps, config.z_list)


def covering_config(config: RunConfig) -> CoveringConfig:
    return CoveringConfig(lambda_=config.lambda_, delta=config.delta, max_depth=config.max_depth)
