"""
count: covering trace and the exponential bound certificate
"""
import argparse
import logging

from qfreq import storage
from qfreq.commands.common import apply_tolerances, covering_config, load_source
from qfreq.covering import covering_count, theorem_bound_report
from qfreq.curve_eval import subtract_barycenter_curve
from qfreq.errors import NumericError, QFreqError
from qfreq.models.covering import BoundReport
from qfreq.models.run import RunConfig

logger = logging.getLogger(__name__)


def certificate_line(report: BoundReport, lambda_: float) -> str:
    frequency = "nan" if report.frequency is None else f"{report.frequency:.10g}"
    base = "nan" if report.fitted_base is None else f"{report.fitted_base:.10g}"
    return (
        f"count={report.count} I02={frequency} fitted_base={base} "
        f"cert=(4/{lambda_:g}^2)^{report.xi_sum}={report.proof_bound:.10g}"
    )


def cmd_count(config: RunConfig) -> dict:
    try:
        apply_tolerances(config)
        curve = subtract_barycenter_curve(load_source(config))
        constants = covering_config(config)
        trace = covering_count(curve, constants)
        report = theorem_bound_report(curve, constants, strict=True)
        path = storage.write_trace(config.out / "trace.csv", trace)
        line = certificate_line(report, constants.lambda_)
        storage.write_text_atomic(config.out / "certificate.txt", line + "\n")
        print(line)
        return {"success": True, "count": report.count, "xi_sum": trace.xi_sum, "trace": str(path)}
    except QFreqError:
        raise
    except Exception as e:
        raise NumericError(f"Covering count failed: {e}")


def add_parser(subparsers: argparse._SubParsersAction, parent: argparse.ArgumentParser) -> None:
    parser = subparsers.add_parser("count", parents=[parent], help="covering count and certificate")
    parser.set_defaults(handler=cmd_count)
