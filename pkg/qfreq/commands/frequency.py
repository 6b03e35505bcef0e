"""
frequency: radial profile of D, H and I around one center
"""
import argparse
import logging

from qfreq import storage
from qfreq.commands.common import apply_tolerances, load_source
from qfreq.errors import NumericError, QFreqError
from qfreq.frequency import log_radii, radial_profile
from qfreq.models.run import RunConfig

logger = logging.getLogger(__name__)


def cmd_frequency(config: RunConfig) -> dict:
    """Write profile.csv and a gnuplot script for I against log r"""
    try:
        apply_tolerances(config)
        curve = load_source(config)
        radii = log_radii(config.rmin, config.rmax, config.samples)
        profile = radial_profile(curve, config.center, radii)
        data = storage.write_profile(config.out / "profile.csv", profile)
        script = storage.write_plot_script(
            config.out / "profile.gp",
            data,
            f"I(x, r) at x = {config.center.real:g},{config.center.imag:g}",
        )
        last = profile.I[-1]
        if last is not None:
            print(f"I({config.rmax:g})={last:.10g}")
        return {"success": True, "profile": str(data), "plot": str(script), "radii": len(radii)}
    except QFreqError:
        raise
    except Exception as e:
        raise NumericError(f"Frequency profile failed: {e}")


def add_parser(subparsers: argparse._SubParsersAction, parent: argparse.ArgumentParser) -> None:
    parser = subparsers.add_parser("frequency", parents=[parent], help="radial frequency profile")
    parser.set_defaults(handler=cmd_frequency)
