"""
singular: records of the discriminant zeros and the D_Q count
"""
import argparse
import logging

from qfreq import storage
from qfreq.commands.common import apply_tolerances, load_source
from qfreq.curve_eval import subtract_barycenter_curve
from qfreq.errors import NumericError, QFreqError
from qfreq.models.curve import Disk
from qfreq.models.run import RunConfig
from qfreq.singular import detect_singular_points

logger = logging.getLogger(__name__)


def cmd_singular(config: RunConfig) -> dict:
    try:
        apply_tolerances(config)
        curve = subtract_barycenter_curve(load_source(config))
        region = Disk(center=0j, radius=config.radius)
        records = detect_singular_points(curve, region)
        path = storage.write_records(config.out / "singular.csv", records)
        count = sum(record.is_full_multiplicity for record in records)
        print(f"count={count}")
        logger.info(f"{len(records)} singular points, {count} of full multiplicity")
        return {"success": True, "records": len(records), "count": count, "path": str(path)}
    except QFreqError:
        raise
    except Exception as e:
        raise NumericError(f"Singular detection failed: {e}")


def add_parser(subparsers: argparse._SubParsersAction, parent: argparse.ArgumentParser) -> None:
    parser = subparsers.add_parser("singular", parents=[parent], help="detect Q-points")
    parser.set_defaults(handler=cmd_singular)
