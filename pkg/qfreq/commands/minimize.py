"""
minimize: discrete Dirichlet minimization for the curve's boundary trace
"""
import argparse
import logging

import numpy as np

from qfreq import storage
from qfreq.commands.common import load_source
from qfreq.errors import DegenerateHeightError, NumericError, QFreqError
from qfreq.graph_dirichlet import boundary_trace, build_disk_mesh, compare_frequency_discrete, minimize
from qfreq.models.run import RunConfig

logger = logging.getLogger(__name__)


def cmd_minimize(config: RunConfig) -> dict:
    try:
        curve = load_source(config)
        mesh = build_disk_mesh(config.resolution, config.weighting)
        boundary = boundary_trace(curve, mesh)
        result = minimize(mesh, boundary, max_iter=config.max_iter)
        paths = storage.write_mesh(config.out, mesh, result.labeling)
        paths.append(storage.write_convergence(config.out / "convergence.csv", result.log))
        radii = [r for r in np.arange(1, config.resolution + 1) / config.resolution if 0.3 <= r <= 0.9]
        try:
            profile = compare_frequency_discrete(mesh, result.labeling, radii)
            paths.append(storage.write_profile(config.out / "discrete_profile.csv", profile))
        except DegenerateHeightError as e:
            logger.warning(f"Skipping the discrete profile: {e}")
        print(f"energy={result.energy:.10g} iterations={result.iterations}")
        return {
            "success": True,
            "energy": result.energy,
            "iterations": result.iterations,
            "converged": result.converged,
            "files": [str(path) for path in paths],
        }
    except QFreqError:
        raise
    except Exception as e:
        raise NumericError(f"Minimization failed: {e}")


def add_parser(subparsers: argparse._SubParsersAction, parent: argparse.ArgumentParser) -> None:
    parser = subparsers.add_parser("minimize", parents=[parent], help="discrete Dirichlet minimization")
    parser.set_defaults(handler=cmd_minimize)
