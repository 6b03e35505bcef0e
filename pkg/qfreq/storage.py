"""
CSV and plot-script persistence

Every file is written to a temporary sibling and renamed into place, so a
failed command never leaves a partial file behind.
"""
import csv
import io
import logging
import os
import tempfile
from pathlib import Path
from typing import Any, Iterable, Sequence, Union

import numpy as np

from qfreq.models.covering import CoveringTrace
from qfreq.models.mesh import ConvergenceStep, DiskMesh, QLabeling
from qfreq.models.profile import RadialProfile
from qfreq.models.singular import SingularPointRecord

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def format_value(value: Any) -> str:
    """Floats with 17 significant digits, booleans as 0/1, None as empty"""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def ensure_dir(path: PathLike) -> Path:
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    return path


def write_text_atomic(path: PathLike, text: str) -> Path:
    path = Path(path)
    ensure_dir(path.parent)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    logger.info(f"Wrote {path}")
    return path


def write_csv(path: PathLike, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_value(value) for value in row])
    return write_text_atomic(path, buffer.getvalue())


def write_profile(path: PathLike, profile: RadialProfile) -> Path:
    rows = zip(profile.radii, profile.D, profile.H, profile.I)
    return write_csv(path, ["r", "D", "H", "I"], rows)


def write_records(path: PathLike, records: Sequence[SingularPointRecord]) -> Path:
    header = [
        "location_re",
        "location_im",
        "fiber_diameter",
        "small_scale_frequency",
        "is_full_multiplicity",
        "multiplicity",
    ]
    rows = (
        (
            record.location.real,
            record.location.imag,
            record.fiber_diameter,
            record.small_scale_frequency,
            record.is_full_multiplicity,
            record.multiplicity,
        )
        for record in records
    )
    return write_csv(path, header, rows)


def write_trace(path: PathLike, trace: CoveringTrace) -> Path:
    """One row per level followed by a summary line"""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["level", "center_re", "center_im", "N_k", "J_k", "xi"])
    for level in trace.levels:
        writer.writerow([
            format_value(value)
            for value in (level.level, level.center.real, level.center.imag, level.count, level.subcover_size, level.xi)
        ])
    writer.writerow([
        "# summary",
        f"final_depth={trace.final_depth}",
        f"xi_sum={trace.xi_sum}",
        f"bound={format_value(trace.certified_bound)}",
        f"holds={int(trace.certificate_holds)}",
    ])
    return write_text_atomic(path, buffer.getvalue())


def write_mesh(directory: PathLike, mesh: DiskMesh, labeling: QLabeling, prefix: str = "") -> list[Path]:
    """Vertex, edge and label tables"""
    directory = ensure_dir(directory)
    vertices = write_csv(
        directory / f"{prefix}vertices.csv",
        ["index", "x", "y", "ring", "boundary"],
        (
            (i, x, y, ring, boundary)
            for i, ((x, y), ring, boundary) in enumerate(zip(mesh.vertices, mesh.ring_index, mesh.boundary))
        ),
    )
    edges = write_csv(
        directory / f"{prefix}edges.csv",
        ["u", "v", "weight"],
        ((u, v, w) for (u, v), w in zip(mesh.edges, mesh.weights)),
    )
    q = labeling.q
    header = ["index"] + [f"{part}{i}" for i in range(q) for part in ("re", "im")]
    labels = write_csv(
        directory / f"{prefix}labels.csv",
        header,
        ([v] + [c for value in row for c in (value.real, value.imag)] for v, row in enumerate(labeling.labels)),
    )
    return [vertices, edges, labels]


def write_convergence(path: PathLike, log: Sequence[ConvergenceStep]) -> Path:
    return write_csv(
        path,
        ["iteration", "energy", "matching_changes"],
        ((step.iteration, step.energy, step.matching_changes) for step in log),
    )


def write_plot_script(path: PathLike, data_file: PathLike, title: str) -> Path:
    """gnuplot script for I against log r"""
    script = "\n".join([
        "set datafile separator ','",
        "set key autotitle columnhead",
        "set logscale x",
        "set xlabel 'r'",
        "set ylabel 'I(x, r)'",
        f"set title '{title}'",
        f"plot '{Path(data_file).name}' using 1:4 with linespoints title 'I'",
        "",
    ])
    return write_text_atomic(path, script)
