"""
Discrete Dirichlet minimization of Q-valued maps on a triangulated unit disk
"""
import logging
from typing import Literal, Optional, Sequence

import numpy as np
from scipy.sparse import coo_matrix, csr_matrix
from scipy.sparse.linalg import spsolve
from scipy.spatial import Delaunay

from qfreq.aq_space import batch_metric_sq, batch_optimal_matching
from qfreq.config import settings
from qfreq.curve_eval import fiber_array
from qfreq.errors import (
    DegenerateHeightError,
    DimensionMismatchError,
    DomainError,
    EnergyIncreaseError,
    PreconditionError,
    ResolutionError,
    SolverError,
)
from qfreq.models.curve import AlgebraicCurve
from qfreq.models.mesh import BasinReport, ConvergenceStep, DiskMesh, MinimizeResult, QLabeling
from qfreq.models.profile import RadialProfile

logger = logging.getLogger(__name__)

UNIFORM_WEIGHT = 1.0 / np.sqrt(3.0)  # the cotangent weight of an equilateral edge
MIN_WEIGHT = 1e-14
RANDOM_SEEDS = (0, 1, 2)


# Mesh

def _ring_points(resolution: int) -> tuple[np.ndarray, np.ndarray]:
    points = [np.zeros((1, 2))]
    rings = [np.zeros(1, dtype=int)]
    for i in range(1, resolution + 1):
        count = 6 * i
        theta = 2.0 * np.pi * np.arange(count) / count
        radius = i / resolution
        points.append(np.column_stack([radius * np.cos(theta), radius * np.sin(theta)]))
        rings.append(np.full(count, i))
    return np.vstack(points), np.concatenate(rings)


def _corner_cotangents(vertices: np.ndarray, triangles: np.ndarray) -> np.ndarray:
    """cot of the angle at each corner, shape (T, 3)"""
    out = np.empty(triangles.shape)
    for c in range(3):
        here = vertices[triangles[:, c]]
        a = vertices[triangles[:, (c + 1) % 3]] - here
        b = vertices[triangles[:, (c + 2) % 3]] - here
        dot = np.sum(a * b, axis=1)
        cross = np.abs(a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0])
        out[:, c] = dot / cross
    return out


def build_disk_mesh(resolution: int, weighting: Literal["cotangent", "uniform"] = "cotangent") -> DiskMesh:
    """
    Center plus rings i = 1..n at radius i/n carrying 6i vertices each,
    Delaunay-triangulated. Ring n is the boundary.
    """
    if resolution < 3:
        raise DomainError("mesh resolution must be at least 3", resolution=resolution)
    vertices, rings = _ring_points(resolution)
    triangles = Delaunay(vertices).simplices.astype(np.int64)
    vertices[rings == resolution] /= np.linalg.norm(vertices[rings == resolution], axis=1)[:, None]

    # Side c of a triangle is the one opposite corner c
    sides = np.stack(
        [np.sort(triangles[:, [(c + 1) % 3, (c + 2) % 3]], axis=1) for c in range(3)],
        axis=1,
    )
    flat = sides.reshape(-1, 2)
    edges, inverse, multiplicity = np.unique(flat, axis=0, return_inverse=True, return_counts=True)
    inverse = inverse.reshape(-1)
    if weighting == "cotangent":
        shares = 0.5 * _corner_cotangents(vertices, triangles)
    else:
        shares = (UNIFORM_WEIGHT / multiplicity[inverse]).reshape(triangles.shape)
    weights = np.bincount(inverse, weights=shares.reshape(-1), minlength=len(edges))

    keep = weights > MIN_WEIGHT
    if not np.all(keep):
        logger.debug(f"Dropping {np.count_nonzero(~keep)} edges with vanishing weight")
    return DiskMesh(
        vertices=vertices,
        edges=edges[keep],
        weights=weights[keep],
        triangles=triangles,
        triangle_shares=shares,
        boundary=rings == resolution,
        ring_index=rings,
        resolution=resolution,
        weighting=weighting,
    )


def _laplacian(mesh: DiskMesh, perms: Optional[np.ndarray], q: int) -> csr_matrix:
    """Weighted graph Laplacian on the V*Q lifted nodes (v, i) -> v*Q + i"""
    u, v = mesh.edges[:, 0], mesh.edges[:, 1]
    m = len(u)
    if perms is None:
        perms = np.tile(np.arange(q), (m, 1))
    rows = (u[:, None] * q + np.arange(q)[None, :]).ravel()
    cols = (v[:, None] * q + perms).ravel()
    w = np.repeat(mesh.weights, q)
    size = mesh.vertex_count * q
    off = coo_matrix((-w, (rows, cols)), shape=(size, size))
    off = off + off.T
    degree = np.asarray(-off.sum(axis=1)).ravel()
    return (off + coo_matrix((degree, (np.arange(size), np.arange(size))), shape=(size, size))).tocsr()


def _dirichlet_solve(laplacian: csr_matrix, values: np.ndarray, fixed: np.ndarray) -> np.ndarray:
    """Minimize the quadratic form with the fixed entries held"""
    free = ~fixed
    if not np.any(free):
        return values.copy()
    a = laplacian[free][:, free].tocsc()
    b = -laplacian[free][:, fixed] @ values[fixed]
    try:
        solution = spsolve(a, b)
    except Exception as e:
        raise SolverError(f"sparse solve failed: {e}", unknowns=int(np.count_nonzero(free)))
    solution = np.atleast_1d(solution)
    if not np.all(np.isfinite(solution)):
        raise SolverError("sparse solve returned non-finite values", unknowns=int(np.count_nonzero(free)))
    out = values.copy()
    out[free] = solution
    return out


# Labels

def boundary_trace(curve: AlgebraicCurve, mesh: DiskMesh) -> QLabeling:
    """Fibers at the boundary vertices; interior labels are zero until initialized"""
    labels = np.zeros((mesh.vertex_count, curve.q), dtype=complex)
    labels[mesh.boundary] = fiber_array(curve, mesh.positions()[mesh.boundary])
    return QLabeling(labels=labels, fixed=mesh.boundary)


def transport_boundary(mesh: DiskMesh, boundary: QLabeling) -> QLabeling:
    """
    Reorder the boundary fibers by angular transport: starting at angle 0,
    each fiber is matched optimally to its predecessor.
    """
    labels = np.array(boundary.labels)
    index = np.flatnonzero(mesh.boundary)
    angles = np.mod(np.angle(mesh.positions()[index]), 2.0 * np.pi)
    index = index[np.argsort(angles, kind="stable")]
    for previous, current in zip(index[:-1], index[1:]):
        perm = batch_optimal_matching(labels[previous][None, :], labels[current][None, :])[0]
        labels[current] = labels[current][perm]
    return QLabeling(labels=labels, fixed=boundary.fixed, zero_mean=boundary.zero_mean)


def harmonic_extension(mesh: DiskMesh, boundary: QLabeling) -> QLabeling:
    """Extend each boundary sheet to the interior by the discrete Laplacian"""
    q = boundary.q
    laplacian = _laplacian(mesh, None, q)
    fixed = np.repeat(boundary.fixed, q)
    values = _dirichlet_solve(laplacian, np.array(boundary.labels).ravel(), fixed)
    return QLabeling(labels=values.reshape(-1, q), fixed=boundary.fixed, zero_mean=boundary.zero_mean)


def cone_extension(mesh: DiskMesh, boundary: QLabeling) -> QLabeling:
    """
    Radial extension toward the mean boundary label c: the vertex at polar
    coordinates (rho, phi) gets c + rho (T(phi) - c), where T(phi) is
    interpolated between the two boundary fibers around phi along their
    optimal matching. Its edge matchings wind the boundary monodromy around
    a single branch point at the center.
    """
    labels = np.array(boundary.labels)
    positions = mesh.positions()
    index = np.flatnonzero(mesh.boundary)
    angles = np.mod(np.angle(positions[index]), 2.0 * np.pi)
    order = np.argsort(angles, kind="stable")
    index, angles = index[order], angles[order]

    following = np.roll(index, -1)
    spans = np.mod(np.roll(angles, -1) - angles, 2.0 * np.pi)
    perms = batch_optimal_matching(labels[index], labels[following])
    behind = labels[index]
    ahead = np.take_along_axis(labels[following], perms, axis=1)

    interior = np.flatnonzero(~mesh.boundary)
    rho = np.abs(positions[interior])
    phi = np.mod(np.angle(positions[interior]), 2.0 * np.pi)
    slot = np.mod(np.searchsorted(angles, phi, side="right") - 1, len(index))
    frac = (np.mod(phi - angles[slot], 2.0 * np.pi) / spans[slot])[:, None]
    trace = (1.0 - frac) * behind[slot] + frac * ahead[slot]
    center = behind.mean()
    labels[interior] = center + rho[:, None] * (trace - center)
    return QLabeling(labels=labels, fixed=boundary.fixed, zero_mean=boundary.zero_mean)


def initial_labeling(mesh: DiskMesh, boundary: QLabeling) -> QLabeling:
    """The default start: the cone over the angularly transported boundary"""
    return cone_extension(mesh, transport_boundary(mesh, boundary))


def _check_labeling(mesh: DiskMesh, labeling: QLabeling) -> None:
    if len(labeling.labels) != mesh.vertex_count:
        raise DimensionMismatchError(
            "labeling does not match the mesh",
            vertices=mesh.vertex_count,
            labels=len(labeling.labels),
        )


def _check_trace(boundary: QLabeling, labels: np.ndarray) -> None:
    """Boundary rows of a start may reorder the trace but not move it"""
    fixed = np.asarray(boundary.fixed)
    trace = np.asarray(boundary.labels)[fixed]
    gaps = batch_metric_sq(labels[fixed], trace)
    scale = 1.0 + float(np.max(np.abs(trace), initial=0.0)) ** 2
    moved = gaps > 1e-20 * scale
    if np.any(moved):
        raise PreconditionError(
            "initial labeling does not carry the boundary trace",
            vertices=int(np.count_nonzero(moved)),
            worst=float(np.sqrt(np.max(gaps))),
        )


def _edge_perms(mesh: DiskMesh, labels: np.ndarray) -> np.ndarray:
    return batch_optimal_matching(labels[mesh.edges[:, 0]], labels[mesh.edges[:, 1]])


def _energy(mesh: DiskMesh, labels: np.ndarray, perms: Optional[np.ndarray] = None) -> float:
    sq = batch_metric_sq(labels[mesh.edges[:, 0]], labels[mesh.edges[:, 1]], perms)
    return float(mesh.weights @ sq)


def discrete_energy(mesh: DiskMesh, labeling: QLabeling) -> float:
    """sum_e w_e G(f(u), f(v))^2"""
    _check_labeling(mesh, labeling)
    return _energy(mesh, np.asarray(labeling.labels))


def minimize(
    mesh: DiskMesh,
    boundary: QLabeling,
    initial: Optional[QLabeling] = None,
    max_iter: Optional[int] = None,
    tol: Optional[float] = None,
) -> MinimizeResult:
    """
    Alternate between freezing the optimal matching on every edge, which
    makes the energy a quadratic form on the lifted graph solved exactly,
    and recomputing the matchings. Stops when no matching changes or the
    decrease falls below tol.
    """
    _check_labeling(mesh, boundary)
    max_iter = settings.MINIMIZE_MAX_ITER if max_iter is None else max_iter
    tol = settings.MINIMIZE_TOL if tol is None else tol
    start = initial if initial is not None else initial_labeling(mesh, boundary)
    _check_labeling(mesh, start)

    q = boundary.q
    labels = np.array(start.labels)
    _check_trace(boundary, labels)
    fixed = np.repeat(boundary.fixed, q)
    perms = _edge_perms(mesh, labels)
    energy = _energy(mesh, labels, perms)
    log = [ConvergenceStep(iteration=0, energy=energy, matching_changes=0)]

    if max_iter == 0:
        logger.warning("Iteration cap is 0; returning the initial labeling")
        return MinimizeResult(
            labeling=QLabeling(labels=labels, fixed=boundary.fixed, zero_mean=boundary.zero_mean),
            energy=energy,
            iterations=0,
            converged=False,
            log=log,
        )

    converged = False
    iteration = 0
    for iteration in range(1, max_iter + 1):
        laplacian = _laplacian(mesh, perms, q)
        new_labels = _dirichlet_solve(laplacian, labels.ravel(), fixed).reshape(-1, q)
        new_perms = _edge_perms(mesh, new_labels)
        new_energy = _energy(mesh, new_labels, new_perms)
        if new_energy > energy * (1.0 + 1e-12) + 1e-14:
            raise EnergyIncreaseError(
                "discrete energy increased",
                iteration=iteration,
                before=energy,
                after=new_energy,
            )
        changes = int(np.count_nonzero(np.any(new_perms != perms, axis=1)))
        decrease = energy - new_energy
        labels, perms, energy = new_labels, new_perms, new_energy
        log.append(ConvergenceStep(iteration=iteration, energy=energy, matching_changes=changes))
        logger.debug(f"iteration {iteration}: energy={energy:.12g} changes={changes}")
        if changes == 0 or decrease < tol * max(energy, 1.0):
            converged = True
            break

    logger.info(f"Minimization stopped after {iteration} iterations at energy {energy:.10g}")
    return MinimizeResult(
        labeling=QLabeling(labels=labels, fixed=boundary.fixed, zero_mean=boundary.zero_mean),
        energy=energy,
        iterations=iteration,
        converged=converged,
        log=log,
    )


def minimize_from_random_starts(
    mesh: DiskMesh,
    boundary: QLabeling,
    seeds: Sequence[int] = RANDOM_SEEDS,
    max_iter: Optional[int] = None,
) -> BasinReport:
    """
    Minimize from the default start and from harmonic extensions of boundary
    matchings shuffled at random, and compare the energies reached.
    """
    default = minimize(mesh, boundary, max_iter=max_iter)
    energies = []
    for seed in seeds:
        rng = np.random.default_rng(seed)
        shuffled = np.array(boundary.labels)
        for v in np.flatnonzero(boundary.fixed):
            shuffled[v] = shuffled[v][rng.permutation(boundary.q)]
        start = harmonic_extension(mesh, QLabeling(labels=shuffled, fixed=boundary.fixed))
        energies.append(minimize(mesh, boundary, start, max_iter=max_iter).energy)
    best = int(np.argmin(energies))
    return BasinReport(
        default_energy=default.energy,
        seeds=list(seeds),
        energies=energies,
        spread=float(max(energies + [default.energy]) - min(energies + [default.energy])),
        best_energy=float(min(energies + [default.energy])),
        best_seed=seeds[best] if energies[best] < default.energy else None,
    )


# Barycenter reduction

def barycenter_field(labeling: QLabeling) -> np.ndarray:
    """eta at every vertex"""
    return np.asarray(labeling.labels).mean(axis=1)


def subtract_barycenter_labels(labeling: QLabeling) -> QLabeling:
    labels = np.asarray(labeling.labels)
    return QLabeling(labels=labels - labels.mean(axis=1)[:, None], fixed=labeling.fixed, zero_mean=True)


def energy_decomposition(mesh: DiskMesh, labeling: QLabeling) -> tuple[float, float]:
    """
    (energy of the barycenter-free labels, Q times the energy of eta); the
    two add up to discrete_energy since G^2(T, S) splits the same way.
    """
    _check_labeling(mesh, labeling)
    eta = barycenter_field(labeling)
    reduced = discrete_energy(mesh, subtract_barycenter_labels(labeling))
    u, v = mesh.edges[:, 0], mesh.edges[:, 1]
    mean_part = labeling.q * float(mesh.weights @ np.abs(eta[u] - eta[v]) ** 2)
    return reduced, mean_part


# Discrete frequency

def _ring_for(mesh: DiskMesh, r: float) -> int:
    n = mesh.resolution
    ring = int(round(r * n))
    if ring < 1 or ring > n or abs(ring / n - r) > 0.5 / n + 1e-12:
        raise ResolutionError("no mesh ring at the requested radius", r=r, resolution=n)
    return ring


def compare_frequency_discrete(mesh: DiskMesh, labeling: QLabeling, radii: Sequence[float]) -> RadialProfile:
    """
    Discrete D(r) from the triangles inside ring r, H(r) from the ring's
    vertex masses, I = r D / H, all centered at the origin.
    """
    _check_labeling(mesh, labeling)
    labels = np.asarray(labeling.labels)
    rings = sorted({_ring_for(mesh, r) for r in radii})
    tri = mesh.triangles
    sides_a = np.stack([tri[:, (c + 1) % 3] for c in range(3)], axis=1).ravel()
    sides_b = np.stack([tri[:, (c + 2) % 3] for c in range(3)], axis=1).ravel()
    side_energy = (mesh.triangle_shares.ravel() * batch_metric_sq(labels[sides_a], labels[sides_b])).reshape(tri.shape)
    triangle_energy = side_energy.sum(axis=1)
    triangle_ring = mesh.ring_index[tri].max(axis=1)
    mass = np.sum(np.abs(labels) ** 2, axis=1)

    radii_out, energies, heights, freqs = [], [], [], []
    for ring in rings:
        radius = ring / mesh.resolution
        on_ring = mesh.ring_index == ring
        height = float(np.sum(mass[on_ring]) * 2.0 * np.pi * radius / np.count_nonzero(on_ring))
        energy = float(np.sum(triangle_energy[triangle_ring <= ring]))
        if not height > settings.DEGENERATE_HEIGHT:
            raise DegenerateHeightError("discrete H vanishes", r=radius, height=height)
        radii_out.append(radius)
        energies.append(energy)
        heights.append(height)
        freqs.append(radius * energy / height)
    return RadialProfile(center=0j, radii=radii_out, D=energies, H=heights, I=freqs, method="discrete")
