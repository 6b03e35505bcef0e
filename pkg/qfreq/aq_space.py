"""
The metric space A_Q(R^n) of unordered Q-tuples
"""
import itertools
import logging
import math
from typing import Optional

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial.distance import cdist, pdist

from qfreq.errors import DimensionMismatchError
from qfreq.models.qpoint import QPoint

logger = logging.getLogger(__name__)

# Above this size the batch matcher stops enumerating permutations
BRUTE_FORCE_MAX_Q = 6


def _check_compatible(T: QPoint, S: QPoint) -> None:
    if T.q != S.q or T.n != S.n:
        raise DimensionMismatchError(
            "Q-points live in different spaces",
            left=(T.q, T.n),
            right=(S.q, S.n),
        )


def _cost_matrix(T: QPoint, S: QPoint) -> np.ndarray:
    return cdist(T.values, S.values, metric="sqeuclidean")


def metric_g(T: QPoint, S: QPoint) -> float:
    """
    G(T, S) = min over permutations of (sum_i |p_i - p'_sigma(i)|^2)^(1/2),
    solved exactly as a linear assignment on the squared-distance matrix.
    """
    _check_compatible(T, S)
    cost = _cost_matrix(T, S)
    rows, cols = linear_sum_assignment(cost)
    # Exactly symmetric: the correctly rounded sum ignores pairing order
    return float(np.sqrt(max(math.fsum(cost[rows, cols]), 0.0)))


def metric_g_bruteforce(T: QPoint, S: QPoint) -> float:
    """Enumeration over all Q! permutations; the reference for small Q"""
    _check_compatible(T, S)
    cost = _cost_matrix(T, S)
    idx = np.arange(T.q)
    best = min(cost[idx, list(perm)].sum() for perm in itertools.permutations(range(T.q)))
    return float(np.sqrt(max(best, 0.0)))


def optimal_matching(T: QPoint, S: QPoint) -> tuple[int, ...]:
    """
    The permutation sigma realizing metric_g, 0-based: T.values[i] is paired
    with S.values[sigma[i]]. Among optimal permutations the lexicographically
    smallest one is returned.
    """
    _check_compatible(T, S)
    cost = _cost_matrix(T, S)
    q = T.q
    rows, cols = linear_sum_assignment(cost)
    optimum = cost[rows, cols].sum()
    tol = 1e-12 * (1.0 + optimum)

    # Fix rows one at a time, trying the smallest admissible column first
    sigma: list[int] = []
    used: set[int] = set()
    fixed_cost = 0.0
    for i in range(q):
        for j in range(q):
            if j in used:
                continue
            rest_rows = [r for r in range(i + 1, q)]
            rest_cols = [c for c in range(q) if c not in used and c != j]
            rest = 0.0
            if rest_rows:
                sub = cost[np.ix_(rest_rows, rest_cols)]
                r, c = linear_sum_assignment(sub)
                rest = sub[r, c].sum()
            if fixed_cost + cost[i, j] + rest <= optimum + tol:
                sigma.append(j)
                used.add(j)
                fixed_cost += cost[i, j]
                break
    return tuple(sigma)


def batch_optimal_matching(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """
    Optimal matchings for many pairs at once.

    A and B are (m, Q) complex arrays of fibers in R^2 = C; row e of the result
    is the permutation pairing A[e, i] with B[e, sigma[i]]. Small Q enumerates
    permutations in lexicographic order so exact ties resolve as in
    optimal_matching; larger Q falls back to one assignment solve per row.
    """
    A = np.asarray(A, dtype=complex)
    B = np.asarray(B, dtype=complex)
    if A.shape != B.shape:
        raise DimensionMismatchError("fiber batches differ in shape", left=A.shape, right=B.shape)
    m, q = A.shape
    if q <= BRUTE_FORCE_MAX_Q:
        perms = np.array(list(itertools.permutations(range(q))), dtype=int)
        diffs = A[:, None, :] - B[:, perms]
        costs = np.sum(diffs.real ** 2 + diffs.imag ** 2, axis=2)
        return perms[np.argmin(costs, axis=1)]
    out = np.empty((m, q), dtype=int)
    for e in range(m):
        cost = np.abs(A[e][:, None] - B[e][None, :]) ** 2
        rows, cols = linear_sum_assignment(cost)
        out[e, rows] = cols
    return out


def batch_metric_sq(A: np.ndarray, B: np.ndarray, perms: Optional[np.ndarray] = None) -> np.ndarray:
    """Squared G-distances of paired fibers, optionally under given matchings"""
    if perms is None:
        perms = batch_optimal_matching(A, B)
    matched = np.take_along_axis(np.asarray(B, dtype=complex), perms, axis=1)
    diffs = np.asarray(A, dtype=complex) - matched
    return np.sum(diffs.real ** 2 + diffs.imag ** 2, axis=1)


def qpoints_equal(T: QPoint, S: QPoint) -> bool:
    """Multiset equality up to 1e-10 relative to the larger norm"""
    scale = 1.0 + max(T.max_norm(), S.max_norm())
    return metric_g(T, S) < 1e-10 * scale


def barycenter(T: QPoint) -> np.ndarray:
    """eta(T) = (1/Q) sum_i p_i"""
    return T.values.mean(axis=0)


def subtract_barycenter(T: QPoint) -> QPoint:
    return QPoint(values=T.values - barycenter(T), q=T.q)


def fiber_diameter(T: QPoint) -> float:
    """max_{i,j} |p_i - p_j|; zero exactly on collapsed points Q[[p]]"""
    if T.q < 2:
        return 0.0
    return float(np.max(pdist(T.values)))


def distance_to_origin(T: QPoint) -> float:
    """G(T, Q[[0]])"""
    return float(np.sqrt(np.sum(T.values ** 2)))


def largest_cluster(T: QPoint, tol: float) -> int:
    """Size of the largest group of values chained together at distance < tol"""
    if T.q < 2:
        return T.q
    close = cdist(T.values, T.values) < tol
    _, labels = connected_components(csr_matrix(close), directed=False)
    return int(np.bincount(labels).max())
