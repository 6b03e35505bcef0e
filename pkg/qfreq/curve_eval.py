"""
Q-valued maps given as fibers of plane algebraic curves P(z, w) = 0
"""
import json
import logging
from functools import lru_cache
from math import comb
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

import numpy as np
import sympy
from numpy.polynomial import Polynomial
from numpy.polynomial import polynomial as npoly
from sympy.polys.domains import QQ, QQ_I

from qfreq.aq_space import metric_g
from qfreq.config import settings
from qfreq.errors import DegenerateCurveError, DomainError, RootFindingError, SingularEvaluationError
from qfreq.models.curve import AlgebraicCurve, CurveDescriptor, FiberJet
from qfreq.models.qpoint import QPoint

logger = logging.getLogger(__name__)

_W, _Z = sympy.symbols("w z")


# Constructors

def make_curve(coeffs: Sequence[Sequence[complex]]) -> AlgebraicCurve:
    """Curve from a c[j][k] matrix (row j multiplies w^j, column k multiplies z^k)"""
    return AlgebraicCurve(coeffs=np.array(coeffs, dtype=complex))


def make_f_eps(eps: float, z_list: Iterable[complex]) -> AlgebraicCurve:
    """
    (w^2 - z)^2 - eps^2 z^2 prod_i (z - z_i): four values, barycenter zero,
    a 4-point at the origin and 2-points at the z_i.
    """
    if eps < 0:
        raise DomainError("eps must be nonnegative", eps=eps)
    z_list = [complex(z) for z in z_list]
    for z_i in z_list:
        if not 0.25 < abs(z_i) < 0.5:
            raise DomainError("z_i must lie in the annulus 1/4 < |z| < 1/2", z_i=z_i)
    product = npoly.polyfromroots(z_list) if z_list else np.array([1.0 + 0j])
    degree_z = max(2, len(product) + 1)
    c = np.zeros((5, degree_z + 1), dtype=complex)
    c[4, 0] = 1.0
    c[2, 1] = -2.0
    c[0, 2] += 1.0
    c[0, 2:2 + len(product)] -= eps ** 2 * product
    return AlgebraicCurve(coeffs=c)


def make_g_eps(eps: float) -> AlgebraicCurve:
    """w^2 = z (z - eps): two 2-points at 0 and eps"""
    if eps < 0:
        raise DomainError("eps must be nonnegative", eps=eps)
    c = np.zeros((3, 3), dtype=complex)
    c[2, 0] = 1.0
    c[0, 2] = -1.0
    c[0, 1] = eps
    return AlgebraicCurve(coeffs=c)


def make_power_curve(q: int, p: int) -> AlgebraicCurve:
    """w^q = z^p, homogeneous of degree p/q"""
    if q < 1 or p < 0:
        raise DomainError("need q >= 1 and p >= 0", q=q, p=p)
    c = np.zeros((q + 1, p + 1), dtype=complex)
    c[q, 0] = 1.0
    c[0, p] -= 1.0
    return AlgebraicCurve(coeffs=c)


def make_constant_curve(q: int) -> AlgebraicCurve:
    """w^q = 0, the map Q[[0]]"""
    c = np.zeros((q + 1, 1), dtype=complex)
    c[q, 0] = 1.0
    return AlgebraicCurve(coeffs=c)


def load_curve(path: Union[str, Path]) -> AlgebraicCurve:
    """Read a JSON curve descriptor"""
    descriptor = CurveDescriptor.model_validate_json(Path(path).read_text())
    coeffs = np.array(descriptor.coeffs, dtype=float)
    if coeffs.shape != (descriptor.degree_w + 1, descriptor.degree_z + 1, 2):
        raise DomainError("coeffs do not match the declared degrees", shape=coeffs.shape)
    return AlgebraicCurve(
        coeffs=coeffs[..., 0] + 1j * coeffs[..., 1],
        degree_w=descriptor.degree_w,
        degree_z=descriptor.degree_z,
    )


def dump_curve(curve: AlgebraicCurve, path: Union[str, Path], label: Optional[str] = None) -> None:
    descriptor = CurveDescriptor(
        degree_w=curve.degree_w,
        degree_z=curve.degree_z,
        coeffs=[[[c.real, c.imag] for c in row] for row in curve.coeffs],
        label=label,
    )
    Path(path).write_text(json.dumps(descriptor.model_dump(exclude_none=True)))


# Algebraic transforms

def _compose_linear(coeffs: np.ndarray, x: complex, s: complex) -> np.ndarray:
    """Coefficients of y -> sum_k coeffs[k] (x + s y)^k"""
    result = np.array([coeffs[-1]], dtype=complex)
    for c_k in coeffs[-2::-1]:
        result = npoly.polyadd(npoly.polymul(result, [x, s]), [c_k])
    out = np.zeros(len(coeffs), dtype=complex)
    out[:len(result)] = result[:len(coeffs)]
    return out


def rescale_curve(curve: AlgebraicCurve, x: complex, s: float, c: float) -> AlgebraicCurve:
    """Curve of the map y -> f(x + s y) / c"""
    if s <= 0 or c <= 0:
        raise DomainError("rescaling needs s > 0 and c > 0", s=s, c=c)
    rows = [_compose_linear(curve.coeffs[j], x, s) * c ** j for j in range(curve.q + 1)]
    out = np.array(rows, dtype=complex)
    return AlgebraicCurve(coeffs=out / out[curve.q, 0])


def barycenter_polynomial(curve: AlgebraicCurve) -> np.ndarray:
    """eta(z) = -a_{Q-1}(z) / (Q a_Q), ascending coefficients"""
    return -curve.coeffs[curve.q - 1] / (curve.q * curve.leading)


def is_barycenter_free(curve: AlgebraicCurve) -> bool:
    scale = 1.0 + curve.coefficient_scale()
    return bool(np.max(np.abs(barycenter_polynomial(curve))) <= 1e-14 * scale)


def subtract_barycenter_curve(curve: AlgebraicCurve) -> AlgebraicCurve:
    """P(z, v + eta(z)): the same map with every fiber shifted to barycenter zero"""
    q = curve.q
    eta = barycenter_polynomial(curve)
    eta_powers = [np.array([1.0 + 0j])]
    for _ in range(q):
        eta_powers.append(npoly.polymul(eta_powers[-1], eta))
    rows = []
    for l in range(q + 1):
        row = np.array([0j])
        for j in range(l, q + 1):
            row = npoly.polyadd(row, comb(j, l) * npoly.polymul(curve.coeffs[j], eta_powers[j - l]))
        rows.append(row)
    width = max(len(row) for row in rows)
    out = np.zeros((q + 1, width), dtype=complex)
    for l, row in enumerate(rows):
        out[l, :len(row)] = row
    out[q - 1] = 0.0
    out[q, 1:] = 0.0
    # Drop trailing all-zero z columns
    nonzero = np.nonzero(np.any(out != 0, axis=0))[0]
    out = out[:, :max(1, nonzero[-1] + 1)]
    return AlgebraicCurve(coeffs=out)


# Exact algebra

def _exact(value: complex) -> sympy.Expr:
    return sympy.Rational(value.real) + sympy.I * sympy.Rational(value.imag)


def _exact_poly(coeffs: np.ndarray) -> sympy.Poly:
    expr = sympy.Integer(0)
    for (j, k), c in np.ndenumerate(coeffs):
        if c != 0:
            expr += _exact(complex(c)) * _W ** j * _Z ** k
    domain = QQ_I if np.any(coeffs.imag != 0) else QQ
    return sympy.Poly(expr, _W, _Z, domain=domain)


def _to_matrix(poly: sympy.Poly, degree_w: int) -> np.ndarray:
    terms = poly.as_dict(native=False)
    degree_z = max((k for (_, k) in terms), default=0)
    out = np.zeros((degree_w + 1, degree_z + 1), dtype=complex)
    for (j, k), c in terms.items():
        out[j, k] = complex(c)
    return out


@lru_cache(maxsize=256)
def _squarefree_factors(key: tuple) -> tuple:
    """Pairwise coprime squarefree factors R_k (monic in w) with multiplicities k"""
    shape, raw = key
    coeffs = np.frombuffer(raw, dtype=complex).reshape(shape)
    try:
        _, factors = _exact_poly(coeffs).sqf_list()
    except Exception as e:
        logger.warning(f"Squarefree decomposition failed ({e}); using the curve as given")
        return ((coeffs / coeffs[-1, 0], 1),)
    out = []
    for factor, multiplicity in factors:
        degree_w = factor.degree(_W)
        if degree_w < 1:
            continue
        matrix = _to_matrix(factor, degree_w)
        out.append((matrix / matrix[degree_w, 0], int(multiplicity)))
    return tuple(out)


def squarefree_factors(curve: AlgebraicCurve) -> list[tuple[np.ndarray, int]]:
    return list(_squarefree_factors(curve.key()))


@lru_cache(maxsize=256)
def _discriminant(key: tuple) -> tuple:
    shape, raw = key
    coeffs = np.frombuffer(raw, dtype=complex).reshape(shape)
    poly = _exact_poly(coeffs)
    if poly.degree(_W) < 1:
        return (), ()
    resultant = poly.resultant(poly.diff(_W))
    if isinstance(resultant, sympy.Poly):
        resultant = resultant.as_expr()
    resultant = sympy.Poly(resultant, _Z, domain=poly.domain)
    dense = tuple(complex(c) for c in reversed(resultant.all_coeffs()))
    if resultant.is_zero:
        return dense, ()
    _, factors = resultant.sqf_list()
    parts = tuple(
        (tuple(complex(c) for c in reversed(factor.all_coeffs())), int(k))
        for factor, k in factors
        if factor.degree() >= 1
    )
    return dense, parts


def discriminant_z(curve: AlgebraicCurve) -> Polynomial:
    """Res_w(P, dP/dw) as a polynomial in z; it vanishes over every repeated fiber"""
    dense, _ = _discriminant(curve.key())
    return Polynomial(np.array(dense or (0j,), dtype=complex))


def discriminant_roots(curve: AlgebraicCurve) -> np.ndarray:
    """
    Distinct zeros of the discriminant, taken factor by factor from its
    squarefree decomposition so that multiple zeros come out exact.
    """
    dense, parts = _discriminant(curve.key())
    if not dense or all(c == 0 for c in dense):
        raise DegenerateCurveError("discriminant vanishes identically (non-reduced curve)")
    roots = []
    for coeffs, _ in parts:
        coeffs = np.array(coeffs, dtype=complex)
        found = np.roots(coeffs[::-1])
        derivative = npoly.polyder(coeffs)
        for _ in range(3):
            value = npoly.polyval(found, coeffs)
            slope = npoly.polyval(found, derivative)
            step = np.where(np.abs(slope) > 0, value / np.where(slope == 0, 1, slope), 0)
            found = found - step
        roots.extend(found.tolist())
    return np.array(roots, dtype=complex)


# Numerical evaluation

def _coefficients_at(coeffs: np.ndarray, z: np.ndarray) -> np.ndarray:
    """a_j(z) for every row j; shape (Q + 1, len(z))"""
    return npoly.polyval(z, coeffs.T)


def _factor_roots(coeffs: np.ndarray, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Roots of one monic factor at every z with one Newton polish; returns (roots, a)"""
    degree = coeffs.shape[0] - 1
    a = _coefficients_at(coeffs, z)
    m = len(z)
    if degree == 1:
        roots = (-a[0] / a[1])[:, None]
    else:
        companion = np.zeros((m, degree, degree), dtype=complex)
        companion[:, np.arange(1, degree), np.arange(degree - 1)] = 1.0
        companion[:, :, -1] = -(a[:degree] / a[degree]).T
        roots = np.linalg.eigvals(companion)

    value, slope, scale = _evaluate_factor(a, roots)
    safe = np.abs(slope) > 0
    polished = roots - np.where(safe, value / np.where(safe, slope, 1), 0)
    new_value, _, _ = _evaluate_factor(a, polished)
    better = np.abs(new_value) < np.abs(value)
    roots = np.where(better, polished, roots)
    value = np.where(better, new_value, value)
    _, _, scale = _evaluate_factor(a, roots)

    residual = np.abs(value)
    bad = residual > settings.ROOT_RESIDUAL * (1.0 + scale)
    if np.any(bad):
        row = int(np.argwhere(bad)[0][0])
        raise RootFindingError(
            "fiber roots did not converge",
            z=complex(z[row]),
            residuals=residual[row].tolist(),
        )
    return roots, a


def _evaluate_factor(a: np.ndarray, roots: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """P, dP/dw and sum_j |a_j||w|^j at the roots; a has shape (d + 1, m), roots (m, d)"""
    degree = a.shape[0] - 1
    value = np.zeros_like(roots)
    slope = np.zeros_like(roots)
    scale = np.zeros(roots.shape)
    modulus = np.abs(roots)
    for j in range(degree, -1, -1):
        coeff = a[j][:, None]
        value = value * roots + coeff
        if j >= 1:
            slope = slope * roots + j * coeff
        scale += np.abs(coeff) * modulus ** j
    return value, slope, scale


def _sort_fibers(roots: np.ndarray, *others: np.ndarray) -> list[np.ndarray]:
    order = np.lexsort((roots.imag, roots.real), axis=-1)
    return [np.take_along_axis(array, order, axis=-1) for array in (roots, *others)]


def fiber_array(curve: AlgebraicCurve, z: Union[complex, np.ndarray]) -> np.ndarray:
    """Fibers at many points, shape (len(z), Q), each row sorted by (re, im)"""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    blocks = []
    for coeffs, multiplicity in squarefree_factors(curve):
        roots, _ = _factor_roots(coeffs, z)
        blocks.append(np.repeat(roots, multiplicity, axis=1))
    return _sort_fibers(np.concatenate(blocks, axis=1))[0]


def jet_arrays(curve: AlgebraicCurve, z: Union[complex, np.ndarray]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Fibers, selection derivatives w_i'(z) = -R_z / R_w and validity flags at
    many points. R is the squarefree factor the root belongs to; a derivative
    is invalid where R_w vanishes or |R_w| < JET_DEGENERACY times
    sum_j j |a_j| |w|^(j-1), a size that shrinks with the roots near a Q-point.
    """
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    root_blocks, derivative_blocks, valid_blocks = [], [], []
    for coeffs, multiplicity in squarefree_factors(curve):
        roots, a = _factor_roots(coeffs, z)
        degree = coeffs.shape[0] - 1
        a_z = _coefficients_at(np.array([npoly.polyder(row) if len(row) > 1 else [0j] for row in coeffs]), z)
        _, slope, _ = _evaluate_factor(a, roots)
        partial_z = np.zeros_like(roots)
        for j in range(degree, -1, -1):
            partial_z = partial_z * roots + a_z[j][:, None]
        size = np.zeros(roots.shape)
        modulus = np.abs(roots)
        for j in range(1, degree + 1):
            size += j * np.abs(a[j])[:, None] * modulus ** (j - 1)
        valid = (np.abs(slope) > 0) & (np.abs(slope) >= settings.JET_DEGENERACY * size)
        derivative = np.where(valid, -partial_z / np.where(valid, slope, 1), np.nan + 0j)
        root_blocks.append(np.repeat(roots, multiplicity, axis=1))
        derivative_blocks.append(np.repeat(derivative, multiplicity, axis=1))
        valid_blocks.append(np.repeat(valid, multiplicity, axis=1))
    return tuple(_sort_fibers(
        np.concatenate(root_blocks, axis=1),
        np.concatenate(derivative_blocks, axis=1),
        np.concatenate(valid_blocks, axis=1),
    ))


def eval_fiber(curve: AlgebraicCurve, z: complex) -> QPoint:
    """The Q roots (with multiplicity) of w -> P(z, w) as a Q-point of C = R^2"""
    return QPoint.from_complex(fiber_array(curve, complex(z))[0])


def eval_fiber_jet(curve: AlgebraicCurve, z: complex) -> FiberJet:
    roots, derivatives, valid = jet_arrays(curve, complex(z))
    return FiberJet(
        z=complex(z),
        fiber=QPoint.from_complex(roots[0]),
        derivatives=derivatives[0],
        valid_derivative=valid[0],
    )


def gradient_norm_sq(curve: AlgebraicCurve, z: complex) -> float:
    """
    |Df|^2 = 2 sum_i |w_i'(z)|^2.

    A holomorphic selection w = u + iv satisfies the Cauchy-Riemann equations,
    so |grad u|^2 + |grad v|^2 = 2 (u_x^2 + v_x^2) = 2 |w'|^2.
    """
    _, derivatives, valid = jet_arrays(curve, complex(z))
    if not np.all(valid):
        raise SingularEvaluationError("z lies on the discriminant", z=complex(z))
    return float(2.0 * np.sum(np.abs(derivatives[0]) ** 2))


def fiber_sum(curve: AlgebraicCurve, z: complex) -> complex:
    """sum_i w_i by Vieta: minus the normalized w^{Q-1} coefficient"""
    a = _coefficients_at(curve.coeffs, np.array([complex(z)]))[:, 0]
    return complex(-a[curve.q - 1] / a[curve.q])


def holder_ratio(curve: AlgebraicCurve, z: complex, h: complex) -> float:
    """G(f(z + h), f(z)) / |h|^(1/Q), the local 1/Q-Hoelder quotient"""
    here, there = fiber_array(curve, np.array([z, z + h]))
    return metric_g(QPoint.from_complex(here), QPoint.from_complex(there)) / abs(h) ** (1.0 / curve.q)


# Curve-level caches

def curve_from_key(key: tuple) -> AlgebraicCurve:
    shape, raw = key
    return AlgebraicCurve(coeffs=np.frombuffer(raw, dtype=complex).reshape(shape))


@lru_cache(maxsize=256)
def _branch_points(key: tuple) -> tuple:
    points: list[complex] = []
    for coeffs, _ in _squarefree_factors(key):
        if coeffs.shape[0] < 3:
            continue
        factor = AlgebraicCurve(coeffs=coeffs)
        points.extend(discriminant_roots(factor).tolist())
    return tuple(points)


def branch_points(curve: AlgebraicCurve) -> np.ndarray:
    """
    Zeros of the discriminants of the squarefree factors: the only places
    where a selection derivative can blow up. Unlike discriminant_roots this
    also works for non-reduced curves.
    """
    return np.array(_branch_points(curve.key()), dtype=complex)


@lru_cache(maxsize=256)
def _fiber_scale(key: tuple, radius: float, samples: int) -> float:
    theta = 2.0 * np.pi * (np.arange(samples) + 0.5) / samples
    fibers = fiber_array(curve_from_key(key), radius * np.exp(1j * theta))
    return float(np.max(np.abs(fibers)))


def fiber_scale(curve: AlgebraicCurve, radius: float = 2.0, samples: int = 256) -> float:
    """Largest fiber modulus sampled on the circle |z| = radius"""
    return _fiber_scale(curve.key(), float(radius), int(samples))
