import numpy as np
import pytest

from qfreq.aq_space import batch_optimal_matching, metric_g
from qfreq.curve_eval import (
    branch_points,
    discriminant_roots,
    discriminant_z,
    dump_curve,
    eval_fiber,
    eval_fiber_jet,
    fiber_array,
    fiber_sum,
    gradient_norm_sq,
    holder_ratio,
    is_barycenter_free,
    load_curve,
    make_f_eps,
    make_g_eps,
    make_power_curve,
    rescale_curve,
    squarefree_factors,
    subtract_barycenter_curve,
)
from qfreq.errors import DegenerateCurveError, DomainError, SingularEvaluationError
from qfreq.models.qpoint import QPoint
from tests.conftest import Z_LIST


def fiber(curve, z):
    return fiber_array(curve, z)[0]


def test_g_eps_fibers():
    curve = make_g_eps(0.1)
    assert np.allclose(fiber(curve, 0), [0, 0], atol=1e-12)
    assert np.allclose(fiber(curve, 0.1), [0, 0], atol=1e-12)
    assert np.allclose(fiber(curve, 0.05), [-0.05j, 0.05j], atol=1e-12)


def test_fibers_are_sorted_and_exact(sqrt_curve):
    assert np.allclose(fiber(sqrt_curve, 4.0), [-2.0, 2.0], atol=1e-12)
    assert np.allclose(fiber(sqrt_curve, -1.0), [-1j, 1j], atol=1e-12)
    roots = fiber_array(make_power_curve(3, 1), np.array([8.0, 1j]))
    for z, row in zip([8.0, 1j], roots):
        assert np.allclose(row ** 3, z, atol=1e-12)


def test_selection_derivatives(sqrt_curve, identity_curve):
    jet = eval_fiber_jet(sqrt_curve, 1.0)
    assert np.allclose(jet.fiber.as_complex(), [-1.0, 1.0])
    assert np.allclose(jet.derivatives, [-0.5, 0.5], atol=1e-12)
    assert jet.valid_derivative.all()
    assert not eval_fiber_jet(make_g_eps(0.1), 0.0).valid_derivative.any()
    assert np.allclose(eval_fiber_jet(identity_curve, 0.3 + 0.2j).derivatives, [1.0])


def test_jets_stay_valid_next_to_a_q_point(f_curve):
    z = 1e-3
    jet = eval_fiber_jet(f_curve, z)
    assert jet.valid_derivative.all()
    # w^2 = z (1 + O(eps)) near the origin, so w' = w / (2 z) to leading order
    assert np.allclose(jet.derivatives, jet.fiber.as_complex() / (2 * z), rtol=1e-2)
    assert gradient_norm_sq(f_curve, z) == pytest.approx(2 / z, rel=1e-2)


def test_gradient_norm(sqrt_curve, identity_curve):
    for r in (0.1, 0.5, 2.0):
        assert gradient_norm_sq(sqrt_curve, r * np.exp(0.4j)) == pytest.approx(1.0 / r, rel=1e-12)
    assert gradient_norm_sq(identity_curve, 0.7j) == pytest.approx(2.0)
    assert gradient_norm_sq(make_f_eps(0.0, []), 1.0) == pytest.approx(2.0, rel=1e-12)


def test_gradient_at_branch_point_is_rejected(sqrt_curve):
    with pytest.raises(SingularEvaluationError):
        gradient_norm_sq(sqrt_curve, 0.0)


def test_gradient_matches_finite_differences(rng):
    curve = make_g_eps(0.3)
    h = 1e-5
    for z in rng.uniform(-1, 1, size=8) + 1j * rng.uniform(-1, 1, size=8):
        if min(abs(z), abs(z - 0.3)) < 0.1:
            continue
        before, here, after = fiber_array(curve, np.array([z - h, z, z + h]))
        to_before = batch_optimal_matching(here[None], before[None])[0]
        to_after = batch_optimal_matching(here[None], after[None])[0]
        slopes = (after[to_after] - before[to_before]) / (2 * h)
        expected = 2.0 * np.sum(np.abs(slopes) ** 2)
        assert gradient_norm_sq(curve, z) == pytest.approx(expected, rel=1e-4)


def test_f_eps_fibers():
    curve = make_f_eps(1e-3, Z_LIST)
    assert curve.q == 4
    assert np.allclose(fiber(curve, 0.0), 0.0, atol=1e-12)
    for z_i in Z_LIST:
        values = fiber(curve, z_i)
        assert np.allclose(values ** 2, z_i, atol=1e-9)
    unperturbed = make_f_eps(0.0, Z_LIST)
    assert np.allclose(fiber(unperturbed, 4.0), [-2, -2, 2, 2], atol=1e-12)


@pytest.mark.parametrize("eps", [0.0, 1e-3, 0.1])
def test_examples_have_zero_barycenter(rng, eps):
    for curve in (make_f_eps(eps, Z_LIST), make_g_eps(eps)):
        assert is_barycenter_free(curve)
        z = rng.normal(size=20) + 1j * rng.normal(size=20)
        assert np.allclose(fiber_array(curve, z).sum(axis=1), 0.0, atol=1e-10)


def test_constructors_reject_bad_parameters():
    with pytest.raises(DomainError):
        make_f_eps(-1.0, Z_LIST)
    with pytest.raises(DomainError):
        make_f_eps(0.1, [0.1])
    with pytest.raises(DomainError):
        make_g_eps(-0.5)
    with pytest.raises(DomainError):
        make_power_curve(0, 1)


def test_discriminant(sqrt_curve, identity_curve):
    assert np.allclose(discriminant_roots(sqrt_curve), [0.0])
    assert np.allclose(sorted(discriminant_roots(make_g_eps(0.1)), key=abs), [0.0, 0.1])
    assert discriminant_z(identity_curve).degree() == 0
    assert len(discriminant_roots(identity_curve)) == 0


def test_non_reduced_curves():
    curve = make_f_eps(0.0, Z_LIST)
    factors = squarefree_factors(curve)
    assert len(factors) == 1
    assert factors[0][1] == 2
    with pytest.raises(DegenerateCurveError):
        discriminant_roots(curve)
    assert np.allclose(branch_points(curve), [0.0])


def test_fiber_sum_matches_vieta(rng, shifted_sqrt_curve):
    curve = make_power_curve(3, 2)
    for z in rng.normal(size=5) + 1j * rng.normal(size=5):
        assert fiber_sum(shifted_sqrt_curve, z) == pytest.approx(fiber(shifted_sqrt_curve, z).sum(), abs=1e-12)
        assert fiber_sum(curve, z) == pytest.approx(0.0, abs=1e-12)


def test_holder_ratio_at_a_branch_point(sqrt_curve):
    for h in (1e-2, 1e-4, 1e-6):
        assert holder_ratio(sqrt_curve, 0.0, h) == pytest.approx(np.sqrt(2.0), rel=1e-9)


def test_holder_ratio_is_bounded(rng):
    curve = make_g_eps(0.1)
    ratios = [holder_ratio(curve, z, 1e-4 * np.exp(1j * t)) for z, t in zip(rng.normal(size=20) * 0.3, rng.uniform(0, 6, 20))]
    assert max(ratios) < 1.0


def test_rescale_curve(sqrt_curve):
    x, s, c = 0.2 + 0.1j, 0.5, 3.0
    rescaled = rescale_curve(make_g_eps(0.1), x, s, c)
    for y in (0.3, -0.7j, 1.1 + 0.4j):
        expected = fiber(make_g_eps(0.1), x + s * y) / c
        actual = fiber(rescaled, y)
        assert metric_g(QPoint.from_complex(expected), QPoint.from_complex(actual)) < 1e-12
    with pytest.raises(DomainError):
        rescale_curve(sqrt_curve, 0, -1.0, 1.0)


def test_subtract_barycenter_curve(shifted_sqrt_curve):
    assert not is_barycenter_free(shifted_sqrt_curve)
    reduced = subtract_barycenter_curve(shifted_sqrt_curve)
    assert is_barycenter_free(reduced)
    assert np.allclose(fiber(reduced, 4.0), [-2.0, 2.0], atol=1e-12)
    assert np.allclose(fiber(shifted_sqrt_curve, 4.0), [0.0, 4.0], atol=1e-12)


def test_eval_fiber_returns_q_point(g_curve):
    point = eval_fiber(g_curve, 0.5)
    assert point.q == 2
    assert point.n == 2


def test_curve_file_roundtrip(tmp_path, f_curve):
    path = tmp_path / "f.json"
    dump_curve(f_curve, path, label="f")
    loaded = load_curve(path)
    assert loaded.key() == f_curve.key()


def test_curve_file_with_wrong_shape(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"degree_w": 2, "degree_z": 1, "coeffs": [[[0, 0]], [[0, 0]], [[1, 0]]]}')
    with pytest.raises(DomainError):
        load_curve(path)
