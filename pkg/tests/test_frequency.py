import math

import numpy as np
import pytest

from qfreq.aq_space import metric_g
from qfreq.curve_eval import make_f_eps, make_g_eps, make_power_curve
from qfreq.errors import DegenerateHeightError, DegenerateRescalingError, DomainError, PreconditionError
from qfreq.frequency import (
    blowup_rescale,
    circle_integrals,
    circle_mean_height,
    energy_D,
    extrapolated_frequency,
    frequency_I,
    height_H,
    is_homogeneous,
    log_radii,
    monotonicity_check,
    radial_profile,
    verify_growth_bounds,
    verify_poincare,
)
from qfreq.models.qpoint import QPoint
from tests.conftest import Z_LIST

BLOWUP_SAMPLES = [0.5, 0.3j, -0.6 + 0.2j, 0.1 - 0.7j, 0.9]


@pytest.mark.parametrize("r", [0.5, 1.0, 2.0])
def test_height_oracles(sqrt_curve, identity_curve, r):
    assert height_H(sqrt_curve, 0, r) == pytest.approx(4 * np.pi * r ** 2, rel=1e-8)
    assert height_H(identity_curve, 0, r) == pytest.approx(2 * np.pi * r ** 3, rel=1e-8)


@pytest.mark.parametrize("method", ["flux", "area"])
def test_energy_oracles(sqrt_curve, identity_curve, method):
    assert energy_D(sqrt_curve, 0, 1.0, method) == pytest.approx(2 * np.pi, rel=1e-6)
    assert energy_D(identity_curve, 0, 0.5, method) == pytest.approx(2 * np.pi * 0.25, rel=1e-6)


def test_energy_methods_agree_across_a_branch_point(sqrt_curve):
    flux = energy_D(sqrt_curve, 0.2, 0.5, "flux")
    area = energy_D(sqrt_curve, 0.2, 0.5, "area")
    assert area == pytest.approx(flux, rel=1e-5)


def test_energy_methods_agree_at_a_singular_center():
    curve = make_g_eps(0.3)
    assert energy_D(curve, 0, 0.25, "area") == pytest.approx(energy_D(curve, 0, 0.25, "flux"), rel=1e-5)


@pytest.mark.parametrize("eps", [0.1, 0.3])
def test_circles_through_a_branch_point(eps):
    curve = make_g_eps(eps)
    assert circle_integrals(curve, 0, eps).radial == math.inf
    beside = eps * (1 + 1e-7)
    assert frequency_I(curve, 0, eps) == pytest.approx(frequency_I(curve, 0, beside), abs=1e-5)
    assert energy_D(curve, 0, eps) == pytest.approx(energy_D(curve, 0, beside), rel=1e-5)
    assert energy_D(curve, 0, eps, "area") == pytest.approx(energy_D(curve, 0, eps), rel=1e-5)


def test_frequency_just_inside_a_branch_point(g_curve):
    # The value the covering compares against at r = lambda * 1 = eps
    assert 0.5 < frequency_I(g_curve, 0, 0.1) < frequency_I(g_curve, 0, 1.0)


def test_constant_map(constant_curve):
    assert height_H(constant_curve, 0, 1.0) == 0.0
    assert energy_D(constant_curve, 0, 1.0) == 0.0
    with pytest.raises(DegenerateHeightError):
        frequency_I(constant_curve, 0, 1.0)
    profile = radial_profile(constant_curve, 0, [0.5, 1.0])
    assert profile.I == [None, None]


@pytest.mark.parametrize("q,p", [(2, 1), (3, 1), (3, 2), (4, 1)])
def test_homogeneous_frequency(q, p):
    curve = make_power_curve(q, p)
    for r in log_radii(0.05, 2.0, 20):
        assert frequency_I(curve, 0, r) == pytest.approx(p / q, abs=1e-4)


def test_frequency_of_linear_map(identity_curve):
    assert frequency_I(identity_curve, 0, 0.7) == pytest.approx(1.0, abs=1e-8)


def test_radius_must_be_positive(sqrt_curve):
    with pytest.raises(DomainError):
        frequency_I(sqrt_curve, 0, 0.0)
    with pytest.raises(DomainError):
        log_radii(1.0, 0.5, 10)


@pytest.mark.parametrize("method", ["flux", "area"])
def test_monotonicity_identity(method):
    report = monotonicity_check(make_g_eps(0.3), 0, 0.5, 1.5, method)
    assert report.passed
    assert report.residual <= 1e-3 * (1 + abs(report.lhs))
    assert report.rhs >= -1e-9
    assert report.lhs > 0


def test_monotonicity_vanishes_for_homogeneous_maps():
    report = monotonicity_check(make_power_curve(3, 2), 0, 0.2, 1.0)
    assert report.passed
    assert abs(report.lhs) < 1e-8
    assert abs(report.rhs) < 1e-8


@pytest.mark.parametrize("curve", [
    make_g_eps(0.05),
    make_g_eps(0.1),
    make_g_eps(0.3),
    make_f_eps(1e-3, Z_LIST),
    make_f_eps(1e-2, Z_LIST),
])
def test_frequency_is_nondecreasing(curve):
    profile = radial_profile(curve, 0, log_radii(0.01, 2.0, 20))
    assert all(b >= a - 1e-6 for a, b in zip(profile.I, profile.I[1:]))


def test_mean_height_is_nondecreasing(g_curve):
    heights = [circle_mean_height(g_curve, 0, r) for r in log_radii(0.01, 2.0, 12)]
    assert all(b >= a for a, b in zip(heights, heights[1:]))


def test_frequency_moves_to_one_as_branch_points_merge():
    close = frequency_I(make_g_eps(0.01), 0, 2.0)
    far = frequency_I(make_g_eps(0.1), 0, 2.0)
    assert 0.9 <= close <= 1.0 + 1e-9
    assert close > far


def test_frequency_of_four_valued_example_at_unit_scale(f_curve):
    assert 0.45 <= frequency_I(f_curve, 0, 2.0) <= 0.55


def test_extrapolated_frequency(sqrt_curve, g_curve, f_curve):
    assert extrapolated_frequency(sqrt_curve, 0) == pytest.approx(0.5, abs=1e-6)
    assert extrapolated_frequency(g_curve, 0) == pytest.approx(0.5, abs=1e-2)
    assert extrapolated_frequency(f_curve, 0) == pytest.approx(0.5, abs=1e-2)


def test_growth_bounds(g_curve, rng):
    for _ in range(10):
        r, t = sorted(rng.uniform(0.02, 1.5, size=2))
        report = verify_growth_bounds(g_curve, 0, r, t)
        assert report.passed, report


def test_growth_bounds_are_sharp_for_homogeneous_maps(sqrt_curve):
    report = verify_growth_bounds(sqrt_curve, 0, 0.3, 1.2)
    assert report.passed
    assert abs(report.height_sandwich.lower_slack) < 1e-6
    assert abs(report.height_sandwich.upper_slack) < 1e-6
    assert report.log_derivative_error < 1e-6


def test_growth_bounds_need_ordered_radii(sqrt_curve):
    with pytest.raises(DomainError):
        verify_growth_bounds(sqrt_curve, 0, 1.0, 0.5)


def test_poincare_inequality(sqrt_curve, g_curve):
    report = verify_poincare(sqrt_curve, 0, 1.0)
    assert report.passed
    assert abs(report.first_slack) < 1e-6
    assert abs(report.second_slack) < 1e-6
    assert verify_poincare(g_curve, 0, 0.1).passed
    assert verify_poincare(make_power_curve(3, 1), 0, 1.0).relative_gap == pytest.approx(0.0, abs=1e-6)


def test_poincare_gap_grows_with_degree():
    report = verify_poincare(make_power_curve(3, 2), 0, 1.0)
    assert report.passed
    assert report.relative_gap == pytest.approx(0.5, abs=1e-6)


def test_poincare_needs_a_q_point(identity_curve):
    with pytest.raises(PreconditionError):
        verify_poincare(identity_curve, 1.0, 0.5)


def test_blowup_of_homogeneous_map_is_scale_invariant(sqrt_curve):
    small = blowup_rescale(sqrt_curve, 0, 0.5, BLOWUP_SAMPLES)
    large = blowup_rescale(sqrt_curve, 0, 2.0, BLOWUP_SAMPLES)
    for a, b in zip(small, large):
        assert metric_g(a, b) < 1e-8


def test_blowup_of_linear_map(identity_curve):
    for y, point in zip(BLOWUP_SAMPLES, blowup_rescale(identity_curve, 0, 0.3, BLOWUP_SAMPLES)):
        expected = QPoint.from_complex([y / np.sqrt(2 * np.pi)])
        assert metric_g(point, expected) < 1e-8


def test_blowups_converge_to_the_tangent_map(g_curve):
    def distance(s):
        points = blowup_rescale(g_curve, 0, s, BLOWUP_SAMPLES)
        profile = [
            QPoint.from_complex(np.array([1j, -1j]) * np.sqrt(complex(y)) / np.sqrt(2 * np.pi))
            for y in BLOWUP_SAMPLES
        ]
        return max(metric_g(a, b) for a, b in zip(points, profile))

    assert distance(1e-3) < distance(1e-2)
    assert distance(1e-3) < 0.05


def test_blowup_of_constant_map(constant_curve):
    with pytest.raises(DegenerateRescalingError):
        blowup_rescale(constant_curve, 0, 0.5, BLOWUP_SAMPLES)


def test_is_homogeneous(g_curve):
    report = is_homogeneous(make_power_curve(3, 2), 0, [0.1, 0.5, 1.0])
    assert report.homogeneous
    assert report.degree == pytest.approx(2 / 3, abs=1e-6)
    assert not is_homogeneous(g_curve, 0, [0.05, 0.5, 1.5]).homogeneous
