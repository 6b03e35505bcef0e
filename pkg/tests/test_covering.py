import numpy as np
import pytest
from pydantic import ValidationError

from qfreq.covering import (
    annulus_empty_check,
    covering_count,
    frequency_drop,
    overlap_constant,
    telescoping_report,
    theorem_bound_report,
    vitali_subcover,
)
from qfreq.curve_eval import make_g_eps, make_power_curve
from qfreq.errors import CalibrationError, CoveringNonTerminationError, DomainError, PreconditionError
from qfreq.models.covering import CoveringConfig, Verdict


def test_vitali_single_point():
    assert vitali_subcover([0.2 + 0.1j], 0.1, 0.1) == [0.2 + 0.1j]


def test_vitali_keeps_separated_points():
    points = [0.0, 1.0, 1j]
    assert vitali_subcover(points, 0.1, 0.1) == [0j, 1j, 1 + 0j]


def test_vitali_collapses_a_cluster(rng):
    radius = 0.1
    center = 0.3 - 0.2j
    offsets = radius / 12 * rng.uniform(0, 1, 5) * np.exp(2j * np.pi * rng.uniform(0, 1, 5))
    kept = vitali_subcover((center + offsets).tolist(), radius, 0.1)
    assert len(kept) == 1


def test_vitali_cover_property(rng):
    radius, lambda_ = 0.05, 0.1
    points = (rng.uniform(-0.5, 0.5, 200) + 1j * rng.uniform(-0.5, 0.5, 200)).tolist()
    kept = vitali_subcover(points, radius, lambda_)
    for i, a in enumerate(kept):
        for b in kept[i + 1:]:
            assert abs(a - b) >= 2 * lambda_ * radius
    for p in points:
        assert min(abs(p - k) for k in kept) < radius


def test_vitali_needs_points():
    with pytest.raises(DomainError):
        vitali_subcover([], 0.1)


def test_config_validation():
    assert CoveringConfig(lambda_=0.1).ball_bound == 400
    assert CoveringConfig(**{"lambda": 0.05}).lambda_ == 0.05
    with pytest.raises(ValidationError):
        CoveringConfig(lambda_=0.25)
    with pytest.raises(ValidationError):
        CoveringConfig(delta=0.0)


def test_overlap_constant():
    assert overlap_constant(0.1) == 3
    assert overlap_constant(0.01) == 3
    assert overlap_constant(0.19) == 3


def test_covering_of_two_q_points(g_curve):
    trace = covering_count(g_curve, CoveringConfig(lambda_=0.1, delta=0.05))
    assert trace.initial_count == 2
    assert trace.levels[0].subcover_size <= 400
    assert trace.xi_sum == 1
    assert trace.certified_bound == pytest.approx(400.0)
    assert trace.levels[-1].count == 1
    assert trace.certificate_holds and trace.product_bound_holds


def test_covering_of_a_homogeneous_map(sqrt_curve):
    trace = covering_count(sqrt_curve)
    assert trace.initial_count == 1
    assert trace.xi_sum == 0
    assert trace.certified_bound == 1.0


def test_covering_of_four_valued_example(f_curve):
    assert covering_count(f_curve).initial_count == 1


def test_covering_without_q_points(identity_curve):
    trace = covering_count(identity_curve)
    assert trace.initial_count == 0
    assert trace.xi_sum == 0


def test_covering_depth_cap():
    with pytest.raises(CoveringNonTerminationError):
        covering_count(make_g_eps(0.005), CoveringConfig(lambda_=0.1, max_depth=1))


def test_frequency_drop(sqrt_curve, g_curve):
    assert frequency_drop(sqrt_curve, 0, 1.0, 0.1) == pytest.approx(0.0, abs=1e-8)
    # the inner circle runs through the second Q-point at eps = 0.1
    assert frequency_drop(g_curve, 0, 1.0, 0.1) > 0.05
    assert frequency_drop(g_curve, 0.1, 1.0, 0.1) > 0.05
    with pytest.raises(DomainError):
        frequency_drop(g_curve, 0, 1.0, 1.5)


def test_frequency_drop_needs_a_q_point(g_curve):
    with pytest.raises(PreconditionError):
        frequency_drop(g_curve, 0.5, 1.0, 0.1)
    with pytest.raises(PreconditionError):
        annulus_empty_check(g_curve, 0.5, 0.2)


def test_annulus_around_homogeneous_map():
    curve = make_power_curve(3, 2)
    for r in (0.05, 0.5, 1.0):
        verdict = annulus_empty_check(curve, 0, r)
        assert verdict.verdict is Verdict.CERTIFIED_EMPTY
        assert verdict.measured_empty
        assert verdict.agrees


def test_annulus_containing_a_q_point(g_curve):
    verdict = annulus_empty_check(g_curve, 0, 0.5)
    assert verdict.verdict is Verdict.DROP_TOO_LARGE
    assert len(verdict.detected) == 1
    assert verdict.agrees


def test_annulus_below_the_second_point(g_curve):
    verdict = annulus_empty_check(g_curve, 0, 0.01)
    assert verdict.verdict is Verdict.CERTIFIED_EMPTY
    assert verdict.measured_empty


def test_miscalibrated_delta_is_reported(g_curve):
    verdict = annulus_empty_check(g_curve, 0, 0.5, CoveringConfig(lambda_=0.1, delta=10.0))
    assert verdict.verdict is Verdict.CERTIFIED_EMPTY
    assert not verdict.agrees


def test_telescoping(g_curve):
    config = CoveringConfig(lambda_=0.1, delta=0.05)
    trace = covering_count(g_curve, config)
    report = telescoping_report(g_curve, trace, config)
    assert report.levels == [1]
    assert report.drop_sum >= config.delta
    assert report.lower_claim_holds and report.upper_claim_holds
    assert report.overlap_constant == 3


def test_bound_report(g_curve, sqrt_curve):
    report = theorem_bound_report(g_curve)
    assert report.count == 2
    assert 1.9 <= report.fitted_base <= 2.3
    assert report.claim_holds
    assert report.count <= report.proof_bound
    homogeneous = theorem_bound_report(sqrt_curve)
    assert homogeneous.count == 1
    assert homogeneous.fitted_base == 1.0
    assert homogeneous.xi_sum == 0


def test_bound_report_with_oversized_delta(g_curve):
    config = CoveringConfig(lambda_=0.1, delta=10.0)
    assert not theorem_bound_report(g_curve, config).claim_holds
    with pytest.raises(CalibrationError):
        theorem_bound_report(g_curve, config, strict=True)
