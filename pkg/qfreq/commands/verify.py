"""
verify: the monotonicity, growth and Poincare battery with a slack report
"""
import argparse
import logging
from typing import Callable, NamedTuple, Optional

from qfreq import storage
from qfreq.commands.common import apply_tolerances, load_source
from qfreq.errors import InvariantViolation, NumericError, PreconditionError, QFreqError
from qfreq.frequency import (
    log_radii,
    monotonicity_check,
    radial_profile,
    verify_growth_bounds,
    verify_poincare,
)
from qfreq.models.profile import RadialProfile
from qfreq.models.run import RunConfig

logger = logging.getLogger(__name__)

PROFILE_SLACK = 1e-6
# Applied to the profile before it is checked; tests use it to inject corruption
profile_hook: Optional[Callable[[RadialProfile], RadialProfile]] = None


class Slack(NamedTuple):
    check: str
    r: float
    t: float
    slack: float
    passed: bool


def _profile_slacks(profile: RadialProfile) -> list[Slack]:
    rows = []
    pairs = list(zip(profile.radii, profile.I))
    for (r, low), (t, high) in zip(pairs, pairs[1:]):
        if low is None or high is None:
            continue
        slack = (high - low) / max(1.0, abs(low))
        rows.append(Slack("nondecreasing", r, t, slack, slack >= -PROFILE_SLACK))
    return rows


def run_battery(config: RunConfig) -> list[Slack]:
    curve = load_source(config)
    x = config.center
    radii = log_radii(config.rmin, config.rmax, config.samples)
    profile = radial_profile(curve, x, radii)
    if profile_hook is not None:
        profile = profile_hook(profile)
    rows = _profile_slacks(profile)

    report = monotonicity_check(curve, x, radii[0], radii[-1], method="area")
    rows.append(Slack("monotonicity_identity", report.s, report.t, -report.residual, report.passed))

    for r, t in zip(radii[::4], radii[2::4]):
        growth = verify_growth_bounds(curve, x, r, t)
        checks = [growth.height_sandwich] + ([growth.energy_sandwich] if growth.energy_sandwich else [])
        for check in checks:
            rows.append(Slack(f"{check.name}_sandwich", r, t, min(check.lower_slack, check.upper_slack), check.passed))
        rows.append(Slack("log_height_derivative", t, t, -growth.log_derivative_error, growth.log_derivative_passed))

    try:
        poincare = verify_poincare(curve, x, config.rmax)
        rows.append(Slack("poincare", config.rmax, config.rmax, min(poincare.first_slack, poincare.second_slack), poincare.passed))
    except PreconditionError as e:
        logger.info(f"Skipping the Poincare chain: {e}")
    return rows


def cmd_verify(config: RunConfig) -> dict:
    try:
        apply_tolerances(config)
        rows = run_battery(config)
        path = storage.write_csv(config.out / "verify.csv", Slack._fields, rows)
    except QFreqError:
        raise
    except Exception as e:
        raise NumericError(f"Verification failed: {e}")
    failed = [row for row in rows if not row.passed]
    if failed:
        worst = min(failed, key=lambda row: row.slack)
        raise InvariantViolation(
            f"{len(failed)} of {len(rows)} checks failed; worst is {worst.check}",
            r=worst.r,
            t=worst.t,
            slack=worst.slack,
        )
    print(f"checks={len(rows)} passed")
    return {"success": True, "checks": len(rows), "path": str(path)}


def add_parser(subparsers: argparse._SubParsersAction, parent: argparse.ArgumentParser) -> None:
    parser = subparsers.add_parser("verify", parents=[parent], help="run the invariant battery")
    parser.set_defaults(handler=cmd_verify)
