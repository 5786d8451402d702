import math

import numpy as np
import pytest

from pidsteps.closedloop import DdeSystem
from pidsteps.exppoly import ExpPoly
from pidsteps.metrics import compute_metrics
from pidsteps.oracle import integrate
from pidsteps.stepper import ForcingTerm, InitialCondition, PiecewiseSolution, solve


def manual_solution(system, segment_fn, n_intervals):
    """Piecewise solution whose interval-n segment is segment_fn(n)."""
    return PiecewiseSolution(
        system=system,
        knots=(0.0, 1.0),
        segments=tuple((segment_fn(n),) for n in range(1, n_intervals + 1)),
    )


@pytest.fixture
def simple_system():
    return DdeSystem.from_delay_equation((1.0, 1.0), (0.5,))


def test_constant_at_setpoint(simple_system):
    sol = manual_solution(simple_system, lambda n: ExpPoly.constant(2.0), 5)
    m = compute_metrics(sol, 2.0, horizon=5.0)
    assert m.overshoot == 0.0
    assert m.settling_time == 0.0
    assert m.iae == 0.0
    assert m.decay_ratio is None


def test_pure_exponential_decay_settling(simple_system):
    # y = e^{-t} toward 0 crosses the 5% band at ln 20
    sol = manual_solution(
        simple_system,
        lambda n: ExpPoly([(-1.0, (math.exp(-(n - 1)),))]),
        6,
    )
    m = compute_metrics(sol, 0.0, horizon=6.0, band=0.05)
    assert m.settling_time == pytest.approx(math.log(20.0), abs=1e-9)
    assert m.iae == pytest.approx(1.0 - math.exp(-6.0), rel=1e-12)
    assert m.overshoot == 0.0


def test_iae_matches_oracle_trapezoid(simple_system):
    init = InitialCondition.steady(1.0)
    forcing = ForcingTerm.setpoint_steps(1.0, [(0.0, 0.0)])
    sol = solve(simple_system, init, forcing, 10)
    m = compute_metrics(sol, 0.0, horizon=10.0)
    traj = integrate(simple_system, init, forcing, 10, 1e-4)
    reference = float(np.trapezoid(np.abs(traj.y), traj.ts))
    assert m.iae == pytest.approx(reference, abs=1e-6)


def test_overshoot_and_decay_ratio():
    # oscillatory loop: strong integral action overshoots and rings
    system = DdeSystem.from_delay_equation((1.0, 1.0), (0.8,))
    init = InitialCondition.steady(0.0)
    forcing = ForcingTerm.setpoint_steps(0.0, [(0.0, 1.0)])
    sol = solve(system, init, forcing, 30)
    m = compute_metrics(sol, 1.0, horizon=30.0)
    assert m.overshoot > 0.05
    assert m.decay_ratio is not None
    assert 0.0 < m.decay_ratio < 1.0
    ts = np.linspace(0.0, 30.0, 6001)
    ys = sol.evaluate_many(ts)
    # the trajectory really exceeds the setpoint by the reported fraction
    assert float(np.max(ys - 1.0)) == pytest.approx(m.overshoot, abs=1e-4)
    # this slow ring is still outside the band at the horizon
    assert abs(ys[-1] - 1.0) > 0.05
    assert m.settling_time is None
    # consecutive sampled peak heights confirm the reported decay ratio
    peaks = [
        abs(ys[i] - 1.0)
        for i in range(1, len(ys) - 1)
        if abs(ys[i] - 1.0) > max(abs(ys[i - 1] - 1.0), abs(ys[i + 1] - 1.0))
    ]
    assert peaks[1] / peaks[0] == pytest.approx(m.decay_ratio, abs=1e-3)


def test_settling_time_matches_sampled_estimate():
    system = DdeSystem.from_delay_equation((1.0, 1.0), (0.4, 0.5))
    init = InitialCondition.steady(1.0)
    forcing = ForcingTerm.setpoint_steps(1.0, [(0.0, 0.0)])
    sol = solve(system, init, forcing, 12)
    m = compute_metrics(sol, 0.0, horizon=12.0)
    assert m.settling_time is not None
    ts = np.linspace(0.0, 12.0, 240001)
    ys = sol.evaluate_many(ts)
    outside = ts[np.abs(ys) > 0.05]
    assert m.settling_time == pytest.approx(float(outside[-1]), abs=1e-3)


def test_downward_step_overshoot_sign():
    system = DdeSystem.from_delay_equation((1.0, 1.0), (0.8,))
    init = InitialCondition.steady(1.0)
    forcing = ForcingTerm.setpoint_steps(1.0, [(0.0, 0.0)])
    sol = solve(system, init, forcing, 30)
    m = compute_metrics(sol, 0.0, horizon=30.0)
    ts = np.linspace(0.0, 30.0, 6001)
    ys = sol.evaluate_many(ts)
    assert float(np.max(-ys)) == pytest.approx(m.overshoot, abs=1e-4)


def test_scan_refinement_does_not_move_results(simple_system):
    init = InitialCondition.steady(1.0)
    forcing = ForcingTerm.setpoint_steps(1.0, [(0.0, 0.0)])
    sol = solve(simple_system, init, forcing, 10)
    coarse = compute_metrics(sol, 0.0, horizon=10.0, scan_per_unit=128)
    fine = compute_metrics(sol, 0.0, horizon=10.0, scan_per_unit=1024)
    assert coarse.iae == pytest.approx(fine.iae, abs=1e-9)
    assert coarse.overshoot == pytest.approx(fine.overshoot, abs=1e-9)
    if coarse.settling_time is None:
        assert fine.settling_time is None
    else:
        assert coarse.settling_time == pytest.approx(fine.settling_time, abs=1e-9)


def test_not_settled_within_horizon(simple_system):
    init = InitialCondition.steady(1.0)
    forcing = ForcingTerm.setpoint_steps(1.0, [(0.0, 0.0)])
    sol = solve(simple_system, init, forcing, 3)
    m = compute_metrics(sol, 0.0, horizon=3.0)
    assert m.settling_time is None  # still on its way down at t = 3


def test_zero_step_uses_absolute_band(simple_system):
    # y = 0.2 t e^{-t} springs away from the setpoint it starts on, so the
    # step magnitude is zero and the band reads as an absolute threshold
    def segment(n):
        s = math.exp(-(n - 1))
        return ExpPoly([(-1.0, (0.2 * (n - 1) * s, 0.2 * s))])

    sol = manual_solution(simple_system, segment, 8)
    m = compute_metrics(sol, 0.0, horizon=8.0, band=0.05)
    assert m.overshoot == pytest.approx(0.2 * math.exp(-1.0), rel=1e-9)
    # settling: last solution of 0.2 t e^{-t} = 0.05 (bisection oracle)
    lo, hi = 1.0, 8.0
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if 0.2 * mid * math.exp(-mid) > 0.05:
            lo = mid
        else:
            hi = mid
    assert m.settling_time == pytest.approx(0.5 * (lo + hi), abs=1e-8)


def test_horizon_and_band_validation(simple_system):
    sol = manual_solution(simple_system, lambda n: ExpPoly.constant(1.0), 2)
    with pytest.raises(ValueError):
        compute_metrics(sol, 1.0, horizon=5.0)
    with pytest.raises(ValueError):
        compute_metrics(sol, 1.0, horizon=2.0, band=0.7)
