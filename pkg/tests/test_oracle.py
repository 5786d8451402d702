import math

import numpy as np
import pytest

from pidsteps.closedloop import DdeSystem
from pidsteps.exppoly import ExpPoly
from pidsteps.oracle import integrate
from pidsteps.stepper import ForcingTerm, InitialCondition, solve


@pytest.fixture
def unit_loop():
    return DdeSystem.from_delay_equation((1.0, 1.0), (0.5,))


def test_first_interval_constant(unit_loop):
    # steady start with the setpoint still matching: nothing moves yet
    init = InitialCondition.steady(1.0)
    forcing = ForcingTerm.setpoint_steps(1.0, [(0.0, 0.0)])
    traj = integrate(unit_loop, init, forcing, 1, 1e-3)
    assert np.allclose(traj.y, 1.0, atol=1e-12)


def test_zero_problem(unit_loop):
    traj = integrate(unit_loop, InitialCondition.steady(0.0), ForcingTerm.zero(), 3, 1e-2)
    assert np.all(traj.y == 0.0)
    assert np.all(traj.states == 0.0)


def test_matches_closed_form_second_interval(unit_loop):
    init = InitialCondition.steady(1.0)
    forcing = ForcingTerm.setpoint_steps(1.0, [(0.0, 0.0)])
    traj = integrate(unit_loop, init, forcing, 2, 1e-3)
    mask = traj.ts >= 1.0
    ts2 = traj.ts[mask] - 1.0
    closed = 1.5 - 0.5 * ts2 - 0.5 * np.exp(-ts2)
    assert np.max(np.abs(traj.y[mask] - closed)) < 1e-8


def test_grid_shape_and_spacing(unit_loop):
    dt = 1e-2
    traj = integrate(unit_loop, InitialCondition.steady(1.0), ForcingTerm.constant(1.0), 2, dt)
    assert len(traj.ts) == 2 * round(1 / dt) + 1
    gaps = np.diff(traj.ts)
    assert np.allclose(gaps, dt, atol=1e-12)
    assert traj.states.shape == (len(traj.ts), unit_loop.m_a)


def test_fourth_order_convergence():
    # a loop with visible RK4 error at coarse steps: halving dt cuts the
    # deviation from the analytic solution by about 16x
    system = DdeSystem.from_delay_equation((1.0, 0.4), (0.6, 0.3))
    init = InitialCondition.steady(0.0)
    forcing = ForcingTerm.setpoint_steps(0.0, [(0.0, 1.0)])
    sol = solve(system, init, forcing, 4)
    errors = []
    for dt in (0.05, 0.025, 0.0125):
        traj = integrate(system, init, forcing, 4, dt)
        errors.append(np.max(np.abs(sol.evaluate_many(traj.ts) - traj.y)))
    assert errors[0] > 1e-10  # above the floating floor, so ratios mean something
    for coarse, fine in zip(errors, errors[1:]):
        assert coarse / fine == pytest.approx(16.0, rel=0.35)


def test_neutral_term_exercised():
    # delayed second derivative active (b has order m_a): still matches
    system = DdeSystem.from_delay_equation((1.0, 1.2), (0.4, 0.2, 0.15))
    init = InitialCondition.steady(1.0)
    forcing = ForcingTerm.setpoint_steps(1.0, [(0.0, 0.0)])
    sol = solve(system, init, forcing, 6)
    traj = integrate(system, init, forcing, 6, 1e-3)
    assert np.max(np.abs(sol.evaluate_many(traj.ts) - traj.y)) < 1e-6


def test_knot_aligned_steps_required(unit_loop):
    init = InitialCondition.steady(0.0)
    forcing = ForcingTerm.setpoint_steps(0.0, [(0.3, 1.0)])  # knot at 0.3
    with pytest.raises(ValueError):
        integrate(unit_loop, init, forcing, 2, 0.25)  # 0.3 not on the grid
    traj = integrate(unit_loop, init, forcing, 2, 0.1)
    assert traj.ts[-1] == pytest.approx(2.0)


def test_dt_must_divide_interval(unit_loop):
    with pytest.raises(ValueError):
        integrate(unit_loop, InitialCondition.steady(0.0), ForcingTerm.zero(), 1, 0.3)


def test_multi_knot_history_and_derivative_states():
    # derivatives reported in the state match the analytic solution's
    system = DdeSystem.from_delay_equation((1.0, 1.5, 0.5), (0.3, 0.2))
    init = InitialCondition.steady(0.5)
    forcing = ForcingTerm.setpoint_steps(0.5, [(1.5, -0.5)])
    sol = solve(system, init, forcing, 4)
    traj = integrate(system, init, forcing, 4, 1e-3)
    for h in range(system.m_a):
        analytic = np.array([sol.derivative_value(t, h) if h else sol.value(t) for t in traj.ts[::250]])
        assert np.max(np.abs(analytic - traj.states[::250, h])) < 1e-6
