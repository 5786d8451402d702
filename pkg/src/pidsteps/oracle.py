"""Independent fixed-step RK4 cross-check of the analytic stepper.

Within one delay interval the closed-loop equation is an ODE whose
delayed terms are functions of the previous interval.  The integrator
marches interval by interval; interval 1 reads the history and forcing
analytically (exact exponential-polynomial data), and every later
interval reads the values its predecessor's RK4 *stages* produced at the
very same stage abscissae.  Feeding stage values to stage evaluations is
exactly classical RK4 applied to the coupled system of all intervals
integrated in lockstep, so the usual O(dt^4) convergence holds and the
delayed highest derivative -- the neutral term -- is the right-hand side
value already computed at that stage, never a difference quotient.

No result of the analytic stepper enters anywhere; agreement between the
two is a genuine cross-validation.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass

import numpy as np

from .closedloop import DdeSystem
from .stepper import ForcingTerm, InitialCondition, _merged_knots, _refined_history


@dataclass(frozen=True)
class OracleTrajectory:
    """Samples of y and its derivatives up to order m_a - 1 on a uniform grid."""

    dt: float
    ts: np.ndarray
    states: np.ndarray  # shape (len(ts), m_a)

    @property
    def y(self) -> np.ndarray:
        return self.states[:, 0]


def integrate(
    system: DdeSystem,
    init: InitialCondition,
    forcing: ForcingTerm,
    n_intervals: int,
    dt: float = 1e-3,
) -> OracleTrajectory:
    """RK4 trajectory over [0, n_intervals] with fixed step ``dt``.

    ``dt`` must divide the unit interval and every knot gap so that the
    forcing/history switches fall on step boundaries.
    """
    if n_intervals < 1:
        raise ValueError(f"need at least one interval, got {n_intervals}")
    if dt <= 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    steps = round(1.0 / dt)
    if abs(steps * dt - 1.0) > 1e-9:
        raise ValueError(f"step-misalignment: dt={dt} does not divide the interval")
    knots = _merged_knots(init, forcing)
    for tau in knots:
        if abs(tau / dt - round(tau / dt)) > 1e-6:
            raise ValueError(f"step-misalignment: knot {tau} not on the dt={dt} grid")

    m_a = system.m_a
    a = system.a
    a_top = a[-1]
    b_pad = np.zeros(m_a + 1)
    b_pad[: len(system.b)] = system.b

    # stage abscissae within the interval, per step: start, midpoint, end
    s_lo = np.arange(steps) * dt
    s_mid = s_lo + 0.5 * dt
    s_hi = s_lo + dt
    # step index -> knot gap, chosen by midpoint so boundaries stay one-sided
    gap_of_step = np.minimum(
        np.searchsorted(np.asarray(knots), s_mid, side="right") - 1, len(knots) - 2
    )

    history = _refined_history(init, knots)

    def analytic_stack(segments):
        """(steps, 4, m_a + 1) values/derivatives of per-gap segments."""
        out = np.empty((steps, 4, m_a + 1))
        for gap, seg in enumerate(segments):
            mask = gap_of_step == gap
            if not mask.any():
                continue
            g = seg
            for order in range(m_a + 1):
                if order > 0:
                    g = g.derivative(1)
                out[mask, 0, order] = g.evaluate_many(s_lo[mask])
                mid_vals = g.evaluate_many(s_mid[mask])
                out[mask, 1, order] = mid_vals
                out[mask, 2, order] = mid_vals
                out[mask, 3, order] = g.evaluate_many(s_hi[mask])
        return out

    def forcing_drive(n: int) -> np.ndarray:
        """(steps, 4) values of sum_h c_h f^(h) from the previous interval."""
        out = np.empty((steps, 4))
        for gap in range(len(knots) - 1):
            mask = gap_of_step == gap
            if not mask.any():
                continue
            fseg = forcing.local_segment(n - 1, knots[gap], knots[gap + 1])
            drive = None
            g = fseg
            for h, ch in enumerate(system.c):
                if h > 0:
                    g = g.derivative(1)
                if ch != 0.0:
                    scaled = g.scale(ch)
                    drive = scaled if drive is None else drive.add(scaled)
            if drive is None:
                out[mask] = 0.0
                continue
            out[mask, 0] = drive.evaluate_many(s_lo[mask])
            mid_vals = drive.evaluate_many(s_mid[mask])
            out[mask, 1] = mid_vals
            out[mask, 2] = mid_vals
            out[mask, 3] = drive.evaluate_many(s_hi[mask])
        return out

    def rhs(u, w):
        du = list(u[1:])
        acc = w
        for h in range(1, m_a):
            acc -= a[h - 1] * u[h]
        du.append(acc / a_top)
        return du

    u = list(init.segments[-1].derivatives_at(1.0, m_a))
    ts_out = [0.0]
    states_out = [list(u)]
    delayed = analytic_stack(history)

    half = 0.5 * dt
    sixth = dt / 6.0
    for n in range(1, n_intervals + 1):
        w_all = -(delayed @ b_pad) + forcing_drive(n)
        record = np.empty((steps, 4, m_a + 1))
        for s in range(steps):
            w1, w2, w3, w4 = w_all[s]
            k1 = rhs(u, w1)
            y2 = [u[i] + half * k1[i] for i in range(m_a)]
            k2 = rhs(y2, w2)
            y3 = [u[i] + half * k2[i] for i in range(m_a)]
            k3 = rhs(y3, w3)
            y4 = [u[i] + dt * k3[i] for i in range(m_a)]
            k4 = rhs(y4, w4)
            record[s, 0, :m_a] = u
            record[s, 0, m_a] = k1[-1]
            record[s, 1, :m_a] = y2
            record[s, 1, m_a] = k2[-1]
            record[s, 2, :m_a] = y3
            record[s, 2, m_a] = k3[-1]
            record[s, 3, :m_a] = y4
            record[s, 3, m_a] = k4[-1]
            u = [
                u[i] + sixth * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
                for i in range(m_a)
            ]
            t_next = (n - 1) + (s + 1) * dt
            ts_out.append(t_next)
            states_out.append(list(u))
        delayed = record

    return OracleTrajectory(
        dt=dt, ts=np.asarray(ts_out), states=np.asarray(states_out)
    )
