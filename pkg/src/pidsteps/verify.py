"""Self-check suites behind the ``verify`` CLI command.

Each suite exercises one cross-validation route at a configurable size:
the index-identity enumerations, the two Vandermonde solvers against
each other, the closed-form derivative against finite differences, and
the analytic stepper against the RK4 integrator (with junction
continuity and equation residuals checked along the way).  Suites are
deterministic for a given seed.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import oracle, series, stepper, vandermonde
from .closedloop import DdeSystem
from .exppoly import ExpPoly
from .stepper import ForcingTerm, InitialCondition


@dataclass(frozen=True)
class SuiteResult:
    name: str
    passed: bool
    detail: str


def check_series_identities(m_max: int = 8, z_max: int = 8) -> SuiteResult:
    """Original vs shifted enumerations agree as multisets, no duplicates."""
    for m in range(1, m_max + 1):
        orig = Counter(series.enumerate_original(series.S1, m))
        shif = Counter(series.enumerate_shifted(series.S1, m))
        if orig != shif or any(v != 1 for v in orig.values()):
            return SuiteResult("series-identities", False, f"S1 mismatch at m={m}")
        for z in range(1, z_max + 1):
            orig = Counter(series.enumerate_original(series.S2, m, z))
            shif = Counter(series.enumerate_shifted(series.S2, m, z))
            if orig != shif or any(v != 1 for v in orig.values()):
                return SuiteResult(
                    "series-identities", False, f"S2 mismatch at m={m}, z={z}"
                )
    return SuiteResult(
        "series-identities", True, f"all m<={m_max}, z<={z_max} multisets equal"
    )


def check_vandermonde_cross(trials: int = 1000, m_max: int = 6, seed: int = 0) -> SuiteResult:
    """Closed-form Cramer solution agrees with pivoted elimination."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for trial in range(trials):
        m = int(rng.integers(1, m_max + 1))
        nodes = _separated_nodes(rng, m, spacing=0.2)
        d = rng.uniform(0.3, 2.0, size=m) * rng.choice([-1.0, 1.0], size=m)
        z = rng.uniform(-2.0, 2.0, size=m)
        sys_v = vandermonde.VandermondeSystem(nodes, d, z)
        xc = vandermonde.solve_cramer(sys_v)
        xe = vandermonde.solve_elimination(sys_v)
        scale = max(max(abs(v) for v in xe), 1e-30)
        err = max(abs(a - b) for a, b in zip(xc, xe)) / scale
        worst = max(worst, err)
        if err > 1e-10:
            return SuiteResult(
                "vandermonde-cross",
                False,
                f"trial {trial}: relative gap {err:.3e} (m={m})",
            )
    counts_ok = all(
        vandermonde.laplace_minor_count(m, i)
        == sum(1 for _ in _subsets(m - 1, i - 1))
        for m in range(1, 9)
        for i in range(1, m + 1)
    )
    if not counts_ok:
        return SuiteResult("vandermonde-cross", False, "minor count mismatch")
    return SuiteResult(
        "vandermonde-cross", True, f"{trials} trials, worst relative gap {worst:.2e}"
    )


def check_derivative_fd(trials: int = 500, seed: int = 1) -> SuiteResult:
    """Closed-form derivatives match central finite differences."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for trial in range(trials):
        r = rng.uniform(-3.0, 3.0)
        i = int(rng.integers(0, 7))
        h = int(rng.integers(1, 5))
        t = rng.uniform(-2.0, 2.0)
        f = ExpPoly(((r, (0.0,) * i + (1.0,)),))
        exact = f.derivative(h).evaluate(t)
        approx = _central_difference(f.evaluate, t, h)
        scale = max(abs(exact), abs(approx), 1.0)
        err = abs(exact - approx) / scale
        worst = max(worst, err)
        if err > 1e-5:
            return SuiteResult(
                "derivative-fd",
                False,
                f"trial {trial}: r={r:.3f} i={i} h={h} t={t:.3f} gap {err:.3e}",
            )
    return SuiteResult("derivative-fd", True, f"{trials} trials, worst gap {worst:.2e}")


def check_stepper_oracle(
    cases: int = 20, seed: int = 2, dt: float = 1e-3, horizon: int = 10
) -> SuiteResult:
    """Analytic trajectories match RK4, stay continuous, satisfy the equation."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for case in range(cases):
        system, init, forcing = random_stable_loop(rng)
        sol = stepper.solve(system, init, forcing, horizon)
        traj = oracle.integrate(system, init, forcing, horizon, dt)
        gap = float(np.max(np.abs(sol.evaluate_many(traj.ts) - traj.y)))
        worst = max(worst, gap)
        if gap > 1e-6:
            return SuiteResult(
                "stepper-oracle", False, f"case {case}: trajectory gap {gap:.3e}"
            )
        res_ok, res_detail = residuals_ok(system, init, forcing, sol, rng)
        if not res_ok:
            return SuiteResult("stepper-oracle", False, f"case {case}: {res_detail}")
    return SuiteResult(
        "stepper-oracle", True, f"{cases} loops, worst trajectory gap {worst:.2e}"
    )


def random_stable_loop(
    rng, min_separation: float = 0.5
) -> tuple[DdeSystem, InitialCondition, ForcingTerm]:
    """A gently tuned first- or second-order closed loop with real poles.

    Delay-free roots are drawn in [-5, -0.1], rejecting draws whose
    pairwise separation (null root included) falls under
    ``min_separation``: nearly multiple roots force the exact
    representation into huge cancelling coefficients, which double
    precision cannot carry across many intervals.  Gains are kept small
    so the unit-delay loop stays well behaved over the horizon.
    """
    while True:
        order = int(rng.integers(1, 3))  # plant denominator degree
        roots = sorted(rng.uniform(-5.0, -0.1, size=order))
        spaced = roots + [0.0]
        if min(b - a for a, b in zip(spaced, spaced[1:])) < min_separation:
            continue
        den = [1.0]
        for r in roots:
            den = _poly_mul(den, [-r, 1.0])  # (s - r), monic, r < 0
        gain = rng.uniform(0.5, 1.5)
        b = [
            gain * rng.uniform(0.05, 0.4),  # integral channel
            gain * rng.uniform(0.0, 0.4),   # proportional channel
        ]
        if order == 2 and rng.random() < 0.5:
            b.append(gain * rng.uniform(0.0, 0.2))  # derivative channel
        system = DdeSystem.from_delay_equation(den, b)
        y0 = rng.uniform(-1.0, 1.0)
        target = rng.uniform(-1.0, 1.0)
        init = InitialCondition.steady(y0)
        forcing = ForcingTerm.setpoint_steps(y0, [(0.0, target)])
        return system, init, forcing


def residuals_ok(system, init, forcing, sol, rng, tol: float = 1e-8):
    """Spot-check the interval equation at random interior points."""
    knots = sol.knots
    prev = stepper._refined_history(init, list(knots))
    for n in range(1, sol.intervals + 1):
        for k in range(1, sol.q + 1):
            prev_f = forcing.local_segment(n - 1, knots[k - 1], knots[k])
            seg = sol.segment(n, k)
            for t in rng.uniform(knots[k - 1], knots[k], size=20):
                res, scale = stepper.dde_residual(
                    system, prev[k - 1], prev_f, seg, float(t)
                )
                if abs(res) > tol * scale:
                    return False, (
                        f"residual {res:.3e} vs scale {scale:.3e} at n={n}, k={k}"
                    )
        prev = list(sol.segments[n - 1])
    return True, ""


def run(level: str = "quick", seed: int = 0, report: Callable[[str], None] = print) -> bool:
    """Run every suite at the requested size; returns overall pass."""
    if level == "quick":
        suites = [
            lambda: check_series_identities(5, 5),
            lambda: check_vandermonde_cross(150, 5, seed),
            lambda: check_derivative_fd(100, seed + 1),
            lambda: check_stepper_oracle(3, seed + 2, horizon=6),
        ]
    elif level == "full":
        suites = [
            lambda: check_series_identities(8, 8),
            lambda: check_vandermonde_cross(1000, 6, seed),
            lambda: check_derivative_fd(500, seed + 1),
            lambda: check_stepper_oracle(20, seed + 2),
        ]
    else:
        raise ValueError(f"unknown level {level!r}; use 'quick' or 'full'")
    report(f"verification level={level} seed={seed}")
    all_ok = True
    for suite in suites:
        result = suite()
        status = "PASS" if result.passed else "FAIL"
        report(f"{status} {result.name}: {result.detail}")
        all_ok = all_ok and result.passed
    return all_ok


# -- helpers -----------------------------------------------------------


def _separated_nodes(rng, m: int, spacing: float) -> list[float]:
    while True:
        nodes = sorted(rng.uniform(-4.0, 4.0, size=m))
        if all(b - a >= spacing for a, b in zip(nodes, nodes[1:])):
            return nodes


def _plain_central(f, t: float, h: int, step: float) -> float:
    from math import comb

    total = 0.0
    for k in range(h + 1):
        total += (-1.0) ** k * comb(h, k) * f(t + (h / 2.0 - k) * step)
    return total / step**h


def _central_difference(f, t: float, h: int, step: float = 1e-2) -> float:
    """Richardson-extrapolated order-h central difference, O(step^4).

    The plain stencil cannot reach 1e-5 relative accuracy for h = 4 at
    any single step (truncation needs small steps, the 1/step^h roundoff
    amplification needs large ones); one extrapolation level opens the
    window.
    """
    return (4.0 * _plain_central(f, t, h, 0.5 * step) - _plain_central(f, t, h, step)) / 3.0


def _subsets(n: int, k: int):
    from itertools import combinations

    return combinations(range(n), k)


def _poly_mul(p, q):
    out = [0.0] * (len(p) + len(q) - 1)
    for i, pi in enumerate(p):
        for j, qj in enumerate(q):
            out[i + j] += pi * qj
    return out
