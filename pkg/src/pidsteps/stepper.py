"""Interval-by-interval analytic advance of the closed-loop delay equation.

Each unit interval n (global time t in [n-1, n]) is solved in local time
t_n = t - (n - 1).  Because the delayed argument falls exactly one
interval back, the delayed terms are known exponential polynomials and
the interval problem is an ODE whose solution stays in the same family.

Per interval and per characteristic root r_p, matching coefficients of
exp(r_p t) t^j splits into two stages:

  * powers i >= 1: a triangular linear system (the coefficient of the
    current power's own unknown vanishes through the characteristic
    polynomial, so back-substitution from the top power down determines
    every non-constant coefficient);
  * the constants: the continuity of y, y', ..., y^(m_a - 1) at the
    junction yields an m_a x m_a Vandermonde system in the nodes r_p,
    with columns scaled by exp(r_p tau) when the junction sits at an
    interior knot tau.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from itertools import chain
from typing import Iterable, Sequence

from . import series, vandermonde
from .closedloop import DdeSystem
from .exppoly import MAX_POWER, ROOT_DISTINCT_TOL, ExpPoly, deriv_weight

CONTINUITY_TOL = 1e-9

# Leading-coefficient threshold below which the triangular system signals a
# multiple characteristic root.
DEGENERATE_TOL = 1e-12


class DegenerateLeadingCoefficient(ValueError):
    """Triangular solve hit a vanishing diagonal: multiple root territory."""


# ---------------------------------------------------------------------------
# problem data


@dataclass(frozen=True)
class InitialCondition:
    """History segments in the local time of the interval before t = 0.

    ``knots`` are 0 = tau_0 < ... < tau_q = 1; segment k covers local
    time [tau_(k-1), tau_k], which is global time [-1 + tau_(k-1),
    -1 + tau_k].
    """

    knots: tuple[float, ...]
    segments: tuple[ExpPoly, ...]

    def __init__(self, knots: Sequence[float], segments: Iterable[ExpPoly]):
        knots = tuple(float(v) for v in knots)
        segments = tuple(segments)
        if len(knots) < 2 or knots[0] != 0.0 or knots[-1] != 1.0:
            raise ValueError(f"knots must run from 0.0 to 1.0, got {knots}")
        for a, b in zip(knots, knots[1:]):
            if not b > a:
                raise ValueError(f"knots must be strictly increasing, got {knots}")
        if len(segments) != len(knots) - 1:
            raise ValueError(
                f"{len(knots) - 1} knot gaps but {len(segments)} segments"
            )
        object.__setattr__(self, "knots", knots)
        object.__setattr__(self, "segments", segments)

    @classmethod
    def steady(cls, value: float) -> "InitialCondition":
        """Constant history, the usual starting point of a tuning transient."""
        return cls((0.0, 1.0), (ExpPoly.constant(value),))

    @classmethod
    def from_history(cls, history: ExpPoly) -> "InitialCondition":
        """Single-segment history given as a function of global time on [-1, 0]."""
        return cls((0.0, 1.0), (history.shift_origin(-1.0),))

    @property
    def q(self) -> int:
        return len(self.segments)


class ForcingTerm:
    """Setpoint signal as a piecewise exponential polynomial of global time.

    ``pieces`` is a sorted tuple of (start_time, ExpPoly); each piece is
    active from its start up to the next.  The first piece must cover the
    history interval, i.e. start at or before -1.
    """

    __slots__ = ("pieces",)

    def __init__(self, pieces: Iterable[tuple[float, ExpPoly]]):
        items = sorted(((float(s), p) for s, p in pieces), key=lambda sp: sp[0])
        if not items:
            raise ValueError("forcing needs at least one piece")
        if items[0][0] > -1.0:
            raise ValueError(
                f"first forcing piece starts at {items[0][0]}; must cover t <= -1"
            )
        for (s1, _), (s2, _) in zip(items, items[1:]):
            if s2 - s1 <= 1e-12:
                raise ValueError(f"forcing breakpoints {s1} and {s2} coincide")
        self.pieces = tuple(items)

    @classmethod
    def zero(cls) -> "ForcingTerm":
        return cls(((-math.inf, ExpPoly.zero()),))

    @classmethod
    def constant(cls, value: float) -> "ForcingTerm":
        return cls(((-math.inf, ExpPoly.constant(value)),))

    @classmethod
    def setpoint_steps(
        cls, initial: float, steps: Sequence[tuple[float, float]]
    ) -> "ForcingTerm":
        """Piecewise-constant setpoint: ``initial`` before the first step,
        then each (time, value) in order."""
        pieces = [(-math.inf, ExpPoly.constant(initial))]
        for t, v in sorted(steps):
            pieces.append((float(t), ExpPoly.constant(v)))
        return cls(pieces)

    def knots(self) -> set[float]:
        """Fractional parts of breakpoints: extra sub-interval knots they force."""
        out = set()
        for s, _ in self.pieces:
            if not math.isfinite(s):
                continue
            frac = s % 1.0
            if 1e-12 < frac < 1.0 - 1e-12:
                out.add(frac)
        return out

    def value(self, t: float) -> float:
        idx = bisect_right([s for s, _ in self.pieces], t) - 1
        return self.pieces[max(idx, 0)][1].evaluate(t)

    def local_segment(self, n: int, lo: float, hi: float) -> ExpPoly:
        """The forcing on global (n-1+lo, n-1+hi), re-origined to local time."""
        a = n - 1 + lo
        b = n - 1 + hi
        starts = [s for s, _ in self.pieces]
        idx = bisect_right(starts, 0.5 * (a + b)) - 1
        idx = max(idx, 0)
        if idx + 1 < len(self.pieces) and starts[idx + 1] < b - 1e-9:
            raise ValueError(
                f"forcing breakpoint {starts[idx + 1]} falls inside ({a}, {b}); "
                f"knot set does not resolve it"
            )
        return self.pieces[idx][1].shift_origin(n - 1.0)

    def max_degree(self) -> int:
        return max((len(c) for _, p in self.pieces for _, c in p.terms), default=1) - 1


@dataclass(frozen=True)
class PiecewiseSolution:
    """Solved trajectory: per interval n and knot gap k, one segment in
    local time t_n; globally t = n - 1 + t_n."""

    system: DdeSystem
    knots: tuple[float, ...]
    segments: tuple[tuple[ExpPoly, ...], ...]

    @property
    def intervals(self) -> int:
        return len(self.segments)

    @property
    def q(self) -> int:
        return len(self.knots) - 1

    def segment(self, n: int, k: int) -> ExpPoly:
        """Segment for interval n = 1..N, knot gap k = 1..q."""
        return self.segments[n - 1][k - 1]

    def locate(self, t: float) -> tuple[int, int, float]:
        """(n, k, local time) of the segment covering global time t."""
        # forgive sub-nanosecond overshoot from accumulated grid arithmetic
        if -1e-9 < t < 0.0:
            t = 0.0
        elif self.intervals < t < self.intervals + 1e-9:
            t = float(self.intervals)
        if not 0.0 <= t <= self.intervals:
            raise ValueError(f"t={t} outside solved range [0, {self.intervals}]")
        n = min(int(math.floor(t)) + 1, self.intervals)
        local = t - (n - 1)
        k = min(max(bisect_right(self.knots, local) - 1, 0), self.q - 1) + 1
        return n, k, local

    def value(self, t: float) -> float:
        n, k, local = self.locate(t)
        return self.segment(n, k).evaluate(local)

    def derivative_value(self, t: float, h: int) -> float:
        n, k, local = self.locate(t)
        return self.segment(n, k).derivative(h).evaluate(local)

    def evaluate_many(self, ts):
        import numpy as np

        ts = np.asarray(ts, dtype=float)
        out = np.empty_like(ts)
        for i, t in enumerate(ts.ravel()):
            out.ravel()[i] = self.value(float(t))
        return out

    def table_roots(self) -> tuple[float, ...]:
        """Root ordering for coefficient tables: the null root (whose term
        carries the polynomial part of steady responses) first, the rest
        ascending."""
        rest = tuple(r for r in self.system.roots if r != 0.0)
        return (0.0,) + rest

    def coefficient_rows(self, n: int, k: int = 1):
        """Nonzero (root index p, power i, coefficient) rows of one segment."""
        seg = self.segment(n, k)
        rows = []
        for p, root in enumerate(self.table_roots(), start=1):
            for i, g in enumerate(seg.coeffs_for(root)):
                if g != 0.0:
                    rows.append((p, i, g))
        return rows


# ---------------------------------------------------------------------------
# bookkeeping


def ansatz_degree(v: int, n: int) -> int:
    """Polynomial degree bound at interval n for a term that starts at
    degree v: the degree grows by one per interval.  Negative means the
    polynomial part is absent."""
    return v + n


def degrees(init: InitialCondition, n: int, roots: Sequence[float] | None = None):
    """Per (knot gap k, root) degree bound v + n derived from the history.

    ``roots`` defaults to the rates present in the history segments.
    Forcing-side cancellations can make actual degrees smaller; this is
    the upper bound the ansatz guarantees.
    """
    table = {}
    for k, seg in enumerate(init.segments, start=1):
        use = seg.roots if roots is None else tuple(roots)
        for r in use:
            table[(k, r)] = ansatz_degree(seg.degree_for(r), n)
    return table


# ---------------------------------------------------------------------------
# one-interval advance


def _forced_coefficients(
    mult: Sequence[float], poly: ExpPoly, root: float, sign: float, out: dict
) -> None:
    """Accumulate sign * sum_h mult_h * d^h/dt^h of ``poly``'s ``root`` term,
    bucketed by output power j.  Iterates the shifted index enumerators so
    the bounds match the verified series identities."""
    coeffs = poly.coeffs_for(root)
    z = len(coeffs) - 1
    if z < 0:
        return
    if mult[0] != 0.0:
        for j, g in enumerate(coeffs):
            out[j] = out.get(j, 0.0) + sign * mult[0] * g
    m = len(mult) - 1
    if m < 1:
        return
    for h, i, j in chain(series.s1_shifted(m), series.s2_shifted(m, z)):
        if i > z:
            continue
        g = coeffs[i]
        if g == 0.0 or mult[h] == 0.0:
            continue
        out[j] = out.get(j, 0.0) + sign * mult[h] * deriv_weight(h, i, j) * root ** (
            h - i + j
        ) * g


def advance_polynomial_part(
    system: DdeSystem, prev_y: ExpPoly, prev_f: ExpPoly, n: int = 0, k: int = 0
) -> ExpPoly:
    """Non-constant coefficients of the next segment, root by root.

    For each characteristic root, the right-hand side built from the
    delayed segment and forcing has some degree D - 1; equating the
    coefficients of t^j for j = D-1..0 gives a triangular system whose
    back-substitution yields the powers i = D..1.  The constant column
    drops out (its multiplier is the characteristic polynomial, which is
    zero at a root) and is fixed later by continuity.
    """
    where = f" (interval n={n}, piece k={k})" if n else ""
    m_a = system.m_a
    a = system.a
    partial_terms = []
    for root in system.roots:
        lead = system.char_poly_deriv(root)
        if abs(lead) < DEGENERATE_TOL * max(abs(v) for v in a):
            raise DegenerateLeadingCoefficient(
                f"characteristic derivative {lead} at root {root} is numerically "
                f"zero; multiple roots are outside scope{where}"
            )
        rhs: dict[int, float] = {}
        _forced_coefficients(system.b, prev_y, root, -1.0, rhs)
        _forced_coefficients(system.c, prev_f, root, +1.0, rhs)
        top = max((j for j, v in rhs.items() if v != 0.0), default=-1)
        if top < 0:
            continue
        d = top + 1  # number of unknown powers i = 1..d
        dense = [rhs.get(j, 0.0) for j in range(d)]
        mat: dict[tuple[int, int], float] = {}
        for h, i, j in chain(series.s1_shifted(m_a), series.s2_shifted(m_a, d)):
            if i > d or i == j or j >= d:
                continue
            mat[(j, i)] = mat.get((j, i), 0.0) + a[h - 1] * deriv_weight(
                h, i, j
            ) * root ** (h - i + j)
        g = [0.0] * (d + 1)
        for j in range(d - 1, -1, -1):
            acc = dense[j]
            for i in range(j + 2, min(j + m_a, d) + 1):
                acc -= mat.get((j, i), 0.0) * g[i]
            g[j + 1] = acc / mat[(j, j + 1)]
        partial_terms.append((root, g))
    return ExpPoly(partial_terms)


def advance_constant_part(
    system: DdeSystem,
    partial: ExpPoly,
    boundary_values: Sequence[float],
    tau: float,
) -> ExpPoly:
    """Fix the constant of every root from the junction conditions.

    ``boundary_values`` are y, y', ..., y^(m_a - 1) of the adjoining
    known segment at the junction; the already-determined non-constant
    part is evaluated there and subtracted, leaving a Vandermonde system
    in the roots with column scales exp(r_p tau).
    """
    m_a = system.m_a
    if len(boundary_values) != m_a:
        raise ValueError(f"need {m_a} boundary derivatives, got {len(boundary_values)}")
    partial_derivs = partial.derivatives_at(tau, m_a)
    zs = [bv - pv for bv, pv in zip(boundary_values, partial_derivs)]
    scales = [math.exp(r * tau) for r in system.roots]
    consts = vandermonde.solve_elimination(
        vandermonde.VandermondeSystem(system.roots, scales, zs)
    )
    terms = {r: list(c) for r, c in partial.terms}
    for root, g0 in zip(system.roots, consts):
        row = terms.setdefault(root, [0.0])
        row[0] += g0
    return ExpPoly(terms.items())


# ---------------------------------------------------------------------------
# full solve


def solve(
    system: DdeSystem, init: InitialCondition, forcing: ForcingTerm, n_intervals: int
) -> PiecewiseSolution:
    """March the solution across ``n_intervals`` delay intervals.

    The knot set is the union of the history's knots and those forced by
    setpoint switches at non-integer times; history segments are
    restricted to the refined gaps.  Interval 1 consumes the history
    segments directly as functions of local time.
    """
    if n_intervals < 1:
        raise ValueError(f"need at least one interval, got {n_intervals}")
    knots = _merged_knots(init, forcing)
    q = len(knots) - 1
    prev = _refined_history(init, knots)
    _check_roots_subset(prev, system, "initial condition")
    _check_degree_budget(init, forcing, n_intervals)

    all_segments = []
    for n in range(1, n_intervals + 1):
        prev_f = [
            forcing.local_segment(n - 1, knots[k], knots[k + 1]) for k in range(q)
        ]
        _check_roots_subset(prev_f, system, "forcing")
        cur: list[ExpPoly] = []
        for k in range(q):
            partial = advance_polynomial_part(system, prev[k], prev_f[k], n, k + 1)
            if k == 0:
                boundary = prev[q - 1].derivatives_at(1.0, system.m_a)
            else:
                boundary = cur[k - 1].derivatives_at(knots[k], system.m_a)
            cur.append(advance_constant_part(system, partial, boundary, knots[k]))
        all_segments.append(tuple(cur))
        prev = cur

    sol = PiecewiseSolution(system=system, knots=tuple(knots), segments=tuple(all_segments))
    _assert_continuity(sol, init)
    return sol


def dde_residual(
    system: DdeSystem, prev_y: ExpPoly, prev_f: ExpPoly, seg: ExpPoly, t: float
) -> tuple[float, float]:
    """(LHS - RHS, magnitude scale) of the interval equation at local time t.

    The scale is the sum of the absolute values of every term, so
    ``abs(residual) <= tol * scale`` is a meaningful relative test.
    """
    total = 0.0
    scale = 0.0
    for h in range(1, system.m_a + 1):
        v = system.a[h - 1] * seg.derivative(h).evaluate(t)
        total += v
        scale += abs(v)
    for h, bh in enumerate(system.b):
        v = bh * (prev_y.derivative(h).evaluate(t) if h else prev_y.evaluate(t))
        total += v
        scale += abs(v)
    for h, ch in enumerate(system.c):
        v = ch * (prev_f.derivative(h).evaluate(t) if h else prev_f.evaluate(t))
        total -= v
        scale += abs(v)
    return total, max(scale, 1e-30)


# ---------------------------------------------------------------------------
# internals


def _merged_knots(init: InitialCondition, forcing: ForcingTerm) -> list[float]:
    knots = set(init.knots) | forcing.knots()
    merged = []
    for v in sorted(knots):
        if merged and v - merged[-1] <= 1e-12:
            continue
        merged.append(v)
    return merged


def _refined_history(init: InitialCondition, knots: list[float]) -> list[ExpPoly]:
    out = []
    for lo, hi in zip(knots, knots[1:]):
        mid = 0.5 * (lo + hi)
        idx = bisect_right(init.knots, mid) - 1
        out.append(init.segments[min(idx, init.q - 1)])
    return out


def _check_roots_subset(polys: Iterable[ExpPoly], system: DdeSystem, what: str) -> None:
    for poly in polys:
        for r in poly.roots:
            if not any(abs(r - rp) <= ROOT_DISTINCT_TOL for rp in system.roots):
                raise ValueError(
                    f"{what} uses rate {r}, which is not a characteristic root "
                    f"of the system {system.roots}"
                )


def _check_degree_budget(
    init: InitialCondition, forcing: ForcingTerm, n_intervals: int
) -> None:
    base = max(
        [len(c) - 1 for seg in init.segments for _, c in seg.terms] + [0]
    )
    base = max(base, forcing.max_degree())
    if base + n_intervals > MAX_POWER:
        raise ValueError(
            f"degree {base}+{n_intervals} would exceed the factorial table "
            f"({MAX_POWER}); shorten the horizon"
        )


def _assert_continuity(sol: PiecewiseSolution, init: InitialCondition) -> None:
    """Junction agreement must be explained by roundoff.

    Evaluating a segment cancels terms as large as its largest
    coefficient, so the unavoidable junction noise is of order
    eps * max|coefficient| (coefficients grow with the horizon, and
    sharply so for ringing loops or nearly multiple roots).  Anything
    beyond that allowance signals an actual solver defect.
    """
    system = sol.system
    m_a = system.m_a
    prev = _refined_history(init, list(sol.knots))
    for n in range(1, sol.intervals + 1):
        for k in range(1, sol.q + 1):
            seg = sol.segment(n, k)
            if k == 1:
                ref, at_ref, at_seg = prev[-1], 1.0, 0.0
            else:
                ref, at_ref, at_seg = sol.segment(n, k - 1), sol.knots[k - 1], sol.knots[k - 1]
            g_l, g_r = ref, seg
            for h in range(m_a):
                lv = g_l.evaluate(at_ref)
                rv = g_r.evaluate(at_seg)
                cancellation = 64.0 * 2.3e-16 * (
                    _magnitude(g_l, at_ref) + _magnitude(g_r, at_seg)
                )
                tol = max(CONTINUITY_TOL * max(1.0, abs(lv), abs(rv)), cancellation)
                if abs(lv - rv) > tol:
                    raise ArithmeticError(
                        f"continuity failure at interval {n}, knot {k}, "
                        f"derivative {h}: {lv} vs {rv}"
                    )
                if h + 1 < m_a:
                    g_l = g_l.derivative(1)
                    g_r = g_r.derivative(1)
        prev = list(sol.segments[n - 1])


def _magnitude(poly: ExpPoly, t: float) -> float:
    """Sum of absolute term contributions: the cancellation exposure of
    evaluating ``poly`` at ``t``."""
    total = 0.0
    for root, coeffs in poly.terms:
        acc = 0.0
        for c in reversed(coeffs):
            acc = acc * abs(t) + abs(c)
        total += math.exp(root * t) * acc
    return total
