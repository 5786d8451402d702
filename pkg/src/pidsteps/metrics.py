"""Step-response quality metrics computed from the analytic solution.

Everything is derived from the exponential-polynomial segments, not from
samples: integrals are exact antiderivative differences on sign-constant
stretches, and peaks/crossings are bisection-refined roots of analytic
functions.  A scan grid is used only to bracket roots, so refining it
does not move the results.  All evaluation happens in each segment's
local time (re-expanding a high-degree segment around a distant origin
would shred its precision); only the reported times are global.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .exppoly import ExpPoly
from .stepper import PiecewiseSolution

BISECT_TOL = 1e-10


@dataclass(frozen=True)
class ResponseMetrics:
    """Tuning summary of a setpoint transient.

    overshoot: peak excursion past the setpoint, as a fraction of the step
    size; settling_time: last entry into the +/- band around the setpoint
    (None when still outside at the horizon); iae: integral of |error|;
    decay_ratio: second peak of |error| over the first (None with fewer
    than two peaks).
    """

    overshoot: float
    settling_time: float | None
    band: float
    iae: float
    decay_ratio: float | None


@dataclass(frozen=True)
class _Piece:
    """One solution segment clipped to the horizon, in local time."""

    offset: float  # global time of local 0
    lo: float
    hi: float
    err: ExpPoly  # segment minus setpoint, local time


def compute_metrics(
    sol: PiecewiseSolution,
    setpoint: float,
    horizon: float | None = None,
    band: float = 0.05,
    scan_per_unit: int = 256,
) -> ResponseMetrics:
    """Metrics of ``sol`` against a final ``setpoint`` over [0, horizon].

    The settling band is ``band`` times the step magnitude |setpoint -
    y(0)|; for a zero-magnitude step the band is read as an absolute
    threshold.
    """
    if horizon is None:
        horizon = float(sol.intervals)
    if horizon <= 0.0 or horizon > sol.intervals + 1e-9:
        raise ValueError(
            f"horizon {horizon} outside the solved range (0, {sol.intervals}]"
        )
    if not 0.0 < band < 0.5:
        raise ValueError(f"band must lie in (0, 0.5), got {band}")

    pieces = _error_pieces(sol, setpoint, horizon)

    iae = 0.0
    for piece in pieces:
        cuts = [piece.lo] + _roots_in(piece.err, piece.lo, piece.hi, scan_per_unit) + [piece.hi]
        for a, b in zip(cuts, cuts[1:]):
            if b - a <= 0.0:
                continue
            iae += abs(piece.err.integrate(a, b))

    # critical times: piece boundaries plus interior extrema of the error
    extrema: list[tuple[float, float, float]] = []  # (global t, err, err'')
    critical: list[tuple[float, float]] = []
    for piece in pieces:
        d1 = piece.err.derivative(1)
        d2 = piece.err.derivative(2)
        critical.append((piece.offset + piece.lo, piece.err.evaluate(piece.lo)))
        critical.append((piece.offset + piece.hi, piece.err.evaluate(piece.hi)))
        for t in _roots_in(d1, piece.lo, piece.hi, scan_per_unit):
            e = piece.err.evaluate(t)
            critical.append((piece.offset + t, e))
            extrema.append((piece.offset + t, e, d2.evaluate(t)))

    y0 = sol.value(0.0)
    step = setpoint - y0
    if step != 0.0:
        direction = math.copysign(1.0, step)
        worst = max((e * direction for _, e in critical), default=0.0)
        overshoot = max(0.0, worst / abs(step))
        threshold = band * abs(step)
    else:
        overshoot = max((abs(e) for _, e in critical), default=0.0)
        threshold = band

    settling = _settling_time(pieces, threshold, scan_per_unit)

    peaks = sorted(
        (t, abs(e)) for t, e, curv in extrema if e * curv < 0.0 and abs(e) > 0.0
    )
    decay_ratio = None
    if len(peaks) >= 2 and peaks[0][1] > 0.0:
        decay_ratio = peaks[1][1] / peaks[0][1]

    return ResponseMetrics(
        overshoot=overshoot,
        settling_time=settling,
        band=band,
        iae=iae,
        decay_ratio=decay_ratio,
    )


def _error_pieces(sol: PiecewiseSolution, setpoint: float, horizon: float):
    target = ExpPoly.constant(setpoint)
    out = []
    for n in range(1, sol.intervals + 1):
        offset = float(n - 1)
        if offset >= horizon:
            break
        for k in range(1, sol.q + 1):
            lo = sol.knots[k - 1]
            hi = min(sol.knots[k], horizon - offset)
            if hi <= lo:
                continue
            out.append(_Piece(offset=offset, lo=lo, hi=hi, err=sol.segment(n, k) - target))
    return out


def _roots_in(f: ExpPoly, lo: float, hi: float, scan_per_unit: int) -> list[float]:
    """Bisection-refined sign changes of ``f`` on (lo, hi), local time."""
    if f.is_zero:
        return []
    n = max(8, int(math.ceil(scan_per_unit * (hi - lo))))
    ts = [lo + (hi - lo) * i / n for i in range(n + 1)]
    vals = [f.evaluate(t) for t in ts]
    roots = []
    for i in range(n):
        va, vb = vals[i], vals[i + 1]
        if va == 0.0:
            if ts[i] != lo:
                roots.append(ts[i])
            continue
        if va * vb < 0.0:
            a, b, fa = ts[i], ts[i + 1], va
            while b - a > BISECT_TOL:
                m = 0.5 * (a + b)
                fm = f.evaluate(m)
                if fm == 0.0:
                    a = b = m
                    break
                if fa * fm < 0.0:
                    b = m
                else:
                    a, fa = m, fm
            roots.append(0.5 * (a + b))
    return roots


def _settling_time(pieces, threshold: float, scan_per_unit: int):
    """Last entry of |error| into the threshold band (global time); None if
    outside at the horizon, 0.0 if the band is never left."""
    last = pieces[-1]
    if abs(last.err.evaluate(last.hi)) > threshold:
        return None
    crossings = []
    outside_somewhere = False
    for piece in pieces:
        for shifted in (
            piece.err - ExpPoly.constant(threshold),
            piece.err + ExpPoly.constant(threshold),
        ):
            crossings.extend(
                piece.offset + t
                for t in _roots_in(shifted, piece.lo, piece.hi, scan_per_unit)
            )
        if (
            abs(piece.err.evaluate(piece.lo)) > threshold
            or abs(piece.err.evaluate(piece.hi)) > threshold
        ):
            outside_somewhere = True
    if not crossings and not outside_somewhere:
        return 0.0
    if not crossings:
        return None
    # after the last crossing the error stays inside (checked at horizon)
    return max(crossings)
