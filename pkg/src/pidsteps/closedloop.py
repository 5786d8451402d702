"""Closed-loop delay system built from a PID controller and a delayed plant.

The controller k + k_i/s + k_d s in unity feedback with a plant
exp(-s) E(s)/A(s) (time normalized to the delay) gives the neutral
delay equation

    sum_{h=1}^{m_a} a_h y^(h)(t) = - sum_{h=0}^{m_b} b_h y^(h)(t-1)
                                   + sum_{h=0}^{m_c} c_h f^(h)(t-1)

with a(s) = s A(s) (the integrator clears the 1/s), b(s) =
(k_i + k s + k_d s^2) E(s) and c = b.  The delay-free part a(s) always
has a root at zero; the remaining characteristic roots must be real and
simple for the piecewise-analytic solver to apply.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .exppoly import ROOT_DISTINCT_TOL

# Beyond this order, root conditioning and coefficient growth make the
# double-precision recursions untrustworthy.
MAX_ORDER = 12

IMAG_TOL = 1e-9


class RootsNotRealSimple(ValueError):
    """Delay-free characteristic roots are complex or repeated."""


def _trim(coeffs: Sequence[float]) -> tuple[float, ...]:
    n = len(coeffs)
    while n and coeffs[n - 1] == 0.0:
        n -= 1
    return tuple(float(c) for c in coeffs[:n])


@dataclass(frozen=True)
class PidParams:
    """Ideal parallel PID gains: proportional k, integral k_i, derivative k_d.

    Time is normalized to the transport delay L; physical gains convert as
    k_i -> k_i * L and k_d -> k_d / L.
    """

    k: float = 0.0
    k_i: float = 0.0
    k_d: float = 0.0

    def __post_init__(self):
        for name, v in (("k", self.k), ("k_i", self.k_i), ("k_d", self.k_d)):
            if not math.isfinite(v):
                raise ValueError(f"PID gain {name} must be finite, got {v}")
        if self.k == 0.0 and self.k_i == 0.0 and self.k_d == 0.0:
            raise ValueError("at least one PID gain must be nonzero")

    @property
    def numerator(self) -> tuple[float, ...]:
        """Controller numerator k_i + k s + k_d s^2 (the 1/s is cleared)."""
        return _trim((self.k_i, self.k, self.k_d))


@dataclass(frozen=True)
class PlantModel:
    """Delayed rational plant exp(-s) * numerator(s) / denominator(s).

    Coefficients are ascending in s; the delay is 1 in normalized time.
    """

    numerator: tuple[float, ...]
    denominator: tuple[float, ...]

    def __init__(self, numerator: Sequence[float], denominator: Sequence[float]):
        num = _trim(numerator)
        den = _trim(denominator)
        if not num:
            raise ValueError("plant numerator is the zero polynomial")
        if not den:
            raise ValueError("plant denominator is the zero polynomial")
        if len(num) > len(den):
            raise ValueError(
                f"plant numerator degree {len(num) - 1} exceeds denominator "
                f"degree {len(den) - 1}"
            )
        object.__setattr__(self, "numerator", num)
        object.__setattr__(self, "denominator", den)


@dataclass(frozen=True)
class DdeSystem:
    """Closed-loop neutral delay equation coefficients and characteristic roots.

    ``a[h-1]`` multiplies y^(h)(t) for h = 1..m_a; ``b[h]`` multiplies
    y^(h)(t-1) and ``c[h] = b[h]`` multiplies f^(h)(t-1) for h = 0..m_b.
    ``roots`` are the m_a real simple solutions of sum_h a_h r^h = 0,
    sorted ascending and always containing 0.
    """

    a: tuple[float, ...]
    b: tuple[float, ...]
    c: tuple[float, ...]
    roots: tuple[float, ...]

    def __post_init__(self):
        if not self.a or self.a[-1] == 0.0:
            raise ValueError("leading delay-free coefficient a_{m_a} must be nonzero")
        if self.c != self.b:
            raise ValueError("forcing coefficients must equal delayed-output ones (c = b)")
        if len(self.b) - 1 > len(self.a):
            raise ValueError(
                f"delayed-derivative order {len(self.b) - 1} exceeds system order "
                f"{len(self.a)}"
            )
        if len(self.roots) != len(self.a):
            raise ValueError("root count must equal the system order")
        scale = max(abs(v) for v in self.a)
        for r in self.roots:
            if abs(self.char_poly(r)) > 1e-9 * scale:
                raise ValueError(f"stored root {r} is not a characteristic root")
        if not any(r == 0.0 for r in self.roots):
            raise ValueError("characteristic roots must include 0")

    @property
    def m_a(self) -> int:
        return len(self.a)

    @property
    def m_b(self) -> int:
        return len(self.b) - 1

    def char_poly(self, r: float) -> float:
        """sum_{h=1}^{m_a} a_h r^h."""
        acc = 0.0
        for ah in reversed(self.a):
            acc = acc * r + ah
        return acc * r

    def char_poly_deriv(self, r: float) -> float:
        """sum_{h=1}^{m_a} h a_h r^(h-1)."""
        acc = 0.0
        for h in range(self.m_a, 0, -1):
            acc = acc * r + h * self.a[h - 1]
        return acc

    @classmethod
    def from_delay_equation(cls, a: Sequence[float], b: Sequence[float]) -> "DdeSystem":
        """Build directly from delay-equation coefficients (a ascending from h=1)."""
        a = _trim(a)
        b = _trim(b)
        if not a:
            raise ValueError("delay-free coefficients are all zero")
        if len(a) > MAX_ORDER:
            raise ValueError(f"system order {len(a)} exceeds supported {MAX_ORDER}")
        roots = characteristic_roots(a)
        return cls(a=a, b=b, c=b, roots=tuple(roots))


def characteristic_roots(a: Sequence[float]) -> list[float]:
    """All m_a roots of sum_{h=1}^{m_a} a_h r^h = 0, sorted ascending.

    The zero root is extracted symbolically (the polynomial has no
    constant term); the deflated polynomial sum_h a_h r^(h-1) is solved
    in closed form up to degree 2 and by companion-matrix eigenvalues
    above, then each nonzero root takes one Newton step on the full
    polynomial.  Raises RootsNotRealSimple outside the real-simple scope.
    """
    a = _trim(a)
    if not a:
        raise ValueError("zero polynomial has no characteristic roots")
    if len(a) > MAX_ORDER:
        raise ValueError(f"system order {len(a)} exceeds supported {MAX_ORDER}")
    deg = len(a) - 1  # degree of the deflated polynomial
    if deg == 0:
        others: list[float] = []
    elif deg == 1:
        others = [-a[0] / a[1]]
    elif deg == 2:
        disc = a[1] * a[1] - 4.0 * a[2] * a[0]
        if disc < 0.0:
            raise RootsNotRealSimple(
                f"complex pair with discriminant {disc}; outside real-simple scope"
            )
        sq = math.sqrt(disc)
        # numerically stable split: avoid cancellation in -b +/- sqrt
        q = -0.5 * (a[1] + math.copysign(sq, a[1])) if a[1] != 0.0 else 0.5 * sq
        if q == 0.0:
            others = [0.0, 0.0]
        else:
            others = [q / a[2], a[0] / q]
    else:
        comp = np.roots(list(reversed(a)))
        bad = [r for r in comp if abs(r.imag) > IMAG_TOL]
        if bad:
            raise RootsNotRealSimple(
                f"complex roots {bad}; outside real-simple scope"
            )
        others = [float(r.real) for r in comp]

    # one Newton polish on the full polynomial pushes residuals to ~1e-14
    polished = []
    for r in others:
        p = _poly_eval(a, r) * r
        dp = _poly_deriv_eval(a, r)
        if dp != 0.0:
            r = r - p / dp
        polished.append(r)

    roots = sorted(polished + [0.0])
    for i in range(len(roots) - 1):
        if roots[i + 1] - roots[i] <= ROOT_DISTINCT_TOL:
            raise RootsNotRealSimple(
                f"roots {roots[i]} and {roots[i + 1]} are not simple "
                f"(separation <= {ROOT_DISTINCT_TOL})"
            )
    return roots


def _poly_eval(a: Sequence[float], r: float) -> float:
    """sum_h a_h r^(h-1) (the deflated characteristic polynomial)."""
    acc = 0.0
    for ah in reversed(a):
        acc = acc * r + ah
    return acc


def _poly_deriv_eval(a: Sequence[float], r: float) -> float:
    """d/dr of sum_{h>=1} a_h r^h."""
    acc = 0.0
    for h in range(len(a), 0, -1):
        acc = acc * r + h * a[h - 1]
    return acc


def _poly_mul(p: Sequence[float], q: Sequence[float]) -> list[float]:
    out = [0.0] * (len(p) + len(q) - 1)
    for i, pi in enumerate(p):
        if pi == 0.0:
            continue
        for j, qj in enumerate(q):
            out[i + j] += pi * qj
    return out


def build_closed_loop(pid: PidParams, plant: PlantModel) -> DdeSystem:
    """Assemble the closed-loop delay equation for a PID controller and plant.

    a(s) = s * denominator(s) enters coefficient-wise as a_h = A_(h-1);
    b(s) = (k_i + k s + k_d s^2) * numerator(s), truncated to canonical
    form; c = b.  Rejects combinations where the delayed-derivative order
    would exceed the system order (e.g. derivative action on a plant with
    equal numerator and denominator degrees).
    """
    a = _trim(plant.denominator)
    b = _trim(_poly_mul(pid.numerator, plant.numerator))
    if len(a) > MAX_ORDER:
        raise ValueError(f"system order {len(a)} exceeds supported {MAX_ORDER}")
    if len(b) - 1 > len(a):
        raise ValueError(
            f"controller/plant product has derivative order {len(b) - 1} above the "
            f"closed-loop order {len(a)}; reduce the derivative gain or plant "
            f"numerator degree"
        )
    roots = characteristic_roots(a)
    return DdeSystem(a=a, b=b, c=b, roots=tuple(roots))
