"""Exact calculus of exponential polynomials.

An exponential polynomial is a finite sum

    f(t) = sum_p exp(r_p t) * sum_i g_{p,i} t^i

with real, pairwise-distinct rates r_p and real coefficients g_{p,i}.
The family is closed under addition, scaling, differentiation,
antidifferentiation and shifts of the time origin, so every operation
here is exact in the representation: the only floating error is the
rounding of individual coefficient arithmetic.

Coefficients are stored densely by power, lowest first, with trailing
zeros trimmed.  The convention 0**0 == 1 is used throughout (the rate
r = 0 is always present in the systems this package solves).
"""

from __future__ import annotations

import math
from typing import Iterable, Sequence

# Two rates closer than this are considered the same exponential.
ROOT_DISTINCT_TOL = 1e-9

# Largest supported power/derivative order: factorials stay finite in
# double precision up to 170!.
MAX_POWER = 170

_FACT = [1] * (MAX_POWER + 1)
for _n in range(2, MAX_POWER + 1):
    _FACT[_n] = _FACT[_n - 1] * _n
_FACT = tuple(_FACT)


def deriv_weight(h: int, i: int, j: int) -> float:
    """Integer weight i!h! / (j!(i-j)!(h-i+j)!) from the closed-form h-th
    derivative of exp(r t) t^i: the coefficient of exp(r t) t^j is
    deriv_weight(h, i, j) * r**(h-i+j), for max(0, i-h) <= j <= i.
    """
    if not (0 <= j <= i and h - i + j >= 0):
        raise ValueError(f"invalid derivative indices h={h}, i={i}, j={j}")
    if i > MAX_POWER or h > MAX_POWER:
        raise ValueError(f"power {max(i, h)} exceeds supported range {MAX_POWER}")
    # Exact integer division: the weight is comb(i, j) * perm(h, i - j).
    return float(_FACT[i] * _FACT[h] // (_FACT[j] * _FACT[i - j] * _FACT[h - i + j]))


def _trim(coeffs: Sequence[float]) -> tuple[float, ...]:
    n = len(coeffs)
    while n and coeffs[n - 1] == 0.0:
        n -= 1
    return tuple(float(c) for c in coeffs[:n])


def _canonicalize(terms: Iterable[tuple[float, Sequence[float]]]):
    """Merge like rates, trim trailing zeros, drop empty terms, sort by rate."""
    merged: list[tuple[float, list[float]]] = []
    for root, coeffs in sorted(terms, key=lambda rc: rc[0]):
        root = float(root)
        if not math.isfinite(root):
            raise ValueError(f"non-finite rate {root}")
        if merged and abs(root - merged[-1][0]) <= ROOT_DISTINCT_TOL:
            acc = merged[-1][1]
            for i, c in enumerate(coeffs):
                if i < len(acc):
                    acc[i] += c
                else:
                    acc.append(float(c))
        else:
            merged.append((root, [float(c) for c in coeffs]))
    out = []
    for root, coeffs in merged:
        trimmed = _trim(coeffs)
        if trimmed:
            if len(trimmed) - 1 > MAX_POWER:
                raise ValueError(
                    f"degree {len(trimmed) - 1} exceeds supported range {MAX_POWER}"
                )
            out.append((root, trimmed))
    return tuple(out)


class ExpPoly:
    """Immutable exponential polynomial sum_p exp(r_p t) sum_i g_{p,i} t^i.

    ``terms`` is a tuple of (rate, coefficient tuple) pairs, sorted by
    rate, with coefficients indexed by power starting from t^0.
    """

    __slots__ = ("terms",)

    def __init__(self, terms: Iterable[tuple[float, Sequence[float]]] = ()):
        object.__setattr__(self, "terms", _canonicalize(terms))

    def __setattr__(self, name, value):
        raise AttributeError("ExpPoly is immutable")

    # -- constructors -------------------------------------------------

    @classmethod
    def zero(cls) -> "ExpPoly":
        return cls(())

    @classmethod
    def constant(cls, value: float) -> "ExpPoly":
        return cls(((0.0, (value,)),))

    # -- basic queries ------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def roots(self) -> tuple[float, ...]:
        return tuple(r for r, _ in self.terms)

    def coeffs_for(self, root: float) -> tuple[float, ...]:
        """Coefficient tuple attached to ``root`` (empty if absent)."""
        for r, coeffs in self.terms:
            if abs(r - root) <= ROOT_DISTINCT_TOL:
                return coeffs
        return ()

    def degree_for(self, root: float) -> int:
        """Polynomial degree attached to ``root``; -1 if the term is absent."""
        return len(self.coeffs_for(root)) - 1

    # -- evaluation ---------------------------------------------------

    def evaluate(self, t: float) -> float:
        """Value at ``t``: sum_p exp(r_p t) * Horner(coeffs_p, t)."""
        total = 0.0
        for root, coeffs in self.terms:
            acc = 0.0
            for c in reversed(coeffs):
                acc = acc * t + c
            total += math.exp(root * t) * acc
        return total

    __call__ = evaluate

    def evaluate_many(self, ts):
        """Vectorized evaluation over a numpy array of times."""
        import numpy as np

        ts = np.asarray(ts, dtype=float)
        total = np.zeros_like(ts)
        for root, coeffs in self.terms:
            acc = np.zeros_like(ts)
            for c in reversed(coeffs):
                acc = acc * ts + c
            total += np.exp(root * ts) * acc
        return total

    def derivatives_at(self, t: float, count: int) -> list[float]:
        """[f(t), f'(t), ..., f^(count-1)(t)]."""
        out = [self.evaluate(t)]
        g = self
        for _ in range(count - 1):
            g = g.derivative(1)
            out.append(g.evaluate(t))
        return out

    # -- algebra ------------------------------------------------------

    def add(self, other: "ExpPoly") -> "ExpPoly":
        return ExpPoly(self.terms + other.terms)

    __add__ = add

    def scale(self, s: float) -> "ExpPoly":
        return ExpPoly((r, tuple(s * c for c in coeffs)) for r, coeffs in self.terms)

    def __mul__(self, s: float) -> "ExpPoly":
        return self.scale(s)

    __rmul__ = __mul__

    def __neg__(self) -> "ExpPoly":
        return self.scale(-1.0)

    def __sub__(self, other: "ExpPoly") -> "ExpPoly":
        return self.add(other.scale(-1.0))

    def derivative(self, h: int) -> "ExpPoly":
        """Exact h-th derivative, h >= 1.

        Each input term exp(r t) t^i spreads onto powers j = max(0, i-h)..i
        with coefficient deriv_weight(h, i, j) * r**(h-i+j).
        """
        if h < 1:
            raise ValueError("derivative order h must be >= 1; h=0 is the function itself")
        if h > MAX_POWER:
            raise ValueError(f"derivative order {h} exceeds supported range {MAX_POWER}")
        new_terms = []
        for root, coeffs in self.terms:
            out = [0.0] * len(coeffs)
            for i, g in enumerate(coeffs):
                if g == 0.0:
                    continue
                for j in range(max(0, i - h), i + 1):
                    out[j] += g * deriv_weight(h, i, j) * root ** (h - i + j)
            new_terms.append((root, out))
        return ExpPoly(new_terms)

    def shift_origin(self, delta: float) -> "ExpPoly":
        """Exact re-origin: returns g with g(t) = f(t + delta).

        Powers re-expand binomially; exp(r delta) is absorbed into the
        coefficients, so the rates are unchanged.
        """
        new_terms = []
        for root, coeffs in self.terms:
            scale = math.exp(root * delta)
            out = [0.0] * len(coeffs)
            for i, g in enumerate(coeffs):
                if g == 0.0:
                    continue
                for j in range(i + 1):
                    out[j] += g * math.comb(i, j) * delta ** (i - j)
            new_terms.append((root, [scale * c for c in out]))
        return ExpPoly(new_terms)

    def antiderivative(self) -> "ExpPoly":
        """An antiderivative (integration constant 0 at the rate-0 term).

        For r != 0 the degree is preserved via the by-parts recursion
        int exp(rt) t^i = exp(rt) t^i / r - (i/r) int exp(rt) t^(i-1);
        for r == 0 the power rises by one.
        """
        new_terms = []
        for root, coeffs in self.terms:
            if root == 0.0:
                out = [0.0] + [c / (i + 1) for i, c in enumerate(coeffs)]
            else:
                out = [0.0] * len(coeffs)
                # antiderivative of exp(rt) t^i, built up from i = 0
                basis = [1.0 / root]  # coefficients for current i
                for i in range(len(coeffs)):
                    if i > 0:
                        prev = basis
                        basis = [0.0] * (i + 1)
                        basis[i] = 1.0 / root
                        for j, c in enumerate(prev):
                            basis[j] -= (i / root) * c
                    c = coeffs[i]
                    if c != 0.0:
                        for j, bc in enumerate(basis):
                            out[j] += c * bc
            new_terms.append((root, out))
        return ExpPoly(new_terms)

    def integrate(self, a: float, b: float) -> float:
        """Exact definite integral over [a, b]."""
        F = self.antiderivative()
        return F.evaluate(b) - F.evaluate(a)

    # -- comparisons / repr -------------------------------------------

    def __eq__(self, other) -> bool:
        return isinstance(other, ExpPoly) and self.terms == other.terms

    def __hash__(self) -> int:
        return hash(self.terms)

    def isclose(self, other: "ExpPoly", rel: float = 1e-9, abs_tol: float = 1e-12) -> bool:
        """Coefficient-wise comparison, pairing rates within ROOT_DISTINCT_TOL."""
        roots = sorted(set(self.roots) | set(other.roots))
        for r in roots:
            ca, cb = self.coeffs_for(r), other.coeffs_for(r)
            for i in range(max(len(ca), len(cb))):
                x = ca[i] if i < len(ca) else 0.0
                y = cb[i] if i < len(cb) else 0.0
                if abs(x - y) > abs_tol + rel * max(abs(x), abs(y)):
                    return False
        return True

    def __repr__(self) -> str:
        if not self.terms:
            return "ExpPoly(0)"
        parts = []
        for root, coeffs in self.terms:
            poly = " + ".join(
                f"{c:g}*t^{i}" if i else f"{c:g}" for i, c in enumerate(coeffs) if c
            )
            parts.append(f"e^{root:g}t*({poly})" if root else f"({poly})")
        return "ExpPoly(" + " + ".join(parts) + ")"
