"""Scaled Vandermonde systems solved by two independent routes.

The system is

    sum_j d_j r_j^(i-1) x_j = Z_i,   i = 1..m

with distinct nodes r_j and nonzero column scales d_j.  ``solve_cramer``
expands each cofactor as a signed sum of products of two smaller
Vandermonde determinants (one per subset of columns above the deleted
row, its complement below), which is the closed form the interval
stepper's continuity system was designed around.  ``solve_elimination``
is plain partial-pivoted Gaussian elimination and serves as the
independent cross-check; it is also the production path, with the
closed form reserved for verification.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

from .exppoly import ROOT_DISTINCT_TOL

# Combinatorial blowup: subsets per cofactor reach C(7, 3) = 35 at m = 8.
CRAMER_MAX_ORDER = 8

SINGULAR_RTOL = 1e-12


class SingularSystem(ValueError):
    """Nodes too close or determinant numerically zero."""


@dataclass(frozen=True)
class VandermondeSystem:
    """Order-m system: nodes ``r``, column scales ``d``, right-hand side ``z``."""

    r: tuple[float, ...]
    d: tuple[float, ...]
    z: tuple[float, ...]

    def __init__(self, r: Sequence[float], d: Sequence[float], z: Sequence[float]):
        object.__setattr__(self, "r", tuple(float(v) for v in r))
        object.__setattr__(self, "d", tuple(float(v) for v in d))
        object.__setattr__(self, "z", tuple(float(v) for v in z))
        m = len(self.r)
        if m < 1:
            raise ValueError("empty system")
        if len(self.d) != m or len(self.z) != m:
            raise ValueError("r, d, z must have equal length")
        for j, dj in enumerate(self.d):
            if dj == 0.0 or not math.isfinite(dj):
                raise ValueError(f"column scale d[{j}] = {dj} must be finite and nonzero")
        for a in range(m):
            for b in range(a + 1, m):
                if abs(self.r[a] - self.r[b]) <= ROOT_DISTINCT_TOL:
                    raise SingularSystem(
                        f"nodes r[{a}]={self.r[a]} and r[{b}]={self.r[b]} closer "
                        f"than {ROOT_DISTINCT_TOL}"
                    )

    @property
    def m(self) -> int:
        return len(self.r)


def vandermonde_determinant(r: Sequence[float], d: Sequence[float]) -> float:
    """prod_{a>b} (r_a - r_b) * prod_j d_j."""
    det = 1.0
    for a in range(len(r)):
        for b in range(a):
            det *= r[a] - r[b]
    for dj in d:
        det *= dj
    return det


def _det_scale(r: Sequence[float], d: Sequence[float]) -> float:
    """Yardstick for the determinant's singularity test: the value the
    product formula would take if every node pair were separated by its
    own magnitude.  |V| far below this means some nodes nearly coincide."""
    scale = 1.0
    for a in range(len(r)):
        for b in range(a):
            scale *= max(1.0, abs(r[a]), abs(r[b]))
    for dj in d:
        scale *= abs(dj)
    return scale


def solve_cramer(sys: VandermondeSystem) -> list[float]:
    """Closed-form solution x_j = sum_i (-1)^(i+j) U_ij Z_i / V.

    Each cofactor U_ij is expanded over the C(m-1, i-1) ways of choosing
    which remaining columns populate the first i-1 rows; every summand is
    the product of two Vandermonde determinants, the lower one carrying
    an extra node power r^i per column.
    """
    m = sys.m
    if m > CRAMER_MAX_ORDER:
        raise ValueError(f"closed form supported up to order {CRAMER_MAX_ORDER}, got {m}")
    r, d, z = sys.r, sys.d, sys.z
    V = vandermonde_determinant(r, d)
    if abs(V) < SINGULAR_RTOL * _det_scale(r, d):
        raise SingularSystem(f"determinant {V} below singularity threshold")

    x = []
    for j in range(1, m + 1):
        # original column numbers surviving the deletion of column j
        cols = [c for c in range(1, m + 1) if c != j]
        total = 0.0
        for i in range(1, m + 1):
            if z[i - 1] == 0.0:
                continue
            u = 0.0
            # positions (1-based within the minor) of columns placed on top
            for top in combinations(range(1, m), i - 1):
                top_set = set(top)
                bottom = [p for p in range(1, m) if p not in top_set]
                sign_exp = sum(range(1, i)) + sum(top)
                w = 1.0
                top_cols = [cols[p - 1] for p in top]
                for a in range(len(top_cols)):
                    for b in range(a):
                        w *= r[top_cols[a] - 1] - r[top_cols[b] - 1]
                for c in top_cols:
                    w *= d[c - 1]
                bot_cols = [cols[p - 1] for p in bottom]
                for a in range(len(bot_cols)):
                    for b in range(a):
                        w *= r[bot_cols[a] - 1] - r[bot_cols[b] - 1]
                for c in bot_cols:
                    w *= d[c - 1] * r[c - 1] ** i
                u += (-1.0) ** sign_exp * w
            total += (-1.0) ** (i + j) * u * z[i - 1]
        x.append(total / V)
    return x


def laplace_minor_count(m: int, i: int) -> int:
    """Number of column subsets in the expansion of U_ij: C(m-1, i-1)."""
    return math.factorial(m - 1) // (math.factorial(i - 1) * math.factorial(m - i))


def solve_elimination(sys: VandermondeSystem) -> list[float]:
    """Partial-pivoted Gaussian elimination on the explicit matrix.

    One pass of iterative refinement keeps the residual near machine
    level; the interval stepper leans on that to hold its junction
    conditions to 1e-9 over long horizons.
    """
    m = sys.m
    matrix = [[sys.d[j] * sys.r[j] ** i for j in range(m)] for i in range(m)]
    lu, perm = _lu_factor([row[:] for row in matrix])
    x = _lu_solve(lu, perm, list(sys.z))
    residual = [
        sys.z[i] - sum(matrix[i][j] * x[j] for j in range(m)) for i in range(m)
    ]
    if any(v != 0.0 for v in residual):
        dx = _lu_solve(lu, perm, residual)
        x = [xi + di for xi, di in zip(x, dx)]
    return x


def _lu_factor(a: list[list[float]]):
    """In-place Doolittle LU with partial pivoting; returns (LU, permutation)."""
    m = len(a)
    scale = max(abs(v) for row in a for v in row)
    perm = list(range(m))
    for col in range(m):
        piv = max(range(col, m), key=lambda rr: abs(a[rr][col]))
        if abs(a[piv][col]) < SINGULAR_RTOL * scale:
            raise SingularSystem(f"pivot {a[piv][col]} below {SINGULAR_RTOL * scale}")
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            perm[col], perm[piv] = perm[piv], perm[col]
        for rr in range(col + 1, m):
            f = a[rr][col] / a[col][col]
            a[rr][col] = f
            for cc in range(col + 1, m):
                a[rr][cc] -= f * a[col][cc]
    return a, perm


def _lu_solve(lu: list[list[float]], perm: list[int], b: list[float]) -> list[float]:
    m = len(lu)
    y = [b[p] for p in perm]
    for row in range(m):
        for cc in range(row):
            y[row] -= lu[row][cc] * y[cc]
    x = y
    for row in range(m - 1, -1, -1):
        for cc in range(row + 1, m):
            x[row] -= lu[row][cc] * x[cc]
        x[row] /= lu[row][row]
    return x
