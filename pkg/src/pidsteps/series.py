"""Nested-summation index enumerators used by the interval stepper.

Differentiating an exponential polynomial of degree z under a sum of
derivative orders h = 1..m produces index triples (h, i, j): derivative
order, input power, output power.  Two term families cover the triples:

    S1(m):    1 <= h <= m,  0 <= i <= h-1,  0 <= j <= i      (order > power)
    S2(m, z): 1 <= h <= m,  h <= i <= z,    i-h <= j <= i    (order <= power)

The stepper needs the same multisets re-grouped with the output power j
outermost, so that coefficients of t^j can be equated directly.  The
regrouped forms split S2 at half = z // 2 into six pieces, each a
reordering of one (h, j) region.  ``enumerate_original`` and
``enumerate_shifted`` must produce identical multisets; the exhaustive
equality check is part of the verification suite and the production
stepper iterates only the shifted forms.
"""

from __future__ import annotations

from typing import Iterator, List, Tuple

Triple = Tuple[int, int, int]  # (h, i, j)

S1 = "S1"
S2 = "S2"


def s1_original(m: int) -> Iterator[Triple]:
    for h in range(1, m + 1):
        for i in range(0, h):
            for j in range(0, i + 1):
                yield (h, i, j)


def s2_original(m: int, z: int) -> Iterator[Triple]:
    for h in range(1, m + 1):
        for i in range(h, z + 1):
            for j in range(i - h, i + 1):
                yield (h, i, j)


def s1_shifted(m: int) -> Iterator[Triple]:
    """S1 regrouped with j outermost: j = 0..m-1, h = j+1..m, i = j..h-1."""
    for j in range(0, m):
        for h in range(j + 1, m + 1):
            for i in range(j, h):
                yield (h, i, j)


def s2_shifted(m: int, z: int) -> Iterator[Triple]:
    """S2 regrouped with j outermost, split at half = z // 2.

    The six pieces partition the (h, j) plane for h <= half (pieces 1-3)
    and h > half (pieces 4-6).  Every h range additionally honors the
    h <= m cap from the definition of S2; ranges where the upper bound
    falls below the lower are empty.
    """
    if z < 1 or m < 1:
        return
    half = z // 2

    # Pieces 1-3 cover h <= half; their printed h bounds must additionally
    # honor h <= m (the cap is implicit in the definition of S2 and only
    # binds when z > 2m).  Pieces 4-6 cover half < h <= m.
    # piece 1: j < h
    for j in range(0, half):
        for h in range(j + 1, min(half, m) + 1):
            for i in range(h, h + j + 1):
                yield (h, i, j)
    # piece 2: h <= j <= z - h
    for j in range(1, half + 1):
        for h in range(1, min(j, m) + 1):
            for i in range(j, h + j + 1):
                yield (h, i, j)
    for j in range(half + 1, z):
        for h in range(1, min(z - j, m) + 1):
            for i in range(j, h + j + 1):
                yield (h, i, j)
    # piece 3: j > z - h
    for j in range(z + 1 - half, z + 1):
        for h in range(z - j + 1, min(half, m) + 1):
            for i in range(j, z + 1):
                yield (h, i, j)
    # piece 4: j < z - h
    for j in range(0, z - m):
        for h in range(half + 1, m + 1):
            for i in range(h, h + j + 1):
                yield (h, i, j)
    for j in range(z - m, z - 1 - half):
        for h in range(half + 1, z - j):
            for i in range(h, h + j + 1):
                yield (h, i, j)
    # piece 5: z - h <= j <= h
    for j in range(z - m, z - half):
        for h in range(z - j, m + 1):
            for i in range(h, z + 1):
                yield (h, i, j)
    for j in range(z - half, half + 1):
        for h in range(half + 1, m + 1):
            for i in range(h, z + 1):
                yield (h, i, j)
    for j in range(half + 1, m + 1):
        for h in range(j, m + 1):
            for i in range(h, z + 1):
                yield (h, i, j)
    # piece 6: j > h
    for j in range(half + 2, m + 2):
        for h in range(half + 1, j):
            for i in range(j, z + 1):
                yield (h, i, j)
    for j in range(m + 2, z + 1):
        for h in range(half + 1, m + 1):
            for i in range(j, z + 1):
                yield (h, i, j)


def enumerate_original(kind: str, m: int, z: int | None = None) -> List[Triple]:
    """All (h, i, j) triples of the family in the original nesting order."""
    _check_args(kind, m, z)
    if kind == S1:
        return list(s1_original(m))
    return list(s2_original(m, z))


def enumerate_shifted(kind: str, m: int, z: int | None = None) -> List[Triple]:
    """Same multiset as ``enumerate_original`` but grouped by output power j."""
    _check_args(kind, m, z)
    if kind == S1:
        return list(s1_shifted(m))
    return list(s2_shifted(m, z))


def _check_args(kind: str, m: int, z: int | None) -> None:
    if kind not in (S1, S2):
        raise ValueError(f"kind must be {S1!r} or {S2!r}, got {kind!r}")
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    if kind == S2 and (z is None or z < 1):
        raise ValueError(f"S2 needs z >= 1, got {z}")


def terms_grid(triples, h: int) -> frozenset:
    """Occupancy of (input power i, output power j) cells at fixed order h."""
    return frozenset((i, j) for hh, i, j in triples if hh == h)
