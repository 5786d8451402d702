"""Independent re-implementation of the printed first-order-plant
coefficient formulas (test oracle for the generic solver).

The closed loop y' + t_p y'' = -b0 y(t-1) - b1 y'(t-1) - b2 y''(t-1) has
rates 0 and -1/t_p.  With zero forcing, the next interval's coefficients
follow the scalar recursions below, using the transformed coefficients

    b3 = b0 - b1/t_p + b2/t_p**2,  b4 = b1 - 2 b2/t_p,  b5 = b2

for the -1/t_p rate.  Out-of-range coefficients read as zero.
"""

import math


def _get(lst, i):
    return lst[i] if 0 <= i < len(lst) else 0.0


def next_powers(tp, b0, b1, b2, prev_null, prev_exp):
    """New i >= 1 coefficients (per rate) from the previous interval's."""
    b3 = b0 - b1 / tp + b2 / tp**2
    b4 = b1 - 2.0 * b2 / tp
    b5 = b2
    d1 = len(prev_null)
    g1 = [0.0] * (d1 + 1)
    for i in range(d1, 0, -1):
        g1[i] = (
            -(b0 / i) * _get(prev_null, i - 1)
            - b1 * _get(prev_null, i)
            - b2 * (i + 1) * _get(prev_null, i + 1)
            - tp * (i + 1) * _get(g1, i + 1)
        )
    d2 = len(prev_exp)
    g2 = [0.0] * (d2 + 1)
    for i in range(d2, 0, -1):
        g2[i] = (
            (b3 / i) * _get(prev_exp, i - 1)
            + b4 * _get(prev_exp, i)
            + b5 * (i + 1) * _get(prev_exp, i + 1)
            + tp * (i + 1) * _get(g2, i + 1)
        )
    return g1, g2


def constants_first_gap(tp, y_prev, dy_prev, g1, g2):
    """Constants at the interval junction (first knot gap)."""
    G11 = _get(g1, 1)
    G21 = _get(g2, 1)
    c_null = y_prev + tp * dy_prev - tp * G11 - tp * G21
    c_exp = -tp * dy_prev + tp * G11 + tp * G21
    return c_null, c_exp


def constants_interior_gap(tp, tau, y_left, dy_left, g1, g2):
    """Constants at an interior knot tau (later knot gaps)."""
    s1 = sum((tau + tp * h) * tau ** (h - 1) * g1[h] for h in range(1, len(g1)))
    s2 = sum(tp * h * tau ** (h - 1) * g2[h] for h in range(1, len(g2)))
    c_null = y_left + tp * dy_left - s1 - math.exp(-tau / tp) * s2
    s1b = sum(tp * h * tau ** (h - 1) * g1[h] for h in range(1, len(g1)))
    s2b = sum((-tau + tp * h) * tau ** (h - 1) * g2[h] for h in range(1, len(g2)))
    c_exp = -tp * math.exp(tau / tp) * dy_left + math.exp(tau / tp) * s1b + s2b
    return c_null, c_exp


def rel_gap(a, b, floor=1e-12):
    return abs(a - b) / max(abs(a), abs(b), floor)


def compare_powers(oracle, actual, start=1):
    """Worst relative gap between coefficient lists from ``start`` up."""
    worst = 0.0
    for i in range(start, max(len(oracle), len(actual))):
        worst = max(worst, rel_gap(_get(oracle, i), _get(actual, i)))
    return worst
