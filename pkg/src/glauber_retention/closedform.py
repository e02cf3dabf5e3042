"""Closed-form expected retention times (in excitation events) for N <= 3.

All arguments are dimensionless: ``beta_h`` is beta*H and ``beta_s`` is
beta*s_f. Probabilities below are jump-chain probabilities per event, so a
factor 1/3 appears wherever a particular dipole must be the one excited.
"""

from __future__ import annotations

import math

__all__ = [
    "tau_single",
    "tau_three_uncoupled",
    "tau_triangle",
    "tau_linear",
    "tau_ratio_triangle_over_linear",
    "FORMULAS",
]

_TINY = 1e-300


def _up(x: float) -> float:
    """exp(x) / (exp(x) + exp(-x)) without overflow."""
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-2.0 * x))
    z = math.exp(2.0 * x)
    return z / (1.0 + z)


def _down(x: float) -> float:
    return _up(-x)


def _exp(x: float) -> float:
    try:
        return math.exp(x)
    except OverflowError:
        return math.inf


def _ratio(num: float, den: float) -> float:
    if den < _TINY:
        return math.inf
    return num / den


def tau_single(beta_h: float) -> float:
    """Single dipole: ``exp(2 beta H) + 1``."""
    return _exp(2.0 * beta_h) + 1.0


def tau_three_uncoupled(beta_h: float) -> float:
    a = _exp(2.0 * beta_h) + 1.0
    return 0.5 * a * a + 2.0 * a


def tau_triangle(beta_h: float, beta_s: float) -> float:
    """Three dipoles, all pairs coupled with strength ``beta_s``.

    Lumped by the number of +1 dipoles; absorption at one or fewer.
    """
    p32 = _down(2.0 * beta_s + beta_h)
    p21 = 2.0 / 3.0 * _down(beta_h)
    p23 = 1.0 / 3.0 * _up(2.0 * beta_s + beta_h)
    # tau = (p32 - p22 + 1) / ((1 - p33)(1 - p22) - p32 p23) with
    # 1 - p33 = p32 and 1 - p22 = p21 + p23 substituted, so tiny escape
    # probabilities survive at large beta_s.
    num = p32 + p21 + p23
    den = p32 * p21
    return _ratio(num, den)


def tau_linear(beta_h: float, beta_s: float) -> float:
    """Three dipoles in a path 0-1-2 with coupling ``beta_s`` on both edges.

    States are (middle up?, number of boundary dipoles up); the start is
    (1, 2) and the transient set is {(1, 2), (0, 2), (1, 1)}.
    """
    # from (1, 2)
    a = 2.0 / 3.0 * _down(beta_s + beta_h)       # -> (1, 1)
    b = 1.0 / 3.0 * _down(2.0 * beta_s + beta_h)  # -> (0, 2)
    # from (0, 2)
    d01 = 2.0 / 3.0 * _down(beta_h - beta_s)      # -> (0, 1), absorbing
    d = 1.0 / 3.0 * _up(2.0 * beta_s + beta_h)    # -> (1, 2)
    # from (1, 1)
    c01 = 1.0 / 3.0 * _down(beta_h)               # -> (0, 1), absorbing
    c10 = 1.0 / 3.0 * _down(beta_s + beta_h)      # -> (1, 0), absorbing
    c = 1.0 / 3.0 * _up(beta_s + beta_h)          # -> (1, 2)

    leave_11 = c01 + c10 + c   # 1 - p_(1,1)->(1,1)
    leave_02 = d01 + d         # 1 - p_(0,2)->(0,2)
    num = a / leave_11 + b / leave_02 + 1.0
    # a + b - a c / leave_11 - b d / leave_02, rearranged without cancellation
    den = a * (c01 + c10) / leave_11 + b * d01 / leave_02
    return _ratio(num, den)


def tau_ratio_triangle_over_linear(beta_h: float, beta_s: float) -> float:
    """Approaches ``exp(2 beta_s)`` only asymptotically in ``beta_s``."""
    return tau_triangle(beta_h, beta_s) / tau_linear(beta_h, beta_s)


FORMULAS = {
    "single": lambda beta_h, beta_s=0.0: tau_single(beta_h),
    "uncoupled3": lambda beta_h, beta_s=0.0: tau_three_uncoupled(beta_h),
    "triangle": tau_triangle,
    "linear3": tau_linear,
}
