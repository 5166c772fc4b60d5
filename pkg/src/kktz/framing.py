"""Framing correction Z = Z(tau) exp(p1/4 xi) at the level of truncated series."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .algebra import AlgebraElement, DEFAULT_SERIES_BOUND, exp_truncated, theta_class
from .errors import BadXiParity, InvariantViolation

XI_1 = Fraction(-1, 12)   # coefficient of [θ] in the degree-one part of xi


def check_xi_parity(xi):
    bad = [n for n in xi.degrees() if n % 2 == 0]
    if bad:
        raise BadXiParity(f"xi has components in even degrees {bad}")
    return xi


def make_xi(parts, bound=DEFAULT_SERIES_BOUND):
    """Series with the given components {degree: AlgebraElement}; even degrees are refused."""
    total = AlgebraElement.zero(bound)
    for n, x in parts.items():
        x = x.degree_part(n)
        if n % 2 == 0 and not x.is_zero():
            raise BadXiParity(f"component in even degree {n}")
        total = total + AlgebraElement(x.terms, bound)
    return check_xi_parity(total)


def builtin_xi(bound=DEFAULT_SERIES_BOUND):
    """xi with xi_1 = -1/12 [θ]; higher odd components are unknown and left at zero."""
    return make_xi({1: theta_class(bound) * XI_1}, bound)


@dataclass
class FramedSeries:
    z: AlgebraElement
    p1: int
    integral_sphere: bool = False

    def __post_init__(self):
        if self.z.degree_part(0) != AlgebraElement.one(self.z.bound):
            raise InvariantViolation("degree-0 part of z must be 1[∅]")
        if self.integral_sphere and self.p1 % 4:
            raise InvariantViolation("p1 of an integral homology sphere framing lies in 4Z")


def framing_correct(fs, xi=None):
    xi = builtin_xi(fs.z.bound) if xi is None else check_xi_parity(xi)
    return fs.z * exp_truncated(xi * Fraction(fs.p1, 4))


def gauge_shift(p1, degree_g):
    """p1 after changing the trivialization by a map of the given degree."""
    return p1 - 2 * degree_g
