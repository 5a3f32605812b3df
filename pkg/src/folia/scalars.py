"""Scalar helpers shared by the exact (rational) and float code paths."""

from fractions import Fraction
import math

import numpy as np
from gmpy2 import mpq

__all__ = ["mpq", "exact", "to_float", "is_zero", "parse_eps", "Eps", "INF"]

INF = math.inf


def exact(x):
    """Convert ints, Fractions, decimal strings or mpq to an mpq."""
    if isinstance(x, bool):
        raise TypeError("booleans are not scalars")
    if isinstance(x, float):
        return mpq(Fraction(x).limit_denominator(10**12))
    if isinstance(x, str):
        return mpq(Fraction(x))
    if isinstance(x, Fraction):
        return mpq(x.numerator, x.denominator)
    return mpq(x)


def to_float(x):
    if isinstance(x, np.ndarray):
        return x.astype(float)
    return float(x)


def is_zero(x):
    if isinstance(x, np.ndarray):
        return bool(np.all(x == 0))
    return x == 0


class Eps:
    """A canonical-variation parameter in (0, inf].

    Only ``inv`` (1/eps) enters connection formulas, so eps = inf is exact:
    its inverse is the scalar zero.
    """

    __slots__ = ("value", "inv")

    def __init__(self, value, floating=False):
        if isinstance(value, Eps):
            value = value.value
        if value == INF or (isinstance(value, str) and value.strip().lower() in ("inf", "infinity", "oo")):
            self.value = INF
            self.inv = 0.0 if floating else mpq(0)
            return
        v = float(value) if floating else exact(value)
        if v <= 0:
            raise ValueError(f"eps must be positive, got {value!r}")
        self.value = v
        self.inv = 1.0 / v if floating else 1 / v

    @property
    def finite(self):
        return self.value != INF

    def __repr__(self):
        return "Eps(inf)" if not self.finite else f"Eps({self.value})"

    def __str__(self):
        return "inf" if not self.finite else str(self.value)


def parse_eps(text, floating=False):
    return Eps(text, floating=floating)
