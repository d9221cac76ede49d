"""Finite sums of monomials ``c * x**p * y**q`` with exact rational exponents.

Every constitutive quantity of a power-law material (stored energy,
pressures, their derivatives, the rescaled functions Gamma and Upsilon)
is such a sum, so this one small class carries all the algebra.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from math import factorial

import numpy as np

# Relative size below which a combined coefficient counts as exact cancellation.
_CANCEL_RTOL = 64 * np.finfo(float).eps


def as_fraction(value) -> Fraction:
    """Parse an exponent given as int, Fraction, or a string like ``"-4/3"``."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        frac = Fraction(value).limit_denominator(10**6)
        if float(frac) != value:
            raise ValueError(f"exponent {value!r} is not an exact rational")
        return frac
    return Fraction(value)


@dataclass(frozen=True)
class MonomialSum:
    """Immutable sum of terms ``(coef, p, q)`` meaning ``coef * x**p * y**q``."""

    terms: tuple[tuple[float, Fraction, Fraction], ...] = ()

    @classmethod
    def from_terms(cls, terms) -> "MonomialSum":
        """Combine like terms; drop coefficients that cancel to rounding level."""
        acc: dict[tuple[Fraction, Fraction], float] = {}
        mag: dict[tuple[Fraction, Fraction], float] = {}
        for coef, p, q in terms:
            key = (as_fraction(p), as_fraction(q))
            acc[key] = acc.get(key, 0.0) + float(coef)
            mag[key] = mag.get(key, 0.0) + abs(float(coef))
        kept = []
        for key in sorted(acc):
            c = acc[key]
            if c == 0.0 or abs(c) <= _CANCEL_RTOL * mag[key]:
                continue
            kept.append((c, key[0], key[1]))
        return cls(tuple(kept))

    @classmethod
    def monomial(cls, coef, p=0, q=0) -> "MonomialSum":
        return cls.from_terms([(coef, p, q)])

    @cached_property
    def _arrays(self):
        c = np.array([t[0] for t in self.terms], dtype=float)
        p = np.array([float(t[1]) for t in self.terms], dtype=float)
        q = np.array([float(t[2]) for t in self.terms], dtype=float)
        return c, p, q

    def __bool__(self):
        return bool(self.terms)

    def __len__(self):
        return len(self.terms)

    def __call__(self, x, y):
        """Evaluate with numpy broadcasting over ``x`` and ``y``."""
        c, p, q = self._arrays
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if not self.terms:
            return np.zeros(np.broadcast(x, y).shape)[()]
        with np.errstate(divide="ignore", invalid="ignore"):
            vals = c * x[..., None] ** p * y[..., None] ** q
        return vals.sum(axis=-1)[()]

    def __add__(self, other: "MonomialSum") -> "MonomialSum":
        return MonomialSum.from_terms(self.terms + other.terms)

    def __sub__(self, other: "MonomialSum") -> "MonomialSum":
        return self + other.scale(-1.0)

    def scale(self, factor: float) -> "MonomialSum":
        return MonomialSum.from_terms((c * factor, p, q) for c, p, q in self.terms)

    def shift(self, dp=0, dq=0) -> "MonomialSum":
        """Multiply by ``x**dp * y**dq``."""
        dp, dq = as_fraction(dp), as_fraction(dq)
        return MonomialSum(tuple((c, p + dp, q + dq) for c, p, q in self.terms))

    def times_one_minus_y(self) -> "MonomialSum":
        return self + self.shift(0, 1).scale(-1.0)

    def d_dx(self) -> "MonomialSum":
        return MonomialSum.from_terms((c * p, p - 1, q) for c, p, q in self.terms if p != 0)

    def d_dy(self) -> "MonomialSum":
        return MonomialSum.from_terms((c * q, p, q - 1) for c, p, q in self.terms if q != 0)

    def d_dy_n(self, n: int) -> "MonomialSum":
        out = self
        for _ in range(n):
            out = out.d_dy()
        return out

    def restrict_x(self, p0) -> "MonomialSum":
        """Terms with x-exponent exactly ``p0``."""
        p0 = as_fraction(p0)
        return MonomialSum(tuple(t for t in self.terms if t[1] == p0))

    def min_x_exponent(self) -> Fraction:
        return min(t[1] for t in self.terms)

    def min_y_exponent(self) -> Fraction:
        return min(t[2] for t in self.terms)

    def coefficient(self, p, q) -> float:
        p, q = as_fraction(p), as_fraction(q)
        for c, tp, tq in self.terms:
            if tp == p and tq == q:
                return c
        return 0.0


@dataclass(frozen=True)
class RemovableQuotient:
    """``N(x, y) / (1 - y)`` for a numerator with ``N(x, 1) = 0``.

    Within ``switch`` of ``y = 1`` the quotient is replaced by the Taylor
    expansion of ``N`` about ``y = 1``; elsewhere it is the plain division.
    """

    numerator: MonomialSum
    switch: float = 1e-6
    order: int = 4

    @cached_property
    def _y_derivs(self):
        return [self.numerator.d_dy_n(k) for k in range(self.order + 2)]

    def __call__(self, x, y):
        x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
        h = y - 1.0
        near = np.abs(h) < self.switch
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(near, 0.0, self.numerator(x, y) / np.where(near, 1.0, -h))
        if np.any(near):
            xs, hs = x[near], h[near]
            ones = np.ones_like(xs)
            series = np.zeros_like(xs)
            for k in range(1, self.order + 1):
                series -= self._y_derivs[k](xs, ones) * hs ** (k - 1) / factorial(k)
            out = np.asarray(out, dtype=float)
            out[near] = series
        return out[()]

    def d_dy(self, x, y):
        """y-derivative of the quotient, with the same near-singular switch."""
        x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
        h = y - 1.0
        near = np.abs(h) < self.switch
        one_minus = np.where(near, 1.0, -h)
        with np.errstate(divide="ignore", invalid="ignore"):
            direct = (self._y_derivs[1](x, y) * one_minus + self.numerator(x, y)) / one_minus**2
        out = np.where(near, 0.0, direct)
        if np.any(near):
            xs, hs = x[near], h[near]
            ones = np.ones_like(xs)
            series = np.zeros_like(xs)
            for k in range(2, self.order + 2):
                series -= self._y_derivs[k](xs, ones) * (k - 1) * hs ** (k - 2) / factorial(k)
            out = np.asarray(out, dtype=float)
            out[near] = series
        return out[()]
