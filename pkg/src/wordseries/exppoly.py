"""Closed-form calculus for finite sums of c * t^m * exp(i lambda t).

These are exactly the integrands and antiderivatives produced by iterated
integrals of complex exponentials over simplices, so integration stays in
closed form at every order; the lambda == 0 branch keeps resonant terms
polynomial instead of dividing by a vanishing frequency.
"""
from __future__ import annotations

from math import factorial
from typing import Iterable

import numpy as np


class ExpPoly:
    """Canonical term list of (coefficient, power, frequency) triples.

    Terms with equal (power, frequency) are merged; frequencies compare by
    exact float equality, with -0.0 normalized to 0.0.
    """

    __slots__ = ("terms",)

    def __init__(self, terms: Iterable[tuple[complex, int, float]] = ()):
        acc: dict[tuple[int, float], complex] = {}
        for c, m, lam in terms:
            if m < 0 or m != int(m):
                raise ValueError("powers must be nonnegative integers")
            lam = float(lam) + 0.0  # normalizes -0.0
            key = (int(m), lam)
            acc[key] = acc.get(key, 0j) + complex(c)
        self.terms = tuple((c, m, lam) for (m, lam), c in sorted(acc.items())
                           if c != 0)

    @classmethod
    def constant(cls, c: complex) -> "ExpPoly":
        return cls([(c, 0, 0.0)])

    @classmethod
    def oscillation(cls, lam: float, c: complex = 1.0) -> "ExpPoly":
        return cls([(c, 0, lam)])

    def __add__(self, other: "ExpPoly") -> "ExpPoly":
        return ExpPoly(self.terms + other.terms)

    def __sub__(self, other: "ExpPoly") -> "ExpPoly":
        return self + (-1.0) * other

    def __mul__(self, other):
        if isinstance(other, ExpPoly):
            return ExpPoly([(c1 * c2, m1 + m2, l1 + l2)
                            for c1, m1, l1 in self.terms
                            for c2, m2, l2 in other.terms])
        return ExpPoly([(complex(other) * c, m, l) for c, m, l in self.terms])

    __rmul__ = __mul__

    def evaluate(self, t: float) -> complex:
        return sum((c * t**m * np.exp(1j * lam * t) for c, m, lam in self.terms), 0j)

    def antiderivative(self) -> "ExpPoly":
        """The antiderivative vanishing at t = 0, again an ExpPoly."""
        out: list[tuple[complex, int, float]] = []
        for c, m, lam in self.terms:
            if lam == 0.0:
                out.append((c / (m + 1), m + 1, 0.0))
                continue
            il = 1j * lam
            # repeated integration by parts of t^m e^(i lam t)
            last = 0j
            for j in range(m + 1):
                coef = c * ((-1) ** j) * (factorial(m) / factorial(m - j)) / il ** (j + 1)
                out.append((coef, m - j, lam))
                last = coef
            out.append((-last, 0, 0.0))  # fixes F(0) = 0
        return ExpPoly(out)

    def derivative(self) -> "ExpPoly":
        out = []
        for c, m, lam in self.terms:
            if m > 0:
                out.append((c * m, m - 1, lam))
            if lam != 0.0:
                out.append((c * 1j * lam, m, lam))
        return ExpPoly(out)

    def integrate(self, s: float) -> complex:
        """Definite integral over [0, s], in closed form."""
        return self.antiderivative().evaluate(s)

    def __eq__(self, other) -> bool:
        return isinstance(other, ExpPoly) and self.terms == other.terms

    def __repr__(self) -> str:
        if not self.terms:
            return "ExpPoly(0)"
        bits = [f"({c:.6g})*t^{m}*e^(i{lam:.6g}t)" for c, m, lam in self.terms]
        return "ExpPoly(" + " + ".join(bits) + ")"


def exppoly_antiderivative(p: ExpPoly) -> ExpPoly:
    return p.antiderivative()


def exppoly_integrate(p: ExpPoly, s: float) -> complex:
    return p.integrate(s)
