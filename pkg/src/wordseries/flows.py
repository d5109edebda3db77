"""Exact flow coefficients via iterated closed-form integration.

The coefficients of the exact-solution expansion solve a triangular linear
system: each word's coefficient is the integral of a shorter word's
coefficient times an oscillation.  The engine keeps every oscillation
frequency as an exact additive signature supplied by the FrequencySpec, so
the resonant (zero-frequency) integration branch fires structurally and no
small denominators ever appear.
"""
from __future__ import annotations

from cmath import exp as cexp
from math import factorial
from typing import Iterable

from .algebra import CoeffMap, perturbation_element
from .exppoly import ExpPoly
from .extended import FrequencySpec
from .words import EMPTY_WORD, Word, all_words


class SigPoly:
    """Sum of c * t^m * exp(i mu(sig) t) terms keyed by exact frequency signatures."""

    __slots__ = ("freq", "terms")

    def __init__(self, freq: FrequencySpec, terms: dict | None = None):
        self.freq = freq
        self.terms = terms or {}

    @classmethod
    def one(cls, freq: FrequencySpec) -> "SigPoly":
        return cls(freq, {(0, freq.sig_zero()): 1.0 + 0j})

    def shifted(self, sig: tuple, scale: complex = 1.0) -> "SigPoly":
        """Multiply by scale * exp(i mu(sig) t)."""
        add = self.freq.sig_add
        return SigPoly(self.freq, {(m, add(s, sig)): scale * c
                                   for (m, s), c in self.terms.items()})

    def plus(self, other: "SigPoly") -> "SigPoly":
        out = dict(self.terms)
        for key, c in other.terms.items():
            out[key] = out.get(key, 0j) + c
        return SigPoly(self.freq, out)

    def antiderivative(self) -> "SigPoly":
        out: dict = {}

        def put(key, c):
            out[key] = out.get(key, 0j) + c

        zero_sig = self.freq.sig_zero()
        for (m, sig), c in self.terms.items():
            if self.freq.sig_is_zero(sig):
                put((m + 1, sig), c / (m + 1))
                continue
            il = 1j * self.freq.sig_mu(sig)
            last = 0j
            for j in range(m + 1):
                coef = c * ((-1) ** j) * (factorial(m) / factorial(m - j)) / il ** (j + 1)
                put((m - j, sig), coef)
                last = coef
            put((0, zero_sig), -last)
        return SigPoly(self.freq, out)

    def evaluate(self, t: float) -> complex:
        total = 0j
        for (m, sig), c in self.terms.items():
            mu = self.freq.sig_mu(sig)
            total += c * t**m * (cexp(1j * mu * t) if mu != 0.0 else 1.0)
        return total

    def to_exppoly(self) -> ExpPoly:
        return ExpPoly([(c, m, self.freq.sig_mu(sig))
                        for (m, sig), c in self.terms.items()])


def word_flow_poly(freq: FrequencySpec, w: Word) -> SigPoly:
    """Flow coefficient of one word as a function of time, in closed form.

    Builds the iterated integral by appending letters: the coefficient of w.k
    integrates the coefficient of w times the oscillation of letter k.
    """
    poly = SigPoly.one(freq)
    for a in w:
        poly = poly.shifted(freq.sig(a)).antiderivative()
    return poly


def flow_exppolys(freq: FrequencySpec, alphabet: Iterable[tuple], max_len: int,
                  beta: CoeffMap | None = None) -> dict[Word, SigPoly]:
    """Flow coefficients for every word of length <= max_len, as SigPolys.

    With ``beta`` given (an algebra element over the same alphabet), solves
    the general coefficient system whose right-hand side rotates beta; the
    default is the plain one-letter right-hand side.
    """
    words = all_words(alphabet, max_len)
    if beta is None:
        beta = perturbation_element(alphabet, max_len)
    if beta.empty_coeff != 0:
        raise ValueError("beta must vanish on the empty word")
    table: dict[Word, SigPoly] = {EMPTY_WORD: SigPoly.one(freq)}
    for w in words:
        n = len(w)
        if n == 0:
            continue
        integrand: SigPoly | None = None
        for i in range(n):
            suffix = w[i:]
            bv = beta[suffix]
            if bv == 0:
                continue
            piece = table[w[:i]].shifted(freq.sig(suffix.mode_sum()), bv)
            integrand = piece if integrand is None else integrand.plus(piece)
        table[w] = (integrand.antiderivative() if integrand is not None
                    else SigPoly(freq, {}))
    return table


def flow_coefficients(freq: FrequencySpec, alphabet: Iterable[tuple], max_len: int,
                      t: float, scaled: bool = False,
                      beta: CoeffMap | None = None) -> CoeffMap:
    """Exact flow coefficients at time t; ``scaled`` divides length-n words by t^n.

    The result is a character: it satisfies the shuffle relations at every t.
    """
    if scaled and t == 0:
        raise ValueError("scaled coefficients need t != 0")
    table = flow_exppolys(freq, alphabet, max_len, beta=beta)
    alpha_set = frozenset(alphabet)
    out = {}
    for w, poly in table.items():
        val = poly.evaluate(t)
        if scaled:
            val /= t ** len(w)
        out[w] = val
    return CoeffMap._raw(alpha_set, max_len, out)
