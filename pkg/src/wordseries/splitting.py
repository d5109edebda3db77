"""Splitting schemes and their word-coefficient expansions and error terms.

A splitting step alternates exact rotations (coefficients a_j) with exact
perturbation flows (coefficients b_j).  Its expansion coefficients come in
closed form from a weighted sum over nondecreasing stage assignments, and
independently from composing the factors in the extended group; both are
implemented and cross-checked in the tests.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations_with_replacement
from math import factorial, pi
from typing import Iterable, Sequence

import numpy as np

from .algebra import CoeffMap, unit
from .extended import ExtCoeff, FrequencySpec, apply_Xi, big_star
from .flows import flow_exppolys, word_flow_poly
from .words import EMPTY_WORD, Word, all_words


@dataclass(frozen=True)
class SplittingScheme:
    """Stage coefficients (a_j, b_j), j = 1..r, with derived partial sums c_j."""

    a: tuple[float, ...]
    b: tuple[float, ...]
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(float(x) for x in self.a))
        object.__setattr__(self, "b", tuple(float(x) for x in self.b))
        if len(self.a) != len(self.b) or len(self.a) < 1:
            raise ValueError("a and b must be equal-length, nonempty lists")

    @property
    def r(self) -> int:
        return len(self.a)

    @property
    def c(self) -> tuple[float, ...]:
        return tuple(np.cumsum(self.a))

    @property
    def a_sum(self) -> float:
        return float(sum(self.a))

    @property
    def b_sum(self) -> float:
        return float(sum(self.b))

    @property
    def is_consistent(self) -> bool:
        return abs(self.a_sum - 1.0) <= 1e-12 and abs(self.b_sum - 1.0) <= 1e-12

    def __repr__(self) -> str:
        tag = self.name or "scheme"
        return f"SplittingScheme({tag}, a={list(self.a)}, b={list(self.b)})"


STRANG = SplittingScheme((0.5, 0.5), (1.0, 0.0), name="strang")
LIE_TROTTER = SplittingScheme((1.0,), (1.0,), name="lie_trotter")

NAMED_SCHEMES: dict[str, SplittingScheme] = {
    "strang": STRANG,
    "lie_trotter": LIE_TROTTER,
}


def sigma(j_seq: Sequence[int]) -> Fraction:
    """Reciprocal multiplicity weight of a nondecreasing stage assignment.

    Equal runs of length l contribute a factor 1/l!; in particular a constant
    sequence of length n gives 1/n!.
    """
    seq = list(j_seq)
    if any(seq[i] > seq[i + 1] for i in range(len(seq) - 1)):
        raise ValueError("stage sequence must be nondecreasing")
    out = Fraction(1)
    i = 0
    while i < len(seq):
        j = i
        while j < len(seq) and seq[j] == seq[i]:
            j += 1
        out /= factorial(j - i)
        i = j
    return out


def _word_tilde_value(scheme: SplittingScheme, mus: tuple[float, ...], h: float) -> complex:
    """Scaled coefficient of a word with per-letter frequencies ``mus``."""
    n = len(mus)
    if n == 0:
        return 1.0 + 0j
    c = scheme.c
    b = scheme.b
    total = 0j
    for js in combinations_with_replacement(range(scheme.r), n):
        w = float(sigma(js))
        coeff = w
        phase = 0.0
        for j, mu in zip(js, mus):
            coeff *= b[j]
            phase += c[j] * mu
        if coeff != 0.0:
            total += coeff * np.exp(1j * phase * h)
    return total


def splitting_coefficients(scheme: SplittingScheme, freq: FrequencySpec,
                           alphabet: Iterable[tuple], max_len: int,
                           h: float) -> ExtCoeff:
    """Expansion coefficients of one splitting step, in closed form.

    Returns (h * (sum a_j) * omega, alpha~(h)); the map part is a character.
    Words sharing a per-letter frequency signature share their value, which
    the implementation exploits through a memo.
    """
    alphabet = tuple(alphabet)
    memo: dict[tuple, complex] = {}
    out: dict[Word, complex] = {EMPTY_WORD: 1.0 + 0j}
    for w in all_words(alphabet, max_len):
        n = len(w)
        if n == 0:
            continue
        sig = freq.word_sig(w)
        val = memo.get(sig)
        if val is None:
            mus = tuple(freq.mu_effective(a) for a in w)
            val = _word_tilde_value(scheme, mus, h) * h**n
            memo[sig] = val
        out[w] = val
    delta = CoeffMap._raw(frozenset(alphabet), max_len, out)
    return ExtCoeff(h * scheme.a_sum * freq.omega, delta)


def taylor_coefficients(alphabet: Iterable[tuple], max_len: int, t: float) -> CoeffMap:
    """Coefficients of the exact perturbation flow: t^n / n! on every word."""
    out = {w: t ** len(w) / factorial(len(w)) for w in all_words(alphabet, max_len)}
    return CoeffMap._raw(frozenset(alphabet), max_len, out)


def splitting_coefficients_by_composition(scheme: SplittingScheme, freq: FrequencySpec,
                                          alphabet: Iterable[tuple], max_len: int,
                                          h: float) -> ExtCoeff:
    """Same coefficients built as the product of the 2r stage factors."""
    alphabet = tuple(alphabet)
    d = freq.d
    acc = ExtCoeff(np.zeros(d), unit(alphabet, max_len))
    for aj, bj in zip(scheme.a, scheme.b):
        rot = ExtCoeff(aj * h * freq.omega, unit(alphabet, max_len))
        kick = ExtCoeff(np.zeros(d), taylor_coefficients(alphabet, max_len, bj * h))
        acc = big_star(big_star(acc, rot), kick)
    return acc


def scaled_exact_value(freq: FrequencySpec, w: Word, h: float) -> complex:
    """Scaled exact flow coefficient A_w(h) = alpha_w(h) / h^n."""
    if len(w) == 0:
        return 1.0 + 0j
    return word_flow_poly(freq, w).evaluate(h) / h ** len(w)


def quadrature_error(scheme: SplittingScheme, freq: FrequencySpec, w: Word,
                     h: float) -> complex:
    """Scaled one-word error A~_w(h) - A_w(h) of the underlying cubature rule."""
    mus = tuple(freq.mu_effective(a) for a in w)
    return _word_tilde_value(scheme, mus, h) - scaled_exact_value(freq, w, h)


def local_error_coefficients(scheme: SplittingScheme, freq: FrequencySpec,
                             alphabet: Iterable[tuple], max_len: int,
                             h: float) -> ExtCoeff:
    """Coefficients of the one-step error: (h (a_sum - 1) omega, alpha~ - alpha)."""
    alphabet = tuple(alphabet)
    tilde = splitting_coefficients(scheme, freq, alphabet, max_len, h)
    table = flow_exppolys(freq, alphabet, max_len)
    exact = {w: poly.evaluate(h) for w, poly in table.items()}
    delta = tilde.delta - CoeffMap._raw(frozenset(alphabet), max_len, exact)
    return ExtCoeff(h * (scheme.a_sum - 1.0) * freq.omega, delta)


class MStepError(Exception):
    pass


def m_step_error_coefficients(scheme: SplittingScheme, freq: FrequencySpec,
                              alphabet: Iterable[tuple], h: float, m: int,
                              check_tol: float = 1e-9) -> ExtCoeff:
    """Leading (one-letter) coefficients of the error after m steps.

    Closed forms: a numerically resonant letter grows linearly, m h A~_k; a
    nonresonant oscillatory letter carries the geometric accumulation factor
    (e^{i mu m h} - 1)/(e^{i mu h} - 1) times the one-step error; a
    nonoscillatory letter accumulates m times its one-step error.  The values
    are independently recomputed from m-fold products of the one-step element
    in the extended group and must agree to ``check_tol``.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    if not scheme.is_consistent:
        raise ValueError("m-step closed forms assume a consistent scheme")
    alphabet = tuple(alphabet)
    a = scheme.a_sum
    entries: dict[Word, complex] = {}
    power_entries: dict[Word, complex] = {}
    for k in alphabet:
        w = Word((k,))
        mu = freq.mu_effective(k)
        Ak = scaled_exact_value(freq, w, h)
        Atk = _word_tilde_value(scheme, (mu,), h)
        if mu == 0.0:
            closed = m * h * (Atk - Ak)
        else:
            z = mu * h / (2 * pi)
            resonant = abs(z - round(z)) <= 1e-9 * max(1.0, abs(z)) and round(z) != 0
            if resonant:
                closed = m * h * Atk
            else:
                ratio = (np.exp(1j * mu * m * h) - 1.0) / (np.exp(1j * mu * h) - 1.0)
                closed = h * ratio * (Atk - Ak)
        entries[w] = closed
    # independent route: literal m-fold products of the one-step element in
    # the extended group, minus the exact flow at time m h
    one_step = splitting_coefficients(scheme, freq, alphabet, 1, h)
    acc = one_step
    for _ in range(m - 1):
        acc = big_star(acc, one_step)
    for k in alphabet:
        w = Word((k,))
        exact_m = word_flow_poly(freq, w).evaluate(m * h)
        power_entries[w] = acc.delta[w] - exact_m
    for w in entries:
        scale = max(1.0, abs(entries[w]))
        if abs(entries[w] - power_entries[w]) > check_tol * scale:
            raise MStepError(
                f"closed-form and composed m-step errors disagree on {w!r}: "
                f"{entries[w]} vs {power_entries[w]}")
    delta = CoeffMap._raw(frozenset(alphabet), 1, entries)
    return ExtCoeff(m * h * (a - 1.0) * freq.omega, delta)


def detect_numerical_resonances(freq: FrequencySpec, alphabet: Iterable[tuple],
                                max_len: int, h: float | None = None,
                                h_range: tuple[float, float] | None = None) -> dict:
    """Step sizes where some reachable word frequency satisfies mu h in 2 pi Z.

    Enumerates the distinct nonzero frequencies of mode sums reachable with
    up to ``max_len`` letters, recording the minimal letter count (the order
    of the resonance).  With ``h_range`` it lists all resonant step sizes in
    the range; with a single ``h`` it classifies that step size.
    """
    alphabet = tuple(alphabet)
    reachable: dict[tuple, tuple[int, float]] = {}
    for n in range(1, max_len + 1):
        for combo in combinations_with_replacement(alphabet, n):
            k = tuple(int(s) for s in np.sum(combo, axis=0))
            if freq.is_zero(k):
                continue
            sig = freq.sig(k)
            mu = abs(freq.mu_effective(k))
            neg = tuple(-x for x in sig)
            key = max(sig, neg)  # +-mu resonate together
            if key not in reachable:
                reachable[key] = (n, mu)
    if h is not None:
        matches = []
        for order, mu in sorted(set(reachable.values())):
            z = mu * h / (2 * pi)
            j = round(z)
            if j != 0 and abs(z - j) <= 1e-9 * max(1.0, abs(z)):
                matches.append({"mu": mu, "order": order, "j": int(j)})
        return {"h": h, "resonant": bool(matches), "matches": matches}
    if h_range is None:
        raise ValueError("provide either h or h_range")
    h_min, h_max = h_range
    found: list[dict] = []
    for order, mu in sorted(set(reachable.values())):
        j_lo = int(np.ceil(mu * h_min / (2 * pi) - 1e-12))
        j_hi = int(np.floor(mu * h_max / (2 * pi) + 1e-12))
        for j in range(max(1, j_lo), j_hi + 1):
            found.append({"h": 2 * pi * j / mu, "mu": mu, "order": order, "j": j})
    found.sort(key=lambda e: (e["h"], e["order"]))
    merged: list[dict] = []
    for e in found:
        if merged and abs(e["h"] - merged[-1]["h"]) <= 1e-12 * max(1.0, e["h"]):
            merged[-1]["sources"].append({k: e[k] for k in ("mu", "order", "j")})
            merged[-1]["order"] = min(merged[-1]["order"], e["order"])
        else:
            merged.append({"h": e["h"], "order": e["order"],
                           "sources": [{k: e[k] for k in ("mu", "order", "j")}]})
    return {"h_range": [h_min, h_max], "resonances": merged}
