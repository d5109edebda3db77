"""Truncated coefficient maps and the convolution (star) algebra.

A :class:`CoeffMap` is a sparse word -> complex map over a declared finite
alphabet, truncated at a word length ``max_len``.  The convolution product is
dual to deconcatenation; characters of the shuffle algebra (flows, integrator
expansions) form the group, infinitesimal characters (vector fields) the Lie
algebra, and ``exp_star``/``log_star`` move between them.
"""
from __future__ import annotations

from math import isclose
from typing import Iterable, NamedTuple

from .words import EMPTY_WORD, Letter, Word, all_words, shuffle


class CoeffMap:
    """Sparse word -> complex coefficients, exact up to length ``max_len``.

    Absent words have coefficient 0.  Instances are immutable; all algebra is
    done by module-level functions returning fresh maps.
    """

    __slots__ = ("alphabet", "max_len", "entries", "_by_len")

    def __init__(self, alphabet: Iterable[Letter], max_len: int, entries=None):
        alphabet = frozenset(alphabet)
        if max_len < 1:
            raise ValueError("max_len must be >= 1")
        clean: dict[Word, complex] = {}
        for w, c in (entries or {}).items():
            if not isinstance(w, Word):
                w = Word(w)
            if len(w) > max_len:
                raise ValueError(f"word {w!r} exceeds truncation order {max_len}")
            if any(a not in alphabet for a in w):
                raise ValueError(f"word {w!r} uses letters outside the alphabet")
            c = complex(c)
            if c != 0:
                clean[w] = c
        self.alphabet = alphabet
        self.max_len = max_len
        self.entries = clean
        self._by_len = None

    @classmethod
    def _raw(cls, alphabet: frozenset, max_len: int, entries: dict) -> "CoeffMap":
        # Trusted fast path for internal results: entries already validated,
        # keyed by Word, zeros allowed (dropped here).
        self = object.__new__(cls)
        self.alphabet = alphabet
        self.max_len = max_len
        self.entries = {w: c for w, c in entries.items() if c != 0}
        self._by_len = None
        return self

    # -- access ---------------------------------------------------------
    def __getitem__(self, w) -> complex:
        if not isinstance(w, Word):
            w = Word(w)
        return self.entries.get(w, 0j)

    @property
    def empty_coeff(self) -> complex:
        return self.entries.get(EMPTY_WORD, 0j)

    def support(self) -> list[Word]:
        return sorted(self.entries, key=lambda w: w.sort_key)

    def sorted_items(self) -> list[tuple[Word, complex]]:
        return [(w, self.entries[w]) for w in self.support()]

    def groups_by_length(self) -> dict[int, list[tuple[Word, complex]]]:
        if self._by_len is None:
            buckets: dict[int, list] = {}
            for w, c in self.entries.items():
                buckets.setdefault(len(w), []).append((w, c))
            self._by_len = buckets
        return self._by_len

    def length_part(self, n: int) -> "CoeffMap":
        """The sub-map carrying only the words of length exactly n."""
        return CoeffMap._raw(
            self.alphabet, self.max_len,
            {w: c for w, c in self.entries.items() if len(w) == n})

    def norm_inf(self) -> float:
        return max((abs(c) for c in self.entries.values()), default=0.0)

    # -- linear structure -------------------------------------------------
    def _check_like(self, other: "CoeffMap"):
        if self.alphabet != other.alphabet:
            raise ValueError("alphabet mismatch")
        if self.max_len != other.max_len:
            raise ValueError("truncation order mismatch")

    def __add__(self, other: "CoeffMap") -> "CoeffMap":
        self._check_like(other)
        out = dict(self.entries)
        for w, c in other.entries.items():
            out[w] = out.get(w, 0j) + c
        return CoeffMap._raw(self.alphabet, self.max_len, out)

    def __sub__(self, other: "CoeffMap") -> "CoeffMap":
        return self + (-1.0) * other

    def __neg__(self) -> "CoeffMap":
        return (-1.0) * self

    def __mul__(self, scalar) -> "CoeffMap":
        scalar = complex(scalar)
        return CoeffMap._raw(self.alphabet, self.max_len,
                             {w: scalar * c for w, c in self.entries.items()})

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        return (isinstance(other, CoeffMap) and self.alphabet == other.alphabet
                and self.max_len == other.max_len and self.entries == other.entries)

    def isclose(self, other: "CoeffMap", tol: float = 1e-12) -> bool:
        self._check_like(other)
        words = set(self.entries) | set(other.entries)
        return all(abs(self[w] - other[w]) <= tol for w in words)

    def __repr__(self) -> str:
        return "CoeffMap(|alphabet|=%d, N=%d, %d entries)" % (
            len(self.alphabet), self.max_len, len(self.entries))


def unit(alphabet: Iterable[Letter], max_len: int) -> CoeffMap:
    """The star unit: 1 on the empty word, 0 elsewhere."""
    return CoeffMap(alphabet, max_len, {EMPTY_WORD: 1.0})


def zero_map(alphabet: Iterable[Letter], max_len: int) -> CoeffMap:
    return CoeffMap(alphabet, max_len, {})


def perturbation_element(alphabet: Iterable[Letter], max_len: int) -> CoeffMap:
    """Coefficients of a right-hand side: 1 on every one-letter word."""
    return CoeffMap(alphabet, max_len, {Word((a,)): 1.0 for a in alphabet})


def convolve(d1: CoeffMap, d2: CoeffMap) -> CoeffMap:
    """Convolution product: (d1*d2)_w sums d1 on prefixes times d2 on suffixes.

    Associative, unit :func:`unit`; the product of two characters is again a
    character.
    """
    d1._check_like(d2)
    n_max = d1.max_len
    out: dict[Word, complex] = {}
    by1 = d1.groups_by_length()
    by2 = d2.groups_by_length()
    for l1, items1 in by1.items():
        for l2, items2 in by2.items():
            if l1 + l2 > n_max:
                continue
            for u, cu in items1:
                for v, cv in items2:
                    w = u + v
                    out[w] = out.get(w, 0j) + cu * cv
    return CoeffMap._raw(d1.alphabet, n_max, out)


def star_power(d: CoeffMap, j: int) -> CoeffMap:
    if j < 0:
        raise ValueError("negative star power")
    acc = unit(d.alphabet, d.max_len)
    for _ in range(j):
        acc = convolve(acc, d)
    return acc


def exp_star(b: CoeffMap) -> CoeffMap:
    """Star exponential of an algebra element (empty-word coefficient 0).

    Because b vanishes on the empty word, each star power raises the minimum
    word length, so the series terminates at the truncation order.
    """
    if b.empty_coeff != 0:
        raise ValueError("exp_star requires a zero empty-word coefficient")
    out = {EMPTY_WORD: 1.0 + 0j}
    power = unit(b.alphabet, b.max_len)
    fact = 1.0
    for j in range(1, b.max_len + 1):
        power = convolve(power, b)
        if not power.entries:
            break
        fact *= j
        for w, c in power.entries.items():
            out[w] = out.get(w, 0j) + c / fact
    return CoeffMap._raw(b.alphabet, b.max_len, out)


def log_star(g: CoeffMap) -> CoeffMap:
    """Star logarithm of a group-like element (empty-word coefficient 1)."""
    if not isclose(abs(g.empty_coeff - 1.0), 0.0, abs_tol=1e-12):
        raise ValueError("log_star requires empty-word coefficient 1")
    x = g - unit(g.alphabet, g.max_len)
    out: dict[Word, complex] = {}
    power = unit(g.alphabet, g.max_len)
    for j in range(1, g.max_len + 1):
        power = convolve(power, x)
        if not power.entries:
            break
        sign = 1.0 if j % 2 == 1 else -1.0
        for w, c in power.entries.items():
            out[w] = out.get(w, 0j) + sign * c / j
    return CoeffMap._raw(g.alphabet, g.max_len, out)


def star_inverse(g: CoeffMap) -> CoeffMap:
    """Inverse in the group: Neumann series in (unit - g)."""
    if not isclose(abs(g.empty_coeff - 1.0), 0.0, abs_tol=1e-12):
        raise ValueError("star_inverse requires empty-word coefficient 1")
    y = unit(g.alphabet, g.max_len) - g
    out = {EMPTY_WORD: 1.0 + 0j}
    power = unit(g.alphabet, g.max_len)
    for _ in range(g.max_len):
        power = convolve(power, y)
        if not power.entries:
            break
        for w, c in power.entries.items():
            out[w] = out.get(w, 0j) + c
    return CoeffMap._raw(g.alphabet, g.max_len, out)


def bracket(b1: CoeffMap, b2: CoeffMap) -> CoeffMap:
    """Commutator b1*b2 - b2*b1; closes on the Lie algebra."""
    if b1.empty_coeff != 0 or b2.empty_coeff != 0:
        raise ValueError("bracket requires zero empty-word coefficients")
    return convolve(b1, b2) - convolve(b2, b1)


class MembershipResult(NamedTuple):
    ok: bool
    violations: list

    def __bool__(self) -> bool:
        return self.ok


def verify_membership(d: CoeffMap, kind: str, tol: float = 1e-12) -> MembershipResult:
    """Test the shuffle relations defining the group or the Lie algebra.

    ``kind='group'``: empty coefficient 1 and d_w d_w' = sum of d over the
    shuffle of w and w'.  ``kind='algebra'``: empty coefficient 0 and the
    shuffle sums vanish for nonempty pairs.  Checks every word pair over the
    declared alphabet with combined length <= max_len and returns the
    violating pairs.
    """
    if kind not in ("group", "algebra"):
        raise ValueError("kind must be 'group' or 'algebra'")
    violations: list[tuple[Word, Word]] = []
    target_empty = 1.0 if kind == "group" else 0.0
    if abs(d.empty_coeff - target_empty) > tol:
        violations.append((EMPTY_WORD, EMPTY_WORD))
    words = [w for w in all_words(d.alphabet, d.max_len) if len(w) >= 1]
    for i, w in enumerate(words):
        for w2 in words[i:]:
            if len(w) + len(w2) > d.max_len:
                break  # words are sorted by length
            lhs = sum(m * d[u] for u, m in shuffle(w, w2))
            rhs = d[w] * d[w2] if kind == "group" else 0.0
            if abs(lhs - rhs) > tol:
                violations.append((w, w2))
    return MembershipResult(not violations, violations)


# -- serialization ---------------------------------------------------------

def _letter_to_json(a: Letter):
    return list(a) if isinstance(a, tuple) else a


def _letter_from_json(obj) -> Letter:
    return tuple(obj) if isinstance(obj, list) else obj


def coeffmap_to_json(d: CoeffMap) -> dict:
    """JSON form with deterministic word order (length, then letter index)."""
    alphabet = sorted(d.alphabet)
    return {
        "alphabet": [_letter_to_json(a) for a in alphabet],
        "max_len": d.max_len,
        "entries": [[[_letter_to_json(a) for a in w], c.real, c.imag]
                    for w, c in d.sorted_items()],
    }


def coeffmap_from_json(obj: dict) -> CoeffMap:
    alphabet = [_letter_from_json(a) for a in obj["alphabet"]]
    entries = {Word(tuple(_letter_from_json(a) for a in ws)): complex(re, im)
               for ws, re, im in obj["entries"]}
    return CoeffMap(alphabet, int(obj["max_len"]), entries)
