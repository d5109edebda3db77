"""Sparse polynomial observables over canonical charts, with Poisson structure.

A chart fixes an ordered variable list arranged in conjugate pairs.  Two
kinds are supported: the real chart with momenta and positions, and the
complex chart where each oscillator pair is replaced by the eigencoordinates
zeta = p + i omega q, zetabar = p - i omega q of the harmonic rotation (slow
pairs keep their real variables).  Brackets, Hamiltonian vector fields and
mode indices are all driven by the chart's pair table, so the same polynomial
machinery serves both representations.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np


@dataclass(frozen=True)
class Chart:
    """Ordered variables (slot1_1..slot1_n, slot2_1..slot2_n) in conjugate pairs.

    ``omegas[j]`` is the frequency of oscillator pair j, or None for a slow
    pair.  In the "pq" kind slot1 holds momenta and slot2 positions; in the
    "complex" kind oscillator slots hold (zeta, zetabar) instead.
    """

    kind: str
    omegas: tuple

    def __post_init__(self):
        if self.kind not in ("pq", "complex"):
            raise ValueError("kind must be 'pq' or 'complex'")
        object.__setattr__(self, "omegas",
                           tuple(None if w is None else float(w) for w in self.omegas))

    @property
    def n_pairs(self) -> int:
        return len(self.omegas)

    @property
    def nvars(self) -> int:
        return 2 * len(self.omegas)

    def slot1(self, j: int) -> int:
        return j

    def slot2(self, j: int) -> int:
        return self.n_pairs + j

    @property
    def names(self) -> tuple[str, ...]:
        first, second = [], []
        for j, w in enumerate(self.omegas):
            if self.kind == "pq" or w is None:
                first.append(f"p{j + 1}")
                second.append(f"q{j + 1}")
            else:
                first.append(f"z{j + 1}")
                second.append(f"zc{j + 1}")
        return tuple(first + second)

    def bracket_pairs(self) -> list[tuple[int, int, complex]]:
        """Triples (u, v, c) with {x_u, x_v} = c generating the Poisson bracket."""
        out = []
        for j, w in enumerate(self.omegas):
            if self.kind == "complex" and w is not None:
                # {zeta, zetabar} = 2 i omega
                out.append((self.slot1(j), self.slot2(j), 2j * w))
            else:
                # {q, p} = 1
                out.append((self.slot2(j), self.slot1(j), 1.0 + 0j))
        return out

    def complex_counterpart(self) -> "Chart":
        if self.kind != "pq":
            raise ValueError("complex_counterpart starts from a pq chart")
        return Chart("complex", self.omegas)

    def pq_counterpart(self) -> "Chart":
        if self.kind != "complex":
            raise ValueError("pq_counterpart starts from a complex chart")
        return Chart("pq", self.omegas)


class PolyObservable:
    """Sparse exponent-vector -> complex coefficient polynomial over a chart."""

    __slots__ = ("chart", "terms", "_compiled")

    def __init__(self, chart: Chart, terms=None):
        clean: dict[tuple[int, ...], complex] = {}
        nv = chart.nvars
        for e, c in (terms or {}).items():
            e = tuple(int(x) for x in e)
            if len(e) != nv or any(x < 0 for x in e):
                raise ValueError(f"bad exponent vector {e}")
            c = complex(c)
            if c != 0:
                clean[e] = clean.get(e, 0j) + c
        self.chart = chart
        self.terms = clean
        self._compiled = None

    @classmethod
    def _raw(cls, chart: Chart, terms: dict) -> "PolyObservable":
        self = object.__new__(cls)
        self.chart = chart
        self.terms = {e: c for e, c in terms.items() if c != 0}
        self._compiled = None
        return self

    @classmethod
    def zero(cls, chart: Chart) -> "PolyObservable":
        return cls._raw(chart, {})

    @classmethod
    def constant(cls, chart: Chart, c: complex) -> "PolyObservable":
        return cls(chart, {(0,) * chart.nvars: c})

    @classmethod
    def variable(cls, chart: Chart, i: int) -> "PolyObservable":
        e = [0] * chart.nvars
        e[i] = 1
        return cls(chart, {tuple(e): 1.0})

    # -- ring operations -------------------------------------------------
    def _check_chart(self, other: "PolyObservable"):
        if self.chart != other.chart:
            raise ValueError("charts do not match")

    def __add__(self, other: "PolyObservable") -> "PolyObservable":
        self._check_chart(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, 0j) + c
        return PolyObservable._raw(self.chart, out)

    def __sub__(self, other: "PolyObservable") -> "PolyObservable":
        return self + (-1.0) * other

    def __neg__(self) -> "PolyObservable":
        return (-1.0) * self

    def __mul__(self, other):
        if isinstance(other, PolyObservable):
            self._check_chart(other)
            out: dict[tuple, complex] = {}
            for e1, c1 in self.terms.items():
                for e2, c2 in other.terms.items():
                    e = tuple(a + b for a, b in zip(e1, e2))
                    out[e] = out.get(e, 0j) + c1 * c2
            return PolyObservable._raw(self.chart, out)
        c = complex(other)
        return PolyObservable._raw(self.chart,
                                   {e: c * v for e, v in self.terms.items()})

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "PolyObservable":
        if n < 0:
            raise ValueError("negative power")
        out = PolyObservable.constant(self.chart, 1.0)
        for _ in range(n):
            out = out * self
        return out

    # -- calculus and evaluation ------------------------------------------
    def differentiate(self, i: int) -> "PolyObservable":
        out: dict[tuple, complex] = {}
        for e, c in self.terms.items():
            if e[i] > 0:
                e2 = list(e)
                e2[i] -= 1
                out[tuple(e2)] = out.get(tuple(e2), 0j) + c * e[i]
        return PolyObservable._raw(self.chart, out)

    def _compile(self):
        if self._compiled is None:
            if self.terms:
                E = np.array(list(self.terms.keys()), dtype=np.int64)
                C = np.array(list(self.terms.values()), dtype=complex)
            else:
                E = np.zeros((0, self.chart.nvars), dtype=np.int64)
                C = np.zeros(0, dtype=complex)
            self._compiled = (E, C)
        return self._compiled

    def evaluate(self, x: Sequence[complex]) -> complex:
        E, C = self._compile()
        if len(C) == 0:
            return 0j
        x = np.asarray(x, dtype=complex)
        return complex(np.dot(C, np.prod(x[None, :] ** E, axis=1)))

    def evaluate_many(self, xs: np.ndarray) -> np.ndarray:
        """Evaluate at each row of a (npoints, nvars) array."""
        E, C = self._compile()
        xs = np.asarray(xs, dtype=complex)
        if len(C) == 0:
            return np.zeros(len(xs), dtype=complex)
        out = np.empty(len(xs), dtype=complex)
        for i, x in enumerate(xs):
            out[i] = np.dot(C, np.prod(x[None, :] ** E, axis=1))
        return out

    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=0)

    def norm_inf(self) -> float:
        return max((abs(c) for c in self.terms.values()), default=0.0)

    def __eq__(self, other) -> bool:
        return (isinstance(other, PolyObservable) and self.chart == other.chart
                and self.terms == other.terms)

    def isclose(self, other: "PolyObservable", tol: float = 1e-12) -> bool:
        self._check_chart(other)
        keys = set(self.terms) | set(other.terms)
        return all(abs(self.terms.get(e, 0j) - other.terms.get(e, 0j)) <= tol
                   for e in keys)

    def pretty(self, max_terms: int = 12) -> str:
        names = self.chart.names
        bits = []
        for e, c in sorted(self.terms.items(), key=lambda t: (sum(t[0]), t[0]))[:max_terms]:
            mono = "*".join(f"{names[i]}^{k}" if k > 1 else names[i]
                            for i, k in enumerate(e) if k)
            bits.append(f"({c:.6g})" + ("*" + mono if mono else ""))
        tail = "" if len(self.terms) <= max_terms else f" + ... ({len(self.terms)} terms)"
        return (" + ".join(bits) or "0") + tail

    def __repr__(self) -> str:
        return f"PolyObservable({self.chart.kind}, {len(self.terms)} terms)"


def poisson_bracket(A: PolyObservable, B: PolyObservable) -> PolyObservable:
    """Canonical Poisson bracket from the chart's pair table.

    In the real chart this is the standard sum over conjugate pairs of
    dA/dq dB/dp - dA/dp dB/dq; bilinear, antisymmetric, and a derivation in
    each argument.
    """
    A._check_chart(B)
    out = PolyObservable.zero(A.chart)
    for u, v, c in A.chart.bracket_pairs():
        out = out + c * (A.differentiate(u) * B.differentiate(v)
                         - A.differentiate(v) * B.differentiate(u))
    return out


def hamiltonian_vector_field(H: PolyObservable) -> list[PolyObservable]:
    """Component polynomials of the field x' = {x, H}, one per variable."""
    chart = H.chart
    comps = [PolyObservable.zero(chart) for _ in range(chart.nvars)]
    for u, v, c in chart.bracket_pairs():
        comps[u] = comps[u] + c * H.differentiate(v)
        comps[v] = comps[v] + (-c) * H.differentiate(u)
    return comps


def field_divergence(field: Sequence[PolyObservable]) -> PolyObservable:
    chart = field[0].chart
    out = PolyObservable.zero(chart)
    for i, comp in enumerate(field):
        out = out + comp.differentiate(i)
    return out


def substitute(poly: PolyObservable, target_chart: Chart,
               var_images: Sequence[PolyObservable]) -> PolyObservable:
    """Rewrite a polynomial through linear (or polynomial) variable images."""
    cache: dict[tuple[int, int], PolyObservable] = {}

    def power(i: int, k: int) -> PolyObservable:
        key = (i, k)
        if key not in cache:
            cache[key] = var_images[i] ** k
        return cache[key]

    out = PolyObservable.zero(target_chart)
    for e, c in poly.terms.items():
        term = PolyObservable.constant(target_chart, c)
        for i, k in enumerate(e):
            if k:
                term = term * power(i, k)
        out = out + term
    return out


def pq_to_complex(poly: PolyObservable) -> PolyObservable:
    """Substitute p = (z + zc)/2, q = (z - zc)/(2 i omega) per oscillator pair."""
    chart = poly.chart
    if chart.kind != "pq":
        raise ValueError("expected a pq-chart polynomial")
    cchart = chart.complex_counterpart()
    images: list[PolyObservable] = [None] * chart.nvars  # type: ignore
    for j, w in enumerate(chart.omegas):
        i1, i2 = chart.slot1(j), chart.slot2(j)
        if w is None:
            images[i1] = PolyObservable.variable(cchart, i1)
            images[i2] = PolyObservable.variable(cchart, i2)
        else:
            z = PolyObservable.variable(cchart, i1)
            zc = PolyObservable.variable(cchart, i2)
            images[i1] = 0.5 * (z + zc)
            images[i2] = (1.0 / (2j * w)) * (z - zc)
    return substitute(poly, cchart, images)


def complex_to_pq(poly: PolyObservable) -> PolyObservable:
    """Substitute zeta = p + i omega q, zetabar = p - i omega q."""
    chart = poly.chart
    if chart.kind != "complex":
        raise ValueError("expected a complex-chart polynomial")
    pchart = chart.pq_counterpart()
    images: list[PolyObservable] = [None] * chart.nvars  # type: ignore
    for j, w in enumerate(chart.omegas):
        i1, i2 = chart.slot1(j), chart.slot2(j)
        if w is None:
            images[i1] = PolyObservable.variable(pchart, i1)
            images[i2] = PolyObservable.variable(pchart, i2)
        else:
            p = PolyObservable.variable(pchart, i1)
            q = PolyObservable.variable(pchart, i2)
            images[i1] = p + (1j * w) * q
            images[i2] = p + (-1j * w) * q
    return substitute(poly, pchart, images)


def pq_point_to_complex(chart: Chart, x: np.ndarray) -> np.ndarray:
    """Map a pq-chart point (or batch, last axis = nvars) to the complex chart."""
    x = np.asarray(x, dtype=complex)
    out = x.copy()
    n = chart.n_pairs
    for j, w in enumerate(chart.omegas):
        if w is None:
            continue
        p = x[..., j]
        q = x[..., n + j]
        out[..., j] = p + 1j * w * q
        out[..., n + j] = p - 1j * w * q
    return out


def complex_vector_to_pq(chart: Chart, v: np.ndarray) -> np.ndarray:
    """Inverse linear map on vectors: back to (p, q) components."""
    v = np.asarray(v, dtype=complex)
    out = v.copy()
    n = chart.n_pairs
    for j, w in enumerate(chart.omegas):
        if w is None:
            continue
        z = v[..., j]
        zc = v[..., n + j]
        out[..., j] = 0.5 * (z + zc)
        out[..., n + j] = (z - zc) / (2j * w)
    return out


def conjugate_observable(poly: PolyObservable) -> PolyObservable:
    """Complex conjugate of the observable as a function of the real point.

    In the complex chart this swaps the zeta and zetabar exponents of each
    oscillator pair and conjugates the coefficients.
    """
    chart = poly.chart
    out: dict[tuple, complex] = {}
    n = chart.n_pairs
    for e, c in poly.terms.items():
        e2 = list(e)
        if chart.kind == "complex":
            for j, w in enumerate(chart.omegas):
                if w is not None:
                    e2[j], e2[n + j] = e[n + j], e[j]
        out[tuple(e2)] = out.get(tuple(e2), 0j) + np.conj(c)
    return PolyObservable._raw(chart, out)


def poly_to_json(poly: PolyObservable) -> list:
    """(exponent-vector, re, im) triples in deterministic order."""
    return [[list(e), c.real, c.imag]
            for e, c in sorted(poly.terms.items(), key=lambda t: (sum(t[0]), t[0]))]


def poly_from_json(chart: Chart, obj: list) -> PolyObservable:
    return PolyObservable(chart, {tuple(e): complex(re, im) for e, re, im in obj})
