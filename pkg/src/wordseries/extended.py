"""Extended word-series algebra: frequency vectors and the rotation-extended group.

An extended coefficient pairs an angle-shift vector with a coefficient map.
The diagonal operators ``apply_Xi``/``apply_xi`` scale a word's coefficient by
the oscillation its mode sum picks up under a rotation, and ``big_star``
composes extended elements the way the underlying maps compose.

Resonance structure (which mode sums have frequency exactly zero) is decided
by :class:`FrequencySpec`, preferably through an exact rational form of the
frequency vector over declared real basis symbols, with a relative numeric
tolerance as the documented fallback.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .algebra import CoeffMap, convolve, star_inverse, unit
from .words import EMPTY_WORD, Word


class FrequencySpec:
    """Positive frequency vector, optionally with exact rational structure.

    ``exact_form`` expresses each frequency as a rational combination of real
    basis symbols assumed rationally independent (e.g. 1 and sqrt(2)); the
    zero test on integer combinations of frequencies is then exact.  Without
    it, zero is declared when |mu| <= tol * |k| * |omega|.
    """

    def __init__(self, omega: Sequence[float], symbols: Sequence[str] | None = None,
                 basis_values: Sequence[float] | None = None,
                 rational_matrix: Sequence[Sequence] | None = None,
                 tol: float = 1e-9):
        self.omega = np.asarray(omega, dtype=float)
        if self.omega.ndim != 1 or len(self.omega) == 0:
            raise ValueError("omega must be a nonempty vector")
        if np.any(self.omega <= 0):
            raise ValueError("frequencies must be positive")
        self.d = len(self.omega)
        self.tol = float(tol)
        self._omega_norm = float(np.linalg.norm(self.omega))
        self._zero_cache: dict[tuple, bool] = {}
        self._sig_cache: dict[tuple, tuple] = {}
        if rational_matrix is not None:
            mat = tuple(tuple(Fraction(x) for x in row) for row in rational_matrix)
            if len(mat) != self.d:
                raise ValueError("rational_matrix must have one row per frequency")
            s = len(mat[0])
            if any(len(row) != s for row in mat):
                raise ValueError("rational_matrix rows must have equal length")
            if basis_values is None or len(basis_values) != s:
                raise ValueError("basis_values must match the rational matrix width")
            vals = np.asarray(basis_values, dtype=float)
            recon = np.array([sum(float(f) * v for f, v in zip(row, vals)) for row in mat])
            if np.max(np.abs(recon - self.omega)) > 1e-12 * max(1.0, self._omega_norm):
                raise ValueError("exact form does not reproduce omega to 1e-12")
            self.rational_matrix = mat
            self.basis_values = tuple(float(v) for v in vals)
            self.symbols = tuple(symbols) if symbols is not None else tuple(
                f"s{i}" for i in range(s))
        else:
            self.rational_matrix = None
            self.basis_values = None
            self.symbols = None

    @property
    def exact(self) -> bool:
        return self.rational_matrix is not None

    # -- mode sums -------------------------------------------------------
    def _as_kvec(self, k: tuple) -> tuple:
        if k == ():
            return (0,) * self.d
        if len(k) != self.d:
            raise ValueError(f"mode index {k} has wrong dimension (d={self.d})")
        return k

    def mu(self, k: tuple) -> float:
        """Raw frequency of a mode sum, k . omega."""
        k = self._as_kvec(k)
        return float(np.dot(k, self.omega))

    def is_zero(self, k: tuple) -> bool:
        """Whether k . omega vanishes: exact test if available, else tolerance."""
        k = self._as_kvec(k)
        cached = self._zero_cache.get(k)
        if cached is not None:
            return cached
        if all(ki == 0 for ki in k):
            res = True
        elif self.exact:
            res = all(sum(ki * row[s] for ki, row in zip(k, self.rational_matrix)) == 0
                      for s in range(len(self.rational_matrix[0])))
        else:
            knorm = float(np.linalg.norm(k))
            res = abs(self.mu(k)) <= self.tol * knorm * self._omega_norm
        self._zero_cache[k] = res
        return res

    def mu_effective(self, k: tuple) -> float:
        """The frequency with structurally resonant sums snapped to 0."""
        return 0.0 if self.is_zero(k) else self.mu(k)

    # -- exact signatures --------------------------------------------------
    # A signature is a componentwise-addable exact surrogate for k . omega:
    # the rational coordinates over the basis symbols when the exact form is
    # present, the integer mode sum itself otherwise.
    def sig(self, k: tuple) -> tuple:
        k = self._as_kvec(k)
        if not self.exact:
            return k
        cached = self._sig_cache.get(k)
        if cached is None:
            cached = tuple(sum(ki * row[s] for ki, row in zip(k, self.rational_matrix))
                           for s in range(len(self.rational_matrix[0])))
            self._sig_cache[k] = cached
        return cached

    def sig_zero(self) -> tuple:
        if self.exact:
            return (Fraction(0),) * len(self.rational_matrix[0])
        return (0,) * self.d

    @staticmethod
    def sig_add(s1: tuple, s2: tuple) -> tuple:
        return tuple(a + b for a, b in zip(s1, s2))

    def sig_is_zero(self, s: tuple) -> bool:
        if self.exact:
            return all(x == 0 for x in s)
        return self.is_zero(s)

    def sig_mu(self, s: tuple) -> float:
        if self.exact:
            if all(x == 0 for x in s):
                return 0.0
            return float(sum(float(f) * v for f, v in zip(s, self.basis_values)))
        return self.mu_effective(s)

    def word_sig(self, w: Word) -> tuple:
        """Per-letter signature sequence; words sharing it share all flow data."""
        return tuple(self.sig(a) for a in w)

    # -- config I/O --------------------------------------------------------
    def to_config(self) -> dict:
        out: dict = {"omega": [float(x) for x in self.omega]}
        if self.exact:
            out["basis"] = {
                "symbols": list(self.symbols),
                "values": list(self.basis_values),
                "rational_matrix": [[str(f) for f in row] for row in self.rational_matrix],
            }
        return out

    @classmethod
    def from_config(cls, obj: dict) -> "FrequencySpec":
        basis = obj.get("basis")
        if basis is None:
            return cls(obj["omega"])
        return cls(obj["omega"], symbols=basis.get("symbols"),
                   basis_values=basis["values"],
                   rational_matrix=[[Fraction(x) for x in row]
                                    for row in basis["rational_matrix"]])

    def __repr__(self) -> str:
        tag = "exact" if self.exact else "numeric"
        return f"FrequencySpec({list(self.omega)}, {tag})"


def word_frequency(w: Word, freq: FrequencySpec) -> tuple[float, bool]:
    """(mu, is_zero) for a word's mode sum; the word is oscillatory iff not is_zero."""
    k = w.mode_sum()
    return freq.mu_effective(k), freq.is_zero(k)


@dataclass(frozen=True, eq=False)
class ExtCoeff:
    """Pair of an angle-shift vector and a coefficient map."""

    v: np.ndarray
    delta: CoeffMap

    def __post_init__(self):
        v = np.asarray(self.v, dtype=complex)
        if v.ndim != 1:
            raise ValueError("shift vector must be one-dimensional")
        object.__setattr__(self, "v", v)

    @property
    def d(self) -> int:
        return len(self.v)

    def isclose(self, other: "ExtCoeff", tol: float = 1e-12) -> bool:
        return (np.max(np.abs(self.v - other.v), initial=0.0) <= tol
                and self.delta.isclose(other.delta, tol))

    def __repr__(self) -> str:
        return f"ExtCoeff(v={list(self.v)}, {self.delta!r})"


def ext_unit(alphabet, max_len: int, d: int) -> ExtCoeff:
    return ExtCoeff(np.zeros(d), unit(alphabet, max_len))


def _phases(d: CoeffMap, v: np.ndarray):
    for w, c in d.entries.items():
        if len(w) == 0:
            yield w, c, 0j
        else:
            k = w.mode_sum()
            if len(k) != len(v):
                raise ValueError("letter dimension does not match the shift vector")
            yield w, c, 1j * complex(np.dot(k, v))


def apply_Xi(v: Sequence[complex], d: CoeffMap) -> CoeffMap:
    """Diagonal operator scaling each word by exp(i (sum of letters) . v)."""
    v = np.asarray(v, dtype=complex)
    out = {w: c * np.exp(p) for w, c, p in _phases(d, v)}
    return CoeffMap._raw(d.alphabet, d.max_len, out)


def apply_xi(v: Sequence[complex], d: CoeffMap) -> CoeffMap:
    """Diagonal operator scaling each word by i (sum of letters) . v; kills the empty word."""
    v = np.asarray(v, dtype=complex)
    out = {w: c * p for w, c, p in _phases(d, v) if len(w) > 0}
    return CoeffMap._raw(d.alphabet, d.max_len, out)


def big_star(e1: ExtCoeff, e2: ExtCoeff) -> ExtCoeff:
    """Composition product on extended coefficients.

    For e1 = (u, gamma), e2 = (v, delta) the result is
    (gamma_empty * v + delta_empty * u, gamma * Xi_u delta); with group-like
    left factors this is the composition law for the underlying maps.
    """
    u, gamma = e1.v, e1.delta
    v, delta = e2.v, e2.delta
    vec = gamma.empty_coeff * v + delta.empty_coeff * u
    return ExtCoeff(vec, convolve(gamma, apply_Xi(u, delta)))


def ext_inverse(e: ExtCoeff) -> ExtCoeff:
    """Group inverse: (v, kappa)^-1 = (-v, Xi_{-v} kappa^-1)."""
    if abs(e.delta.empty_coeff - 1.0) > 1e-12:
        raise ValueError("ext_inverse requires a group element (empty coefficient 1)")
    return ExtCoeff(-e.v, apply_Xi(-e.v, star_inverse(e.delta)))


def ext_bracket(e1: ExtCoeff, e2: ExtCoeff) -> ExtCoeff:
    """Lie bracket on the extended algebra.

    [(v, delta), (u, eta)] = (0, xi_v eta - xi_u delta + delta*eta - eta*delta);
    the vanishing vector part reflects that the shift directions commute.
    """
    if e1.delta.empty_coeff != 0 or e2.delta.empty_coeff != 0:
        raise ValueError("ext_bracket requires algebra elements (empty coefficient 0)")
    v, delta = e1.v, e1.delta
    u, eta = e2.v, e2.delta
    part = (apply_xi(v, eta) - apply_xi(u, delta)
            + convolve(delta, eta) - convolve(eta, delta))
    return ExtCoeff(np.zeros_like(e1.v), part)
