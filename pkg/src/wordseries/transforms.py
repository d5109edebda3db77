"""Normal forms, changes of variables, modified equations, and processing.

All transformations act on truncated coefficient maps: the normal form
removes oscillatory words order by order with star-exponential stage maps;
the modified equation materializes, at a given step size, the coefficients
whose exact flow reproduces a splitting step; processing conjugates a step
so that its local error loses all oscillatory-word contributions.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import pi
from typing import Iterable

import numpy as np

from .algebra import CoeffMap, convolve, exp_star, star_inverse, unit
from .extended import ExtCoeff, FrequencySpec, apply_Xi, apply_xi, big_star, ext_inverse
from .flows import SigPoly, flow_exppolys, word_flow_poly
from .splitting import (
    SplittingScheme,
    _word_tilde_value,
    scaled_exact_value,
    splitting_coefficients,
)
from .words import EMPTY_WORD, Word, all_words, deconcatenations


class ResonanceObstruction(Exception):
    """A step size hits mu h in 2 pi Z on a word that must be solvable."""

    def __init__(self, word: Word, mu: float, h: float, j: int):
        self.word = word
        self.mu = mu
        self.h = h
        self.j = j
        super().__init__(
            f"numerical resonance at h={h!r}: word {word!r} has mu*h = 2*pi*{j}")


def _resonance_j(mu: float, h: float, rtol: float = 1e-9) -> int | None:
    z = mu * h / (2 * pi)
    j = round(z)
    if j != 0 and abs(z - j) <= rtol * max(1.0, abs(z)):
        return int(j)
    return None


@dataclass
class NormalFormResult:
    """Composite change of variables and the normalized coefficients.

    ``kappa`` conjugates the input to ``beta_hat``, which vanishes on every
    oscillatory word; ``stage_generators[n]`` is the order-n generator.
    """

    kappa: CoeffMap
    beta_hat: CoeffMap
    stage_generators: dict[int, CoeffMap]
    residual: float


def conjugation_residual(kappa: CoeffMap, beta_hat: CoeffMap, beta: CoeffMap,
                         freq: FrequencySpec) -> float:
    """Max-norm defect of xi_omega kappa + beta_hat * kappa - kappa * beta."""
    lhs = apply_xi(freq.omega, kappa) + convolve(beta_hat, kappa) - convolve(kappa, beta)
    return lhs.norm_inf()


def normal_form(beta: CoeffMap, freq: FrequencySpec, max_order: int | None = None) -> NormalFormResult:
    """Remove all oscillatory words from an algebra element by conjugation.

    Works order by order: at order n the generator takes the value
    beta_w / (i mu(w)) on oscillatory n-letter words, the stage map is its
    star exponential, and the coefficients are conjugated before moving on.
    Nonoscillatory coefficients at their own order are left untouched.
    """
    if beta.empty_coeff != 0:
        raise ValueError("normal_form needs an algebra element (empty coefficient 0)")
    N = beta.max_len if max_order is None else max_order
    current = beta
    kappa_total = unit(beta.alphabet, beta.max_len)
    stages: dict[int, CoeffMap] = {}
    for n in range(1, N + 1):
        lam_entries: dict[Word, complex] = {}
        for w, c in current.groups_by_length().get(n, []):
            k = w.mode_sum()
            if not freq.is_zero(k):
                lam_entries[w] = c / (1j * freq.mu(k))
        lam = CoeffMap._raw(beta.alphabet, beta.max_len, lam_entries)
        stages[n] = lam
        if not lam.entries:
            continue
        kap = exp_star(lam)
        kap_inv = star_inverse(kap)
        current = (convolve(convolve(kap, current), kap_inv)
                   - convolve(apply_xi(freq.omega, kap), kap_inv))
        # the stage zeroes its own order up to roundoff; enforce it exactly
        cleaned = dict(current.entries)
        for w in lam_entries:
            cleaned.pop(w, None)
        current = CoeffMap._raw(beta.alphabet, beta.max_len, cleaned)
        # successive substitutions compose on the left
        kappa_total = convolve(kap, kappa_total)
    # any oscillatory word of order <= N now carries only roundoff
    cleaned = {w: c for w, c in current.entries.items()
               if freq.is_zero(w.mode_sum())}
    beta_hat = CoeffMap._raw(beta.alphabet, beta.max_len, cleaned)
    res = conjugation_residual(kappa_total, beta_hat, beta, freq)
    return NormalFormResult(kappa_total, beta_hat, stages, res)


def change_of_variables(beta: CoeffMap, e: ExtCoeff, freq: FrequencySpec) -> CoeffMap:
    """Coefficients of an autonomous element after the substitution given by e.

    Solves B * kappa + xi_omega kappa = kappa * (Xi_v beta) for B, triangular
    in the word length.  With e = (0, kappa) this reduces to the conjugation
    identity the normal form is built on.
    """
    v, kappa = e.v, e.delta
    if abs(kappa.empty_coeff - 1.0) > 1e-12:
        raise ValueError("change_of_variables needs a group element")
    rhs = convolve(kappa, apply_Xi(v, beta)) - apply_xi(freq.omega, kappa)
    out: dict[Word, complex] = {}
    for w in all_words(beta.alphabet, beta.max_len):
        if len(w) == 0:
            continue  # the solution vanishes on the empty word
        val = rhs[w]
        for u, z in deconcatenations(w):
            if 0 < len(u) < len(w):
                val -= out.get(u, 0j) * kappa[z]
        out[w] = val
    return CoeffMap._raw(beta.alphabet, beta.max_len, out)


def commuting_decomposition(nf: NormalFormResult, beta: CoeffMap,
                            freq: FrequencySpec) -> tuple[ExtCoeff, CoeffMap]:
    """Split (omega, beta) into a rotation-like piece and an averaged piece.

    Returns ((omega, kappa^-1 * xi_omega kappa), kappa^-1 * beta_hat * kappa);
    the pieces sum back to (omega, beta) and commute in the extended algebra.
    """
    kab = nf.kappa
    kinv = star_inverse(kab)
    rot_part = convolve(kinv, apply_xi(freq.omega, kab))
    avg_part = convolve(convolve(kinv, nf.beta_hat), kab)
    return ExtCoeff(freq.omega.astype(complex), rot_part), avg_part


def flow_factorization(nf: NormalFormResult, freq: FrequencySpec, t: float) -> ExtCoeff:
    """Exact flow coefficients assembled from the normal form.

    Computes (0, kappa)^-1 * (t omega, exp(t beta_hat)) * (0, kappa), i.e.
    (t omega, kappa^-1 * exp(t beta_hat) * Xi_{t omega} kappa); it must agree
    with the directly integrated flow of the original element.
    """
    d = freq.d
    kap = ExtCoeff(np.zeros(d), nf.kappa)
    middle = ExtCoeff(t * freq.omega.astype(complex), exp_star(t * nf.beta_hat))
    return big_star(big_star(ext_inverse(kap), middle), kap)


@dataclass
class ModifiedEquation:
    """Step-size-dependent coefficients whose exact flow matches one step."""

    beta_tilde: CoeffMap
    n_max: int
    h: float
    diagnostics: dict = field(default_factory=dict)


def modified_equation(scheme: SplittingScheme, freq: FrequencySpec,
                      alphabet: Iterable[tuple], max_len: int, h: float,
                      resonance_rtol: float = 1e-9) -> ModifiedEquation:
    """Solve for the modified coefficients of a splitting step.

    Triangular in the word length: the flow coefficient of the candidate
    system on a word w equals a known functional of shorter-word values plus
    beta~_w times (e^{i mu h} - 1)/(i mu) (time h when mu = 0).  Setting it
    equal to the step's coefficient determines beta~_w unless mu h is a
    nonzero multiple of 2 pi, which raises ResonanceObstruction naming the
    word.  Words sharing a per-letter frequency signature share their value.
    """
    alphabet = tuple(alphabet)
    tilde = splitting_coefficients(scheme, freq, alphabet, max_len, h)
    words = all_words(alphabet, max_len)
    beta_entries: dict[Word, complex] = {}
    value_memo: dict[tuple, complex] = {}
    table: dict[Word, SigPoly] = {EMPTY_WORD: SigPoly.one(freq)}
    poly_memo: dict[tuple, SigPoly] = {}
    min_denom = float("inf")
    for w in words:
        n = len(w)
        if n == 0:
            continue
        sig = freq.word_sig(w)
        ksum = w.mode_sum()
        ksig = freq.sig(ksum)
        if sig in value_memo:
            beta_entries[w] = value_memo[sig]
            table[w] = poly_memo[sig]
            continue
        # flow coefficient with the order-n unknown left out
        integrand: SigPoly | None = None
        for i in range(1, n):
            suffix = w[i:]
            bv = beta_entries.get(suffix, 0j)
            if bv == 0:
                continue
            piece = table[w[:i]].shifted(freq.sig(suffix.mode_sum()), bv)
            integrand = piece if integrand is None else integrand.plus(piece)
        base = (integrand.antiderivative() if integrand is not None
                else SigPoly(freq, {}))
        known = base.evaluate(h)
        mu = freq.sig_mu(ksig)
        if freq.sig_is_zero(ksig):
            denom = h
        else:
            j = _resonance_j(mu, h, resonance_rtol)
            if j is not None:
                raise ResonanceObstruction(w, mu, h, j)
            denom = (np.exp(1j * mu * h) - 1.0) / (1j * mu)
        min_denom = min(min_denom, abs(denom))
        val = (tilde.delta[w] - known) / denom
        beta_entries[w] = val
        value_memo[sig] = val
        # fold the solved value back into the word's flow polynomial
        unknown_piece = SigPoly.one(freq).shifted(ksig, val).antiderivative()
        table[w] = base.plus(unknown_piece)
        poly_memo[sig] = table[w]
    beta_tilde = CoeffMap._raw(frozenset(alphabet), max_len, beta_entries)
    diag = {"min_denominator": min_denom, "words_solved": len(beta_entries),
            "distinct_signatures": len(value_memo)}
    return ModifiedEquation(beta_tilde, max_len, h, diag)


@dataclass
class ProcessorResult:
    """Processing map and the conjugated step coefficients."""

    kappa: CoeffMap
    processed: ExtCoeff
    mode: str
    error_table: dict[Word, complex] = field(default_factory=dict)


def first_order_processor_map(scheme: SplittingScheme, freq: FrequencySpec,
                              alphabet: Iterable[tuple], max_len: int, h: float,
                              resonance_rtol: float = 1e-9) -> CoeffMap:
    """One-letter processing map: (A~_k - A_k)/(e^{i mu h} - 1) on oscillatory letters.

    Nonoscillatory letters are free parameters and are set to zero.
    """
    alphabet = tuple(alphabet)
    entries: dict[Word, complex] = {}
    for k in alphabet:
        if freq.is_zero(k):
            continue
        w = Word((k,))
        mu = freq.mu(k)
        j = _resonance_j(mu, h, resonance_rtol)
        if j is not None:
            raise ResonanceObstruction(w, mu, h, j)
        K = ((_word_tilde_value(scheme, (mu,), h) - scaled_exact_value(freq, w, h))
             / (np.exp(1j * mu * h) - 1.0))
        entries[w] = h * K
    entries[EMPTY_WORD] = 1.0
    return CoeffMap._raw(frozenset(alphabet), max_len, entries)


def conjugate_step(kappa: CoeffMap, step: ExtCoeff) -> ExtCoeff:
    """Coefficients of kappa^-1 o step o kappa in the extended group."""
    d = len(step.v)
    k_ext = ExtCoeff(np.zeros(d), kappa)
    return big_star(big_star(k_ext, step), ext_inverse(k_ext))


def processor(scheme: SplittingScheme, freq: FrequencySpec,
              alphabet: Iterable[tuple], max_len: int, h: float,
              mode: str = "full", resonance_rtol: float = 1e-9) -> ProcessorResult:
    """Build a processing map for one splitting step.

    ``first_order`` uses the one-letter map only.  ``full`` determines, order
    by order from the conjugation identity, the oscillatory-word entries of
    kappa that force the processed coefficients to equal the exact flow on
    every oscillatory word up to ``max_len`` letters; nonoscillatory entries
    are free and are gauged to zero.  The returned error table holds
    the processed coefficients minus the exact flow coefficients.
    """
    alphabet = tuple(alphabet)
    step = splitting_coefficients(scheme, freq, alphabet, max_len, h)
    exact_table = flow_exppolys(freq, alphabet, max_len)
    exact = {w: poly.evaluate(h) for w, poly in exact_table.items()}
    if mode == "first_order":
        kappa = first_order_processor_map(scheme, freq, alphabet, max_len, h,
                                          resonance_rtol)
        processed = conjugate_step(kappa, step)
    elif mode == "full":
        tilde = step.delta
        kappa_entries: dict[Word, complex] = {EMPTY_WORD: 1.0 + 0j}
        hat_entries: dict[Word, complex] = {EMPTY_WORD: 1.0 + 0j}
        for w in all_words(alphabet, max_len):
            n = len(w)
            if n == 0:
                continue
            mu = freq.mu_effective(w.mode_sum())
            phase = np.exp(1j * mu * h)
            # middle sums of the conjugation identity, all shorter words
            lmid = 0j
            rmid = 0j
            for u, z in deconcatenations(w):
                if len(u) == 0 or len(z) == 0:
                    continue
                muz = freq.mu_effective(z.mode_sum())
                lmid += hat_entries.get(u, 0j) * np.exp(1j * muz * h) * kappa_entries.get(z, 0j)
                rmid += kappa_entries.get(u, 0j) * tilde[z]
            if mu == 0.0:
                kappa_entries[w] = 0j
                hat_entries[w] = tilde[w] + rmid - lmid
            else:
                j = _resonance_j(mu, h, resonance_rtol)
                if j is not None:
                    raise ResonanceObstruction(w, mu, h, j)
                kappa_entries[w] = (exact[w] - tilde[w] - rmid + lmid) / (1.0 - phase)
                hat_entries[w] = exact[w]
        kappa = CoeffMap._raw(frozenset(alphabet), max_len, kappa_entries)
        processed = ExtCoeff(step.v, CoeffMap._raw(frozenset(alphabet), max_len,
                                                   hat_entries))
    else:
        raise ValueError("mode must be 'first_order' or 'full'")
    table = {w: processed.delta[w] - exact[w]
             for w in all_words(alphabet, max_len) if len(w) > 0}
    return ProcessorResult(kappa, processed, mode, table)
