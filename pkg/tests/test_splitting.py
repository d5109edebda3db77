from fractions import Fraction
from math import factorial, pi

import numpy as np
import pytest

from wordseries.algebra import verify_membership
from wordseries.extended import FrequencySpec
from wordseries.flows import word_flow_poly
from wordseries.splitting import (
    LIE_TROTTER,
    STRANG,
    SplittingScheme,
    detect_numerical_resonances,
    local_error_coefficients,
    m_step_error_coefficients,
    quadrature_error,
    scaled_exact_value,
    sigma,
    splitting_coefficients,
    splitting_coefficients_by_composition,
)
from wordseries.words import Word, all_words

FREQ2 = FrequencySpec([1.0, np.sqrt(2.0)],
                      basis_values=(1.0, float(np.sqrt(2.0))),
                      rational_matrix=[[1, 0], [0, 1]])
ALPHA5 = ((1, 0), (-1, 0), (0, 1), (2, 0), (0, 0))


class TestScheme:
    def test_partial_sums(self):
        assert STRANG.c == (0.5, 1.0)
        assert STRANG.is_consistent and LIE_TROTTER.is_consistent

    def test_validation(self):
        with pytest.raises(ValueError):
            SplittingScheme((1.0,), (0.5, 0.5))


class TestSigma:
    def test_known_values(self):
        assert sigma((1, 1)) == Fraction(1, 2)
        assert sigma((1, 2)) == Fraction(1)
        assert sigma((1, 1, 2)) == Fraction(1, 2)
        assert sigma((3,)) == Fraction(1)
        assert sigma((1, 1, 1, 1)) == Fraction(1, 24)
        assert sigma((1, 1, 2, 2)) == Fraction(1, 4)

    def test_monotonicity_required(self):
        with pytest.raises(ValueError):
            sigma((2, 1))

    def test_consistency_sum(self):
        # sum over nondecreasing stage choices of prod(b) * sigma equals
        # (sum b)^n / n!, the volume consistency of the induced cubature
        from itertools import combinations_with_replacement
        b = (0.3, -0.2, 0.9)
        n = 3
        total = sum(float(sigma(js)) * np.prod([b[j] for j in js])
                    for js in combinations_with_replacement(range(3), n))
        assert abs(total - sum(b) ** n / factorial(n)) < 1e-14


class TestSplittingCoefficients:
    def test_strang_one_letter(self):
        h = 0.7
        ext = splitting_coefficients(STRANG, FREQ2, ALPHA5, 2, h)
        for k in ((1, 0), (0, 1), (2, 0)):
            mu = FREQ2.mu(k)
            want = np.exp(0.5j * mu * h) * h
            assert abs(ext.delta[Word((k,))] - want) < 1e-14
        assert np.allclose(ext.v, h * FREQ2.omega)

    def test_zero_frequency_words_give_taylor(self):
        h = 0.9
        ext = splitting_coefficients(STRANG, FREQ2, ALPHA5, 3, h)
        for n in (1, 2, 3):
            w = Word(((0, 0),) * n)
            assert abs(ext.delta[w] - h**n / factorial(n)) < 1e-14

    def test_lie_trotter_closed_form(self):
        h = 0.6
        ext = splitting_coefficients(LIE_TROTTER, FREQ2, ALPHA5, 3, h)
        for w in all_words(ALPHA5, 3):
            n = len(w)
            if n == 0:
                continue
            mu = sum(FREQ2.mu_effective(a) for a in w)
            want = np.exp(1j * mu * h) * h**n / factorial(n)
            assert abs(ext.delta[w] - want) < 1e-13

    def test_group_membership(self):
        ext = splitting_coefficients(STRANG, FREQ2, ALPHA5, 3, 0.8)
        assert verify_membership(ext.delta, "group", 1e-11).ok

    def test_matches_composition_named_schemes(self):
        for scheme in (STRANG, LIE_TROTTER):
            for h in (0.3, 1.1):
                ext = splitting_coefficients(scheme, FREQ2, ALPHA5, 3, h)
                comp = splitting_coefficients_by_composition(scheme, FREQ2, ALPHA5, 3, h)
                assert ext.isclose(comp, 1e-12)

    def test_matches_composition_random_schemes(self):
        rng = np.random.default_rng(50)
        for _ in range(8):
            r = int(rng.integers(1, 5))
            scheme = SplittingScheme(tuple(rng.uniform(-1, 1, r)),
                                     tuple(rng.uniform(-1, 1, r)))
            h = float(rng.uniform(0.2, 1.2))
            ext = splitting_coefficients(scheme, FREQ2, ALPHA5, 3, h)
            comp = splitting_coefficients_by_composition(scheme, FREQ2, ALPHA5, 3, h)
            assert ext.isclose(comp, 1e-12)

    def test_pure_rotation_and_pure_kick(self):
        h = 0.5
        rot_only = SplittingScheme((0.4, 0.6), (0.0, 0.0))
        ext = splitting_coefficients(rot_only, FREQ2, ALPHA5, 2, h)
        assert np.allclose(ext.v, h * FREQ2.omega)
        assert ext.delta.norm_inf() == 1.0 and len(ext.delta.entries) == 1
        kick_only = SplittingScheme((0.0, 0.0), (0.25, 0.75))
        ext2 = splitting_coefficients(kick_only, FREQ2, ALPHA5, 2, h)
        assert np.allclose(ext2.v, 0.0)
        for n in (1, 2):
            w = Word(((1, 0),) * n)
            assert abs(ext2.delta[w] - h**n / factorial(n)) < 1e-14


class TestQuadratureError:
    def test_strang_closed_form(self):
        h = 0.9
        for k in ((1, 0), (0, 1), (2, 0)):
            mu = FREQ2.mu(k)
            got = quadrature_error(STRANG, FREQ2, Word((k,)), h)
            want = np.exp(0.5j * mu * h) - (np.exp(1j * mu * h) - 1.0) / (1j * mu * h)
            assert abs(got - want) < 1e-13

    def test_sharp_quadratic_bound(self):
        # |error| <= mu^2 h^2 / 24 for every mu h, attained as mu h -> 0
        thetas = np.linspace(1e-3, 20.0, 4000)
        k = (1, 0)
        errs = np.array([abs(quadrature_error(STRANG, FREQ2, Word((k,)), t)) for t in thetas])
        bound = thetas**2 / 24.0
        assert np.all(errs <= bound * (1 + 1e-9))
        assert np.max(errs / bound) > 0.995

    def test_nonoscillatory_letter_error_vanishes(self):
        got = quadrature_error(STRANG, FREQ2, Word(((0, 0),)), 0.8)
        assert abs(got) < 1e-15


class TestLocalError:
    def test_consistent_scheme_structure(self):
        h = 0.7
        err = local_error_coefficients(STRANG, FREQ2, ALPHA5, 3, h)
        assert np.allclose(err.v, 0.0)
        assert abs(err.delta[Word(((0, 0),))]) < 1e-15

    def test_order_blocks_scale(self):
        # for a consistent scheme the length-n block of the unscaled error
        # decays one order faster than h^n
        hs = np.array([0.04, 0.02, 0.01])
        for n in (1, 2):
            norms = []
            for h in hs:
                err = local_error_coefficients(STRANG, FREQ2, ALPHA5, 3, float(h))
                norms.append(err.delta.length_part(n).norm_inf())
            rate = np.polyfit(np.log(hs), np.log(norms), 1)[0]
            assert rate > n + 0.75, (n, rate)

    def test_second_order_rule_one_letter_errors(self):
        # Strang's midpoint rule satisfies sum b_j c_j = 1/2, so one-letter
        # errors are O(h^2)
        hs = np.array([0.04, 0.02, 0.01])
        errs = [abs(quadrature_error(STRANG, FREQ2, Word(((1, 0),)), float(h))) for h in hs]
        rate = np.polyfit(np.log(hs), np.log(errs), 1)[0]
        assert abs(rate - 2.0) < 0.1


class TestMStepError:
    def test_m1_reduces_to_local_error(self):
        h = 0.55
        ms = m_step_error_coefficients(STRANG, FREQ2, ALPHA5, h, 1)
        loc = local_error_coefficients(STRANG, FREQ2, ALPHA5, 1, h)
        for k in ALPHA5:
            w = Word((k,))
            assert abs(ms.delta[w] - loc.delta[w]) < 1e-13

    def test_resonant_letter_grows_linearly(self):
        # h at a first-order resonance of the (1, 0) letter: mu h = 2 pi
        h = 2 * pi
        ms = m_step_error_coefficients(STRANG, FREQ2, ALPHA5, h, 25)
        w = Word(((1, 0),))
        tilde = np.exp(0.5j * 1.0 * h)
        assert abs(ms.delta[w] - 25 * h * tilde) < 1e-9

    def test_nonresonant_matches_composition(self):
        # agreement with the composed powers is asserted inside the call
        ms = m_step_error_coefficients(STRANG, FREQ2, ALPHA5, 0.37, 40)
        assert np.allclose(ms.v, 0.0)

    def test_inconsistent_scheme_rejected(self):
        bad = SplittingScheme((0.5,), (1.0,))
        with pytest.raises(ValueError):
            m_step_error_coefficients(bad, FREQ2, ALPHA5, 0.3, 2)


class TestResonanceDetection:
    def test_zero_frequency_never_resonant(self):
        rep = detect_numerical_resonances(FREQ2, ((1, 0), (-1, 0)), 2, h_range=(0.01, 100.0))
        # the (1,0)+(-1,0) combination has mu = 0 and must not appear
        assert all(src["mu"] > 0 for e in rep["resonances"] for src in e["sources"])

    def test_forced_oscillator_first_order(self):
        freq = FrequencySpec([1.0])
        rep = detect_numerical_resonances(freq, ((1,), (-1,)), 1, h=2 * pi)
        assert rep["resonant"] and rep["matches"][0]["order"] == 1

    def test_fpu_like_spacing(self):
        freq = FrequencySpec([70.0])
        rep = detect_numerical_resonances(freq, ((1,), (-1,)), 1, h_range=(0.05, 1.0))
        hs = [e["h"] for e in rep["resonances"]]
        want = [2 * pi * j / 70.0 for j in range(1, 12)]
        assert np.allclose(hs, want)

    def test_orders_recorded(self):
        freq = FrequencySpec([1.0])
        rep = detect_numerical_resonances(freq, ((1,),), 2, h_range=(1.0, 10.0))
        # mu = 1 (order 1) and mu = 2 (order 2) both contribute
        orders = {src["order"] for e in rep["resonances"] for src in e["sources"]}
        assert orders == {1, 2}
        # h = 2 pi is hit by both mu = 1 (j = 1) and mu = 2 (j = 2): deduped
        at_2pi = [e for e in rep["resonances"] if abs(e["h"] - 2 * pi) < 1e-12]
        assert len(at_2pi) == 1 and len(at_2pi[0]["sources"]) == 2
        assert at_2pi[0]["order"] == 1
