from math import pi

import numpy as np
import pytest

from wordseries.algebra import (
    CoeffMap,
    convolve,
    exp_star,
    perturbation_element,
    star_inverse,
    unit,
    verify_membership,
)
from wordseries.extended import ExtCoeff, FrequencySpec, apply_xi, ext_bracket
from wordseries.flows import flow_exppolys
from wordseries.splitting import STRANG, LIE_TROTTER, splitting_coefficients
from wordseries.transforms import (
    ModifiedEquation,
    ResonanceObstruction,
    change_of_variables,
    commuting_decomposition,
    conjugate_step,
    conjugation_residual,
    first_order_processor_map,
    flow_factorization,
    modified_equation,
    normal_form,
    processor,
)
from wordseries.words import EMPTY_WORD, Word, all_words

from support import random_algebra_element

FREQ2 = FrequencySpec([1.0, np.sqrt(2.0)],
                      basis_values=(1.0, float(np.sqrt(2.0))),
                      rational_matrix=[[1, 0], [0, 1]])
# includes a resonant pair (1,0) + (-1,0) and a nonoscillatory letter
ALPHA = ((1, 0), (-1, 0), (0, 1), (0, 0))
N = 3


def random_beta(rng, alphabet=ALPHA, max_len=N):
    return random_algebra_element(alphabet, max_len, rng)


class TestNormalForm:
    def test_single_letter_generator(self):
        beta = perturbation_element(ALPHA, N)
        nf = normal_form(beta, FREQ2)
        k = (0, 1)
        mu = FREQ2.mu(k)
        assert abs(nf.stage_generators[1][Word((k,))] - 1.0 / (1j * mu)) < 1e-14
        assert nf.beta_hat[Word((k,))] == 0

    def test_oscillatory_words_removed(self):
        rng = np.random.default_rng(60)
        nf = normal_form(random_beta(rng), FREQ2)
        for w in all_words(ALPHA, N):
            if len(w) > 0 and not FREQ2.is_zero(w.mode_sum()):
                assert nf.beta_hat[w] == 0

    def test_nonoscillatory_kept_at_own_order(self):
        rng = np.random.default_rng(61)
        beta = random_beta(rng)
        nf = normal_form(beta, FREQ2)
        # length-1 nonoscillatory coefficients are untouched by every stage
        w = Word(((0, 0),))
        assert abs(nf.beta_hat[w] - beta[w]) < 1e-14

    def test_xi_omega_annihilates_result(self):
        rng = np.random.default_rng(62)
        nf = normal_form(random_beta(rng), FREQ2)
        assert apply_xi(FREQ2.omega, nf.beta_hat).norm_inf() < 1e-12

    def test_conjugation_residual(self):
        rng = np.random.default_rng(63)
        beta = random_beta(rng)
        nf = normal_form(beta, FREQ2)
        assert nf.residual < 1e-12
        assert conjugation_residual(nf.kappa, nf.beta_hat, beta, FREQ2) < 1e-12

    def test_memberships(self):
        rng = np.random.default_rng(64)
        nf = normal_form(random_beta(rng), FREQ2)
        assert verify_membership(nf.kappa, "group", 1e-10).ok
        assert verify_membership(nf.beta_hat, "algebra", 1e-10).ok
        for lam in nf.stage_generators.values():
            assert verify_membership(lam, "algebra", 1e-10).ok

    def test_nonresonant_frequencies_average_everything(self):
        # without the resonant pair, only zero-mode-sum words survive
        alphabet = ((1, 0), (0, 1), (-1, 0))
        rng = np.random.default_rng(65)
        beta = random_algebra_element(alphabet, N, rng)
        nf = normal_form(beta, FREQ2)
        for w, c in nf.beta_hat.entries.items():
            assert sum(np.array(a) for a in w).tolist() == [0, 0]

    def test_requires_algebra_element(self):
        with pytest.raises(ValueError):
            normal_form(unit(ALPHA, N), FREQ2)


class TestChangeOfVariables:
    def test_identity_map(self):
        rng = np.random.default_rng(66)
        beta = random_beta(rng)
        e = ExtCoeff(np.zeros(2), unit(ALPHA, N))
        assert change_of_variables(beta, e, FREQ2).isclose(beta, 1e-14)

    def test_reproduces_normal_form(self):
        rng = np.random.default_rng(67)
        beta = random_beta(rng)
        nf = normal_form(beta, FREQ2)
        e = ExtCoeff(np.zeros(2), nf.kappa)
        B = change_of_variables(beta, e, FREQ2)
        assert B.isclose(nf.beta_hat, 1e-12)

    def test_defining_identity_random(self):
        from wordseries.extended import apply_Xi
        rng = np.random.default_rng(68)
        beta = random_beta(rng)
        kappa = exp_star(random_beta(rng) * 0.4)
        v = rng.normal(size=2)
        e = ExtCoeff(v, kappa)
        B = change_of_variables(beta, e, FREQ2)
        resid = (convolve(B, kappa) + apply_xi(FREQ2.omega, kappa)
                 - convolve(kappa, apply_Xi(v, beta)))
        assert resid.norm_inf() < 1e-12


class TestCommutingDecomposition:
    def test_already_normal(self):
        beta = CoeffMap(ALPHA, N, {Word(((0, 0),)): 1.0,
                                   Word(((1, 0), (-1, 0))): 0.5})
        nf = normal_form(beta, FREQ2)
        assert nf.kappa.isclose(unit(ALPHA, N), 1e-14)
        rot, avg = commuting_decomposition(nf, beta, FREQ2)
        assert rot.delta.norm_inf() < 1e-14
        assert avg.isclose(beta, 1e-14)

    def test_sum_identity(self):
        rng = np.random.default_rng(69)
        beta = random_beta(rng)
        nf = normal_form(beta, FREQ2)
        rot, avg = commuting_decomposition(nf, beta, FREQ2)
        assert (rot.delta + avg - beta).norm_inf() < 1e-12

    def test_pieces_commute(self):
        rng = np.random.default_rng(70)
        beta = random_beta(rng)
        nf = normal_form(beta, FREQ2)
        rot, avg = commuting_decomposition(nf, beta, FREQ2)
        br = ext_bracket(rot, ExtCoeff(np.zeros(2), avg))
        assert br.delta.norm_inf() < 1e-12


class TestFlowFactorization:
    def test_time_zero(self):
        rng = np.random.default_rng(71)
        nf = normal_form(random_beta(rng), FREQ2)
        f0 = flow_factorization(nf, FREQ2, 0.0)
        assert np.allclose(f0.v, 0.0)
        assert f0.delta.isclose(unit(ALPHA, N), 1e-12)

    def test_already_normal_is_exponential(self):
        beta = CoeffMap(ALPHA, N, {Word(((0, 0),)): 1.0,
                                   Word(((1, 0), (-1, 0))): 0.5})
        nf = normal_form(beta, FREQ2)
        t = 0.8
        flow = flow_factorization(nf, FREQ2, t)
        assert flow.delta.isclose(exp_star(t * beta), 1e-13)

    def test_matches_direct_flow(self):
        rng = np.random.default_rng(72)
        beta = random_beta(rng)
        nf = normal_form(beta, FREQ2)
        for t in (0.1, 1.0):
            fact = flow_factorization(nf, FREQ2, t)
            table = flow_exppolys(FREQ2, ALPHA, N, beta=beta)
            for w, poly in table.items():
                assert abs(fact.delta[w] - poly.evaluate(t)) < 1e-10, (w, t)


class TestModifiedEquation:
    def test_nonoscillatory_letters_are_one(self):
        me = modified_equation(STRANG, FREQ2, ALPHA, 2, 0.75)
        assert abs(me.beta_tilde[Word(((0, 0),))] - 1.0) < 1e-14

    def test_strang_oscillatory_letter_value(self):
        h = 0.75
        me = modified_equation(STRANG, FREQ2, ALPHA, 2, h)
        for k in ((1, 0), (-1, 0), (0, 1)):
            mu = FREQ2.mu(k)
            want = mu * h / (2 * np.sin(mu * h / 2))
            assert abs(me.beta_tilde[Word((k,))] - want) < 1e-13

    def test_flow_roundtrip(self):
        h = 0.6
        me = modified_equation(STRANG, FREQ2, ALPHA, 3, h)
        tilde = splitting_coefficients(STRANG, FREQ2, ALPHA, 3, h)
        table = flow_exppolys(FREQ2, ALPHA, 3, beta=me.beta_tilde)
        for w, poly in table.items():
            assert abs(poly.evaluate(h) - tilde.delta[w]) < 1e-12, w

    def test_resonance_raises_with_diagnosis(self):
        h = 2 * pi  # mu = 1 for letter (1, 0)
        with pytest.raises(ResonanceObstruction) as exc:
            modified_equation(STRANG, FREQ2, ALPHA, 2, h)
        assert exc.value.j != 0
        assert isinstance(exc.value.word, Word)

    def test_signature_memo_consistency(self):
        # with an exact form, letters of equal frequency share one signature
        # and therefore one solved coefficient
        freq = FrequencySpec([1.0, 1.0], basis_values=(1.0,),
                             rational_matrix=[[1], [1]])
        alphabet = ((1, 0), (0, 1), (-1, 0))
        me = modified_equation(STRANG, freq, alphabet, 2, 0.4)
        assert me.beta_tilde[Word(((1, 0),))] == me.beta_tilde[Word(((0, 1),))]
        assert me.diagnostics["distinct_signatures"] < me.diagnostics["words_solved"]


class TestProcessor:
    def test_first_order_formula(self):
        from wordseries.splitting import quadrature_error
        h = 0.8
        kappa = first_order_processor_map(STRANG, FREQ2, ALPHA, 2, h)
        for k in ((1, 0), (0, 1)):
            mu = FREQ2.mu(k)
            want = h * quadrature_error(STRANG, FREQ2, Word((k,)), h) \
                / (np.exp(1j * mu * h) - 1.0)
            assert abs(kappa[Word((k,))] - want) < 1e-13
        assert kappa[Word(((0, 0),))] == 0

    def test_first_order_matches_modified_system_route(self):
        # solving beta * kappa + xi kappa = kappa (*) beta~ on letters gives
        # kappa_k = (beta~_k - 1)/(i mu), the same map
        h = 0.8
        me = modified_equation(STRANG, FREQ2, ALPHA, 1, h)
        kappa = first_order_processor_map(STRANG, FREQ2, ALPHA, 1, h)
        for k in ((1, 0), (-1, 0), (0, 1)):
            mu = FREQ2.mu(k)
            via_me = h * (me.beta_tilde[Word((k,))] - 1.0) / (1j * mu * h)
            assert abs(kappa[Word((k,))] - via_me) < 1e-13

    def test_first_order_kills_oscillatory_letters(self):
        res = processor(STRANG, FREQ2, ALPHA, 2, 0.8, mode="first_order")
        for k in ((1, 0), (-1, 0), (0, 1)):
            assert abs(res.error_table[Word((k,))]) < 1e-13

    def test_full_kills_all_oscillatory_words(self):
        res = processor(STRANG, FREQ2, ALPHA, 3, 0.8, mode="full")
        for w, err in res.error_table.items():
            if not FREQ2.is_zero(w.mode_sum()):
                assert abs(err) < 1e-12, w

    def test_full_is_a_consistent_conjugation(self):
        h = 0.8
        res = processor(STRANG, FREQ2, ALPHA, 3, h, mode="full")
        step = splitting_coefficients(STRANG, FREQ2, ALPHA, 3, h)
        direct = conjugate_step(res.kappa, step)
        assert direct.isclose(res.processed, 1e-11)

    def test_resonance_raises(self):
        with pytest.raises(ResonanceObstruction):
            processor(STRANG, FREQ2, ALPHA, 2, 2 * pi, mode="full")

    def test_first_order_reduces_from_full_on_letters(self):
        h = 0.8
        full = processor(STRANG, FREQ2, ALPHA, 2, h, mode="full")
        first = first_order_processor_map(STRANG, FREQ2, ALPHA, 2, h)
        for k in ((1, 0), (-1, 0), (0, 1)):
            w = Word((k,))
            assert abs(full.kappa[w] - first[w]) < 1e-13
