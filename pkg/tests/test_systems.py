from math import pi

import numpy as np
import pytest

from wordseries.extended import FrequencySpec
from wordseries.flows import flow_coefficients
from wordseries.modes import word_series_evaluate
from wordseries.poly import Chart, PolyObservable
from wordseries.splitting import LIE_TROTTER, STRANG
from wordseries.systems import (
    IntegrationBlowUp,
    MechanicalSystem,
    action_angle_transform,
    build_scan_grid,
    energy_error_scan,
    forced_oscillator,
    fpu5,
    integrate_splitting,
    normalize_linear_part,
    observable_drift,
    reference_trajectory,
    splitting_step_factory,
    unit_mode_letters,
)


def strang_step_by_hand(omega, F, h, state):
    """Rotate half, kick, rotate half, composed explicitly."""
    def rot(s, t):
        p, q = s
        return np.array([p * np.cos(omega * t) - omega * q * np.sin(omega * t),
                         q * np.cos(omega * t) + (p / omega) * np.sin(omega * t)])
    s = rot(state, h / 2)
    s = s + np.array([h * F, 0.0])
    return rot(s, h / 2)


class TestIntegrateSplitting:
    def test_strang_one_step_matches_hand_composition(self):
        omega, F, h = 2.3, 0.9, 0.41
        sys = forced_oscillator(omega=omega, force=F)
        traj = integrate_splitting(sys, STRANG, h, 1)
        want = strang_step_by_hand(omega, F, h, sys.state0)
        assert np.max(np.abs(traj.final_state - want)) < 1e-14

    def test_resonant_counterexample_single_step(self):
        omega, F = 1.0, 0.7
        h = 2 * pi / omega
        sys = forced_oscillator(omega=omega, force=F)
        traj = integrate_splitting(sys, STRANG, h, 1)
        # the true solution returns to p = 1; the step loses h F
        assert abs(traj.final_state[0] - (1.0 - h * F)) < 1e-12

    def test_fpu_strang_global_order_two(self):
        sys = fpu5()
        ref = reference_trajectory(sys, 1.0, tol=1e-11, order=6)
        errs = []
        hs = [4e-3, 2e-3, 1e-3]
        for h in hs:
            traj = integrate_splitting(sys, STRANG, h, int(round(1.0 / h)))
            errs.append(np.max(np.abs(traj.final_state - ref.final_state)))
        rate = np.polyfit(np.log(hs), np.log(errs), 1)[0]
        assert abs(rate - 2.0) < 0.25

    def test_harmonic_flow_conserves_actions_kick_conserves_q(self):
        sys = fpu5()
        rot_only = type(STRANG)((1.0,), (0.0,))
        step = splitting_step_factory(sys, rot_only, 0.37)
        s1 = step(sys.state0)
        a0 = action_angle_transform(sys.state0, sys.freq, "to_action_angle")[:5]
        a1 = action_angle_transform(s1, sys.freq, "to_action_angle")[:5]
        assert np.max(np.abs(a1 - a0)) < 1e-14
        kick_only = type(STRANG)((0.0,), (1.0,))
        s2 = splitting_step_factory(sys, kick_only, 0.37)(sys.state0)
        assert np.max(np.abs(s2[5:] - sys.state0[5:])) == 0.0

    def test_step_is_symplectic(self):
        sys = fpu5()
        step = splitting_step_factory(sys, STRANG, 0.02)
        x0 = sys.state0
        eps = 1e-6
        J = np.zeros((10, 10))
        for j in range(10):
            dx = np.zeros(10)
            dx[j] = eps
            J[:, j] = (step(x0 + dx) - step(x0 - dx)) / (2 * eps)
        assert abs(np.linalg.det(J) - 1.0) < 1e-8

    @pytest.mark.filterwarnings("ignore::RuntimeWarning")
    def test_blowup_detected(self):
        chart = Chart("pq", (1.0,))
        runaway = MechanicalSystem(FrequencySpec([1.0]),
                                   PolyObservable(chart, {(0, 4): -1.0}),
                                   np.array([2.0]), np.array([2.0]))
        with pytest.raises(IntegrationBlowUp):
            integrate_splitting(runaway, STRANG, 0.9, 500, record_every=10)


class TestReferenceTrajectory:
    def test_forced_oscillator_against_exact(self):
        omega, F, T = 2.5, 1.0, 7.3
        sys = forced_oscillator(omega=omega, force=F)
        ref = reference_trajectory(sys, T, tol=1e-13, order=6)
        qe = F / omega**2
        c, s = np.cos(omega * T), np.sin(omega * T)
        p = 1.0 * c - omega * (0.0 - qe) * s
        q = qe + (0.0 - qe) * c + (1.0 / omega) * s
        assert np.max(np.abs(ref.final_state - np.array([p, q]))) < 1e-12

    def test_fpu_initial_harmonic_energy(self):
        sys = fpu5()
        assert abs(sys.harmonic_energy(sys.state0) - 4.225) < 1e-12

    def test_richardson_agreement_at_t50(self):
        sys = fpu5()
        ref = reference_trajectory(sys, 50.0, tol=1e-10, order=6)
        assert ref.meta["agreement"] <= 1e-10


class TestEnergyErrorScan:
    def test_rows_and_annotations(self):
        sys = forced_oscillator(omega=3.0, force=0.5)
        grid = [0.05, 0.2, 2.2]  # the range contains h = 2 pi / 3
        rep = energy_error_scan(sys, STRANG, grid, T=10.0)
        assert len(rep["rows"]) == 3
        assert any(abs(e["h"] - 2 * pi / 3) < 1e-12 for e in rep["resonances"]["resonances"])
        for row in rep["rows"]:
            assert np.isfinite(row["energy_error"])
            assert row["nearest_resonance_h"] > 0

    def test_grid_refinement_near_resonances(self):
        grid = build_scan_grid(0.05, 1.0, 50, resonances=[0.3])
        assert np.any(np.abs(grid - 0.3) < 1e-12)
        assert np.any(np.abs(grid - 0.3 * 1.005) < 1e-12)

    def test_unit_mode_letters(self):
        freq = fpu5().freq
        letters = unit_mode_letters(freq)
        assert len(letters) == 10
        assert (1, 0, 0, 0, 0) in letters and (0, -1, 0, 0, 0) in letters


class TestObservableDrift:
    def test_drift_starts_at_zero(self):
        sys = forced_oscillator()
        traj = observable_drift(sys, STRANG, 0.1, 5.0, {"H": sys.hamiltonian})
        assert traj.observables["H"][0] == 0.0

    def test_forced_oscillator_modified_energy_conserved(self):
        # the one-letter modified Hamiltonian is exactly conserved by the
        # Strang map at nonresonant h
        omega, F, h = 1.7, 1.0, 0.3
        sys = forced_oscillator(omega=omega, force=F)
        beta1 = omega * h / (2 * np.sin(omega * h / 2))

        def H_mod(state):
            p, q = state
            return 0.5 * p**2 + 0.5 * omega**2 * q**2 - q * beta1 * F

        traj = observable_drift(sys, STRANG, h, 300.0, {"H": sys.hamiltonian,
                                                        "H_mod": H_mod})
        assert np.max(np.abs(traj.observables["H_mod"])) < 1e-12
        assert np.max(np.abs(traj.observables["H"])) > 1e-3


class TestWordSeriesConvergence:
    def test_flow_series_order(self):
        # truncated word series of the exact flow converges at order N+1
        freq = FrequencySpec([1.0, np.sqrt(2.0)],
                             basis_values=(1.0, float(np.sqrt(2.0))),
                             rational_matrix=[[1, 0], [0, 1]])
        chart = Chart("pq", (1.0, float(np.sqrt(2.0))))
        q1 = PolyObservable.variable(chart, chart.slot2(0))
        q2 = PolyObservable.variable(chart, chart.slot2(1))
        potential = q1 * q1 * q2 + 0.3 * (q2 * q2 * q2)
        sys = MechanicalSystem(freq, potential, np.array([1.1, -0.8]),
                               np.array([1.2, 0.9]), name="toy")
        md = sys.modes()
        alphabet = md.alphabet()
        # N = 1 on the small decade; N = 2 on larger steps where the h^3 tail
        # stays above the reference noise floor
        ranges = {1: np.array([1e-2, 5e-3, 2e-3, 1e-3]),
                  2: np.array([6e-2, 3e-2, 1.5e-2, 6e-3])}
        for N, hs in ranges.items():
            diffs = []
            for h in hs:
                ref = reference_trajectory(sys, float(h), tol=1e-13, order=6)
                alpha = flow_coefficients(freq, alphabet, N, float(h))
                from wordseries.extended import ExtCoeff
                ext = ExtCoeff(h * freq.omega, alpha)
                approx = word_series_evaluate(ext, md, sys.state0)
                diffs.append(np.max(np.abs(approx - ref.final_state)))
            rate = np.polyfit(np.log(hs), np.log(diffs), 1)[0]
            assert rate >= N + 0.7, (N, rate, diffs)


class TestActionAngle:
    def test_roundtrip(self):
        freq = fpu5().freq
        rng = np.random.default_rng(100)
        state = rng.normal(size=10)
        aa = action_angle_transform(state, freq, "to_action_angle")
        back = action_angle_transform(aa, freq, "from_action_angle")
        assert np.max(np.abs(back - state)) < 1e-13

    def test_jacobian_determinant_one(self):
        freq = FrequencySpec([1.7])
        rng = np.random.default_rng(101)
        for _ in range(5):
            state = rng.normal(size=2) + np.array([1.5, 0.0])
            eps = 1e-6
            J = np.zeros((2, 2))
            for j in range(2):
                dx = np.zeros(2)
                dx[j] = eps
                J[:, j] = (action_angle_transform(state + dx, freq, "to_action_angle")
                           - action_angle_transform(state - dx, freq, "to_action_angle")) / (2 * eps)
            assert abs(np.linalg.det(J) - 1.0) < 1e-7

    def test_harmonic_flow_in_action_angle(self):
        sys = forced_oscillator(omega=2.2, force=0.0)
        t = 0.63
        rot_only = type(STRANG)((1.0,), (0.0,))
        s1 = splitting_step_factory(sys, rot_only, t)(np.array([0.8, 0.4]))
        a0, th0 = action_angle_transform(np.array([0.8, 0.4]), sys.freq, "to_action_angle")
        a1, th1 = action_angle_transform(s1, sys.freq, "to_action_angle")
        assert abs(a1 - a0) < 1e-14
        dtheta = (th1 - th0 - 2.2 * t + pi) % (2 * pi) - pi
        assert abs(dtheta) < 1e-12

    def test_zero_action_rejected(self):
        freq = FrequencySpec([1.0])
        with pytest.raises(ValueError):
            action_angle_transform(np.array([0.0, 0.0]), freq, "from_action_angle")


class TestNormalizeLinearPart:
    def test_zero_matrix(self):
        omegas, Z = normalize_linear_part(np.zeros((3, 3)))
        assert len(omegas) == 0 and np.allclose(Z, np.eye(3))

    def test_single_block(self):
        w = 1.9
        M = np.array([[0.0, -w], [w, 0.0]])
        omegas, Z = normalize_linear_part(M)
        assert np.allclose(omegas, [w])
        B = Z.T @ M @ Z
        assert np.allclose(B, [[0.0, -w], [w, 0.0]], atol=1e-12)

    def test_random_skew(self):
        rng = np.random.default_rng(102)
        A = rng.normal(size=(7, 7))
        M = A - A.T
        omegas, Z = normalize_linear_part(M)
        assert np.allclose(Z.T @ Z, np.eye(7), atol=1e-12)
        assert np.all(omegas > 0)
        assert np.all(np.diff(omegas) >= 0)
        B = Z.T @ M @ Z
        nz = 7 - 2 * len(omegas)
        for j, w in enumerate(omegas):
            i0 = nz + 2 * j
            assert abs(B[i0, i0 + 1] + w) < 1e-10
            assert abs(B[i0 + 1, i0] - w) < 1e-10
        # eigenvalue cross-check
        ev = np.sort(np.abs(np.imag(np.linalg.eigvals(M))))[-2 * len(omegas):]
        assert np.allclose(np.sort(np.repeat(omegas, 2)), ev, atol=1e-10)

    def test_rejects_nonskew(self):
        with pytest.raises(ValueError):
            normalize_linear_part(np.eye(2))
