"""Concrete oscillatory systems, splitting integration, scans, and transforms.

Systems are harmonic oscillators plus a polynomial potential perturbation in
the positions.  The splitting step alternates exact harmonic rotations with
exact momentum kicks, so each stage is evaluated in closed form.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import pi
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np
import scipy.linalg

from .extended import FrequencySpec
from .modes import ModeDecomposition, fourier_modes
from .poly import Chart, PolyObservable, pq_point_to_complex
from .splitting import SplittingScheme, detect_numerical_resonances


class IntegrationBlowUp(RuntimeError):
    def __init__(self, step: int, t: float, norm: float):
        self.step = step
        self.t = t
        super().__init__(f"state blew up at step {step} (t={t:.6g}, |x|={norm:.3g})")


@dataclass
class TrajectoryRecord:
    """Recorded times, states (rows are (p, q) points) and observable series."""

    times: np.ndarray
    states: np.ndarray
    observables: dict[str, np.ndarray] = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.states = np.asarray(self.states, dtype=float)
        if np.any(np.diff(self.times) < 0):
            raise ValueError("times must be nondecreasing")
        if not np.all(np.isfinite(self.states)):
            raise ValueError("states must be finite")

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]


@dataclass
class MechanicalSystem:
    """Oscillators with positive frequencies plus a position-only potential."""

    freq: FrequencySpec
    potential: PolyObservable
    p0: np.ndarray
    q0: np.ndarray
    name: str = "system"
    _modes: ModeDecomposition | None = field(default=None, repr=False)
    _grad: "_CompiledGradient | None" = field(default=None, repr=False)

    def __post_init__(self):
        self.p0 = np.asarray(self.p0, dtype=float)
        self.q0 = np.asarray(self.q0, dtype=float)
        d = self.freq.d
        if len(self.p0) != d or len(self.q0) != d:
            raise ValueError("initial condition dimension mismatch")
        if self.potential.chart != self.chart:
            raise ValueError("potential must live on the system's pq chart")
        n = self.chart.n_pairs
        if any(e[j] for e in self.potential.terms for j in range(n)):
            raise ValueError("potential must not depend on momenta")

    @property
    def chart(self) -> Chart:
        return Chart("pq", tuple(float(w) for w in self.freq.omega))

    @property
    def state0(self) -> np.ndarray:
        return np.concatenate([self.p0, self.q0])

    # -- energies ---------------------------------------------------------
    def split_state(self, state: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        d = self.freq.d
        return state[..., :d], state[..., d:]

    def harmonic_energy(self, state: np.ndarray) -> float:
        p, q = self.split_state(np.asarray(state))
        return float(0.5 * np.sum(p**2 + self.freq.omega**2 * q**2, axis=-1))

    def potential_energy(self, state: np.ndarray) -> float:
        p, q = self.split_state(np.asarray(state, dtype=float))
        x = np.concatenate([np.zeros_like(p), q])
        return float(np.real(self.potential.evaluate(x)))

    def hamiltonian(self, state: np.ndarray) -> float:
        return self.harmonic_energy(state) + self.potential_energy(state)

    def modes(self) -> ModeDecomposition:
        if self._modes is None:
            self._modes = fourier_modes(self.potential, self.freq)
        return self._modes

    def gradient(self) -> "_CompiledGradient":
        if self._grad is None:
            self._grad = _CompiledGradient(self.potential)
        return self._grad


class _CompiledGradient:
    """Vectorized gradient of a position-only polynomial potential."""

    def __init__(self, potential: PolyObservable):
        chart = potential.chart
        n = chart.n_pairs
        rows, vals, comps = [], [], []
        for e, c in potential.terms.items():
            qe = e[n:]
            for j in range(n):
                if qe[j] > 0:
                    r = list(qe)
                    r[j] -= 1
                    rows.append(r)
                    vals.append(float(np.real(c)) * qe[j])
                    comps.append(j)
        self.n = n
        if rows:
            self.E = np.array(rows, dtype=np.int64)
            self.V = np.array(vals)
            self.J = np.array(comps, dtype=np.intp)
        else:
            self.E = np.zeros((0, n), dtype=np.int64)
            self.V = np.zeros(0)
            self.J = np.zeros(0, dtype=np.intp)

    def __call__(self, q: np.ndarray) -> np.ndarray:
        if len(self.V) == 0:
            return np.zeros(self.n)
        monos = np.prod(q[None, :] ** self.E, axis=1)
        return np.bincount(self.J, weights=self.V * monos, minlength=self.n)


def splitting_step_factory(sys: MechanicalSystem, scheme: SplittingScheme,
                           h: float) -> Callable[[np.ndarray], np.ndarray]:
    """One closed-form splitting step: rotate by a_j h, kick by b_j h, in order."""
    omega = sys.freq.omega
    grad = sys.gradient()
    stages = []
    for aj, bj in zip(scheme.a, scheme.b):
        th = omega * (aj * h)
        stages.append((np.cos(th), np.sin(th), bj * h))

    def step(state: np.ndarray) -> np.ndarray:
        d = len(omega)
        p = state[:d].copy()
        q = state[d:].copy()
        for ct, st, bh in stages:
            p, q = p * ct - omega * q * st, q * ct + (p / omega) * st
            if bh != 0.0:
                p = p - bh * grad(q)
        return np.concatenate([p, q])

    return step


def integrate_splitting(sys: MechanicalSystem, scheme: SplittingScheme, h: float,
                        n_steps: int, record_every: int = 1) -> TrajectoryRecord:
    """Advance n_steps splitting steps of size h, recording states periodically."""
    if h == 0:
        raise ValueError("h must be nonzero")
    step = splitting_step_factory(sys, scheme, h)
    state = sys.state0
    times = [0.0]
    states = [state]
    for k in range(1, n_steps + 1):
        state = step(state)
        if k % record_every == 0 or k == n_steps:
            if not np.all(np.isfinite(state)):
                raise IntegrationBlowUp(k, k * h, float(np.max(np.abs(state))))
            times.append(k * h)
            states.append(state)
    return TrajectoryRecord(np.array(times), np.array(states),
                            meta={"h": h, "n_steps": n_steps,
                                  "scheme": scheme.name or "custom"})


# symmetric composition weights built from the base second-order step
_TRIPLE_JUMP = 1.0 / (2.0 - 2.0 ** (1.0 / 3.0))
_COMPOSITION_WEIGHTS = {
    2: (1.0,),
    4: (_TRIPLE_JUMP, 1.0 - 2.0 * _TRIPLE_JUMP, _TRIPLE_JUMP),
    6: (0.78451361047755726382, 0.23557321335935813368, -1.17767998417887100695,
        1.31518632068391121889, -1.17767998417887100695, 0.23557321335935813368,
        0.78451361047755726382),
}


def composed_strang_step(sys: MechanicalSystem, h: float, order: int = 6
                         ) -> Callable[[np.ndarray], np.ndarray]:
    weights = _COMPOSITION_WEIGHTS[order]
    from .splitting import STRANG
    stages = [splitting_step_factory(sys, STRANG, w * h) for w in weights]

    def step(state: np.ndarray) -> np.ndarray:
        for s in stages:
            state = s(state)
        return state

    return step


def reference_trajectory(sys: MechanicalSystem, t_end: float, tol: float = 1e-10,
                         order: int = 6, n_record: int = 64,
                         max_refinements: int = 8) -> TrajectoryRecord:
    """High-accuracy reference by a composed splitting with step halving.

    The step is halved until two consecutive refinement levels agree at the
    endpoint to ``tol``; the finer level is returned with the achieved
    agreement recorded in the metadata.
    """
    omega_max = float(np.max(sys.freq.omega))
    n0 = max(n_record, int(np.ceil(t_end * omega_max / 2.0)))

    def run(n_steps: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        h = t_end / n_steps
        step = composed_strang_step(sys, h, order)
        state = sys.state0
        every = max(1, n_steps // n_record)
        times, states = [0.0], [state]
        for k in range(1, n_steps + 1):
            state = step(state)
            if k % every == 0 or k == n_steps:
                times.append(k * h)
                states.append(state)
        return np.array(times), np.array(states), state

    n = n0
    _, _, end_prev = run(n)
    for _ in range(max_refinements):
        n *= 2
        times, states, end = run(n)
        err = float(np.max(np.abs(end - end_prev)))
        if err <= tol:
            return TrajectoryRecord(times, states,
                                    meta={"n_steps": n, "agreement": err,
                                          "order": order, "tol": tol})
        end_prev = end
    raise RuntimeError(f"reference did not reach tol={tol}; last agreement {err:.3e}")


def unit_mode_letters(freq: FrequencySpec) -> tuple[tuple, ...]:
    """The +-unit multi-indices: one Fourier mode per oscillator, both signs."""
    d = freq.d
    out = []
    for j in range(d):
        e = [0] * d
        e[j] = 1
        out.append(tuple(e))
        out.append(tuple(-x for x in e))
    return tuple(out)


def build_scan_grid(h_min: float, h_max: float, n_points: int,
                    resonances: Sequence[float] = (),
                    refine_offsets: Sequence[float] = (-0.02, -0.01, -0.005,
                                                       0.0, 0.005, 0.01, 0.02)
                    ) -> np.ndarray:
    """Logarithmic grid plus multiplicative refinement around resonant steps."""
    base = np.geomspace(h_min, h_max, n_points)
    extra = [r * (1.0 + off) for r in resonances for off in refine_offsets
             if h_min <= r * (1.0 + off) <= h_max]
    grid = np.unique(np.concatenate([base, np.array(extra)]))
    return grid


def energy_error_scan(sys: MechanicalSystem, scheme: SplittingScheme,
                      h_grid: Sequence[float], T: float,
                      resonance_max_len: int = 1) -> dict:
    """Energy error |H(x_T) - H(x_0)| per step size, with resonance annotations.

    Step counts are rounded so n h = T when possible; otherwise a final
    partial step lands exactly on T and is recorded in the row.
    """
    H0 = sys.hamiltonian(sys.state0)
    rep = detect_numerical_resonances(sys.freq, unit_mode_letters(sys.freq),
                                      resonance_max_len,
                                      h_range=(float(np.min(h_grid)), float(np.max(h_grid))))
    res_hs = np.array([e["h"] for e in rep["resonances"]]) if rep["resonances"] else np.array([])
    rows = []
    for h in h_grid:
        h = float(h)
        n = int(round(T / h))
        partial = 0.0
        if n < 1 or abs(n * h - T) > 1e-9 * T:
            n = int(np.floor(T / h))
            partial = T - n * h
        step = splitting_step_factory(sys, scheme, h)
        state = sys.state0
        for k in range(n):
            state = step(state)
        if partial > 1e-12 * T:
            state = splitting_step_factory(sys, scheme, partial)(state)
        if not np.all(np.isfinite(state)):
            err = float("inf")
        else:
            err = abs(sys.hamiltonian(state) - H0)
        if len(res_hs):
            i = int(np.argmin(np.abs(res_hs - h)))
            nearest, dist = float(res_hs[i]), float(abs(res_hs[i] - h))
        else:
            nearest, dist = float("nan"), float("nan")
        rows.append({"h": h, "steps": n, "partial_step": partial,
                     "energy_error": err, "nearest_resonance_h": nearest,
                     "resonance_distance": dist})
    return {"T": T, "H0": H0, "rows": rows, "resonances": rep}


def observable_drift(sys: MechanicalSystem, scheme: SplittingScheme, h: float,
                     T: float, observables: Mapping[str, object],
                     record_every: int = 1) -> TrajectoryRecord:
    """Time series of each observable minus its initial value along one run.

    Observables may be callables on states or PolyObservables on either
    chart; complex-chart polynomials are evaluated through the point map and
    their real part is taken.
    """
    n = max(1, int(round(T / h)))
    traj = integrate_splitting(sys, scheme, h, n, record_every=record_every)
    chart = sys.chart
    for name, obs in observables.items():
        if isinstance(obs, PolyObservable):
            if obs.chart.kind == "complex":
                pts = pq_point_to_complex(chart, traj.states)
                vals = np.real(obs.evaluate_many(pts))
            else:
                vals = np.real(obs.evaluate_many(traj.states.astype(complex)))
        else:
            vals = np.array([obs(s) for s in traj.states])
        traj.observables[name] = vals - vals[0]
    return traj


def action_angle_transform(state: np.ndarray, freq: FrequencySpec,
                           direction: str) -> np.ndarray:
    """Map (P, Q) to (a, theta) per oscillator, or back.

    Forward: a = (P^2 + omega^2 Q^2)/(2 omega), theta = atan2(omega Q, P);
    inverse: P = sqrt(2 omega a) cos theta, Q = sqrt(2 a / omega) sin theta.
    The pairing is canonical: the (P, Q) -> (a, theta) Jacobian has
    determinant one wherever a > 0.
    """
    state = np.asarray(state, dtype=float)
    d = freq.d
    w = freq.omega
    if direction == "to_action_angle":
        P, Q = state[:d], state[d:]
        a = (P**2 + w**2 * Q**2) / (2.0 * w)
        theta = np.arctan2(w * Q, P)
        return np.concatenate([a, theta])
    if direction == "from_action_angle":
        a, theta = state[:d], state[d:]
        if np.any(a < 0):
            raise ValueError("actions must be nonnegative")
        if np.any(a == 0):
            raise ValueError("zero action: the angle is undefined at the origin")
        P = np.sqrt(2.0 * w * a) * np.cos(theta)
        Q = np.sqrt(2.0 * a / w) * np.sin(theta)
        return np.concatenate([P, Q])
    raise ValueError("direction must be 'to_action_angle' or 'from_action_angle'")


def normalize_linear_part(M: np.ndarray, tol: float = 1e-10) -> tuple[np.ndarray, np.ndarray]:
    """Orthogonal normal form of a skew-symmetric matrix.

    Returns (omegas, Z) with Z orthogonal and Z^T M Z block diagonal: a zero
    block first, then 2x2 rotation generators [[0, -w], [w, 0]] with w > 0
    (the harmonic pairs of the equivalent first-order system).
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("M must be square")
    scale = max(1.0, float(np.max(np.abs(M))))
    if np.max(np.abs(M + M.T)) > 1e-12 * scale:
        raise ValueError("M must be skew-symmetric")
    D = M.shape[0]
    if np.max(np.abs(M)) == 0.0:
        return np.zeros(0), np.eye(D)
    T, Z = scipy.linalg.schur(M, output="real")
    pair_cols: list[tuple[float, int, int]] = []
    zero_cols: list[int] = []
    i = 0
    while i < D:
        if i + 1 < D and abs(T[i + 1, i]) > tol * scale:
            b = T[i, i + 1]
            if b > 0:
                # swap the pair so the block reads [[0, -w], [w, 0]]
                pair_cols.append((b, i + 1, i))
            else:
                pair_cols.append((-b, i, i + 1))
            i += 2
        else:
            zero_cols.append(i)
            i += 1
    pair_cols.sort(key=lambda t: t[0])
    perm = list(zero_cols)
    omegas = []
    for w, c1, c2 in pair_cols:
        omegas.append(w)
        perm.extend([c1, c2])
    Znew = Z[:, perm]
    # verification: the transformed matrix has the advertised block structure
    B = Znew.T @ M @ Znew
    nz = len(zero_cols)
    expect = np.zeros_like(B)
    for j, w in enumerate(omegas):
        i0 = nz + 2 * j
        expect[i0, i0 + 1] = -w
        expect[i0 + 1, i0] = w
    if np.max(np.abs(B - expect)) > tol * scale:
        raise RuntimeError("block normalization failed verification")
    return np.array(omegas), Znew


# -- presets ----------------------------------------------------------------

def fpu_frequencies() -> FrequencySpec:
    """Five oscillators at 1, 70, 70, 70 sqrt(2), 140 with exact structure."""
    return FrequencySpec(
        [1.0, 70.0, 70.0, 70.0 * np.sqrt(2.0), 140.0],
        symbols=("1", "sqrt2"),
        basis_values=(1.0, float(np.sqrt(2.0))),
        rational_matrix=[[1, 0], [70, 0], [70, 0], [0, 70], [140, 0]],
    )


def forced_oscillator(omega: float = 2.5, force: float = 1.0) -> MechanicalSystem:
    """Single spring with a constant applied force: H = p^2/2 + w^2 q^2/2 - q F."""
    freq = FrequencySpec([omega])
    chart = Chart("pq", (float(omega),))
    potential = PolyObservable(chart, {(0, 1): -force})
    return MechanicalSystem(freq, potential, np.array([1.0]), np.array([0.0]),
                            name="forced_oscillator")


def fpu5() -> MechanicalSystem:
    """Five coupled oscillators with a quartic coupling potential.

    The harmonic energy of the initial condition is exactly 845/200 = 4.225.
    """
    freq = fpu_frequencies()
    chart = Chart("pq", tuple(float(w) for w in freq.omega))

    def qvar(j):
        return PolyObservable.variable(chart, chart.slot2(j))

    s = PolyObservable.constant(chart, 1.0 / 20.0) + qvar(1) + qvar(2) + qvar(3) \
        + 2.5 * qvar(4)
    potential = 0.125 * (qvar(0) * qvar(1)) ** 2 + s ** 4
    p0 = np.array([-1 / 5, 3 / 5, 7 / 10, -9 / 10, 4 / 5])
    q0 = np.array([1.0, 3 / 700, 4 / 350, -11 / 700, 7 / 700])
    return MechanicalSystem(freq, potential, p0, q0, name="fpu5")


PRESETS: dict[str, Callable[..., MechanicalSystem]] = {
    "forced_oscillator": forced_oscillator,
    "fpu5": fpu5,
}
