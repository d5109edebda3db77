"""Shared generators for randomized algebra tests (seeded, deterministic)."""
from __future__ import annotations

import numpy as np

from wordseries.algebra import CoeffMap, bracket, exp_star
from wordseries.words import Word


def random_algebra_element(alphabet, max_len, rng, scale=1.0) -> CoeffMap:
    """Random infinitesimal character: span of letters and nested brackets.

    Letters are in the algebra, and the bracket closes on it, so any linear
    combination of nested brackets of letter elements is a valid member.
    """
    letters = sorted(alphabet)
    singles = [CoeffMap(alphabet, max_len, {Word((a,)): 1.0}) for a in letters]

    def rand_c():
        return scale * complex(rng.normal(), rng.normal())

    acc = CoeffMap(alphabet, max_len, {})
    for s in singles:
        acc = acc + rand_c() * s
    for _ in range(min(4, len(letters) ** 2)):
        i, j = rng.integers(0, len(letters), size=2)
        if i != j:
            acc = acc + rand_c() * bracket(singles[i], singles[j])
    for _ in range(3):
        i, j, k = rng.integers(0, len(letters), size=3)
        if i != j:
            acc = acc + rand_c() * bracket(bracket(singles[i], singles[j]), singles[k])
    if max_len >= 4:
        for _ in range(2):
            i, j, k, l = rng.integers(0, len(letters), size=4)
            if i != j and k != l:
                acc = acc + rand_c() * bracket(bracket(singles[i], singles[j]),
                                               bracket(singles[k], singles[l]))
    return acc


def random_group_element(alphabet, max_len, rng, scale=0.7) -> CoeffMap:
    return exp_star(random_algebra_element(alphabet, max_len, rng, scale=scale))


def rng_for(name: str) -> np.random.Generator:
    return np.random.default_rng(abs(hash(name)) % (2**32))


def gauss_simplex_oscillatory(mus, h, npts):
    """Tensor Gauss-Legendre quadrature of exp(i sum mu_j t_j) over the
    ordered simplex 0 <= t_1 <= ... <= t_n <= h, via the substitution
    t_n = h u_n, t_{j} = t_{j+1} u_j onto the unit cube."""
    n = len(mus)
    if n == 0:
        return 1.0 + 0j
    x, w = np.polynomial.legendre.leggauss(npts)
    u = 0.5 * (x + 1.0)
    wu = 0.5 * w
    grids = np.meshgrid(*([u] * n), indexing="ij")
    weight = np.ones_like(grids[0])
    for g in np.meshgrid(*([wu] * n), indexing="ij"):
        weight = weight * g
    t = [None] * n
    acc = np.full_like(grids[0], h)
    for j in range(n - 1, -1, -1):
        acc = acc * grids[j]
        t[j] = acc
    jac = np.ones_like(grids[0]) * h
    for j in range(1, n):
        jac = jac * t[j]
    phase = np.zeros_like(grids[0], dtype=complex)
    for mu, tj in zip(mus, t):
        phase = phase + 1j * mu * tj
    return complex(np.sum(np.exp(phase) * weight * jac))


def adaptive_simplex_quadrature(mus, h, tol=1e-11, n0=16, max_doublings=5):
    """Node-doubling adaptive wrapper around the tensor Gauss rule."""
    prev = gauss_simplex_oscillatory(mus, h, n0)
    n = n0
    for _ in range(max_doublings):
        n *= 2
        cur = gauss_simplex_oscillatory(mus, h, n)
        if abs(cur - prev) <= tol:
            return cur
        prev = cur
    return prev
