"""Reference computations that share no code with the package.

Each oracle works from first principles: explicit tensors, full group tables,
Gaussian quadrature, closed-form series.
"""

from __future__ import annotations

import itertools
from math import factorial

import numpy as np
from numpy.polynomial.hermite_e import hermegauss


def symmetrized_tensor(xs) -> np.ndarray:
    """``(1/n!) sum_sigma x_{sigma(1)} (x) ... (x) x_{sigma(n)}`` as a dense ``d^n`` array."""
    n = len(xs)
    out = 0
    for perm in itertools.permutations(range(n)):
        t = np.array(1.0 + 0j)
        for i in perm:
            t = np.multiply.outer(t, np.asarray(xs[i], dtype=complex))
        out = out + t
    return out / factorial(n)


def renormalized_inner(a_xs, b_xs) -> complex:
    """``n! <a, b>`` in the tensor power, zero across different degrees."""
    if len(a_xs) != len(b_xs):
        return 0j
    a, b = symmetrized_tensor(a_xs), symmetrized_tensor(b_xs)
    return factorial(len(a_xs)) * complex(np.sum(a * b.conj()))


def gaussian_mixed_moment(m: int, n: int) -> float:
    """``E[X^m Y^n]`` for independent standard normals by tensor Gauss-Hermite quadrature."""
    x, w = hermegauss(max(m, n) // 2 + 2)
    w = w / np.sqrt(2 * np.pi)
    return float((w @ x ** m) * (w @ x ** n))


def brute_force_h1(elements_table: np.ndarray, mats: list[np.ndarray]) -> tuple[int, int, int]:
    """``(dim Z^1, dim B^1, dim H^1)`` from the full multiplication table.

    Unknowns are ``b(g)`` for every element ``g``; one equation
    ``b(gh) - pi_g b(h) - b(g) = 0`` per ordered pair.  ``mats[g]`` is ``pi_g``.
    """
    G = len(mats)
    d = mats[0].shape[0]
    rows = []
    for g in range(G):
        for h in range(G):
            gh = elements_table[g, h]
            block = np.zeros((d, G * d))
            block[:, gh * d:(gh + 1) * d] += np.eye(d)
            block[:, h * d:(h + 1) * d] -= mats[g]
            block[:, g * d:(g + 1) * d] -= np.eye(d)
            rows.append(block)
    A = np.vstack(rows)
    s = np.linalg.svd(A, compute_uv=False)
    z = G * d - int(np.sum(s > 1e-9 * max(s[0], 1.0)))
    cob = np.vstack([m - np.eye(d) for m in mats])
    sc = np.linalg.svd(cob, compute_uv=False)
    bdim = int(np.sum(sc > 1e-9 * max(sc[0], 1.0)))
    return z, bdim, z - bdim


def coherent_trace(norm_b: float) -> float:
    """``E[exp(-i b X)]`` for standard normal ``X``: the characteristic function."""
    return float(np.exp(-norm_b ** 2 / 2))


def hermite_moment_series(norm_b: float, t: float, terms: int = 200) -> float:
    """``sum_k cos(t)^k e^{-|b|^2} |b|^{2k} / k!``, the chaos expansion of the correlation."""
    lam = norm_b ** 2
    k = np.arange(terms)
    logs = k * np.log(max(lam, 1e-300)) - np.array([np.sum(np.log(np.arange(1, j + 1))) for j in k])
    return float(np.sum(np.cos(t) ** k * np.exp(logs - lam)))


def rotation(theta: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


def cyclic_table(n: int) -> np.ndarray:
    k = np.arange(n)
    return (k[:, None] + k[None, :]) % n


def permutation_group(gens) -> tuple[list[tuple], np.ndarray]:
    """Closure of permutation generators with the composition table ``(a*b)(i) = a(b(i))``."""
    n = len(gens[0])
    elems = [tuple(range(n))]
    frontier = list(elems)
    while frontier:
        nxt = []
        for a in frontier:
            for g in gens:
                c = tuple(a[i] for i in g)
                if c not in elems:
                    elems.append(c)
                    nxt.append(c)
        frontier = nxt
    idx = {e: i for i, e in enumerate(elems)}
    table = np.array([[idx[tuple(a[i] for i in b)] for b in elems] for a in elems])
    return elems, table


def permutation_matrix(p) -> np.ndarray:
    m = np.zeros((len(p), len(p)))
    for i, pi in enumerate(p):
        m[pi, i] = 1.0
    return m
