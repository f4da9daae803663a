"""A derivation of the Gaussian algebra into ``H (x) S(H')`` and the difference quotient.

``H' = R Omega_0 + H`` has ``d + 1`` modes, mode 0 being ``Omega_0``.  A vector of
``H (x) S(H')`` is stored as one ``S(H')`` component per vector of an orthonormal
frame ``beta`` of ``H`` (the standard basis unless stated otherwise).

The left action of ``s(xi)`` is ``s(xi)`` on every component.  The right action
on the component of ``beta_n`` is ``s(tau_n xi)``, where ``tau_n xi`` carries
``<beta_n, xi>`` in mode 0 and ``xi - <beta_n, xi> beta_n`` in modes ``1..d``.
The two actions commute, and ``delta(s(xi)) = xi (x) Omega`` extends by the
Leibniz rule ``delta(ab) = a delta(b) + delta(a) b``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Sequence

import numpy as np
import scipy.linalg
from numpy.polynomial import polynomial as P
from numpy.polynomial.hermite_e import hermegauss

from .dynamics import ou_semigroup
from .fock import (
    BasisMismatchError,
    DegreeOverflowError,
    FockBasis,
    FockVector,
    enumerate_basis,
    fock_tensor,
)
from .wick import DEFAULT_CONVENTION, FieldConvention, FockOperator, field, second_quantize


class BimoduleSpace:
    def __init__(self, d: int, Dp: int, frame=None, conv: FieldConvention = DEFAULT_CONVENTION):
        self.d = d
        self.Dp = Dp
        self.conv = conv
        frame = np.eye(d) if frame is None else np.asarray(frame, dtype=float)
        if frame.shape != (d, d) or np.abs(frame.T @ frame - np.eye(d)).max() > 1e-12:
            raise ValueError("frame must be an orthonormal d x d matrix (columns are frame vectors)")
        self.frame = frame
        self.basis: FockBasis = enumerate_basis(d + 1, Dp)

    def __repr__(self) -> str:
        return f"BimoduleSpace(d={self.d}, Dp={self.Dp})"

    def embed(self, xi) -> np.ndarray:
        """``xi`` in ``H`` as a mode vector of ``H'``."""
        xi = np.asarray(xi, dtype=complex)
        if xi.shape != (self.d,):
            raise ValueError(f"mode vector must have length {self.d}")
        return np.concatenate([[0.0], xi])

    def tau(self, n: int, xi) -> np.ndarray:
        xi = np.asarray(xi, dtype=complex)
        c = self.frame[:, n] @ xi
        out = np.empty(self.d + 1, dtype=complex)
        out[0] = c
        out[1:] = xi - c * self.frame[:, n]
        return out

    @cached_property
    def _vacuum(self) -> np.ndarray:
        v = np.zeros(self.basis.size, dtype=complex)
        v[0] = 1.0
        return v

    def zero(self) -> "BimoduleVector":
        return BimoduleVector(self, np.zeros((self.d, self.basis.size), dtype=complex))

    def simple(self, xi) -> "BimoduleVector":
        """``xi (x) Omega``."""
        c = self.frame.T @ np.asarray(xi, dtype=complex)
        return BimoduleVector(self, np.outer(c, self._vacuum))


@dataclass(frozen=True)
class BimoduleVector:
    space: BimoduleSpace
    comps: np.ndarray

    def _check(self, other: "BimoduleVector") -> None:
        if other.space is not self.space:
            raise BasisMismatchError("vectors live in different bimodule spaces")

    def __add__(self, other: "BimoduleVector") -> "BimoduleVector":
        self._check(other)
        return BimoduleVector(self.space, self.comps + other.comps)

    def __sub__(self, other: "BimoduleVector") -> "BimoduleVector":
        self._check(other)
        return BimoduleVector(self.space, self.comps - other.comps)

    def __mul__(self, c) -> "BimoduleVector":
        return BimoduleVector(self.space, c * self.comps)

    __rmul__ = __mul__

    def conj(self) -> "BimoduleVector":
        return BimoduleVector(self.space, self.comps.conj())

    def inner(self, other: "BimoduleVector") -> complex:
        self._check(other)
        return complex(np.sum(self.comps * other.comps.conj() * self.space.basis.weights[None, :]))

    def norm(self) -> float:
        return float(np.sqrt(self.inner(self).real))

    def standard_components(self) -> np.ndarray:
        """Components against the standard basis of ``H``."""
        return self.space.frame @ self.comps


class ComponentOperator:
    """An operator acting on each ``S(H')`` component by its own Fock operator."""

    def __init__(self, space: BimoduleSpace, ops: Sequence[FockOperator]):
        if len(ops) != space.d:
            raise ValueError("need one operator per component")
        self.space = space
        self.ops = list(ops)

    def __call__(self, v: BimoduleVector) -> BimoduleVector:
        if v.space is not self.space:
            raise BasisMismatchError("operator and vector live in different bimodule spaces")
        return BimoduleVector(self.space, np.array([op.matrix @ c for op, c in zip(self.ops, v.comps)]))

    def __matmul__(self, other: "ComponentOperator") -> "ComponentOperator":
        return ComponentOperator(self.space, [a @ b for a, b in zip(self.ops, other.ops)])

    def dense(self) -> np.ndarray:
        """Block-diagonal matrix in the orthonormal product frame."""
        return scipy.linalg.block_diag(*(op.orthonormal_matrix() for op in self.ops))


def left_action(space: BimoduleSpace, xi) -> ComponentOperator:
    s = field(space.basis, space.embed(xi), space.conv)
    return ComponentOperator(space, [s] * space.d)


def right_action(space: BimoduleSpace, xi) -> ComponentOperator:
    return ComponentOperator(space, [field(space.basis, space.tau(n, xi), space.conv) for n in range(space.d)])


def _is_leaf(node) -> bool:
    return not (isinstance(node, tuple) and len(node) == 2 and not np.isscalar(node[0]))


def _leaves(node) -> list:
    return [node] if _is_leaf(node) else _leaves(node[0]) + _leaves(node[1])


def _apply_left(space: BimoduleSpace, xis: Sequence, v: BimoduleVector) -> BimoduleVector:
    for xi in reversed(list(xis)):
        v = left_action(space, xi)(v)
    return v


def _apply_right(space: BimoduleSpace, xis: Sequence, v: BimoduleVector) -> BimoduleVector:
    # v . s(xi_1) ... s(xi_k): the leftmost factor acts first
    for xi in xis:
        v = right_action(space, xi)(v)
    return v


def derivation_delta_beta(space: BimoduleSpace, word: Sequence) -> BimoduleVector:
    """``delta(s(xi_1) ... s(xi_k)) = sum_i xi_1..xi_{i-1} . (xi_i (x) Omega) . xi_{i+1}..xi_k``."""
    word = [np.asarray(x) for x in word]
    k = len(word)
    if k > space.Dp - 1:
        raise DegreeOverflowError(f"word of length {k} needs degree cap >= {k + 1}, have {space.Dp}")
    out = space.zero()
    for i, xi in enumerate(word):
        v = _apply_right(space, word[i + 1:], space.simple(xi))
        out = out + _apply_left(space, word[:i], v)
    return out


def delta_tree(space: BimoduleSpace, node) -> BimoduleVector:
    """``delta`` along an explicit bracketing: nested pairs ``(a, b)`` with mode-vector leaves."""
    if len(_leaves(node)) > space.Dp - 1:
        raise DegreeOverflowError("bracketed word too long for the degree cap")
    if _is_leaf(node):
        return space.simple(node)
    a, b = node
    return _apply_left(space, _leaves(a), delta_tree(space, b)) + _apply_right(space, _leaves(b), delta_tree(space, a))


def delta_combination(space: BimoduleSpace, terms: Sequence[tuple[complex, Sequence]]) -> BimoduleVector:
    """``delta(sum_j c_j x_j)`` for field words ``x_j``; the empty word is the unit."""
    out = space.zero()
    for c, word in terms:
        if len(word):
            out = out + c * derivation_delta_beta(space, word)
    return out


def extended(T) -> np.ndarray:
    """``1 + T`` on ``H' = R Omega_0 + H``."""
    T = np.asarray(T, dtype=float)
    out = np.eye(T.shape[0] + 1)
    out[1:, 1:] = T
    return out


def tilde(space: BimoduleSpace, T, v: BimoduleVector) -> np.ndarray:
    """``(T (x) T'^S) v`` in standard components."""
    TS = second_quantize(space.basis, extended(T))
    moved = np.array([TS.matrix @ c for c in v.standard_components()])
    return np.asarray(T, dtype=float) @ moved


def covariance_check(T, word: Sequence, Dp: int, conv: FieldConvention = DEFAULT_CONVENTION) -> float:
    """``|| delta_{T beta}(sigma_T(a)) - T~(delta_beta(a)) ||`` for ``a`` the field word.

    ``sigma_T(s(xi)) = s(T xi)``; the left side uses the rotated frame ``T beta``.
    """
    T = np.asarray(T, dtype=float)
    d = T.shape[0]
    base = BimoduleSpace(d, Dp, conv=conv)
    moved = BimoduleSpace(d, Dp, frame=T, conv=conv)
    lhs = derivation_delta_beta(moved, [T @ np.asarray(x, dtype=float) for x in word]).standard_components()
    rhs = tilde(base, T, derivation_delta_beta(base, word))
    diff = lhs - rhs
    return float(np.sqrt(np.sum(np.abs(diff) ** 2 * base.basis.weights[None, :])))


def difference_quotient(f) -> np.ndarray:
    """Coefficients ``Q[a, b]`` of ``(f(x) - f(y)) / (x - y)`` in ``x^a y^b``.

    ``x^n`` maps to ``sum_{a+b=n-1} x^a y^b``.  Integer input stays integer.
    """
    f = np.asarray(f)
    n = len(f)
    dtype = f.dtype if np.issubdtype(f.dtype, np.integer) else float
    Q = np.zeros((max(n - 1, 1), max(n - 1, 1)), dtype=dtype)
    for a in range(n - 1):
        for b in range(n - 1 - a):
            Q[a, b] = f[a + b + 1]
    return Q


def poly_mul(f, g) -> np.ndarray:
    f, g = np.asarray(f), np.asarray(g)
    out = np.zeros(len(f) + len(g) - 1, dtype=np.result_type(f, g))
    for i, c in enumerate(f):
        out[i:i + len(g)] += c * g
    return out


def poly2_mul_x(f, Q) -> np.ndarray:
    """``f(x) Q(x, y)``."""
    f, Q = np.asarray(f), np.asarray(Q)
    out = np.zeros((len(f) + Q.shape[0] - 1, Q.shape[1]), dtype=np.result_type(f, Q))
    for i, c in enumerate(f):
        out[i:i + Q.shape[0]] += c * Q
    return out


def poly2_mul_y(Q, g) -> np.ndarray:
    """``Q(x, y) g(y)``."""
    return poly2_mul_x(g, np.asarray(Q).T).T


def poly2_add(A, B) -> np.ndarray:
    A, B = np.asarray(A), np.asarray(B)
    out = np.zeros((max(A.shape[0], B.shape[0]), max(A.shape[1], B.shape[1])), dtype=np.result_type(A, B))
    out[:A.shape[0], :A.shape[1]] += A
    out[:B.shape[0], :B.shape[1]] += B
    return out


def poly2_trim(Q) -> np.ndarray:
    Q = np.asarray(Q)
    nz = np.argwhere(Q != 0)
    if nz.size == 0:
        return np.zeros((1, 1), dtype=Q.dtype)
    return Q[: nz[:, 0].max() + 1, : nz[:, 1].max() + 1]


def leibniz_residual(f, g) -> np.ndarray:
    """``delta(fg) - (f(x) delta(g) + delta(f) g(y))`` as a coefficient array."""
    lhs = difference_quotient(poly_mul(f, g))
    rhs = poly2_add(poly2_mul_x(f, difference_quotient(g)), poly2_mul_y(difference_quotient(f), g))
    diff = poly2_add(lhs, -rhs)
    return poly2_trim(diff)


@dataclass
class DirichletResult:
    value: float
    mc_mean: float | None = None
    mc_stderr: float | None = None

    @property
    def mc_agrees(self) -> bool | None:
        if self.mc_mean is None:
            return None
        return abs(self.value - self.mc_mean) <= 3 * self.mc_stderr + 1e-15


def dirichlet_form(f, nodes: int | None = None) -> float:
    """``E[((f(x) - f(y)) / (x - y))^2]`` for independent standard Gaussians ``x, y``.

    Tensor Gauss-Hermite quadrature with at least ``deg f + 2`` nodes per axis,
    which is exact for the polynomial integrand.
    """
    f = np.asarray(f, dtype=float)
    deg = len(f) - 1
    if deg > 12:
        raise ValueError("polynomial degree must be <= 12")
    if deg < 1:
        return 0.0
    n = max(deg + 2, nodes or 0)
    x, w = hermegauss(n)
    w = w / np.sqrt(2 * np.pi)
    if not np.all(w > 0):
        raise ArithmeticError("quadrature weights underflowed")
    vals = P.polygrid2d(x, x, difference_quotient(f))
    return float(w @ vals ** 2 @ w)


def dirichlet_monte_carlo(f, samples: int = 1_000_000, seed: int = 0, block: int = 100_000) -> tuple[float, float]:
    """Monte Carlo mean and standard error; each block of samples has its own seed."""
    Q = difference_quotient(np.asarray(f, dtype=float))
    blocks = []
    for k, start in enumerate(range(0, samples, block)):
        rng = np.random.default_rng([seed, k])
        m = min(block, samples - start)
        x, y = rng.standard_normal(m), rng.standard_normal(m)
        blocks.append(P.polyval2d(x, y, Q) ** 2)
    vals = np.concatenate(blocks)
    return float(vals.mean()), float(vals.std(ddof=1) / np.sqrt(len(vals)))


def dirichlet_check(f, samples: int = 1_000_000, seed: int = 0) -> DirichletResult:
    mean, se = dirichlet_monte_carlo(f, samples, seed)
    return DirichletResult(dirichlet_form(f), mean, se)


def tensor_derivation(slots: Sequence[tuple[Callable | None, object]], is_unit: Callable[[object], bool]) -> list[tuple[int, object, list]]:
    """``delta(x_1 (x) ... (x) x_m) = sum_j delta_j(x_j) (x) (others)``, one summand per slot.

    Slots whose element is the unit (as decided by ``is_unit``) contribute
    nothing.  Returns ``(j, delta_j(x_j), [x_i for i != j])``.
    """
    out = []
    for j, (delta, x) in enumerate(slots):
        if delta is None or is_unit(x):
            continue
        out.append((j, delta(x), [y for i, (_, y) in enumerate(slots) if i != j]))
    return out


def tensor_semigroup_residual(vectors: Sequence[FockVector], t: float) -> tuple[float, FockVector]:
    """Compare ``Phi^t`` on ``S(H_1 + ... + H_m)`` with the tensor product of slot semigroups."""
    joint = vectors[0]
    split = ou_semigroup(vectors[0].basis, t) @ vectors[0]
    for v in vectors[1:]:
        joint = fock_tensor(joint, v)
        split = fock_tensor(split, ou_semigroup(v.basis, t) @ v)
    lhs = ou_semigroup(joint.basis, t) @ joint
    return (lhs - split).norm(), lhs
