"""Operators on the truncated symmetric Fock space.

Matrices act on monomial coordinates (see :mod:`gaussact.fock`).  Adjoints are
always taken for the renormalised inner product, ``A^dagger = W^-1 A^H W`` with
``W = diag(prod m_i!)``; the plain conjugate transpose is never the adjoint
here.

Truncation is compression: anything pushed past degree ``D`` is dropped.
Creation from the top degree is therefore zero, and the truncated annihilation
operator is still the exact adjoint of the truncated creation operator.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import ceil
from typing import Sequence

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from .fock import (
    BasisMismatchError,
    FockBasis,
    FockVector,
    ResourceLimitError,
    inner_product,
    vacuum,
)

DENSE_CAP = 6000


class PreconditionError(ValueError):
    pass


class ConvergenceError(ArithmeticError):
    pass


@dataclass(frozen=True)
class FieldConvention:
    """Scale ``kappa`` in ``s(xi) = kappa * (x_xi + d/dxi)``.

    ``kappa = 1`` gives unit variance for unit vectors, which is what the
    Gaussian moment and trace formulas require.
    """

    kappa: float = 1.0

    def __post_init__(self):
        if not self.kappa > 0:
            raise ValueError(f"kappa must be positive, got {self.kappa}")


DEFAULT_CONVENTION = FieldConvention()


class FockOperator:
    """A matrix over a fixed :class:`FockBasis`.

    ``matrix`` is either a dense ``ndarray`` or a scipy sparse array; structural
    operators (creation, fields, second quantisation) stay sparse, exponentials
    come back dense.
    """

    __slots__ = ("basis", "matrix")
    __array_ufunc__ = None

    def __init__(self, basis: FockBasis, matrix):
        if matrix.shape != (basis.size, basis.size):
            raise ValueError(f"matrix shape {matrix.shape} does not match basis size {basis.size}")
        if sp.issparse(matrix):
            matrix = sp.csr_array(matrix)
        else:
            matrix = np.asarray(matrix)
        self.basis = basis
        self.matrix = matrix

    def __repr__(self) -> str:
        kind = "sparse" if self.is_sparse else "dense"
        return f"FockOperator({self.basis!r}, {kind})"

    @property
    def is_sparse(self) -> bool:
        return sp.issparse(self.matrix)

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray() if self.is_sparse else np.array(self.matrix)

    def _check(self, other: "FockOperator") -> None:
        if other.basis is not self.basis:
            raise BasisMismatchError("operators live on different bases")

    def __matmul__(self, other):
        if isinstance(other, FockOperator):
            self._check(other)
            return FockOperator(self.basis, self.matrix @ other.matrix)
        if isinstance(other, FockVector):
            if other.basis is not self.basis:
                raise BasisMismatchError("operator and vector live on different bases")
            return FockVector(self.basis, self.matrix @ other.coeffs)
        return NotImplemented

    def __add__(self, other: "FockOperator") -> "FockOperator":
        self._check(other)
        return FockOperator(self.basis, self.matrix + other.matrix)

    def __sub__(self, other: "FockOperator") -> "FockOperator":
        self._check(other)
        return FockOperator(self.basis, self.matrix - other.matrix)

    def __neg__(self) -> "FockOperator":
        return FockOperator(self.basis, -self.matrix)

    def __mul__(self, c) -> "FockOperator":
        return FockOperator(self.basis, self.matrix * c)

    __rmul__ = __mul__

    def adjoint(self) -> "FockOperator":
        # entries scale by w_col / w_row, which is exactly 1 inside a block of equal weights
        w = self.basis.weights
        if self.is_sparse:
            m = sp.coo_array(self.matrix.conj().T)
            data = m.data * (w[m.col] / w[m.row])
            m = sp.csr_array((data, (m.row, m.col)), shape=m.shape)
        else:
            m = self.matrix.conj().T * (w[None, :] / w[:, None])
        return FockOperator(self.basis, m)

    def orthonormal_matrix(self) -> np.ndarray:
        """Dense matrix in the orthonormal basis ``e^m / sqrt(m!)``."""
        s = self.basis.sqrt_weights
        return (self.toarray() * s[:, None]) / s[None, :]

    def norm(self, rows: np.ndarray | None = None, cols: np.ndarray | None = None) -> float:
        """Operator norm for the renormalised inner product, optionally on a sub-block."""
        m = self.orthonormal_matrix()
        if rows is not None:
            m = m[rows]
        if cols is not None:
            m = m[:, cols]
        if m.size == 0:
            return 0.0
        return float(np.linalg.norm(m, 2))

    def expectation(self, v: FockVector | None = None) -> complex:
        """``<A v, v>``; the vacuum state by default."""
        v = vacuum(self.basis) if v is None else v
        return inner_product(self @ v, v)


def commutator(a: FockOperator, b: FockOperator) -> FockOperator:
    return a @ b - b @ a


def identity(basis: FockBasis) -> FockOperator:
    return FockOperator(basis, sp.eye_array(basis.size, format="csr", dtype=complex))


def number_operator(basis: FockBasis) -> FockOperator:
    return FockOperator(basis, sp.diags_array(basis.degrees.astype(complex), format="csr"))


def degree_multiplier(basis: FockBasis, values: Sequence[complex]) -> FockOperator:
    """Degree-diagonal operator acting as ``values[k]`` on degree ``k``."""
    values = np.asarray(values, dtype=complex)
    if values.shape != (basis.D + 1,):
        raise ValueError(f"need {basis.D + 1} degree values")
    return FockOperator(basis, sp.diags_array(values[basis.degrees], format="csr"))


def _mode_vector(basis: FockBasis, xi) -> np.ndarray:
    xi = np.asarray(xi, dtype=complex)
    if xi.shape != (basis.d,):
        raise ValueError(f"mode vector must have length {basis.d}, got shape {xi.shape}")
    return xi


def _raise_matrix(basis: FockBasis, i: int) -> sp.csr_array:
    cols = np.flatnonzero(basis.raise_index[:, i] >= 0)
    rows = basis.raise_index[cols, i]
    return sp.csr_array((np.ones(len(cols)), (rows, cols)), shape=(basis.size, basis.size))


def _lower_matrix(basis: FockBasis, i: int) -> sp.csr_array:
    cols = np.flatnonzero(basis.lower_index[:, i] >= 0)
    rows = basis.lower_index[cols, i]
    data = basis.counts[cols, i].astype(float)
    return sp.csr_array((data, (rows, cols)), shape=(basis.size, basis.size))


def creation(basis: FockBasis, xi) -> FockOperator:
    """Symmetric creation ``x_xi``; ``x_{e_i}|m> = |m + delta_i>``, linear in ``xi``."""
    xi = _mode_vector(basis, xi)
    m = sp.csr_array((basis.size, basis.size), dtype=complex)
    for i in np.flatnonzero(xi):
        m = m + xi[i] * _raise_matrix(basis, i)
    return FockOperator(basis, m)


def annihilation(basis: FockBasis, xi) -> FockOperator:
    """``d/dxi``; ``d/de_i |m> = m_i |m - delta_i>``, conjugate-linear in ``xi``."""
    xi = _mode_vector(basis, xi)
    m = sp.csr_array((basis.size, basis.size), dtype=complex)
    for i in np.flatnonzero(xi):
        m = m + np.conj(xi[i]) * _lower_matrix(basis, i)
    return FockOperator(basis, m)


def field(basis: FockBasis, xi, conv: FieldConvention = DEFAULT_CONVENTION) -> FockOperator:
    """Field operator ``s(xi) = kappa (x_xi + d/dxi)``."""
    return conv.kappa * (creation(basis, xi) + annihilation(basis, xi))


def field_product(basis: FockBasis, xis: Sequence, conv: FieldConvention = DEFAULT_CONVENTION) -> FockOperator:
    """``s(xi_1) s(xi_2) ... s(xi_k)`` (leftmost factor applied last)."""
    out = identity(basis)
    for xi in xis:
        out = out @ field(basis, xi, conv)
    return out


def _apply_fields(basis: FockBasis, xis: Sequence, conv: FieldConvention) -> FockVector:
    v = vacuum(basis)
    for xi in reversed(list(xis)):
        v = field(basis, xi, conv) @ v
    return v


def moment(basis: FockBasis, xi, n: int, conv: FieldConvention = DEFAULT_CONVENTION) -> float:
    """Vacuum moment ``<s(xi)^n Omega, Omega>``.

    Needs ``D >= ceil(n/2)``: a path of ``n`` field steps that returns to the
    vacuum never climbs above degree ``n/2``, so the truncated value is exact.
    """
    if n < 0:
        raise PreconditionError("moment order must be non-negative")
    if basis.D < ceil(n / 2):
        raise PreconditionError(f"degree cap {basis.D} too small for moment of order {n}")
    v = _apply_fields(basis, [xi] * n, conv)
    return float(v.coeffs[0].real)


def mixed_moment(basis: FockBasis, xi, m: int, eta, n: int,
                 conv: FieldConvention = DEFAULT_CONVENTION, ortho_tol: float = 1e-12) -> float:
    """``<s(xi)^m s(eta)^n Omega, Omega>`` for orthogonal ``xi``, ``eta``."""
    xi = np.asarray(xi, dtype=complex)
    eta = np.asarray(eta, dtype=complex)
    if abs(np.vdot(eta, xi)) > ortho_tol * max(np.linalg.norm(xi) * np.linalg.norm(eta), 1.0):
        raise PreconditionError("mixed moments require orthogonal vectors")
    if m < 0 or n < 0:
        raise PreconditionError("moment orders must be non-negative")
    if basis.D < ceil((m + n) / 2):
        raise PreconditionError(f"degree cap {basis.D} too small for total order {m + n}")
    v = _apply_fields(basis, [xi] * m + [eta] * n, conv)
    return float(v.coeffs[0].real)


def second_quantize(basis: FockBasis, T) -> FockOperator:
    """``T^S = 1 + T + T^{.2} + ...`` acting degree by degree.

    Column ``m`` is built as ``x_{T e_i} T^S |m - delta_i>`` with ``i`` the first
    occupied mode, one degree block at a time.
    """
    T = np.asarray(T, dtype=complex)
    d = basis.d
    if T.shape != (d, d):
        raise ValueError(f"T must be {d}x{d}")
    raises = [_raise_matrix(basis, i) for i in range(d)]
    blocks = [np.ones((1, 1), dtype=complex)]
    first_mode = np.argmax(basis.counts > 0, axis=1)
    for k in range(1, basis.D + 1):
        sk, sprev = basis.degree_slice(k), basis.degree_slice(k - 1)
        block = np.zeros((sk.stop - sk.start, sk.stop - sk.start), dtype=complex)
        idx = np.arange(sk.start, sk.stop)
        for i in range(d):
            cols = idx[first_mode[idx] == i]
            if cols.size == 0:
                continue
            parents = basis.lower_index[cols, i] - sprev.start
            terms = [T[l, i] * raises[l][sk, sprev] for l in range(d) if T[l, i] != 0]
            if not terms:
                continue
            lift = terms[0]
            for t in terms[1:]:
                lift = lift + t
            block[:, cols - sk.start] = lift @ blocks[k - 1][:, parents]
        blocks.append(block)
    return FockOperator(basis, sp.block_diag(blocks, format="csr"))


def differential_second_quantize(basis: FockBasis, T) -> FockOperator:
    """Derivation ``dGamma(T) = sum_{j,i} T[j,i] x_{e_j} d/de_i``.

    On a monomial it replaces each factor ``e_i`` in turn by ``T e_i``; it kills
    the vacuum and equals the number operator for ``T = I``.
    """
    T = np.asarray(T, dtype=complex)
    d = basis.d
    if T.shape != (d, d):
        raise ValueError(f"T must be {d}x{d}")
    m = sp.csr_array((basis.size, basis.size), dtype=complex)
    lowers = [_lower_matrix(basis, i) for i in range(d)]
    for j in range(d):
        rj = _raise_matrix(basis, j)
        for i in range(d):
            if T[j, i] != 0:
                m = m + T[j, i] * (rj @ lowers[i])
    return FockOperator(basis, m)


def self_adjoint_residual(A: FockOperator) -> float:
    """Largest entry of ``A - A^dagger`` in the orthonormal frame.

    Formed as ``W A - (W A)^H`` so that exact self-adjointness gives exactly 0.
    """
    w = A.basis.weights
    WA = A.toarray() * w[:, None]
    diff = (WA - WA.conj().T) / np.sqrt(np.outer(w, w))
    return float(np.max(np.abs(diff), initial=0.0))


def op_exp(A: FockOperator, z: complex = 1.0, tol: float = 1e-13) -> FockOperator:
    """``exp(z A)``.

    Self-adjoint and skew-adjoint ``A`` go through a unitary eigendecomposition
    in the orthonormal frame; anything else uses Pade scaling-and-squaring.
    """
    n = A.basis.size
    if n > DENSE_CAP:
        raise ResourceLimitError(f"dense exponential of size {n} exceeds cap {DENSE_CAP}")
    s = A.basis.sqrt_weights
    B = A.orthonormal_matrix()
    scale = max(np.max(np.abs(B), initial=0.0), 1.0)
    herm = np.max(np.abs(B - B.conj().T), initial=0.0) <= tol * scale
    skew = not herm and np.max(np.abs(B + B.conj().T), initial=0.0) <= tol * scale
    if herm:
        lam, V = np.linalg.eigh((B + B.conj().T) / 2)
        E = (V * np.exp(z * lam)) @ V.conj().T
    elif skew:
        H = 1j * B
        lam, V = np.linalg.eigh((H + H.conj().T) / 2)
        E = (V * np.exp(-1j * z * lam)) @ V.conj().T
    else:
        E = scipy.linalg.expm(z * B)
    if not np.all(np.isfinite(E)):
        raise ConvergenceError("matrix exponential produced non-finite entries")
    return FockOperator(A.basis, (E / s[:, None]) * s[None, :])


def field_monomial_matrix(basis: FockBasis, conv: FieldConvention = DEFAULT_CONVENTION) -> np.ndarray:
    """Columns ``s(e_{i_1}) ... s(e_{i_k}) Omega`` for every occupation, in basis order.

    In graded order this matrix is upper triangular with diagonal ``kappa^k``:
    the top-degree term of the field monomial is the symmetric monomial itself.
    """
    eye = np.eye(basis.d)
    cols = []
    for m in basis.occupations:
        xis = [eye[i] for i in range(basis.d) for _ in range(m[i])]
        cols.append(_apply_fields(basis, xis, conv).coeffs)
    return np.array(cols).T
