"""Truncated symmetric Fock space over a d-dimensional real Hilbert space.

Basis elements are occupation tuples ``m = (m_1, ..., m_d)`` standing for the
symmetric monomial ``e_1^{m_1} ... e_d^{m_d}`` (symmetric tensor product, no
normalisation).  With the n!-renormalised inner product these monomials are
orthogonal with ``<e^m, e^m> = prod_i m_i!``.

Basis order is graded (total degree), then lexicographic on the sorted
multiset of mode indices, so each degree block is a contiguous slice and the
vacuum sits at index 0.
"""

from __future__ import annotations

import itertools
from functools import cached_property, lru_cache
from math import comb, factorial, prod
from typing import Sequence

import numpy as np

DEFAULT_BASIS_CAP = 2_000_000

Occupation = tuple[int, ...]


class ResourceLimitError(RuntimeError):
    """Raised when a requested truncation exceeds a configured size cap."""


class BasisMismatchError(ValueError):
    pass


class DegreeOverflowError(ValueError):
    pass


def multichoose(n: int, k: int) -> int:
    return comb(n + k - 1, k)


def basis_size(d: int, D: int) -> int:
    # sum_{k<=D} multichoose(d, k) == comb(d + D, D)
    return comb(d + D, D)


class FockBasis:
    """Occupation basis of the symmetric Fock space truncated at degree ``D``.

    Instances are treated as immutable; build them with :func:`enumerate_basis`.
    """

    def __init__(self, d: int, D: int, occupations: Sequence[Occupation]):
        self.d = d
        self.D = D
        self.occupations: tuple[Occupation, ...] = tuple(occupations)
        self._index = {m: i for i, m in enumerate(self.occupations)}
        self.degrees = np.array([sum(m) for m in self.occupations], dtype=np.int64)
        self.degrees.setflags(write=False)
        offsets = np.searchsorted(self.degrees, np.arange(D + 2))
        self._offsets = tuple(int(o) for o in offsets)

    def __repr__(self) -> str:
        return f"FockBasis(d={self.d}, D={self.D}, size={self.size})"

    def __len__(self) -> int:
        return len(self.occupations)

    @property
    def size(self) -> int:
        return len(self.occupations)

    def index(self, m: Sequence[int]) -> int:
        try:
            return self._index[tuple(int(c) for c in m)]
        except KeyError:
            raise KeyError(f"occupation {tuple(m)} not in {self!r}") from None

    def __contains__(self, m) -> bool:
        return tuple(m) in self._index

    def degree_slice(self, k: int) -> slice:
        """Contiguous index range of the degree-``k`` block."""
        if not 0 <= k <= self.D:
            raise ValueError(f"degree {k} outside 0..{self.D}")
        return slice(self._offsets[k], self._offsets[k + 1])

    def degree_mask(self, max_degree: int) -> np.ndarray:
        return self.degrees <= max_degree

    @cached_property
    def counts(self) -> np.ndarray:
        arr = np.array(self.occupations, dtype=np.int64).reshape(self.size, self.d)
        arr.setflags(write=False)
        return arr

    @cached_property
    def weights_exact(self) -> tuple[int, ...]:
        return tuple(prod(factorial(c) for c in m) for m in self.occupations)

    @cached_property
    def weights(self) -> np.ndarray:
        """Squared norms ``prod_i m_i!`` of the monomial basis vectors."""
        w = np.array([float(x) for x in self.weights_exact])
        w.setflags(write=False)
        return w

    @cached_property
    def sqrt_weights(self) -> np.ndarray:
        w = np.sqrt(self.weights)
        w.setflags(write=False)
        return w

    @cached_property
    def raise_index(self) -> np.ndarray:
        """``raise_index[j, i]`` is the index of ``m_j + delta_i`` or -1 past the cap."""
        out = np.full((self.size, self.d), -1, dtype=np.int64)
        for j, m in enumerate(self.occupations):
            if sum(m) == self.D:
                continue
            for i in range(self.d):
                up = list(m)
                up[i] += 1
                out[j, i] = self._index[tuple(up)]
        out.setflags(write=False)
        return out

    @cached_property
    def lower_index(self) -> np.ndarray:
        """``lower_index[j, i]`` is the index of ``m_j - delta_i`` or -1 if ``m_i = 0``."""
        out = np.full((self.size, self.d), -1, dtype=np.int64)
        up = self.raise_index
        for j in range(self.size):
            for i in range(self.d):
                if up[j, i] >= 0:
                    out[up[j, i], i] = j
        out.setflags(write=False)
        return out


@lru_cache(maxsize=64)
def _enumerate(d: int, D: int) -> FockBasis:
    occupations = []
    for k in range(D + 1):
        for modes in itertools.combinations_with_replacement(range(d), k):
            m = [0] * d
            for i in modes:
                m[i] += 1
            occupations.append(tuple(m))
    return FockBasis(d, D, occupations)


def enumerate_basis(d: int, D: int, cap: int = DEFAULT_BASIS_CAP) -> FockBasis:
    """All occupations of ``d`` modes with total degree ``<= D``.

    Raises
    ------
    ResourceLimitError
        If the basis would have more than ``cap`` elements.
    """
    if d < 1:
        raise ValueError(f"mode count must be positive, got {d}")
    if D < 0:
        raise ValueError(f"degree cap must be non-negative, got {D}")
    n = basis_size(d, D)
    if n > cap:
        raise ResourceLimitError(f"basis size {n} for d={d}, D={D} exceeds cap {cap}")
    return _enumerate(int(d), int(D))


class FockVector:
    """Coefficient vector over a :class:`FockBasis` (monomial coordinates)."""

    __slots__ = ("basis", "coeffs")

    def __init__(self, basis: FockBasis, coeffs):
        coeffs = np.array(coeffs, dtype=complex)
        if coeffs.shape != (basis.size,):
            raise ValueError(f"expected {basis.size} coefficients, got shape {coeffs.shape}")
        coeffs.setflags(write=False)
        self.basis = basis
        self.coeffs = coeffs

    def __repr__(self) -> str:
        return f"FockVector({self.basis!r}, norm={self.norm():.6g})"

    def _check(self, other: "FockVector") -> None:
        if other.basis is not self.basis:
            raise BasisMismatchError("vectors live on different bases")

    def __add__(self, other: "FockVector") -> "FockVector":
        self._check(other)
        return FockVector(self.basis, self.coeffs + other.coeffs)

    def __sub__(self, other: "FockVector") -> "FockVector":
        self._check(other)
        return FockVector(self.basis, self.coeffs - other.coeffs)

    def __neg__(self) -> "FockVector":
        return FockVector(self.basis, -self.coeffs)

    def __mul__(self, c) -> "FockVector":
        return FockVector(self.basis, c * self.coeffs)

    __rmul__ = __mul__

    def norm(self) -> float:
        return float(np.sqrt(inner_product(self, self).real))

    def degree_part(self, k: int) -> "FockVector":
        out = np.zeros_like(self.coeffs)
        sl = self.basis.degree_slice(k)
        out[sl] = self.coeffs[sl]
        return FockVector(self.basis, out)

    def truncate(self, max_degree: int) -> "FockVector":
        return FockVector(self.basis, np.where(self.basis.degrees <= max_degree, self.coeffs, 0))

    def conj(self) -> "FockVector":
        return FockVector(self.basis, self.coeffs.conj())

    def orthonormal_coords(self) -> np.ndarray:
        """Coordinates in the orthonormal basis ``e^m / sqrt(prod m_i!)``."""
        return self.coeffs * self.basis.sqrt_weights


def vacuum(basis: FockBasis) -> FockVector:
    c = np.zeros(basis.size, dtype=complex)
    c[0] = 1.0
    return FockVector(basis, c)


def basis_vector(basis: FockBasis, m: Sequence[int]) -> FockVector:
    c = np.zeros(basis.size, dtype=complex)
    c[basis.index(m)] = 1.0
    return FockVector(basis, c)


def inner_product(v: FockVector, w: FockVector) -> complex:
    """Renormalised inner product, linear in ``v`` and conjugate-linear in ``w``."""
    if v.basis is not w.basis:
        raise BasisMismatchError("inner product of vectors on different bases")
    return complex(np.sum(v.coeffs * w.coeffs.conj() * v.basis.weights))


def symmetric_tensor(basis: FockBasis, xs: Sequence[Sequence[complex]]) -> FockVector:
    """Expand ``xi_1 . xi_2 ... xi_n`` (symmetric product) in monomial coordinates.

    Each ``xi`` is a length-``d`` vector; the product of the linear forms
    ``sum_i xi[i] e_i`` is multiplied out as a commutative polynomial.
    """
    if len(xs) > basis.D:
        raise DegreeOverflowError(f"{len(xs)} factors exceed degree cap {basis.D}")
    factors = []
    for xi in xs:
        xi = np.asarray(xi, dtype=complex)
        if xi.shape != (basis.d,):
            raise ValueError(f"mode vector must have length {basis.d}")
        factors.append(xi)
    # canonical factor order makes the result bitwise independent of argument order
    factors.sort(key=lambda v: tuple(itertools.chain.from_iterable((c.real, c.imag) for c in v)))
    poly: dict[Occupation, complex] = {(0,) * basis.d: 1.0 + 0j}
    for xi in factors:
        nxt: dict[Occupation, complex] = {}
        for m, c in poly.items():
            for i in np.flatnonzero(xi):
                up = list(m)
                up[i] += 1
                key = tuple(up)
                nxt[key] = nxt.get(key, 0) + c * xi[i]
        poly = nxt
    coeffs = np.zeros(basis.size, dtype=complex)
    for m, c in poly.items():
        coeffs[basis.index(m)] = c
    return FockVector(basis, coeffs)


def fock_tensor(v: FockVector, w: FockVector, joint: FockBasis | None = None) -> FockVector:
    """Image of ``v (x) w`` under S(H1) (x) S(H2) = S(H1 + H2).

    Monomials concatenate, ``|m> (x) |n> -> |m, n>``; weights multiply, so the
    map is isometric.  The joint basis needs degree cap ``>= v.D + w.D`` for no
    loss.
    """
    d = v.basis.d + w.basis.d
    if joint is None:
        joint = enumerate_basis(d, v.basis.D + w.basis.D)
    if joint.d != d:
        raise BasisMismatchError(f"joint basis must have {d} modes")
    out = np.zeros(joint.size, dtype=complex)
    nz_v = np.flatnonzero(v.coeffs)
    nz_w = np.flatnonzero(w.coeffs)
    for i in nz_v:
        mi = v.basis.occupations[i]
        for j in nz_w:
            key = mi + w.basis.occupations[j]
            if sum(key) <= joint.D:
                out[joint.index(key)] += v.coeffs[i] * w.coeffs[j]
    return FockVector(joint, out)
