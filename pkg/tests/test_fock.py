import itertools
from math import comb

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gaussact.fock import (
    BasisMismatchError,
    DegreeOverflowError,
    FockVector,
    ResourceLimitError,
    basis_vector,
    enumerate_basis,
    fock_tensor,
    inner_product,
    multichoose,
    symmetric_tensor,
    vacuum,
)

from oracles import renormalized_inner


def test_enumerate_small_cases():
    b = enumerate_basis(1, 2)
    assert b.occupations == ((0,), (1,), (2,))
    assert enumerate_basis(2, 2).size == 6
    assert enumerate_basis(3, 0).occupations == ((0, 0, 0),)


def test_d2_degree2_order():
    b = enumerate_basis(2, 2)
    assert b.occupations[3:] == ((2, 0), (1, 1), (0, 2))
    assert b.index((0, 0)) == 0


@pytest.mark.parametrize("d,D", [(1, 7), (2, 5), (3, 4), (5, 3)])
def test_size_matches_brute_force(d, D):
    brute = sum(1 for m in itertools.product(range(D + 1), repeat=d) if sum(m) <= D)
    b = enumerate_basis(d, D)
    assert b.size == brute == sum(multichoose(d, k) for k in range(D + 1))
    assert len(set(b.occupations)) == b.size
    assert list(b.degrees) == sorted(b.degrees)


def test_enumerate_is_deterministic_and_shared():
    assert enumerate_basis(3, 4) is enumerate_basis(3, 4)


def test_resource_cap():
    with pytest.raises(ResourceLimitError):
        enumerate_basis(16, 12)
    with pytest.raises(ResourceLimitError):
        enumerate_basis(3, 10, cap=50)
    assert comb(3 + 10, 10) > 50


@pytest.mark.parametrize("d,D", [(0, 2), (2, -1)])
def test_bad_arguments(d, D):
    with pytest.raises(ValueError):
        enumerate_basis(d, D)


def test_inner_product_examples():
    b = enumerate_basis(2, 3)
    om = vacuum(b)
    assert inner_product(om, om) == 1
    v = basis_vector(b, (2, 0))
    assert inner_product(v, v) == pytest.approx(2.0)
    w = basis_vector(b, (1, 1))
    assert inner_product(w, w) == pytest.approx(1.0)


@pytest.mark.parametrize("m", [(2, 0), (1, 1), (3, 0), (2, 1), (1, 1, 1), (2, 0, 1)])
def test_weights_against_tensor_oracle(m):
    d = len(m)
    e = np.eye(d)
    xs = [e[i] for i in range(d) for _ in range(m[i])]
    assert enumerate_basis(d, 3).weights[enumerate_basis(d, 3).index(m)] == pytest.approx(renormalized_inner(xs, xs).real)


def test_inner_product_basis_mismatch():
    with pytest.raises(BasisMismatchError):
        inner_product(vacuum(enumerate_basis(1, 2)), vacuum(enumerate_basis(1, 3)))


def test_symmetric_tensor_examples():
    b = enumerate_basis(2, 3)
    e1, e2 = np.eye(2)
    assert np.array_equal(symmetric_tensor(b, [e1]).coeffs, basis_vector(b, (1, 0)).coeffs)
    assert np.array_equal(symmetric_tensor(b, [e1, e1]).coeffs, basis_vector(b, (2, 0)).coeffs)
    t12 = symmetric_tensor(b, [e1, e2])
    assert np.array_equal(t12.coeffs, basis_vector(b, (1, 1)).coeffs)
    assert np.array_equal(t12.coeffs, symmetric_tensor(b, [e2, e1]).coeffs)


def test_symmetric_tensor_overflow():
    b = enumerate_basis(2, 2)
    with pytest.raises(DegreeOverflowError):
        symmetric_tensor(b, [np.ones(2)] * 3)


vec3 = st.lists(st.floats(-3, 3, allow_nan=False), min_size=3, max_size=3)


@settings(max_examples=40, deadline=None)
@given(st.lists(vec3, min_size=1, max_size=4), st.randoms())
def test_symmetric_tensor_permutation_invariant(xs, rnd):
    b = enumerate_basis(3, 4)
    perm = list(xs)
    rnd.shuffle(perm)
    assert np.array_equal(symmetric_tensor(b, xs).coeffs, symmetric_tensor(b, perm).coeffs)


@settings(max_examples=25, deadline=None)
@given(st.lists(vec3, min_size=1, max_size=3), st.lists(vec3, min_size=1, max_size=3))
def test_inner_product_matches_tensor_oracle(xs, ys):
    b = enumerate_basis(3, 3)
    got = inner_product(symmetric_tensor(b, xs), symmetric_tensor(b, ys))
    want = renormalized_inner(xs, ys)
    assert abs(got - want) <= 1e-9 * max(1.0, abs(want))


def test_graded_orthogonality_exhaustive():
    b = enumerate_basis(2, 4)
    rng = np.random.default_rng(3)
    q = np.linalg.qr(rng.standard_normal((2, 2)))[0]
    xi, eta = q[:, 0], q[:, 1]
    pairs = [(a, c) for a in range(5) for c in range(5 - a)]
    for (a, c), (a2, c2) in itertools.product(pairs, pairs):
        ip = inner_product(symmetric_tensor(b, [xi] * a + [eta] * c), symmetric_tensor(b, [xi] * a2 + [eta] * c2))
        if (a, c) != (a2, c2):
            assert abs(ip) <= 1e-12
        else:
            assert ip.real > 0


def test_positive_definite_weights():
    for d, D in [(1, 10), (3, 5), (6, 3)]:
        assert np.all(enumerate_basis(d, D).weights > 0)


def test_vector_algebra_and_truncation():
    b = enumerate_basis(2, 3)
    v = FockVector(b, np.arange(b.size))
    assert (v - v).norm() == 0
    assert np.array_equal((2 * v).coeffs, (v + v).coeffs)
    top = v.degree_part(3)
    assert np.all(top.coeffs[b.degrees != 3] == 0)
    assert np.array_equal(v.truncate(2).coeffs + top.coeffs, v.coeffs)
    with pytest.raises(ValueError):
        FockVector(b, np.zeros(3))


def test_fock_tensor_is_isometric():
    rng = np.random.default_rng(0)
    b1, b2 = enumerate_basis(1, 3), enumerate_basis(2, 2)
    v = FockVector(b1, rng.standard_normal(b1.size))
    w = FockVector(b2, rng.standard_normal(b2.size))
    t = fock_tensor(v, w)
    assert t.basis.d == 3
    assert t.norm() == pytest.approx(v.norm() * w.norm(), rel=1e-12)
