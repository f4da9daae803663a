import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import ortho_group

from gaussact.cohomology import (
    RepCocycle,
    coboundary,
    coboundary_fit,
    cocycle_space,
    extend,
    fixed_dimension,
    growth_probe,
    h1,
    relator_constraints,
    relator_residual,
)
from gaussact.group_rep import (
    FiniteGroup,
    GroupPresentation,
    OrthogonalRep,
    evaluate,
    reduce,
    regular_rep_ball,
    rotation,
    word_ball,
)

from oracles import brute_force_h1, cyclic_table

S3 = FiniteGroup([(1, 0, 2), (0, 2, 1)])
S3_PRES = GroupPresentation(2, ((1, 1), (2, 2), (1, 2) * 3))


def test_z_trivial():
    rep = h1(OrthogonalRep.trivial(1, 1), GroupPresentation.free(1))
    assert (rep.dimZ1, rep.dimB1, rep.dimH1) == (1, 0, 1)


def test_z_rotation_all_cocycles_are_coboundaries():
    rep = h1(OrthogonalRep((rotation(1.0),)), GroupPresentation.free(1))
    assert (rep.dimZ1, rep.dimB1, rep.dimH1) == (2, 2, 0)


@pytest.mark.parametrize("n,mat", [
    (2, -np.eye(1)),
    (2, np.eye(1)),
    (4, rotation(np.pi / 2)),
    (3, rotation(2 * np.pi / 3)),
])
def test_cyclic_groups_against_brute_force(n, mat):
    mats = [np.linalg.matrix_power(mat, k) for k in range(n)]
    want = brute_force_h1(cyclic_table(n), mats)
    rep = h1(OrthogonalRep((mat,)), GroupPresentation.cyclic(n))
    assert (rep.dimZ1, rep.dimB1, rep.dimH1) == want
    assert rep.dimH1 == 0


def test_s3_permutation_against_brute_force():
    pi = S3.permutation_rep()
    mats = [evaluate(pi, w) for w in S3.words]
    want = brute_force_h1(S3.table, mats)
    rep = h1(pi, S3_PRES)
    assert (rep.dimZ1, rep.dimB1, rep.dimH1) == want == (2, 2, 0)


@pytest.mark.parametrize("d", [1, 2, 3, 4])
def test_free_group_cocycles_unconstrained(d):
    rng = np.random.default_rng(d)
    mats = tuple(ortho_group.rvs(d, random_state=rng) if d > 1 else np.array([[-1.0]]) for _ in range(2))
    pi = OrthogonalRep(mats)
    rep = h1(pi, GroupPresentation.free(2))
    assert rep.dimZ1 == 2 * d
    assert rep.dimH1 == d + fixed_dimension(pi)


def test_report_json_shape():
    rep = h1(OrthogonalRep((rotation(np.pi / 2),)), GroupPresentation.cyclic(4))
    doc = rep.to_json()
    assert set(doc) == {"dimZ1", "dimB1", "dimH1", "singular_values", "basis"}
    assert all(isinstance(doc[k], int) for k in ("dimZ1", "dimB1", "dimH1"))
    assert len(doc["basis"]) == 2


def test_basis_cocycles_satisfy_relators():
    rep = cocycle_space(S3.permutation_rep(), S3_PRES)
    for b in rep.basis:
        assert relator_residual(b, S3_PRES) <= 1e-10


def test_relator_constraints_match_extend():
    rng = np.random.default_rng(0)
    pi = S3.permutation_rep()
    b = RepCocycle(pi, tuple(rng.standard_normal((2, 3))))
    C = relator_constraints(pi, S3_PRES)
    direct = np.concatenate([extend(b, r) for r in S3_PRES.relators])
    assert np.allclose(C @ b.flat(), direct, atol=1e-12)


words2 = st.lists(st.sampled_from([1, -1, 2, -2]), max_size=8)


@settings(max_examples=60, deadline=None)
@given(words2, words2, st.integers(0, 1000))
def test_extend_satisfies_cocycle_identity(u, v, seed):
    rng = np.random.default_rng(seed)
    pi = OrthogonalRep(tuple(ortho_group.rvs(3, random_state=rng) for _ in range(2)))
    b = RepCocycle(pi, tuple(rng.standard_normal((2, 3))))
    lhs = extend(b, u + v)
    rhs = evaluate(pi, u) @ extend(b, v) + extend(b, u)
    assert np.allclose(lhs, rhs, atol=1e-10)
    assert np.allclose(extend(b, reduce(u)), extend(b, u), atol=1e-10)


@settings(max_examples=40, deadline=None)
@given(words2, st.integers(0, 1000))
def test_coboundary_bounded_by_twice_eta(w, seed):
    rng = np.random.default_rng(seed)
    pi = OrthogonalRep(tuple(ortho_group.rvs(3, random_state=rng) for _ in range(2)))
    eta = rng.standard_normal(3)
    b = coboundary(pi, eta)
    assert np.linalg.norm(extend(b, w)) <= 2 * np.linalg.norm(eta) + 1e-10


def test_cohomologous_cocycles_stay_close():
    rng = np.random.default_rng(3)
    pi = OrthogonalRep(tuple(ortho_group.rvs(3, random_state=rng) for _ in range(2)))
    b = RepCocycle(pi, tuple(rng.standard_normal((2, 3))))
    eta = rng.standard_normal(3)
    b2 = b + coboundary(pi, eta)
    for w in word_ball(2, 3):
        assert np.linalg.norm(extend(b2, w) - extend(b, w)) <= 2 * np.linalg.norm(eta) + 1e-10


def test_fit_recovers_planted_eta():
    rng = np.random.default_rng(4)
    pi = OrthogonalRep(tuple(ortho_group.rvs(3, random_state=rng) for _ in range(2)))
    eta = rng.standard_normal(3)
    fit = coboundary_fit(coboundary(pi, eta))
    assert fit.max_residual <= 1e-9
    assert not fit.rank_deficient
    assert np.allclose(fit.eta, eta, atol=1e-9)


def test_fit_rank_deficient_with_fixed_vectors():
    pi = OrthogonalRep((np.diag([1.0, -1.0]),))
    fit = coboundary_fit(coboundary(pi, [0.0, 2.0]))
    assert fit.rank_deficient
    assert fit.max_residual <= 1e-12
    assert np.allclose(fit.eta, [0.0, 2.0])


def test_fit_fails_for_genuine_cocycle():
    b = RepCocycle(OrthogonalRep.trivial(1, 1), (np.ones(1),))
    assert coboundary_fit(b).max_residual > 0.1
    with pytest.raises(ValueError):
        coboundary_fit(b, words=[])


def test_growth_linear_for_trivial_rep():
    b = RepCocycle(OrthogonalRep.trivial(1, 1), (np.ones(1),))
    assert growth_probe(b, 5) == [(r, float(r)) for r in range(6)]


def test_growth_sqrt_for_regular_rep_of_free_group():
    pi = regular_rep_ball(GroupPresentation.free(2), 6)
    e = np.zeros(pi.d)
    e[0] = 1.0
    b = RepCocycle(pi, (e, np.zeros(pi.d)))
    probe = growth_probe(b, 5)
    assert np.allclose([m for _, m in probe], np.sqrt(np.arange(6)), atol=1e-12)


def test_growth_bounded_for_coboundary_of_free_group():
    pi = regular_rep_ball(GroupPresentation.free(2), 4)
    e = np.zeros(pi.d)
    e[0] = 1.0
    b = coboundary(pi, -e)
    assert max(m for _, m in growth_probe(b, 3)) == pytest.approx(np.sqrt(2))
    fit = coboundary_fit(b, word_ball(2, 2))
    assert fit.max_residual <= 1e-9
    assert np.allclose(fit.eta, -e, atol=1e-9)


def test_growth_on_finite_group_is_bounded():
    rng = np.random.default_rng(5)
    b = RepCocycle(S3.permutation_rep(), tuple(rng.standard_normal((2, 3))))
    rep = h1(S3.permutation_rep(), S3_PRES)
    bz = rep.basis[0]
    probe = growth_probe(bz, 6, table=S3)
    assert probe[-1][1] == probe[3][1]
    assert len(probe) == 7
    assert relator_residual(b, S3_PRES) > 1e-3
