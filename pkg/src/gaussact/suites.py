"""Experiment suites run by the command-line interface.

Each suite takes a validated parameter dict and returns a :class:`SuiteResult`
holding named checks (residual against tolerance) and residual tables.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from math import ceil
from typing import Callable

import numpy as np
from scipy.stats import ortho_group

from . import bimodule as bm
from .cohomology import RepCocycle, coboundary, coboundary_fit, fixed_dimension, growth_probe, h1, relator_residual
from .dynamics import (
    DeformationReport,
    DoubledCtx,
    GaussianActionCtx,
    cocycle_identity_residual,
    deformation_budget,
    deformation_correlation,
    expectation_delta_squared,
    gaussian_action,
    invariance_residual,
    invariant_unitary,
    malleability_axioms,
    ou_closed_formula,
    ou_resolvent,
    ou_semigroup,
    predicted_correlation,
    ps_trace,
    random_skew,
    smooth_by_kernel,
)
from .fock import enumerate_basis, inner_product, symmetric_tensor
from .group_rep import FiniteGroup, GroupPresentation, OrthogonalRep, direct_sum, load_rep, rotation
from .torus import TorusGrid, torus_deformation
from .wick import mixed_moment, moment

MONOTONE_FLOOR = 1e-14


class ConfigError(ValueError):
    pass


@dataclass
class Check:
    name: str
    residual: float
    tolerance: float
    passed: bool | None = None

    def __post_init__(self):
        if self.passed is None:
            self.passed = bool(np.isfinite(self.residual) and self.residual <= self.tolerance)

    def to_json(self) -> dict:
        return {"name": self.name, "pass": self.passed, "residual": float(self.residual), "tolerance": float(self.tolerance)}


@dataclass
class SuiteResult:
    checks: list[Check] = field(default_factory=list)
    tables: dict[str, DeformationReport] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, name: str, residual: float, tolerance: float) -> Check:
        c = Check(name, float(residual), float(tolerance))
        self.checks.append(c)
        return c

    def require(self, name: str, ok: bool, residual: float = 0.0) -> Check:
        c = Check(name, float(residual), 0.0, bool(ok))
        self.checks.append(c)
        return c


def pmap(fn: Callable, items, parallel: bool) -> list:
    items = list(items)
    if not parallel or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor() as ex:
        return list(ex.map(fn, items))


def double_factorial(n: int) -> int:
    return int(np.prod(np.arange(n, 0, -2))) if n > 0 else 1


def gaussian_moment(n: int) -> int:
    return 0 if n % 2 else double_factorial(n - 1)


def _unit(rng: np.random.Generator, d: int) -> np.ndarray:
    v = rng.standard_normal(d)
    return v / np.linalg.norm(v)


def suite_moments(p: dict, seed: int, parallel: bool) -> SuiteResult:
    out = SuiteResult()
    d, D, n_max, tol = p["d"], p["D"], p["n_max"], p["tol"]
    if n_max > 2 * D:
        raise ConfigError(f"n_max={n_max} needs D >= {ceil(n_max / 2)}")
    basis = enumerate_basis(d, D)
    xi = _unit(np.random.default_rng(seed), d)
    ns = list(range(n_max + 1))
    measured = pmap(lambda n: moment(basis, xi, n), ns, parallel)
    for n, m in zip(ns, measured):
        out.add(f"moment_n={n}", abs(m - gaussian_moment(n)), tol)
    out.tables["moments"] = DeformationReport(ns, measured, [gaussian_moment(n) for n in ns], label="moment")
    if d >= 2:
        e = np.eye(d)
        worst = 0.0
        for m in range(n_max + 1):
            for n in range(n_max + 1 - m):
                val = mixed_moment(basis, e[0], m, e[1], n)
                worst = max(worst, abs(val - gaussian_moment(m) * gaussian_moment(n)))
        out.add("mixed_moment_factorization", worst, tol)
    return out


def _random_orthogonal(rng: np.random.Generator, d: int) -> np.ndarray:
    if d == 1:
        return np.array([[rng.choice([-1.0, 1.0])]])
    return ortho_group.rvs(d, random_state=rng)


def standard_cases(seed: int) -> list[tuple[str, GroupPresentation, OrthogonalRep, dict]]:
    """Named (presentation, representation, expected dimensions) cases."""
    rng = np.random.default_rng(seed)
    s3 = FiniteGroup([(1, 0, 2), (0, 2, 1)])
    cases = [
        ("Z_trivial", GroupPresentation(1), OrthogonalRep.trivial(1, 1), {"dimZ1": 1, "dimB1": 0, "dimH1": 1}),
        ("Z_rotation", GroupPresentation(1), OrthogonalRep((rotation(1.0),)), {"dimZ1": 2, "dimB1": 2, "dimH1": 0}),
        ("Z2_sign", GroupPresentation.cyclic(2), OrthogonalRep((-np.eye(1),)), {"dimH1": 0}),
        ("Z4_rotation", GroupPresentation.cyclic(4), OrthogonalRep((rotation(np.pi / 2),)), {"dimZ1": 2, "dimB1": 2, "dimH1": 0}),
        ("S3_permutation", GroupPresentation(2, ((1, 1), (2, 2), (1, 2) * 3)), s3.permutation_rep(), {"dimH1": 0}),
    ]
    for d in range(1, 5):
        pi = OrthogonalRep((_random_orthogonal(rng, d), _random_orthogonal(rng, d)))
        cases.append((f"F2_d{d}", GroupPresentation.free(2), pi, {"dimZ1": 2 * d, "dimH1": d + fixed_dimension(pi)}))
    return cases


def suite_cohomology(p: dict, seed: int, parallel: bool) -> SuiteResult:
    out = SuiteResult()
    tol = p["tol"]
    cases = standard_cases(seed)
    if p["rep_file"]:
        g, pi = load_rep(p["rep_file"])
        cases.append(("rep_file", g, pi, {}))
    for name, g, pi, expected in cases:
        rep = h1(pi, g)
        for key, val in expected.items():
            got = getattr(rep, key)
            out.require(f"{name}_{key}", got == val, abs(got - val))
        worst = max((relator_residual(b, g) for b in rep.basis), default=0.0)
        out.add(f"{name}_Z1_relator_consistency", worst, tol)
    rng = np.random.default_rng(seed)
    pi = OrthogonalRep(tuple(_random_orthogonal(rng, 3) for _ in range(2)))
    eta0 = rng.standard_normal(3)
    fit = coboundary_fit(coboundary(pi, eta0))
    out.add("coboundary_fit_planted", fit.max_residual, p["fit_tol"])
    R = p["growth_radius"]
    b = RepCocycle(OrthogonalRep.trivial(1, 1), (np.ones(1),))
    probe = growth_probe(b, R)
    out.tables["growth_Z_trivial"] = DeformationReport(
        [r for r, _ in probe], [m for _, m in probe], [float(r) for r, _ in probe], label="growth")
    out.add("growth_Z_trivial", max(abs(m - r) for r, m in probe), tol)
    if p["cocycle_file"]:
        if not p["rep_file"]:
            raise ConfigError("cocycle_file needs rep_file")
        with open(p["cocycle_file"]) as fh:
            doc = json.load(fh)
        g, pi = load_rep(p["rep_file"])
        bc = RepCocycle(pi, tuple(np.asarray(v, dtype=float) for v in doc["values"]))
        out.add("cocycle_file_relators", relator_residual(bc, g), tol)
        probe = growth_probe(bc, R)
        out.tables["growth_cocycle_file"] = DeformationReport(
            [r for r, _ in probe], [m for _, m in probe], [float("nan")] * len(probe), label="growth")
    return out


def suite_ps_trace(p: dict, seed: int, parallel: bool) -> SuiteResult:
    out = SuiteResult()
    norms = p["norms"]
    measured = pmap(ps_trace, norms, parallel)
    predicted = [float(np.exp(-nb ** 2 / 2)) for nb in norms]
    for nb, m, q in zip(norms, measured, predicted):
        out.add(f"ps_trace_norm={nb}", abs(m - q), p["tol"])
    out.tables["ps_trace"] = DeformationReport(list(norms), measured, predicted, label="ps_trace")
    # omega_{a a} = omega_a sigma_a(omega_a) on Z with ||b(a)|| = 1
    reps = {
        "trivial": (OrthogonalRep.trivial(1, 1), np.ones(1)),
        "trivial+rotation": (direct_sum(OrthogonalRep.trivial(1, 1), OrthogonalRep((rotation(1.0),))),
                             np.array([0.6, 0.8, 0.0])),
    }
    if len(p["cocycle_D"]) != len(p["cocycle_tol"]):
        raise ConfigError("cocycle_D and cocycle_tol must have the same length")
    for name, (pi, v) in reps.items():
        b = RepCocycle(pi, (v,))
        for D, tol in zip(p["cocycle_D"], p["cocycle_tol"]):
            r = cocycle_identity_residual(GaussianActionCtx(pi, enumerate_basis(pi.d, D)), b, (1,), (1,))
            out.add(f"cocycle_identity_{name}_D={D}", r, tol)
    return out


def suite_deformation_decay(p: dict, seed: int, parallel: bool) -> SuiteResult:
    out = SuiteResult()
    ts = p["t_grid"] if p["t_grid"] else list(np.linspace(0, np.pi, p["t_points"]))
    D_lo, D_hi = p["monotone_D"]
    for nb in p["norms"]:
        D = deformation_budget(nb)
        measured = pmap(lambda t: deformation_correlation(nb, t, D), ts, parallel)
        rep = DeformationReport(list(ts), measured, [predicted_correlation(nb, t) for t in ts],
                                label=f"norm_b={nb}", meta={"D": D})
        out.tables[f"decay_norm={nb}"] = rep
        for t, r in zip(ts, rep.residuals):
            out.add(f"decay_norm={nb}_t={t:.6f}", r, p["tol"])
        worst = 0.0
        for t in ts:
            q = predicted_correlation(nb, t)
            lo = abs(deformation_correlation(nb, t, D_lo) - q)
            hi = abs(deformation_correlation(nb, t, D_hi) - q)
            worst = max(worst, hi - lo)
        out.add(f"monotone_D{D_lo}_D{D_hi}_norm={nb}", max(worst, 0.0), MONOTONE_FLOOR)
    return out


def suite_semigroup(p: dict, seed: int, parallel: bool) -> SuiteResult:
    out = SuiteResult()
    d, D, t, s, tol = p["d"], p["D"], p["t"], p["s"], p["tol"]
    basis = enumerate_basis(d, D)
    rng = np.random.default_rng(seed)
    lhs = (ou_semigroup(basis, t) @ ou_semigroup(basis, s)).toarray()
    # e^{-kt} e^{-ks} and e^{-k(t+s)} agree to double rounding
    out.add("semigroup_law", np.abs(lhs - ou_semigroup(basis, t + s).toarray()).max(), 1e-15)
    k = basis.degrees
    for a in p["alphas"]:
        Z = ou_resolvent(basis, a).toarray().diagonal()
        out.add(f"resolvent_alpha={a}", np.abs(Z - np.sqrt(a / (a + k))).max(), 0.0)
        comm = (ou_resolvent(basis, a) @ ou_semigroup(basis, t) - ou_semigroup(basis, t) @ ou_resolvent(basis, a))
        out.add(f"resolvent_commutes_alpha={a}", np.abs(comm.toarray()).max(), 0.0)
    out.add("resolvent_alpha=1_degree3", abs(np.sqrt(1 / (1 + 3)) - 0.5), 0.0)
    pi = OrthogonalRep((_random_orthogonal(rng, d),))
    ctx = GaussianActionCtx(pi, basis)
    U = gaussian_action(ctx, (1,))
    Phi = ou_semigroup(basis, t)
    out.add("commutes_with_gaussian_action", np.abs((U @ Phi - Phi @ U).orthonormal_matrix()).max(), 0.0)
    e = np.eye(d)
    worst = 0.0
    for kk in range(1, min(p["k_max"], d, D) + 1):
        Q = np.linalg.qr(rng.standard_normal((d, d)))[0]
        l, r = ou_closed_formula(basis, list(Q.T[:kk]), t)
        worst = max(worst, (l - r).norm())
    out.add("closed_formula_orthogonal", worst, tol)
    # s(e)^3 Omega = e^3 + 3e mixes degrees 3 and 1, which the formula ignores
    l, r = ou_closed_formula(basis, [e[0]] * 3, t)
    out.require("closed_formula_repeated_vector_differs", (l - r).norm() > 1e-6, (l - r).norm())
    dctx = DoubledCtx.build(GaussianActionCtx(pi, enumerate_basis(d, 1)), min(D, p["k_max"]))
    worst = 0.0
    for kk in range(1, min(p["k_max"], d, dctx.basis.D) + 1):
        l, r = expectation_delta_squared(dctx, list(e[:kk]))
        worst = max(worst, (l - r).norm())
    out.add("expectation_delta_squared", worst, tol)
    ts = [0.0, 0.25, 0.5, 1.0, 2.0]
    v = symmetric_tensor(basis, [e[0], e[1 % d]])
    measured = [inner_product(ou_semigroup(basis, tt) @ v, v) / inner_product(v, v) for tt in ts]
    out.tables["ou_degree2"] = DeformationReport(ts, measured, [np.exp(-2 * tt) for tt in ts], label="ou")
    return out


def suite_smooth_identity(p: dict, seed: int, parallel: bool) -> SuiteResult:
    out = SuiteResult()
    rng = np.random.default_rng(seed)
    Gs = [random_skew(rng, int(rng.integers(2, p["n_max"] + 1))) for _ in range(p["count"])]
    jobs = [(i, G, t) for i, G in enumerate(Gs) for t in p["ts"]]
    results = pmap(lambda job: smooth_by_kernel(job[1], job[2]), jobs, parallel)
    for (i, G, t), r in zip(jobs, results):
        out.add(f"kernel_G{i}_n={G.shape[0]}_t={t}", r.kernel_residual, p["tol"])
        out.add(f"derivative_G{i}_n={G.shape[0]}_t={t}", r.derivative_residual, p["tol"])
    r = smooth_by_kernel(np.array([[0.0, 1.0], [-1.0, 0.0]]), 1.0)
    out.add("rotation_t=1", np.abs(r.lhs - np.exp(-1) * np.eye(2)).max(), p["tol"])
    return out


def suite_malleable_torus(p: dict, seed: int, parallel: bool) -> SuiteResult:
    out = SuiteResult()
    tol = p["tol"]
    pi = OrthogonalRep((rotation(p["theta"]),))
    dctx = DoubledCtx.build(GaussianActionCtx(pi, enumerate_basis(2, 1)), p["D"])
    for t in p["ts"]:
        rep = malleability_axioms(dctx, t, tol=tol)
        for k, v in rep.residuals.items():
            out.add(f"gaussian_{k}_t={t}", v, tol)
    grid = TorusGrid(p["n"])
    reports = pmap(lambda t: torus_deformation(grid, t, tol=tol), p["ts"], parallel)
    for t, rep in zip(p["ts"], reports):
        for k, v in rep.residuals.items():
            out.add(f"torus_{k}_t={t}", v, tol)
    means = [r.zero_mode_mean for r in reports]
    out.tables["torus_zero_mode_mean"] = DeformationReport(
        list(p["ts"]), means, [float(np.sinc(t)) for t in p["ts"]], label="zero_mode_mean")
    return out


def suite_bimodule(p: dict, seed: int, parallel: bool) -> SuiteResult:
    out = SuiteResult()
    d, Dp, tol = p["d"], p["Dp"], p["tol"]
    rng = np.random.default_rng(seed)
    space = bm.BimoduleSpace(d, Dp)
    safe = np.tile(space.basis.degrees <= Dp - 2, d)
    worst = 0.0
    for _ in range(5):
        L = bm.left_action(space, rng.standard_normal(d)).dense()
        R = bm.right_action(space, rng.standard_normal(d)).dense()
        worst = max(worst, np.abs((L @ R - R @ L)[:, safe]).max())
    out.add("left_right_commute", worst, tol)
    iso = max(abs(bm.derivation_delta_beta(space, [x]).norm() - np.linalg.norm(x))
              for x in rng.standard_normal((p["samples"], d)))
    out.add("delta_isometry", iso, p["isometry_tol"])
    xs = list(rng.standard_normal((3, d)))
    a = bm.delta_tree(space, ((xs[0], xs[1]), xs[2]))
    b = bm.delta_tree(space, (xs[0], (xs[1], xs[2])))
    out.add("bracketing_independence", (a - b).norm(), tol)
    c = [complex(z) for z in rng.standard_normal(2) + 1j * rng.standard_normal(2)]
    words = [xs[:2], xs]
    da = bm.delta_combination(space, [(c[0], words[0]), (c[1], words[1])])
    dstar = bm.delta_combination(space, [(np.conj(c[0]), words[0][::-1]), (np.conj(c[1]), words[1][::-1])])
    out.add("delta_real", (dstar - da.conj()).norm(), tol)
    swap = np.eye(d)[:, [1, 0] + list(range(2, d))] if d >= 2 else np.eye(d)
    out.add("covariance_permutation", bm.covariance_check(swap, [np.eye(d)[0]], p["Dp_cov"]), 0.0)
    if d >= 2:
        T = np.eye(d)
        T[:2, :2] = rotation(p["rotation"])
        out.add("covariance_rotation", bm.covariance_check(T, list(np.eye(d)[:2]), p["Dp_cov"]), p["covariance_tol"])
    worst = 0
    for i in range(p["leibniz_degree"] + 1):
        for j in range(p["leibniz_degree"] + 1):
            f = np.zeros(i + 1, dtype=np.int64)
            f[i] = 1
            g = np.zeros(j + 1, dtype=np.int64)
            g[j] = 1
            worst = max(worst, int(np.abs(bm.leibniz_residual(f, g)).max()))
    out.require("leibniz_exact", worst == 0, worst)
    polys = p["polys"]
    results = pmap(lambda f: bm.dirichlet_check(f, p["mc_samples"], seed), polys, parallel)
    for i, r in enumerate(results):
        out.require(f"dirichlet_mc_3sigma_{i}", bool(r.mc_agrees), abs(r.value - r.mc_mean))
    out.tables["dirichlet"] = DeformationReport(
        list(range(len(polys))), [r.mc_mean for r in results], [r.value for r in results], label="dirichlet")
    return out


def suite_invariant_unitary(p: dict, seed: int, parallel: bool) -> SuiteResult:
    out = SuiteResult()
    pi = OrthogonalRep((rotation(p["theta"]),))
    ctx = GaussianActionCtx(pi, enumerate_basis(2, p["D"]))
    u = invariant_unitary(ctx, np.eye(2), p["lam"])
    out.add("invariance", invariance_residual(ctx, u), p["tol"])
    tau = abs(u.expectation())
    out.add("nontrivial_trace", max(tau - (1 - p["margin"]), 0.0), 0.0)
    ctx1 = GaussianActionCtx(OrthogonalRep.trivial(1, 1), enumerate_basis(1, p["D"]))
    u1 = invariant_unitary(ctx1, np.eye(1), p["lam"])
    out.add("trivial_rep_invariance", invariance_residual(ctx1, u1), 0.0)
    out.tables["invariant_unitary"] = DeformationReport([p["theta"]], [u.expectation()], [float("nan")], label="tau_u")
    return out


SUITES: dict[str, tuple[Callable, dict]] = {
    "moments": (suite_moments, {"d": 1, "D": 5, "n_max": 8, "tol": 1e-10}),
    "cohomology": (suite_cohomology, {"tol": 1e-9, "fit_tol": 1e-9, "growth_radius": 6,
                                      "rep_file": "", "cocycle_file": ""}),
    "ps-trace": (suite_ps_trace, {"norms": [0.5, 1.0, 2.0], "tol": 1e-6, "cocycle_D": [12, 16],
                                  "cocycle_tol": [1e-3, 1e-5]}),
    "deformation-decay": (suite_deformation_decay, {"norms": [0.5, 1.0, 2.0], "t_grid": [], "t_points": 5,
                                                    "tol": 1e-5, "monotone_D": [12, 16]}),
    "semigroup": (suite_semigroup, {"d": 4, "D": 5, "t": 0.3, "s": 0.7, "alphas": [0.5, 1.0, 4.0],
                                    "k_max": 4, "tol": 1e-10}),
    "smooth-identity": (suite_smooth_identity, {"count": 10, "n_max": 6, "ts": [0.1, 1.0], "tol": 1e-6}),
    "malleable-torus": (suite_malleable_torus, {"theta": 1.0, "D": 4, "n": 256, "ts": [0.0, 0.37, 1.0, 1.5],
                                                "tol": 1e-12}),
    "bimodule": (suite_bimodule, {"d": 2, "Dp": 6, "Dp_cov": 8, "rotation": 0.7, "samples": 100,
                                  "tol": 1e-10, "isometry_tol": 1e-12, "covariance_tol": 1e-8,
                                  "leibniz_degree": 8, "mc_samples": 1_000_000,
                                  "polys": [[0, 1], [-1, 0, 1], [0, 0, 0, 1], [1, 2, 0, 1]]}),
    "invariant-unitary": (suite_invariant_unitary, {"theta": 1.0, "D": 10, "lam": 0.5, "tol": 1e-6,
                                                    "margin": 1e-3}),
}


def resolve_params(suite: str, given: dict) -> dict:
    """Merge ``given`` over the suite defaults, rejecting unknown keys and wrong types."""
    if suite not in SUITES:
        raise ConfigError(f"unknown suite {suite!r}")
    defaults = SUITES[suite][1]
    unknown = set(given) - set(defaults)
    if unknown:
        raise ConfigError(f"unknown keys for suite {suite}: {sorted(unknown)}")
    out = dict(defaults)
    for k, v in given.items():
        want = type(defaults[k])
        if want is float and isinstance(v, int) and not isinstance(v, bool):
            v = float(v)
        if want is int and isinstance(v, bool) or not isinstance(v, want):
            raise ConfigError(f"{suite}.{k} must be {want.__name__}, got {type(v).__name__}")
        out[k] = v
    return out
