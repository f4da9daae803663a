"""Gaussian actions, exponential cocycles, the rotation deformation and its semigroups.

The Gaussian action of ``pi`` acts on the Fock space by ``pi_g^S`` (second
quantisation) and on operators by conjugation with it.

Exponential cocycle.  For a representation cocycle ``b`` put
``omega_g = exp(-i s(b(g)))``.  Since ``b(e) = 0`` forces
``pi_g b(g^-1) = -b(g)``, this is the multiplication operator by
``x -> c(g, g^-1 x)`` for ``c(g, x) = exp(i s(b(g^-1)))(x)``, and it satisfies
``omega_{gh} = omega_g sigma_g(omega_h)`` with vacuum expectation
``exp(-||b(g)||^2 / 2)``.

Rotation deformation.  On the doubled space ``H + H`` let
``J(xi, eta) = (eta, -xi)``, ``theta_t = exp(pi t J / 2)`` and
``rho = diag(1, -1)``.  Then ``theta_1`` swaps the two legs and
``rho theta_{-t} = theta_t rho``.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from dataclasses import field as dc_field
from functools import cached_property
from math import ceil
from typing import Callable, Sequence

import numpy as np
import scipy.linalg
from scipy.stats import poisson

from .cohomology import RepCocycle, extend
from .fock import FockBasis, FockVector, enumerate_basis, inner_product, symmetric_tensor, vacuum
from .group_rep import GroupPresentation, OrthogonalRep, evaluate, rep_check
from .wick import (
    DEFAULT_CONVENTION,
    ConvergenceError,
    FieldConvention,
    FockOperator,
    PreconditionError,
    degree_multiplier,
    differential_second_quantize,
    field,
    field_product,
    identity,
    op_exp,
    second_quantize,
)

TAIL_TOL = 1e-8


class TruncationBudgetError(ValueError):
    def __init__(self, required: int, have: int):
        super().__init__(f"degree cap {have} too small: truncation budget needs D >= {required}")
        self.required = required
        self.have = have


def required_degree(mean: float, tol: float = TAIL_TOL) -> int:
    """Smallest ``D`` with ``P(Poisson(mean) > D) <= tol``."""
    if mean < 0:
        raise ValueError("Poisson mean must be non-negative")
    D = 0
    while poisson.sf(D, mean) > tol:
        D += 1
    return D


@dataclass(frozen=True)
class GaussianActionCtx:
    pi: OrthogonalRep
    basis: FockBasis
    conv: FieldConvention = DEFAULT_CONVENTION

    def __post_init__(self):
        if self.basis.d != self.pi.d:
            raise ValueError(f"basis has {self.basis.d} modes, representation has dimension {self.pi.d}")
        eye = np.eye(self.pi.d)
        for m in self.pi.gen_matrices:
            if np.linalg.norm(m.T @ m - eye, 2) > 1e-10:
                raise ValueError("generator matrix is not orthogonal")

    @classmethod
    def build(cls, pi: OrthogonalRep, D: int, g: GroupPresentation | None = None,
              conv: FieldConvention = DEFAULT_CONVENTION) -> "GaussianActionCtx":
        if g is not None and not rep_check(pi, g).passed:
            raise ValueError("representation fails its relators")
        return cls(pi, enumerate_basis(pi.d, D), conv)


def gaussian_action(ctx: GaussianActionCtx, w) -> FockOperator:
    """``pi_w^S``; acts on vectors directly and on operators by conjugation."""
    return second_quantize(ctx.basis, evaluate(ctx.pi, w))


def conjugate(U: FockOperator, A: FockOperator) -> FockOperator:
    return U @ A @ U.adjoint()


def ps_cocycle(ctx: GaussianActionCtx, b: RepCocycle, w, check_budget: bool = True) -> FockOperator:
    """``omega_w = exp(-i s(b(w)))``.

    Raises TruncationBudgetError when the Poisson(``||b(w)||^2 / 2``) mass above
    the degree cap exceeds ``1e-8``.
    """
    c = extend(b, w)
    if check_budget:
        need = required_degree(float(c @ c) / 2)
        if ctx.basis.D < need:
            raise TruncationBudgetError(need, ctx.basis.D)
    if not np.any(c):
        return identity(ctx.basis)
    return op_exp(field(ctx.basis, c, ctx.conv), -1j)


def ps_trace(norm_b: float, D: int | None = None) -> complex:
    """``<omega Omega, Omega>`` on the one-mode space spanned by ``b``."""
    need = required_degree(norm_b ** 2 / 2)
    if D is None:
        D = need
    elif D < need:
        raise TruncationBudgetError(need, D)
    basis = enumerate_basis(1, D)
    om = op_exp(field(basis, [norm_b]), -1j)
    return om.expectation()


def cocycle_identity_residual(ctx: GaussianActionCtx, b: RepCocycle, w1, w2) -> float:
    """Norm of ``(omega_{w1 w2} - omega_{w1} sigma_{w1}(omega_{w2})) Omega`` on degrees ``<= D/2``.

    The low-degree window is where the compressed exponentials are accurate;
    the residual shrinks as the degree cap grows.
    """
    w12 = tuple(w1) + tuple(w2)
    lhs = ps_cocycle(ctx, b, w12, check_budget=False)
    U = gaussian_action(ctx, w1)
    rhs = ps_cocycle(ctx, b, w1, check_budget=False) @ conjugate(U, ps_cocycle(ctx, b, w2, check_budget=False))
    diff = (lhs - rhs) @ vacuum(ctx.basis)
    return diff.truncate(ctx.basis.D // 2).norm()


def J_matrix(d: int) -> np.ndarray:
    """``J(xi, eta) = (eta, -xi)`` on ``R^d + R^d``."""
    Z, I = np.zeros((d, d)), np.eye(d)
    return np.block([[Z, I], [-I, Z]])


def rho_matrix(d: int) -> np.ndarray:
    return scipy.linalg.block_diag(np.eye(d), -np.eye(d))


def _quarter_cos_sin(t: float) -> tuple[float, float]:
    # exact values at integer t so theta_1 is an exact leg swap
    if float(t).is_integer():
        return [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)][int(t) % 4]
    a = np.pi * t / 2
    return float(np.cos(a)), float(np.sin(a))


def theta(d: int, t: float) -> np.ndarray:
    """``exp(pi t J / 2) = cos(pi t / 2) I + sin(pi t / 2) J``."""
    c, s = _quarter_cos_sin(t)
    return c * np.eye(2 * d) + s * J_matrix(d)


@dataclass(frozen=True)
class DoubledCtx:
    base: GaussianActionCtx
    basis: FockBasis

    @classmethod
    def build(cls, base: GaussianActionCtx, D: int | None = None) -> "DoubledCtx":
        D = base.basis.D if D is None else D
        return cls(base, enumerate_basis(2 * base.pi.d, D))

    @property
    def d(self) -> int:
        return self.base.pi.d

    @cached_property
    def J(self) -> np.ndarray:
        return J_matrix(self.d)

    @cached_property
    def rho(self) -> np.ndarray:
        return rho_matrix(self.d)

    @cached_property
    def first_leg(self) -> np.ndarray:
        """Mask of occupations supported on the first copy of ``H``."""
        return ~np.any(self.basis.counts[:, self.d:] > 0, axis=1)


@dataclass
class AxiomReport:
    t: float
    residuals: dict[str, float]
    tol: float = 1e-12

    @property
    def passed(self) -> bool:
        return all(v <= self.tol for v in self.residuals.values())


def malleability_axioms(dctx: DoubledCtx, t: float, s: float = 0.5, tol: float = 1e-12) -> AxiomReport:
    d, basis = dctx.d, dctx.basis
    th_t, th_s, th_ts, th_mt = theta(d, t), theta(d, s), theta(d, t + s), theta(d, -t)
    rho = dctx.rho
    res = {
        "group_law": float(np.abs(th_t @ th_s - th_ts).max()),
        "rho_intertwines": float(np.abs(rho @ th_mt - th_t @ rho).max()),
        "rho_involution": float(np.abs(rho @ rho - np.eye(2 * d)).max()),
    }
    Tt, Ts, Tts, Tmt = (second_quantize(basis, m) for m in (th_t, th_s, th_ts, th_mt))
    R = second_quantize(basis, rho)
    res["group_law_lifted"] = float(np.abs((Tt @ Ts - Tts).orthonormal_matrix()).max())
    res["rho_intertwines_lifted"] = float(np.abs((R @ Tmt - Tt @ R).orthonormal_matrix()).max())
    # first-leg vectors of degree >= 1 are orthogonal to their image under theta_1
    T1 = second_quantize(basis, theta(d, 1.0)).orthonormal_matrix()
    mask = dctx.first_leg & (basis.degrees >= 1)
    res["swap_orthogonality"] = float(np.abs(T1[np.ix_(mask, mask)]).max(initial=0.0))
    return AxiomReport(t, res, tol)


def deformation_budget(norm_b: float, tol: float = TAIL_TOL) -> int:
    """Degree cap for the correlation experiment.

    The correlation is a vacuum coefficient of ``exp(-i s(c))`` with
    ``||c|| <= 2 ||b||``, so the Poisson mean is taken as ``2 ||b||^2``.
    """
    return required_degree(2 * norm_b ** 2, tol)


def deformation_correlation(norm_b: float, t: float, D: int | None = None) -> complex:
    """``<theta^S_{2t/pi} (omega (x) 1) Omega, (omega (x) 1) Omega>`` on the two modes spanned by ``b``.

    Rotating coordinates so ``b`` spans one mode of each leg reduces any
    representation to this two-mode computation.
    """
    if D is None:
        D = deformation_budget(norm_b)
    basis = enumerate_basis(2, D)
    om = op_exp(field(basis, [norm_b, 0.0]), -1j)
    v = om @ vacuum(basis)
    Th = second_quantize(basis, theta(1, 2 * t / np.pi))
    return inner_product(Th @ v, v)


def deformation_correlation_reduced(norm_b: float, t: float, D: int) -> complex:
    """One-mode shortcut: ``sum_k cos(t)^k |v_k|^2`` in orthonormal coordinates."""
    basis = enumerate_basis(1, D)
    v = (op_exp(field(basis, [norm_b]), -1j) @ vacuum(basis)).orthonormal_coords()
    return complex(np.sum(np.cos(t) ** np.arange(D + 1) * np.abs(v) ** 2))


def deformation_correlation_word(dctx: DoubledCtx, b: RepCocycle, w, t: float, D: int | None = None) -> complex:
    return deformation_correlation(float(np.linalg.norm(extend(b, w))), t, D)


def predicted_correlation(norm_b: float, t: float) -> float:
    return float(np.exp(-(1 - np.cos(t)) * norm_b ** 2))


@dataclass
class DeformationReport:
    params: list[float]
    measured: list[complex]
    predicted: list[complex]
    label: str = ""
    meta: dict = dc_field(default_factory=dict)

    def __post_init__(self):
        if not len(self.params) == len(self.measured) == len(self.predicted):
            raise ValueError("report lists must be aligned")

    @property
    def residuals(self) -> list[float]:
        return [abs(complex(m) - complex(p)) for m, p in zip(self.measured, self.predicted)]

    @property
    def max_abs_residual(self) -> float:
        return max(self.residuals, default=0.0)

    def rows(self) -> list[dict]:
        return [
            {
                "param": p,
                "measured_re": complex(m).real,
                "measured_im": complex(m).imag,
                "predicted_re": complex(q).real,
                "predicted_im": complex(q).imag,
                "abs_residual": r,
            }
            for p, m, q, r in zip(self.params, self.measured, self.predicted, self.residuals)
        ]

    def to_json(self) -> dict:
        return {"label": self.label, "meta": self.meta, "rows": self.rows(), "max_abs_residual": self.max_abs_residual}

    def write_csv(self, path) -> None:
        cols = ["param", "measured_re", "measured_im", "predicted_re", "predicted_im", "abs_residual"]
        with open(path, "w", newline="") as fh:
            wr = csv.DictWriter(fh, fieldnames=cols, lineterminator="\n")
            wr.writeheader()
            for row in self.rows():
                wr.writerow({k: repr(float(v)) for k, v in row.items()})

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)


def deformation_report(norm_b: float, ts: Sequence[float], D: int | None = None) -> DeformationReport:
    D = deformation_budget(norm_b) if D is None else D
    measured = [deformation_correlation(norm_b, t, D) for t in ts]
    predicted = [predicted_correlation(norm_b, t) for t in ts]
    return DeformationReport(list(map(float, ts)), measured, predicted, label=f"norm_b={norm_b}", meta={"D": D})


def ou_semigroup(ctx: GaussianActionCtx | FockBasis, t: float) -> FockOperator:
    """``Phi^t = exp(-t N)``, acting as ``e^{-kt}`` on degree ``k``."""
    basis = ctx.basis if isinstance(ctx, GaussianActionCtx) else ctx
    if t < 0:
        raise ValueError("semigroup time must be non-negative")
    return degree_multiplier(basis, np.exp(-t * np.arange(basis.D + 1)))


def ou_resolvent(ctx: GaussianActionCtx | FockBasis, alpha: float) -> FockOperator:
    """``zeta_alpha = (alpha / (alpha + N))^{1/2}``."""
    basis = ctx.basis if isinstance(ctx, GaussianActionCtx) else ctx
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    k = np.arange(basis.D + 1)
    return degree_multiplier(basis, np.sqrt(alpha / (alpha + k)))


def ou_closed_formula(basis: FockBasis, xis: Sequence, t: float,
                      conv: FieldConvention = DEFAULT_CONVENTION) -> tuple[FockVector, FockVector]:
    """``(Phi^t x Omega, ((1 - e^{-kt}) tau(x) + e^{-kt} x) Omega)`` for ``x = s(xi_1)...s(xi_k)``.

    The scalar term is read as ``tau(x)`` times the vacuum.  For pairwise
    orthogonal ``xi_i`` the vector ``x Omega`` is pure degree ``k`` and the two
    sides agree; repeated vectors mix degrees and they do not.
    """
    k = len(xis)
    if basis.D < k:
        raise PreconditionError(f"degree cap {basis.D} below word length {k}")
    x = field_product(basis, xis, conv)
    xo = x @ vacuum(basis)
    tau = xo.coeffs[0]
    lhs = ou_semigroup(basis, t) @ xo
    rhs = (1 - np.exp(-k * t)) * tau * vacuum(basis) + np.exp(-k * t) * xo
    return lhs, rhs


def rotation_derivation(dctx: DoubledCtx, A: FockOperator) -> FockOperator:
    """``delta(A) = [dGamma(J), A]``, the derivative at 0 of ``Ad theta^S_{2t/pi}``."""
    G = differential_second_quantize(dctx.basis, dctx.J)
    return G @ A - A @ G


def expectation_delta_squared(dctx: DoubledCtx, xis: Sequence) -> tuple[FockVector, FockVector]:
    """``(E(delta^2(x)) Omega, -k x Omega)`` for ``x`` a product of first-leg fields.

    ``E`` (the expectation onto the first leg) acts on vectors as the
    projection onto first-leg occupations.
    """
    d = dctx.d
    lifted = [np.concatenate([np.asarray(xi, dtype=float), np.zeros(d)]) for xi in xis]
    x = field_product(dctx.basis, lifted, dctx.base.conv)
    dd = rotation_derivation(dctx, rotation_derivation(dctx, x))
    v = dd @ vacuum(dctx.basis)
    lhs = FockVector(dctx.basis, np.where(dctx.first_leg, v.coeffs, 0))
    rhs = -len(xis) * (x @ vacuum(dctx.basis))
    return lhs, rhs


@dataclass
class SmoothingResult:
    lhs: np.ndarray
    rhs: np.ndarray
    derivative_lhs: np.ndarray
    derivative_rhs: np.ndarray

    @property
    def kernel_residual(self) -> float:
        return float(np.linalg.norm(self.lhs - self.rhs, 2))

    @property
    def derivative_residual(self) -> float:
        return float(np.linalg.norm(self.derivative_lhs - self.derivative_rhs, 2))


def gaussian_kernel(t: float) -> tuple[Callable, Callable]:
    """``f_t(s) = exp(-s^2 / 4t) / sqrt(4 pi t)`` and its derivative."""
    def f(s):
        return np.exp(-s ** 2 / (4 * t)) / np.sqrt(4 * np.pi * t)

    def fp(s):
        return -s / (2 * t) * f(s)

    return f, fp


def smooth_by_kernel(G, t: float, kernel: tuple[Callable, Callable] | None = None,
                     window: float | None = None, step: float | None = None) -> SmoothingResult:
    """Trapezoid quadrature of ``int f(s) exp(sG) ds`` against ``exp(t G^2)``.

    Also returns ``G int f e^{sG}`` and ``-int f' e^{sG}``, equal by integration
    by parts.  ``exp(sG)`` is evaluated from one eigendecomposition of the
    skew matrix ``G``; the oracle side uses ``expm``.
    """
    G = np.asarray(G, dtype=float)
    if G.ndim != 2 or G.shape[0] != G.shape[1]:
        raise ValueError("G must be square")
    if np.abs(G + G.T).max(initial=0.0) > 1e-12 * max(1.0, np.abs(G).max(initial=0.0)):
        raise ValueError("G must be skew-symmetric")
    if t <= 0:
        raise ValueError("t must be positive")
    f, fp = kernel if kernel is not None else gaussian_kernel(t)
    window = 8 * np.sqrt(2 * t) if window is None else window
    step = 1e-2 * np.sqrt(t) if step is None else step
    n = int(ceil(2 * window / step)) + 1
    s = np.linspace(-window, window, n)
    wts = np.full(n, s[1] - s[0])
    wts[[0, -1]] /= 2
    lam, V = np.linalg.eigh(1j * G)  # G = -i V diag(lam) V^H
    phases = np.exp(-1j * np.outer(s, lam))
    def integrate(g):
        diag = (wts * g(s)) @ phases
        return ((V * diag) @ V.conj().T).real
    lhs = integrate(f)
    rhs = scipy.linalg.expm(t * G @ G)
    if not np.all(np.isfinite(lhs)):
        raise ConvergenceError("quadrature produced non-finite values")
    return SmoothingResult(lhs, rhs, G @ lhs, -integrate(fp))


def random_skew(rng: np.random.Generator, n: int) -> np.ndarray:
    A = rng.standard_normal((n, n))
    return (A - A.T) / 2


def invariant_unitary(ctx: GaussianActionCtx, xi2, lam: float) -> FockOperator:
    """Non-trivial unitary fixed by the Gaussian action, built from an invariant 2-tensor.

    ``xi2`` (a ``d x d`` matrix, or its flattening) is invariant under
    ``pi (x) pi``.  Its modulus ``(xi xi^T)^{1/2}`` commutes with ``pi``; the
    spectral projection ``eta`` onto eigenvalues ``>= lam`` is written as
    ``sum_i v_i (x) v_i`` and ``u = exp(pi i sum_i s(v_i)^2)``.  The factors
    ``s(v_i)^2`` commute, so this is the product of the individual
    exponentials, but the summed form stays exactly invariant after
    truncation.
    """
    d = ctx.pi.d
    X = np.asarray(xi2, dtype=float).reshape(d, d)
    mod = scipy.linalg.sqrtm(X @ X.T).real
    mod = (mod + mod.T) / 2
    mu, V = np.linalg.eigh(mod)
    keep = mu >= lam
    if not np.any(keep):
        raise ValueError(f"spectral cut at {lam} is empty (spectral radius {mu.max():.6g})")
    vs = V[:, keep].T
    Q = None
    for v in vs:
        s = field(ctx.basis, v, ctx.conv)
        Q = s @ s if Q is None else Q + s @ s
    return op_exp(Q, 1j * np.pi)


def invariance_residual(ctx: GaussianActionCtx, u: FockOperator, words=None) -> float:
    """``max_g ||sigma_g(u) - u||`` over the generators (or the given words)."""
    if words is None:
        words = [(i + 1,) for i in range(ctx.pi.generator_count)]
    return max((conjugate(gaussian_action(ctx, w), u) - u).norm() for w in words)


def orthogonal_product_vector(basis: FockBasis, xis: Sequence) -> FockVector:
    """``xi_1 . ... . xi_k`` as a Fock vector (the Wick product for orthogonal ``xi_i``)."""
    return symmetric_tensor(basis, [np.asarray(x, dtype=complex) for x in xis])
