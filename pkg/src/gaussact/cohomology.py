"""First cohomology of an orthogonal representation of a finitely presented group.

A 1-cocycle is determined by its values on generators; the cocycle identity
``b(gh) = pi_g b(h) + b(g)`` extends it to every word, and the relators turn
into linear constraints on the generator values.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .fock import ResourceLimitError
from .group_rep import (
    DEFAULT_BALL_CAP,
    FiniteGroup,
    GroupPresentation,
    OrthogonalRep,
    Word,
    evaluate,
    free_ball_shells,
    invariant_vectors,
    word_ball,
)

RANK_TOL = 1e-9
FIT_RADIUS = 4


@dataclass(frozen=True)
class RepCocycle:
    pi: OrthogonalRep
    gen_values: tuple[np.ndarray, ...]

    def __post_init__(self):
        vals = []
        for v in self.gen_values:
            v = np.array(v, dtype=float).reshape(-1)
            if v.shape != (self.pi.d,):
                raise ValueError(f"cocycle values must have length {self.pi.d}")
            v.setflags(write=False)
            vals.append(v)
        if len(vals) != self.pi.generator_count:
            raise ValueError("need one cocycle value per generator")
        object.__setattr__(self, "gen_values", tuple(vals))

    @classmethod
    def from_flat(cls, pi: OrthogonalRep, flat) -> "RepCocycle":
        flat = np.asarray(flat, dtype=float)
        return cls(pi, tuple(flat.reshape(pi.generator_count, pi.d)))

    def flat(self) -> np.ndarray:
        return np.concatenate(self.gen_values)

    def letter_value(self, a: int) -> np.ndarray:
        i = abs(a) - 1
        v = self.gen_values[i]
        # b(s^-1) = -pi_s^-1 b(s)
        return v if a > 0 else -(self.pi.gen_matrices[i].T @ v)

    def __add__(self, other: "RepCocycle") -> "RepCocycle":
        return RepCocycle(self.pi, tuple(a + b for a, b in zip(self.gen_values, other.gen_values)))

    def __mul__(self, c: float) -> "RepCocycle":
        return RepCocycle(self.pi, tuple(c * a for a in self.gen_values))

    __rmul__ = __mul__


def extend(b: RepCocycle, w) -> np.ndarray:
    """``b(w)`` by folding the cocycle identity left to right."""
    M = np.eye(b.pi.d)
    v = np.zeros(b.pi.d)
    for a in w:
        v = v + M @ b.letter_value(a)
        M = M @ b.pi.letter(a)
    return v


def coboundary(pi: OrthogonalRep, eta) -> RepCocycle:
    """The inner cocycle ``g -> pi_g eta - eta``."""
    eta = np.asarray(eta, dtype=float)
    return RepCocycle(pi, tuple(m @ eta - eta for m in pi.gen_matrices))


def relator_constraints(pi: OrthogonalRep, g: GroupPresentation) -> np.ndarray:
    """Matrix sending the stacked generator values to the stacked ``b(r)``, one block per relator."""
    d, n = pi.d, pi.generator_count
    rows = []
    for r in g.relators:
        block = np.zeros((d, n * d))
        M = np.eye(d)
        for a in r:
            i = abs(a) - 1
            coeff = M if a > 0 else -(M @ pi.gen_matrices[i].T)
            block[:, i * d:(i + 1) * d] += coeff
            M = M @ pi.letter(a)
        rows.append(block)
    return np.vstack(rows) if rows else np.zeros((0, n * d))


def _rank(s: np.ndarray, tol: float) -> int:
    # orthogonal generators put the natural scale at 1, so a matrix that is
    # zero up to roundoff has rank 0 rather than being judged against itself
    if s.size == 0:
        return 0
    return int(np.sum(s > tol * max(s[0], 1.0)))


@dataclass
class CohomologyReport:
    dimZ1: int
    dimB1: int
    dimH1: int
    singular_values: list[float]
    basis: list[RepCocycle] = field(default_factory=list)
    coboundary_singular_values: list[float] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "dimZ1": self.dimZ1,
            "dimB1": self.dimB1,
            "dimH1": self.dimH1,
            "singular_values": [float(s) for s in self.singular_values],
            "basis": [[v.tolist() for v in b.gen_values] for b in self.basis],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)


def cocycle_space(pi: OrthogonalRep, g: GroupPresentation, tol: float = RANK_TOL) -> CohomologyReport:
    """Z^1 as the null space of the relator constraints (Z^1 part of the report only)."""
    if pi.generator_count != g.generator_count:
        raise ValueError("representation and presentation disagree on generator count")
    C = relator_constraints(pi, g)
    n = C.shape[1]
    if C.shape[0] == 0:
        s = np.zeros(0)
        null = np.eye(n)
    else:
        _, s, Vt = np.linalg.svd(C)
        r = _rank(s, tol)
        null = Vt[r:].T
    basis = [RepCocycle.from_flat(pi, null[:, k]) for k in range(null.shape[1])]
    return CohomologyReport(null.shape[1], 0, null.shape[1], s.tolist(), basis)


def coboundary_matrix(pi: OrthogonalRep) -> np.ndarray:
    """``eta -> (pi_s eta - eta)_s`` as a ``(|S| d) x d`` matrix."""
    eye = np.eye(pi.d)
    return np.vstack([m - eye for m in pi.gen_matrices])


def coboundary_space(pi: OrthogonalRep, tol: float = RANK_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal basis (columns, in stacked generator coordinates) of B^1, with singular values."""
    U, s, _ = np.linalg.svd(coboundary_matrix(pi), full_matrices=False)
    return U[:, :_rank(s, tol)], s


def h1(pi: OrthogonalRep, g: GroupPresentation, tol: float = RANK_TOL) -> CohomologyReport:
    rep = cocycle_space(pi, g, tol)
    B, sb = coboundary_space(pi, tol)
    rep.dimB1 = B.shape[1]
    rep.dimH1 = rep.dimZ1 - rep.dimB1
    rep.coboundary_singular_values = sb.tolist()
    if rep.dimH1 < 0:
        raise ArithmeticError("B^1 larger than Z^1: rank decisions are inconsistent")
    return rep


def relator_residual(b: RepCocycle, g: GroupPresentation) -> float:
    return max((float(np.linalg.norm(extend(b, r))) for r in g.relators), default=0.0)


@dataclass
class FitResult:
    eta: np.ndarray
    residuals: list[float]
    rank_deficient: bool
    words: list[Word]

    @property
    def max_residual(self) -> float:
        return max(self.residuals, default=0.0)


def coboundary_fit(b: RepCocycle, words=None) -> FitResult:
    """Least-squares ``eta`` with ``b(w) ~ pi_w eta - eta`` over a word sample.

    Defaults to the radius-4 ball of the free group on the generators.  When
    the stacked system is rank deficient (``pi`` has fixed vectors) the
    minimum-norm solution is returned and ``rank_deficient`` is set.
    """
    if words is None:
        words = word_ball(b.pi.generator_count, FIT_RADIUS)
    words = [tuple(w) for w in words]
    if not words:
        raise ValueError("coboundary_fit needs a non-empty word sample")
    d = b.pi.d
    eye = np.eye(d)
    A = np.vstack([evaluate(b.pi, w) - eye for w in words])
    y = np.concatenate([extend(b, w) for w in words])
    eta, _, rank, _ = np.linalg.lstsq(A, y, rcond=None)
    fit = (A @ eta - y).reshape(len(words), d)
    return FitResult(eta, np.linalg.norm(fit, axis=1).tolist(), bool(rank < d), words)


def growth_probe(b: RepCocycle, R: int, table: FiniteGroup | None = None,
                 cap: int = DEFAULT_BALL_CAP) -> list[tuple[int, float]]:
    """``(r, max_{|g| <= r} ||b(g)||)`` for ``r = 0..R``.

    Free groups walk the reduced-word ball, building ``b(a w) = b(a) + pi_a b(w)``
    shell by shell.  For a finite group pass its table; each element is then
    visited once through its shortest word.
    """
    if table is not None:
        shells = table.ball(R)
        if sum(len(s) for s in shells) > cap:
            raise ResourceLimitError("ball exceeds size cap")
        best, out = 0.0, []
        for r, shell in enumerate(shells):
            for k in shell:
                best = max(best, float(np.linalg.norm(extend(b, table.words[k]))))
            out.append((r, best))
        return out
    shells = free_ball_shells(b.pi.generator_count, R, cap)
    values: dict[Word, np.ndarray] = {(): np.zeros(b.pi.d)}
    best, out = 0.0, [(0, 0.0)]
    for r in range(1, R + 1):
        nxt = {}
        for w in shells[r]:
            a, parent = w[0], w[1:]
            nxt[w] = b.letter_value(a) + b.pi.letter(a) @ values[parent]
            best = max(best, float(np.linalg.norm(nxt[w])))
        values = nxt
        out.append((r, best))
    return out


def fixed_dimension(pi: OrthogonalRep) -> int:
    return invariant_vectors(pi).shape[1]
