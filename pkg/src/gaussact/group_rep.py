"""Finitely presented groups, words, and orthogonal representations on generators.

A word is a tuple of nonzero ints: ``i + 1`` is generator ``i`` and ``-(i + 1)``
its inverse.  The empty tuple is the identity.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from .fock import ResourceLimitError

Word = tuple[int, ...]

INVARIANT_TOL = 1e-8
DEFAULT_BALL_CAP = 200_000


def reduce(w: Iterable[int]) -> Word:
    """Free reduction: cancel adjacent ``g g^-1`` pairs."""
    out: list[int] = []
    for letter in w:
        letter = int(letter)
        if letter == 0:
            raise ValueError("0 is not a valid letter")
        if out and out[-1] == -letter:
            out.pop()
        else:
            out.append(letter)
    return tuple(out)


def inverse(w: Sequence[int]) -> Word:
    return tuple(-a for a in reversed(w))


def multiply(*words: Sequence[int]) -> Word:
    return reduce(a for w in words for a in w)


def power(w: Sequence[int], n: int) -> Word:
    base = tuple(w) if n >= 0 else inverse(w)
    return reduce(base * abs(n))


@dataclass(frozen=True)
class GroupPresentation:
    generator_count: int
    relators: tuple[Word, ...] = ()

    def __post_init__(self):
        if self.generator_count < 1:
            raise ValueError("need at least one generator")
        rels = []
        for r in self.relators:
            r = reduce(r)
            if any(abs(a) > self.generator_count for a in r):
                raise ValueError(f"relator {r} uses a generator outside 1..{self.generator_count}")
            rels.append(r)
        object.__setattr__(self, "relators", tuple(rels))

    @property
    def is_free(self) -> bool:
        return all(len(r) == 0 for r in self.relators)

    @classmethod
    def free(cls, n: int) -> "GroupPresentation":
        return cls(n, ())

    @classmethod
    def cyclic(cls, n: int) -> "GroupPresentation":
        return cls(1, ((1,) * n,))


@dataclass(frozen=True)
class OrthogonalRep:
    """One real ``d x d`` matrix per generator.

    ``labels`` optionally names the basis vectors (e.g. group elements of a
    truncated regular representation).
    """

    gen_matrices: tuple[np.ndarray, ...]
    labels: tuple | None = field(default=None, compare=False)

    def __post_init__(self):
        mats = []
        for m in self.gen_matrices:
            m = np.array(m, dtype=float)
            if m.ndim != 2 or m.shape[0] != m.shape[1]:
                raise ValueError("generator matrices must be square")
            m.setflags(write=False)
            mats.append(m)
        if not mats:
            raise ValueError("need at least one generator matrix")
        if len({m.shape for m in mats}) != 1:
            raise ValueError("generator matrices must share one dimension")
        object.__setattr__(self, "gen_matrices", tuple(mats))

    @property
    def d(self) -> int:
        return self.gen_matrices[0].shape[0]

    @property
    def generator_count(self) -> int:
        return len(self.gen_matrices)

    @classmethod
    def trivial(cls, generator_count: int, d: int) -> "OrthogonalRep":
        return cls(tuple(np.eye(d) for _ in range(generator_count)))

    def letter(self, a: int) -> np.ndarray:
        i = abs(a) - 1
        if not 0 <= i < self.generator_count:
            raise IndexError(f"letter {a} outside generators 1..{self.generator_count}")
        m = self.gen_matrices[i]
        return m if a > 0 else m.T


def rotation(theta: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


def evaluate(pi: OrthogonalRep, w: Sequence[int]) -> np.ndarray:
    """``pi(w)``, the ordered product of generator matrices (inverse = transpose)."""
    out = np.eye(pi.d)
    for a in w:
        out = out @ pi.letter(a)
    return out


@dataclass
class RepCheckReport:
    orthogonality_residuals: list[float]
    relator_residuals: list[float]
    tol: float

    @property
    def passed(self) -> bool:
        return all(r <= self.tol for r in self.orthogonality_residuals + self.relator_residuals)


def rep_check(pi: OrthogonalRep, g: GroupPresentation, tol: float = 1e-10) -> RepCheckReport:
    if pi.generator_count != g.generator_count:
        raise ValueError("representation and presentation disagree on generator count")
    eye = np.eye(pi.d)
    orth = [float(np.linalg.norm(m.T @ m - eye, 2)) for m in pi.gen_matrices]
    rels = [float(np.linalg.norm(evaluate(pi, r) - eye, 2)) for r in g.relators]
    return RepCheckReport(orth, rels, tol)


def direct_sum(p1: OrthogonalRep, p2: OrthogonalRep) -> OrthogonalRep:
    if p1.generator_count != p2.generator_count:
        raise ValueError("direct sum needs the same generators")
    return OrthogonalRep(tuple(scipy.linalg.block_diag(a, b) for a, b in zip(p1.gen_matrices, p2.gen_matrices)))


def tensor(p1: OrthogonalRep, p2: OrthogonalRep) -> OrthogonalRep:
    if p1.generator_count != p2.generator_count:
        raise ValueError("tensor product needs the same generators")
    return OrthogonalRep(tuple(np.kron(a, b) for a, b in zip(p1.gen_matrices, p2.gen_matrices)))


def _defect_gram(mats: Sequence) -> np.ndarray:
    n = mats[0].shape[0]
    eye = sp.eye_array(n, format="csr")
    gram = sp.csr_array((n, n))
    for m in mats:
        a = sp.csr_array(m) - eye
        gram = gram + a.T @ a
    return gram.toarray()


def _defect_spectrum(mats: Sequence) -> tuple[np.ndarray, np.ndarray]:
    # eigen-decomposition of sum_s (pi_s - I)^T (pi_s - I)
    return np.linalg.eigh(_defect_gram(mats))


def invariant_vectors(pi: OrthogonalRep, tol: float = INVARIANT_TOL) -> np.ndarray:
    """Orthonormal basis (as columns) of the common fixed space of the generators."""
    lam, V = _defect_spectrum(pi.gen_matrices)
    return V[:, lam <= tol]


def weak_mixing_check(pi: OrthogonalRep, tol: float = INVARIANT_TOL) -> bool:
    """True iff ``pi (x) pi`` has no invariant vector (eigenvalue threshold ``tol``).

    A finite-dimensional orthogonal representation always fails: the identity
    tensor ``sum_i e_i (x) e_i`` is invariant.
    """
    mats = [sp.kron(sp.csr_array(m), sp.csr_array(m), format="csr") for m in pi.gen_matrices]
    lam = np.linalg.eigvalsh(_defect_gram(mats))
    return not bool(np.any(lam <= tol))


def spectral_gap_estimate(pi: OrthogonalRep, tol: float = INVARIANT_TOL) -> float | None:
    """Smallest eigenvalue of ``sum_s (I - pi_s)^T (I - pi_s)`` off the fixed space.

    ``None`` when the complement of the fixed space is empty.  A value ``g > 0``
    gives ``||xi - P xi||^2 <= g^-1 sum_s ||pi_s xi - xi||^2``.
    """
    lam, _ = _defect_spectrum(pi.gen_matrices)
    rest = lam[lam > tol]
    return float(rest[0]) if rest.size else None


class FiniteGroup:
    """A finite group given by permutation generators, with a full multiplication table.

    Elements are permutation tuples; ``words[k]`` is a shortest word for element ``k``
    in the generators (breadth-first order, identity first).
    """

    def __init__(self, generators: Sequence[Sequence[int]]):
        gens = [tuple(int(x) for x in g) for g in generators]
        if not gens:
            raise ValueError("need at least one generator")
        n = len(gens[0])
        if any(sorted(g) != list(range(n)) for g in gens):
            raise ValueError("generators must be permutations of range(n)")
        self.degree = n
        self.generators = gens
        ident = tuple(range(n))
        letters = [(i + 1, g) for i, g in enumerate(gens)] + [(-(i + 1), _perm_inverse(g)) for i, g in enumerate(gens)]
        self.elements: list[tuple[int, ...]] = [ident]
        self.words: list[Word] = [()]
        index = {ident: 0}
        queue = deque([0])
        while queue:
            k = queue.popleft()
            for a, p in letters:
                h = _perm_compose(self.elements[k], p)
                if h not in index:
                    index[h] = len(self.elements)
                    self.elements.append(h)
                    self.words.append(self.words[k] + (a,))
                    queue.append(index[h])
        self._index = index
        order = len(self.elements)
        self.table = np.array(
            [[index[_perm_compose(a, b)] for b in self.elements] for a in self.elements], dtype=np.int64
        )
        self.order = order

    def index(self, perm: Sequence[int]) -> int:
        return self._index[tuple(perm)]

    def element_of(self, w: Sequence[int]) -> int:
        k = 0
        for a in w:
            g = self.generators[abs(a) - 1]
            p = g if a > 0 else _perm_inverse(g)
            k = self._index[_perm_compose(self.elements[k], p)]
        return k

    def permutation_rep(self) -> OrthogonalRep:
        mats = []
        for g in self.generators:
            m = np.zeros((self.degree, self.degree))
            for i, gi in enumerate(g):
                m[gi, i] = 1.0
            mats.append(m)
        return OrthogonalRep(tuple(mats))

    def ball(self, R: int) -> list[list[int]]:
        """Elements grouped by word length ``0..R`` in the Cayley graph."""
        shells: list[list[int]] = [[] for _ in range(R + 1)]
        for k, w in enumerate(self.words):
            if len(w) <= R:
                shells[len(w)].append(k)
        return shells


def _perm_compose(a: Sequence[int], b: Sequence[int]) -> tuple[int, ...]:
    # (a * b)(i) = a(b(i))
    return tuple(a[i] for i in b)


def _perm_inverse(a: Sequence[int]) -> tuple[int, ...]:
    out = [0] * len(a)
    for i, ai in enumerate(a):
        out[ai] = i
    return tuple(out)


def free_ball_shells(generator_count: int, R: int, cap: int = DEFAULT_BALL_CAP) -> list[list[Word]]:
    """Reduced words of the free group, grouped by length ``0..R``.

    Each word of length ``r >= 1`` is ``a + parent`` with ``parent`` in shell
    ``r - 1``, so callers can extend values by prepending a letter.
    """
    size = 1 + sum(2 * generator_count * (2 * generator_count - 1) ** (r - 1) for r in range(1, R + 1))
    if size > cap:
        raise ResourceLimitError(f"ball of radius {R} has {size} words, cap is {cap}")
    letters = [a for i in range(generator_count) for a in (i + 1, -(i + 1))]
    shells: list[list[Word]] = [[()]]
    for _ in range(R):
        nxt = []
        for w in shells[-1]:
            for a in letters:
                if w and w[0] == -a:
                    continue
                nxt.append((a,) + w)
        shells.append(nxt)
    return shells


def word_ball(generator_count: int, R: int, cap: int = DEFAULT_BALL_CAP) -> list[Word]:
    return [w for shell in free_ball_shells(generator_count, R, cap) for w in shell]


def regular_rep_ball(g: GroupPresentation, R: int, table: FiniteGroup | None = None) -> OrthogonalRep:
    """Left-regular representation cut down to the word ball of radius ``R``.

    Basis vectors are ball elements; a generator sends ``delta_h`` to
    ``delta_{s h}`` or to 0 when ``s h`` leaves the ball, so generators are
    partial isometries that are orthogonal on the radius ``R - 1`` sub-ball.
    """
    if table is None:
        if not g.is_free:
            raise ValueError("non-free presentation needs an explicit multiplication table")
        elems = word_ball(g.generator_count, R)
        index = {w: i for i, w in enumerate(elems)}
        mats = []
        for i in range(g.generator_count):
            m = np.zeros((len(elems), len(elems)))
            for j, w in enumerate(elems):
                target = reduce((i + 1,) + w)
                if target in index:
                    m[index[target], j] = 1.0
            mats.append(m)
        return OrthogonalRep(tuple(mats), labels=tuple(elems))
    elems = [k for shell in table.ball(R) for k in shell]
    index = {k: i for i, k in enumerate(elems)}
    mats = []
    for i in range(len(table.generators)):
        s = table.element_of((i + 1,))
        m = np.zeros((len(elems), len(elems)))
        for j, k in enumerate(elems):
            target = int(table.table[s, k])
            if target in index:
                m[index[target], j] = 1.0
        mats.append(m)
    return OrthogonalRep(tuple(mats), labels=tuple(table.words[k] for k in elems))


def averaging_projector(pi: OrthogonalRep, group: FiniteGroup) -> np.ndarray:
    """``(1/|G|) sum_g pi(g)`` with each ``g`` evaluated along its stored word."""
    return sum(evaluate(pi, w) for w in group.words) / group.order


def rep_from_json(doc: dict) -> tuple[GroupPresentation, OrthogonalRep]:
    """Parse ``{generators: n, relators: [[int]], matrices: [[[real]]]}``."""
    unknown = set(doc) - {"generators", "relators", "matrices"}
    if unknown:
        raise ValueError(f"unknown keys in representation document: {sorted(unknown)}")
    n = int(doc["generators"])
    g = GroupPresentation(n, tuple(tuple(r) for r in doc.get("relators", [])))
    mats = doc["matrices"]
    if len(mats) != n:
        raise ValueError(f"expected {n} matrices, got {len(mats)}")
    return g, OrthogonalRep(tuple(np.array(m, dtype=float) for m in mats))


def rep_to_json(g: GroupPresentation, pi: OrthogonalRep) -> dict:
    return {
        "generators": g.generator_count,
        "relators": [list(r) for r in g.relators],
        "matrices": [m.tolist() for m in pi.gen_matrices],
    }


def load_rep(path: str | Path) -> tuple[GroupPresentation, OrthogonalRep]:
    with open(path) as fh:
        return rep_from_json(json.load(fh))
