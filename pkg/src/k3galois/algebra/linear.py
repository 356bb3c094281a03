"""Projective linear geometry: subspaces given by linear forms, and the
projection data ``CoverSpec`` describing ``pi_W : S -> P^2``."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .poly import COMPLEX, EXACT, MultiPoly


def _is_exact(rows) -> bool:
    return all(isinstance(x, (int, Fraction)) for r in rows for x in r)


def rref(rows: Sequence[Sequence], tol: float = 1e-10) -> tuple[list[list], list[int]]:
    """Reduced row echelon form.  Exact for rational input, partial pivoting
    with tolerance ``tol`` for float input."""
    exact = _is_exact(rows)
    A = [[Fraction(x) if exact else complex(x) for x in r] for r in rows]
    if not A:
        return A, []
    m, n = len(A), len(A[0])
    pivots = []
    r = 0
    for c in range(n):
        if r == m:
            break
        if exact:
            piv = next((i for i in range(r, m) if A[i][c] != 0), None)
        else:
            best = max(range(r, m), key=lambda i: abs(A[i][c]))
            piv = best if abs(A[best][c]) > tol else None
        if piv is None:
            continue
        A[r], A[piv] = A[piv], A[r]
        lead = A[r][c]
        A[r] = [x / lead for x in A[r]]
        for i in range(m):
            if i != r and A[i][c] != 0:
                f = A[i][c]
                A[i] = [a - f * b for a, b in zip(A[i], A[r])]
        pivots.append(c)
        r += 1
    return A, pivots


def rank(rows: Sequence[Sequence], tol: float = 1e-10) -> int:
    return len(rref(rows, tol)[1])


def nullspace(rows: Sequence[Sequence], n: int | None = None, tol: float = 1e-10) -> list[list]:
    """Basis of ``{x : A x = 0}`` (exact when the input is rational)."""
    if not rows:
        exact = True
        size = n
    else:
        exact = _is_exact(rows)
        size = len(rows[0])
    R, pivots = rref(rows, tol) if rows else ([], [])
    free = [c for c in range(size) if c not in pivots]
    one = Fraction(1) if exact else 1 + 0j
    zero = Fraction(0) if exact else 0j
    basis = []
    for f in free:
        v = [zero] * size
        v[f] = one
        for i, p in enumerate(pivots):
            v[p] = -R[i][f]
        basis.append(v)
    return basis


def right_inverse(rows: Sequence[Sequence]) -> list[list]:
    """Matrix ``P`` (n x m) with ``A P = I_m`` for a full-row-rank ``A``."""
    m = len(rows)
    n = len(rows[0])
    exact = _is_exact(rows)
    # solve A x = e_j by extending with the identity
    aug = [list(r) + [1 if i == j else 0 for j in range(m)] for i, r in enumerate(rows)]
    R, pivots = rref(aug)
    if len([p for p in pivots if p < n]) < m:
        raise ValueError("linear forms are not independent")
    zero = Fraction(0) if exact else 0j
    P = [[zero] * m for _ in range(n)]
    for i, p in enumerate(pivots):
        if p >= n:
            continue
        for j in range(m):
            P[p][j] = R[i][n + j]
    return P


def form_vector(form: MultiPoly) -> list:
    if form.degree() != 1 or not form.is_homogeneous():
        raise ValueError(f"{form} is not a linear form")
    zero = Fraction(0) if form.field == EXACT else 0j
    vec = [zero] * form.arity
    for e, c in form.terms.items():
        vec[e.index(1)] = c
    return vec


@dataclass(frozen=True)
class LinearSubspace:
    """The projective subspace ``{l_1 = ... = l_c = 0}`` of ``P^N``."""

    N: int
    forms: tuple[MultiPoly, ...]

    def __post_init__(self):
        for f in self.forms:
            if f.arity != self.N + 1:
                raise ValueError("form arity does not match ambient dimension")
            form_vector(f)
        if self.forms and rank(self.matrix()) != len(self.forms):
            raise ValueError("defining forms are linearly dependent")

    @classmethod
    def from_vectors(cls, rows: Sequence[Sequence]) -> "LinearSubspace":
        rows = [list(r) for r in rows]
        return cls(len(rows[0]) - 1, tuple(MultiPoly.linear_form(r) for r in rows))

    @classmethod
    def coordinate(cls, N: int, indices: Sequence[int]) -> "LinearSubspace":
        """``{X_i = 0 for i in indices}``."""
        return cls(N, tuple(MultiPoly.var(i, N + 1) for i in indices))

    @classmethod
    def through_point(cls, point: Sequence) -> "LinearSubspace":
        """A point of ``P^N`` written as the zero set of ``N`` forms."""
        return cls.from_vectors(nullspace([list(point)]))

    @property
    def codimension(self) -> int:
        return len(self.forms)

    @property
    def dimension(self) -> int:
        return self.N - self.codimension

    def matrix(self) -> list[list]:
        return [form_vector(f) for f in self.forms]

    def basis(self) -> list[list]:
        """Vectors spanning the affine cone over the subspace."""
        if not self.forms:
            return [[Fraction(int(i == j)) for j in range(self.N + 1)] for i in range(self.N + 1)]
        return nullspace(self.matrix())

    def contains(self, point: Sequence, tol: float = 1e-10) -> bool:
        pt = np.asarray([complex(x) for x in point])
        scale = max(np.max(np.abs(pt)), 1e-300)
        return all(abs(f.evaluate(list(pt))) <= tol * scale * max(f.max_abs_coeff(), 1)
                   for f in self.forms)


@dataclass
class CoverSpec:
    """A surface ``{E_1 = ... = E_k = 0}`` in ``P^N`` with projection centre
    ``center`` (codimension 3).  ``degree`` is the product of equation degrees."""

    N: int
    equations: tuple[MultiPoly, ...]
    center: LinearSubspace
    name: str = ""
    degree: int = field(init=False)

    def __post_init__(self):
        self.equations = tuple(self.equations)
        if len(self.equations) != self.N - 2:
            raise ValueError(f"a surface in P^{self.N} needs {self.N - 2} equations "
                             "as a complete intersection")
        for e in self.equations:
            if e.arity != self.N + 1:
                raise ValueError("equation arity does not match ambient dimension")
            e.require_homogeneous()
        if self.center.N != self.N or self.center.codimension != 3:
            raise ValueError("projection centre must have codimension 3")
        self.degree = math.prod(e.degree() for e in self.equations)

    @property
    def exact(self) -> bool:
        return all(e.field == EXACT for e in self.equations) and \
            all(f.field == EXACT for f in self.center.forms)


def to_complex_matrix(M) -> np.ndarray:
    return np.asarray([[complex(x) for x in row] for row in M], dtype=complex)


__all__ = ["LinearSubspace", "CoverSpec", "nullspace", "rank", "rref", "right_inverse",
           "form_vector", "to_complex_matrix", "COMPLEX", "EXACT"]
