"""Finite groups of projective matrices acting on defining ideals.

Convention: a matrix ``M`` acts on a polynomial by ``p -> p o M`` (see
:func:`k3galois.algebra.act_linear`), and on points by ``x -> M x``.
Matrices are stored normalised so that the first nonzero entry (row-major)
equals 1, which makes projective equality an entry-wise comparison.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .algebra import LinearSubspace, MultiPoly, act_linear, is_empty_intersection
from .algebra.linear import form_vector, rank
from .algebra.roots import as_root_of_unity, root_of_unity
from .algebra.solve import restrict_to_subspace, total_degree_homotopy
from .errors import CheckFailed, InvalidInput
from .groups import group_label
from .rng import random_complex, stream

MATRIX_TOL = 1e-10


def normalize_projective(M, tol: float = MATRIX_TOL) -> np.ndarray:
    A = np.asarray(M, dtype=complex)
    flat = A.ravel()
    idx = np.flatnonzero(np.abs(flat) > tol)
    if idx.size == 0:
        raise InvalidInput("zero matrix")
    A = A / flat[idx[0]]
    # snap tiny noise so that keys are stable
    A.real[np.abs(A.real) < tol] = 0.0
    A.imag[np.abs(A.imag) < tol] = 0.0
    return A


def _key(A: np.ndarray, digits: int = 8) -> tuple:
    r = np.round(A, digits) + 0.0  # no negative zeros
    return tuple(np.concatenate([r.real.ravel(), r.imag.ravel()]) + 0.0)


def diag(*entries) -> np.ndarray:
    return np.diag(np.asarray([complex(e) for e in entries]))


@dataclass
class ProjGroup:
    """Finite subgroup of PGL given by normalised complex matrices."""

    size: int
    elements: list[np.ndarray]
    generators: list[int]
    _index: dict = field(repr=False, default_factory=dict)
    _orders: list[int] = field(repr=False, default_factory=list)

    @property
    def order(self) -> int:
        return len(self.elements)

    def index_of(self, M) -> int:
        k = _key(normalize_projective(M))
        if k not in self._index:
            raise KeyError("matrix is not an element of the group")
        return self._index[k]

    def contains(self, M) -> bool:
        try:
            self.index_of(M)
        except KeyError:
            return False
        return True

    def mul(self, i: int, j: int) -> int:
        return self.index_of(self.elements[i] @ self.elements[j])

    def identity_index(self) -> int:
        return self.index_of(np.eye(self.size))

    def element_order(self, i: int) -> int:
        return self._orders[i]

    def element_orders(self) -> list[int]:
        return list(self._orders)

    def order_multiset(self) -> dict[int, int]:
        return dict(sorted(Counter(self._orders).items()))

    def is_abelian(self) -> bool:
        gens = [self.elements[g] for g in self.generators]
        for a in gens:
            for b in gens:
                if _key(normalize_projective(a @ b)) != _key(normalize_projective(b @ a)):
                    return False
        return True

    def is_cyclic(self) -> bool:
        return self.is_abelian() and max(self._orders) == self.order

    def label(self) -> str:
        return group_label(self._orders, self.is_abelian())

    def generator_matrices(self) -> list[np.ndarray]:
        return [self.elements[g] for g in self.generators]

    def subgroup(self, indices: Sequence[int], bound: int | None = None) -> "ProjGroup":
        return generate_group([self.elements[i] for i in indices], bound or self.order)


def generate_group(generators: Sequence, bound: int = 1000) -> ProjGroup:
    """Closure of ``generators`` in PGL; raises if it exceeds ``bound`` elements."""
    mats = [np.asarray(g, dtype=complex) for g in generators]
    if not mats:
        raise InvalidInput("need at least one generator")
    n = mats[0].shape[0]
    for g in mats:
        if g.shape != (n, n):
            raise InvalidInput("generators must be square matrices of equal size")
        if abs(np.linalg.det(g)) < 1e-12 * max(1.0, np.abs(g).max()) ** n:
            raise InvalidInput("singular generator")
    gens = [normalize_projective(g) for g in mats]
    ident = normalize_projective(np.eye(n))
    elements = [ident]
    index = {_key(ident): 0}
    frontier = [ident]
    while frontier:
        nxt = []
        for a in frontier:
            for g in gens:
                b = normalize_projective(a @ g)
                k = _key(b)
                if k not in index:
                    index[k] = len(elements)
                    elements.append(b)
                    nxt.append(b)
                    if len(elements) > bound:
                        raise InvalidInput(f"group closure exceeds bound {bound}")
        frontier = nxt
    gen_idx = [index[_key(g)] for g in gens]
    orders = []
    for a in elements:
        k, b = 1, a
        while _key(b) != _key(ident):
            b = normalize_projective(b @ a)
            k += 1
        orders.append(k)
    return ProjGroup(n, elements, gen_idx, index, orders)


def cyclic_product_group(orders: Sequence[int]) -> ProjGroup:
    """Diagonal realisation of ``Z_{n1} x ... x Z_{nr}``."""
    r = len(orders)
    gens = []
    for i, n in enumerate(orders):
        entries = [1] * (r + 1)
        entries[i + 1] = root_of_unity(n)
        gens.append(diag(*entries))
    if not gens:
        gens = [np.eye(2)]
    return generate_group(gens, bound=max(1, math.prod(orders)) + 1)


# invariance of the ideal

@dataclass
class InvarianceResult:
    ok: bool
    scalars: dict[int, list[complex]]          # element index -> mu_j
    exact_scalars: dict[int, list[tuple[int, int] | None]]
    witness: dict | None = None

    def __bool__(self):
        return self.ok


def equation_scalar(p: MultiPoly, M, tol: float = MATRIX_TOL) -> tuple[complex | None, dict | None]:
    """``mu`` with ``p o M == mu * p`` or ``(None, witness)``."""
    q = act_linear(p, M)
    lead_e, lead_c = p.sorted_terms()[0]
    mu = complex(q.coefficient(lead_e)) / complex(lead_c)
    scale = max(q.max_abs_coeff(), p.max_abs_coeff() * abs(mu), 1e-300)
    for e in sorted(set(p.terms) | set(q.terms), key=lambda e: (sum(e), e), reverse=True):
        got = complex(q.coefficient(e))
        want = mu * complex(p.coefficient(e))
        if abs(got - want) > tol * scale:
            ratio = got / complex(p.coefficient(e)) if p.coefficient(e) != 0 else None
            return None, {"monomial": e, "got": got, "expected": want, "ratio": ratio}
    return mu, None


def ideal_invariance(G: ProjGroup | Sequence, eqs: Sequence[MultiPoly]) -> InvarianceResult:
    """Check that every element maps each equation to a multiple of itself.

    ``G`` may be a :class:`ProjGroup` or a plain list of matrices (useful for
    matrices that generate an infinite group).
    """
    for e in eqs:
        e.require_homogeneous()
    mats = G.elements if isinstance(G, ProjGroup) else [normalize_projective(m) for m in G]
    scalars, exact = {}, {}
    for i, M in enumerate(mats):
        mus = []
        for j, e in enumerate(eqs):
            mu, wit = equation_scalar(e, M)
            if mu is None:
                wit.update({"element": i, "equation": j})
                return InvarianceResult(False, scalars, exact, wit)
            mus.append(mu)
        scalars[i] = mus
        exact[i] = [as_root_of_unity(mu) for mu in mus]
    return InvarianceResult(True, scalars, exact)


# the criterion

@dataclass
class CriterionReport:
    invariant: bool
    cond1: bool
    cond2: bool
    cond3: bool
    order: int
    degree: int
    lambdas: dict[int, complex | None]
    base_point: list | None
    witness: dict | None = None

    @property
    def verdict(self) -> bool:
        return self.invariant and self.cond1 and self.cond2 and self.cond3

    def as_dict(self) -> dict:
        return {"invariant": self.invariant, "cond1": self.cond1, "cond2": self.cond2,
                "cond3": self.cond3, "verdict": self.verdict, "order": self.order,
                "degree": self.degree}


def _forms(L) -> list[MultiPoly]:
    return [f if isinstance(f, MultiPoly) else MultiPoly.linear_form(list(f)) for f in L]


def scalar_on_forms(M, forms: Sequence[MultiPoly]) -> complex | None:
    """Common ``lambda`` with ``l o M == lambda * l`` for every form, or None."""
    lam = None
    for f in forms:
        mu, _ = equation_scalar(f, M)
        if mu is None:
            return None
        if lam is None:
            lam = mu
        elif abs(mu - lam) > 1e-9 * max(1.0, abs(lam)):
            return None
    return lam


def galois_criterion(G: ProjGroup, eqs: Sequence[MultiPoly], L, seed: int | None = 0,
                     convention: str = "pullback") -> CriterionReport:
    """Evaluate the three-condition Galois-embedding criterion.

    cond1: ``|G|`` equals the degree of the surface; cond2: every element acts
    on ``span(L)`` as a scalar; cond3: ``{L = 0}`` misses the surface.
    ``invariant`` records that ``G`` preserves the defining equations.
    ``convention="pushforward"`` acts by inverse matrices instead.
    """
    forms = _forms(L)
    if not forms or len(forms) > 3:
        raise InvalidInput("L must consist of at most three linear forms")
    vecs = [form_vector(f) for f in forms]
    if rank(vecs) != len(forms):
        raise InvalidInput("linear forms in L are not independent")
    if convention not in ("pullback", "pushforward"):
        raise ValueError("convention must be 'pullback' or 'pushforward'")
    mats = G.elements
    if convention == "pushforward":
        mats = [normalize_projective(np.linalg.inv(M)) for M in mats]
    inv = ideal_invariance(mats, eqs)
    degree = math.prod(e.degree() for e in eqs)
    cond1 = G.order == degree
    lambdas = {i: scalar_on_forms(M, forms) for i, M in enumerate(mats)}
    cond2 = all(v is not None for v in lambdas.values())
    N = eqs[0].arity - 1
    empt = is_empty_intersection(eqs, LinearSubspace(N, tuple(forms)), seed=seed)
    return CriterionReport(inv.ok, cond1, cond2, empt.empty, G.order, degree, lambdas,
                           empt.witness, inv.witness)


# the block decomposition of the action on linear forms

@dataclass
class GammaDecomposition:
    kernel: list[int]            # element indices acting trivially on the complement
    image: list[np.ndarray]      # distinct complementary blocks, normalised
    kernel_cyclic: bool
    blocks: dict[int, np.ndarray]

    @property
    def kernel_order(self) -> int:
        return len(self.kernel)

    @property
    def image_order(self) -> int:
        return len(self.image)


def _complement_basis(vecs: list[np.ndarray], n: int) -> np.ndarray:
    cols = list(vecs)
    for i in range(n):
        e = np.zeros(n, dtype=complex)
        e[i] = 1
        if np.linalg.matrix_rank(np.column_stack(cols + [e]), tol=1e-9) > len(cols):
            cols.append(e)
        if len(cols) == n:
            break
    return np.column_stack(cols)


def gamma_decomposition(G: ProjGroup, L) -> GammaDecomposition:
    """Split ``G`` by its action on the complement of ``span(L)``."""
    forms = _forms(L)
    k = len(forms)
    n = G.size
    vecs = [np.asarray([complex(c) for c in form_vector(f)]) for f in forms]
    B = _complement_basis(vecs, n)
    Binv = np.linalg.inv(B)
    blocks = {}
    for i, M in enumerate(G.elements):
        lam = scalar_on_forms(M, forms)
        if lam is None:
            raise InvalidInput(f"element {i} does not act on span(L) as a scalar")
        # forms transform by a -> M^T a; scale so the L-block is the identity
        Q = Binv @ M.T @ B / lam
        if np.abs(Q[k:, :k]).max(initial=0.0) > 1e-9:
            raise InvalidInput(f"element {i} does not preserve span(L)")
        blocks[i] = Q[k:, k:]
    kernel = []
    image_keys = {}
    image = []
    for i, blk in blocks.items():
        if blk.size == 0 or np.allclose(blk, np.eye(len(blk)), atol=1e-9):
            kernel.append(i)
        key = _key(blk) if blk.size else ()
        if key not in image_keys:
            image_keys[key] = len(image)
            image.append(blk)
    korders = [G.element_order(i) for i in kernel]
    cyclic = max(korders) == len(kernel)
    if len(kernel) * len(image) != G.order:
        raise CheckFailed("|G1| * |G2| != |G|")
    if not cyclic:
        raise CheckFailed("kernel of the complementary action is not cyclic")
    return GammaDecomposition(kernel, image, cyclic, blocks)


def hypersurface_cyclic_rule(N: int, G: ProjGroup) -> bool:
    """False exactly for a non-cyclic group on a surface in P^3."""
    return not (N == 3 and not G.is_cyclic())


# fixed loci of diagonal elements

@dataclass
class FixedComponent:
    coordinates: tuple[int, ...]     # coordinates that may be nonzero
    dimension: int                   # dimension of its intersection with S
    ambient_dimension: int
    restricted: list[str]


def _require_diagonal(M) -> np.ndarray:
    A = np.asarray(M, dtype=complex)
    if np.abs(A - np.diag(np.diag(A))).max(initial=0.0) > MATRIX_TOL:
        raise InvalidInput("element is not diagonal")
    return np.diag(A)


def fixed_locus(sigma, eqs: Sequence[MultiPoly], seed: int | None = 0) -> list[FixedComponent]:
    """Components of ``Fix(sigma) ∩ S`` for a diagonal ``sigma``.

    Fixed points in P^N are eigenvector classes: for each eigenvalue the
    coordinate subspace it spans.  Each is intersected with ``S``; the
    returned list holds the nonempty intersections with their dimension.
    """
    a = _require_diagonal(sigma)
    n = len(a)
    classes: list[list[int]] = []
    for i in range(n):
        for c in classes:
            if abs(a[c[0]] - a[i]) <= 1e-9 * max(1.0, abs(a[i])):
                c.append(i)
                break
        else:
            classes.append([i])
    out = []
    N = n - 1
    for cls in classes:
        others = [i for i in range(n) if i not in cls]
        basis = [[1 if j == i else 0 for j in range(n)] for i in cls]
        restricted = [r for r in restrict_to_subspace(eqs, basis) if not r.is_zero()]
        m = len(cls) - 1
        r = len(restricted)
        if r <= m:
            dim = m - r
        else:
            sub = LinearSubspace.coordinate(N, others) if others else LinearSubspace(N, ())
            if is_empty_intersection(eqs, sub, seed=seed).empty:
                continue
            dim = 0
        out.append(FixedComponent(tuple(cls), dim, m, [str(p) for p in restricted]))
    return out


def fixed_curves(sigma, eqs) -> list[FixedComponent]:
    return [c for c in fixed_locus(sigma, eqs) if c.dimension >= 1]


# the character on the 2-form

def symplectic_character(sigma, mu: Sequence[complex]) -> complex:
    """``eps(sigma) = det(sigma) / prod(mu_j)`` for a diagonal ``sigma``."""
    a = _require_diagonal(sigma)
    if any(abs(m) < 1e-14 for m in mu):
        raise InvalidInput("equation scalar is zero")
    return complex(np.prod(a) / np.prod(np.asarray(mu, dtype=complex)))


@dataclass
class CharacterTable:
    lambdas: dict[int, complex]
    mus: dict[int, list[complex]]
    epsilons: dict[int, complex]
    exact: dict[int, dict]
    image_order: int
    kernel_order: int

    def as_dict(self) -> dict:
        def rou(z):
            r = as_root_of_unity(z)
            return None if r is None else list(r)
        return {
            "image_order": self.image_order,
            "kernel_order": self.kernel_order,
            "elements": {str(i): {"lambda": rou(self.lambdas[i]) if self.lambdas[i] is not None else None,
                                  "mu": [rou(m) for m in self.mus[i]],
                                  "epsilon": rou(self.epsilons[i])}
                         for i in sorted(self.epsilons)},
        }


def character_table(G: ProjGroup, eqs: Sequence[MultiPoly], L) -> CharacterTable:
    inv = ideal_invariance(G, eqs)
    if not inv.ok:
        raise CheckFailed(f"group does not preserve the equations: {inv.witness}")
    forms = _forms(L)
    lambdas, eps, exact = {}, {}, {}
    for i, M in enumerate(G.elements):
        lambdas[i] = scalar_on_forms(M, forms)
        eps[i] = symplectic_character(M, inv.scalars[i])
        exact[i] = {"mu": inv.exact_scalars[i], "epsilon": as_root_of_unity(eps[i])}
    keys = set()
    kernel = 0
    for z in eps.values():
        keys.add((round(z.real, 8) + 0.0, round(z.imag, 8) + 0.0))
        if abs(z - 1) < 1e-8:
            kernel += 1
    return CharacterTable(lambdas, inv.scalars, eps, exact, len(keys), kernel)


def random_surface_points(eqs: Sequence[MultiPoly], count: int = 1, seed: int | None = 0) -> list[np.ndarray]:
    """Points of ``S`` cut out by a random codimension-2 linear slice."""
    N = eqs[0].arity - 1
    k = len(eqs)
    rng = stream(seed, "surface-points")
    basis = random_complex(rng, (k + 1, N + 1))
    cut = restrict_to_subspace(eqs, [list(b) for b in basis])
    # chart u0 = 1
    aff = []
    for p in cut:
        terms = {}
        for e, c in p.terms.items():
            terms[e[1:]] = terms.get(e[1:], 0) + c
        aff.append(MultiPoly(k, terms, "complex"))
    hom = total_degree_homotopy(aff, seed=int(rng.integers(2**31)), name="surface-points")
    pts = []
    for y, res in zip(hom.solutions, hom.residuals):
        if res < 1e-10:
            pts.append(basis.T @ np.concatenate([[1.0], y]))
        if len(pts) == count:
            break
    return pts


def residue_form_ratio(sigma, eqs: Sequence[MultiPoly], point, seed: int | None = 0) -> complex:
    """Numerical ``sigma^* omega / omega`` at ``point`` for the residue 2-form.

    Works in an affine chart ``X_c = 1``: with ``f_j`` the dehomogenised
    equations, ``omega(u, v) = det[u, v, w] / det(Df . w)`` for tangent
    vectors ``u, v`` and any complementary vectors ``w``.
    """
    M = np.asarray(sigma, dtype=complex)
    p = np.asarray(point, dtype=complex)
    q = M @ p
    c = int(np.argmax(np.minimum(np.abs(p) / np.abs(p).max(), np.abs(q) / np.abs(q).max())))
    n = len(p)
    rest = [i for i in range(n) if i != c]
    rng = stream(seed, "residue")
    grads = [[e.derivative(i) for i in range(n)] for e in eqs]

    def chart(X):
        return X[rest] / X[c]

    def Df(x):
        X = np.insert(x, c, 1.0)
        return np.array([[complex(g[i].evaluate(list(X))) for i in rest] for g in grads])

    def omega(x, u, v, w):
        D = Df(x)
        return np.linalg.det(np.column_stack([u, v, w])) / np.linalg.det(D @ w)

    x = chart(p)
    y = chart(q)
    D = Df(x)
    _, _, vh = np.linalg.svd(D)
    tangent = vh.conj().T[:, -2:]
    u, v = tangent[:, 0], tangent[:, 1]
    k = len(eqs)
    w = random_complex(rng, (n - 1, k))
    # differential of the chart map x -> chart(M X(x))
    X = np.insert(x, c, 1.0)
    Y = M @ X
    J = (M[rest, :] - np.outer(Y[rest] / Y[c], M[c, :])) / Y[c]
    J = J[:, rest]
    w2 = random_complex(rng, (n - 1, k))
    return complex(omega(y, J @ u, J @ v, w2) / omega(x, u, v, w))
