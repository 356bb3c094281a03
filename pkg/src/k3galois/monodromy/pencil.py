"""The cover ``S -> P^2`` restricted over a line of the base.

With ``L`` the three forms defining the centre ``W``, ``P`` a right inverse
of ``L`` and ``w_1..w_k`` a basis of the cone over ``W``, the fibre over the
base point ``q(s) = A + s B`` is

    { P q(s) + sum_i t_i w_i  :  E_j(P q(s) + W t) = 0 }.

This is a square system ``G(s, t) = 0`` in ``k = N - 2`` unknowns.  It has no
solutions at infinity because ``W`` misses the surface, so every fibre has
exactly ``d`` points counted with multiplicity.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from ..algebra import CompiledSystem, CoverSpec, MultiPoly, is_empty_intersection, resultant
from ..algebra.linear import nullspace, right_inverse, to_complex_matrix
from ..algebra.poly import COMPLEX, EXACT
from ..algebra.roots import cluster_points, roots_univariate, squarefree_factors
from ..algebra.solve import newton_polish, total_degree_homotopy
from ..errors import InvalidInput, NumericalFailure
from ..rng import random_complex, stream

log = logging.getLogger(__name__)

FIBER_SEPARATION = 1e-5      # 10x the default cluster tolerance, relative
BRANCH_CLUSTER = 1e-5        # relative tolerance for merging branch endpoints
BASEPOINT_CANDIDATES = 16


@dataclass
class BranchPoint:
    value: complex
    multiplicity: int            # sum of (e - 1) over the fibre


@dataclass
class PencilCover:
    cover: CoverSpec
    A: list
    B: list
    P: list                      # (N+1) x 3
    W: list                      # (N+1) x k
    fiber_polys: list[MultiPoly]  # in (s, t_1, ..., t_k)
    seed: int
    branch: list[BranchPoint] = field(default_factory=list)
    method: str = ""
    basepoint: complex | None = None
    base_fiber: np.ndarray | None = None
    radius: float | None = None
    clearance: float | None = None
    _system: CompiledSystem | None = field(default=None, repr=False)

    @property
    def degree(self) -> int:
        return self.cover.degree

    @property
    def k(self) -> int:
        return len(self.fiber_polys)

    @property
    def exact(self) -> bool:
        return all(p.field == EXACT for p in self.fiber_polys)

    @property
    def system(self) -> CompiledSystem:
        if self._system is None:
            self._system = CompiledSystem(self.fiber_polys)
        return self._system

    @property
    def expected_ramification(self) -> int:
        """Total ``sum (e - 1)`` over the line, by Riemann-Hurwitz and adjunction."""
        degs = [e.degree() for e in self.cover.equations]
        return self.degree * (sum(degs) - self.cover.N + 2)

    def point(self, s: complex, t) -> np.ndarray:
        """The point of ``P^N`` with pencil coordinates ``(s, t)``."""
        P = to_complex_matrix(self.P)
        W = to_complex_matrix(self.W)
        q = np.asarray([complex(a) + s * complex(b) for a, b in zip(self.A, self.B)])
        return P @ q + W @ np.asarray(t, dtype=complex)

    def fiber(self, s: complex) -> np.ndarray:
        """All ``d`` fibre points over ``s`` as rows ``t``."""
        d = self.degree
        if self.k == 1:
            g = self.fiber_polys[0]
            coeffs = [complex(c.evaluate([s, 0])) for c in g.coefficients_in(1)]
            roots = roots_univariate(list(reversed(coeffs)))
            T = np.asarray(roots, dtype=complex).reshape(-1, 1)
        else:
            fixed = [_fix_first(p, s) for p in self.fiber_polys]
            hom = total_degree_homotopy(fixed, seed=self.seed, name=f"fiber{s}")
            T = hom.solutions[hom.residuals < 1e-9]
        F = np.column_stack([np.full(len(T), s), T]) if len(T) else np.zeros((0, self.k + 1))
        if len(T):
            Z, res = newton_polish(_FixedS(self.system), F, 20)
            T = Z[:, 1:]
        if len(T) != d:
            raise NumericalFailure(f"fibre over {s} has {len(T)} points, expected {d}")
        sep = fiber_separation(T)
        scale = 1 + np.abs(T).max()
        if sep <= FIBER_SEPARATION * scale:
            raise NumericalFailure(f"fibre over {s} is not reduced (separation {sep:.2e})")
        return T


class _FixedS:
    """Newton on ``G(s, .)`` with ``s`` frozen, in the full coordinates."""

    def __init__(self, sysc: CompiledSystem):
        self.sysc = sysc

    def evaluate(self, Z):
        F, J = self.sysc.evaluate(Z)
        J = J.copy()
        # freeze s: replace its column by a unit row-equation ds = 0
        m, p, n = J.shape
        Jf = np.zeros((m, p + 1, n), dtype=complex)
        Jf[:, :p, :] = J
        Jf[:, p, 0] = 1
        Ff = np.concatenate([F, np.zeros((m, 1), complex)], axis=1)
        return Ff, Jf[:, :, :]

    def values(self, Z):
        return self.evaluate(Z)[0]


def _fix_first(p: MultiPoly, s: complex) -> MultiPoly:
    terms: dict = {}
    for e, c in p.terms.items():
        key = e[1:]
        terms[key] = terms.get(key, 0) + complex(c) * s ** e[0]
    return MultiPoly(p.arity - 1, terms, COMPLEX)


def fiber_separation(T: np.ndarray) -> float:
    T = np.asarray(T)
    if len(T) < 2:
        return math.inf
    D = np.linalg.norm(T[:, None, :] - T[None, :, :], axis=2)
    D[np.diag_indices(len(T))] = np.inf
    return float(D.min())


# construction

def _line_anchors(cov: CoverSpec, rng) -> tuple[list, list]:
    if cov.exact:
        while True:
            A = [Fraction(int(x)) for x in rng.integers(-9, 10, 3)]
            B = [Fraction(int(x)) for x in rng.integers(-9, 10, 3)]
            if np.linalg.matrix_rank(np.array([A, B], dtype=float)) == 2:
                return A, B
    return list(random_complex(rng, 3)), list(random_complex(rng, 3))


def _fiber_polys(cov: CoverSpec, A, B, P, W) -> list[MultiPoly]:
    k = len(W[0])
    n = cov.N + 1
    rational = all(isinstance(x, (int, Fraction)) for x in list(A) + list(B))
    field_ = EXACT if cov.exact and rational else COMPLEX
    if field_ == COMPLEX:
        A, B = [complex(x) for x in A], [complex(x) for x in B]
        P = to_complex_matrix(P).tolist()
        W = to_complex_matrix(W).tolist()
    images = []
    for i in range(n):
        const = sum(P[i][j] * A[j] for j in range(3))
        lin = sum(P[i][j] * B[j] for j in range(3))
        coeffs = [lin] + [W[i][j] for j in range(k)]
        images.append(MultiPoly.linear_form(coeffs, field_) + MultiPoly.constant(const, k + 1, field_))
    return [e.substitute(images) for e in cov.equations]


def build_pencil(cov: CoverSpec, seed: int | None = 0, line: tuple | None = None,
                 reseeds: int = 3, check_center: bool = True, strict: bool = True,
                 branch: list[BranchPoint] | None = None) -> PencilCover:
    """Set up the restricted cover over a seeded line and locate its branch points.

    ``line`` optionally fixes two points ``(A, B)`` of the base plane.
    Redraws the line (up to ``reseeds`` times) when the branch data fail
    the Riemann-Hurwitz count or the basepoint fibre is not reduced.  With
    ``strict=False`` a special line is accepted as given (no count check,
    no redraw); used for lines tangent to the branch curve.  ``branch``
    supplies branch points computed by the caller for a fixed ``line``.
    """
    if check_center:
        emp = is_empty_intersection(cov.equations, cov.center, seed=seed)
        if not emp.empty:
            raise InvalidInput("projection centre meets the surface", witness=emp.witness)
    L = cov.center.matrix()
    if not cov.exact:
        L = to_complex_matrix(L).tolist()
    P = right_inverse(L)
    W = nullspace(L)
    # columns of W are basis vectors
    W = [[W[j][i] for j in range(len(W))] for i in range(cov.N + 1)]
    seed = 0 if seed is None else int(seed)
    rng = stream(seed, "pencil-line")
    last_error: Exception | None = None
    for attempt in range(reseeds + 1):
        if line is not None:
            if attempt > 0 and not strict:
                break
            A, B = [x for x in line[0]], [x for x in line[1]]
        else:
            A, B = _line_anchors(cov, rng)
        pc = PencilCover(cov, A, B, P, W, _fiber_polys(cov, A, B, P, W), seed + attempt)
        try:
            if branch is not None and line is not None:
                pc.branch, pc.method = list(branch), "given"
            else:
                locate_branch_points(pc, strict=strict)
            choose_basepoint(pc)
            return pc
        except NumericalFailure as exc:
            log.info("pencil attempt %d rejected: %s", attempt, exc)
            last_error = exc
    raise NumericalFailure(f"no admissible pencil line after {reseeds} reseeds: {last_error}")


# branch points

def _cluster_branch(values, mults, scale: float) -> list[BranchPoint]:
    pts = cluster_points(values, BRANCH_CLUSTER * scale)
    # cluster_points keeps the first member; recompute centroids and weights
    groups: list[list] = [[] for _ in pts]
    for v, m in zip(values, mults):
        j = min(range(len(pts)), key=lambda i: abs(pts[i][0] - v))
        groups[j].append((v, m))
    out = []
    for g in groups:
        w = sum(m for _, m in g)
        c = sum(v * m for v, m in g) / w
        out.append(BranchPoint(complex(c), int(w)))
    return out


def _cluster_multiple(coeffs: list[complex], roots: np.ndarray, eps: float = 1e-15,
                      shape_check: bool = True) -> list[BranchPoint]:
    """Group float roots of ``coeffs`` (low to high) into multiple roots.

    Rounding splits a root of multiplicity ``m`` into ``m`` roots around
    ``z`` at distance about ``(eps * |p|(z) / |p^(m)(z)/m!|)^(1/m)``, where
    ``|p|`` sums the absolute terms.  A group is accepted when its radius
    is within that estimate, it is separated from the other roots, and
    (for ``m >= 3`` and ``shape_check``) it is spread out like a rounded
    multiple root rather than made of tighter sub-clusters.  ``eps`` is the
    relative accuracy of the coefficients.
    """
    if len(roots) == 0:
        return []
    c = np.asarray(coeffs, dtype=complex)
    left = list(range(len(roots)))
    out = []

    def spread(z, m):
        size = float(np.abs(c) @ np.abs(z) ** np.arange(len(c)))
        a = c.copy()
        for _ in range(m):
            a = a[1:] * np.arange(1, len(a))
        top = abs(a @ z ** np.arange(len(a))) / math.factorial(m)
        return (eps * size / top) ** (1.0 / m) if top > 0 else math.inf

    def even(pts, rad, m):
        if m < 3 or not shape_check:
            return True
        closest = min(abs(a - b) for k, a in enumerate(pts) for b in pts[k + 1:])
        return closest >= 0.2 * rad * 2 * math.sin(math.pi / m)

    while left:
        i = left[0]
        order = [left[k] for k in np.argsort(np.abs(roots[left] - roots[i]))]
        for m in range(len(order), 0, -1):
            members = order[:m]
            z = roots[members].mean()
            rad = float(np.abs(roots[members] - z).max())
            others = [j for j in range(len(roots)) if j not in members]
            gap = float(np.abs(roots[others] - z).min()) if others else math.inf
            if m == 1 or (2 * rad < gap and rad <= 4 * spread(z, m)
                           and even(list(roots[members]), rad, m)):
                out.append(BranchPoint(complex(z), m))
                left = [j for j in left if j not in members]
                break
    return out


def _method_a(pc: PencilCover, strict: bool = True) -> list[BranchPoint]:
    g = pc.fiber_polys[0]
    disc = resultant(g, g.derivative(1), 1)
    coeffs = disc.univariate_coeffs(0)
    if pc.exact:
        factors = squarefree_factors(coeffs)
        total = sum((len(f) - 1) * m for f, m in factors)
        values, mults = [], []
        for f, m in factors:
            for r in roots_univariate([complex(c) for c in reversed(f)]):
                values.append(r)
                mults.append(m)
        branch = [BranchPoint(v, m) for v, m in zip(values, mults)]
    else:
        c = [complex(x) for x in coeffs]
        while c and abs(c[-1]) <= 1e-12 * max(abs(x) for x in c):
            c.pop()
        total = len(c) - 1
        # raw eigenvalues: polishing would pull a rounded ring out of shape
        roots = np.roots(np.asarray(c[::-1], dtype=complex))
        branch = _cluster_multiple(c, roots)
    if strict and total != pc.expected_ramification:
        raise NumericalFailure(f"discriminant has degree {total}, expected "
                               f"{pc.expected_ramification} (branch point at infinity)")
    return branch


def _det(rows):
    n = len(rows)
    if n == 1:
        return rows[0][0]
    acc = None
    for j in range(n):
        minor = [r[:j] + r[j + 1:] for r in rows[1:]]
        term = rows[0][j] * _det(minor)
        if j % 2:
            term = -term
        acc = term if acc is None else acc + term
    return acc


def ramification_system(pc: PencilCover) -> list[MultiPoly]:
    """``G(s, t) = 0`` together with ``det(dG/dt) = 0`` in ``(s, t)``."""
    polys = [p.to_complex() for p in pc.fiber_polys]
    jac = [[p.derivative(i + 1) for i in range(pc.k)] for p in polys]
    return polys + [_det(jac)]


def _method_b(pc: PencilCover) -> list[BranchPoint]:
    system = ramification_system(pc)
    hom = total_degree_homotopy(system, seed=pc.seed, name="ramification",
                                end_tau=1.0 - 1e-12, polish_iters=200)
    good = hom.residuals < 1e-8
    expected = pc.expected_ramification
    if hom.n_paths != expected:
        raise NumericalFailure(f"ramification system has Bezout number {hom.n_paths}, "
                               f"expected {expected}")
    if good.sum() != expected:
        raise NumericalFailure(f"{int(good.sum())} of {expected} ramification paths converged")
    s = hom.solutions[good][:, 0]
    scale = 1 + float(np.abs(s).max())
    return _cluster_branch(list(s), [1] * len(s), scale)


def locate_branch_points(pc: PencilCover, method: str | None = None,
                         strict: bool = True) -> list[BranchPoint]:
    if method is None:
        method = "resultant" if pc.k == 1 else "homotopy"
    if method == "resultant":
        if pc.k != 1:
            raise InvalidInput("the resultant method needs a single fibre equation")
        branch = _method_a(pc, strict)
    elif method == "homotopy":
        branch = _method_b(pc)
    else:
        raise ValueError(f"unknown method {method!r}")
    if not branch:
        raise NumericalFailure("no branch points found")
    if strict and sum(b.multiplicity for b in branch) != pc.expected_ramification:
        raise NumericalFailure("branch multiplicities do not add up to the Riemann-Hurwitz count")
    branch.sort(key=lambda b: (round(b.value.real, 9), round(b.value.imag, 9)))
    pc.branch = branch
    pc.method = method
    return branch


def discriminant_points(pc: PencilCover, method: str | None = None) -> list[complex]:
    """Base values over which the fibre is non-reduced."""
    if not pc.branch or (method is not None and method != pc.method):
        locate_branch_points(pc, method)
    return [b.value for b in pc.branch]


# basepoint

def segment_clearance(base: complex, points: list[complex]) -> float:
    """Smallest distance from a branch point to another point's segment."""
    best = math.inf
    for j, bj in enumerate(points):
        d = bj - base
        L2 = abs(d) ** 2
        for i, bi in enumerate(points):
            if i == j:
                continue
            u = ((bi - base) * d.conjugate()).real / L2
            u = min(max(u, 0.0), 1.0)
            best = min(best, abs(bi - (base + u * d)))
    return best


def min_branch_distance(points: list[complex]) -> float:
    if len(points) < 2:
        return max(1.0, abs(points[0])) if points else 1.0
    return min(abs(a - b) for i, a in enumerate(points) for b in points[i + 1:])


def choose_basepoint(pc: PencilCover) -> complex:
    pts = [b.value for b in pc.branch]
    R = max(max(abs(p) for p in pts), 1e-3)
    rho = 0.1 * min_branch_distance(pts)
    rng = stream(pc.seed, "basepoint")
    theta0 = 2 * math.pi * rng.random()
    cands = []
    for m in range(BASEPOINT_CANDIDATES):
        p = 3 * R * complex(math.cos(theta0 + 2 * math.pi * m / BASEPOINT_CANDIDATES),
                            math.sin(theta0 + 2 * math.pi * m / BASEPOINT_CANDIDATES))
        cands.append((segment_clearance(p, pts), p))
    admissible = [c for c in cands if c[0] >= 2 * rho]
    pool = admissible or [max(cands, key=lambda c: c[0])]
    best = None
    for clear, p in pool:
        try:
            T = pc.fiber(p)
        except NumericalFailure:
            continue
        sep = fiber_separation(T) / (1 + np.abs(T).max())
        if best is None or sep > best[0]:
            best = (sep, p, T, clear)
    if best is None:
        raise NumericalFailure("no basepoint candidate has a reduced fibre")
    _, p, T, clear = best
    pc.basepoint = p
    pc.base_fiber = T
    pc.radius = min(rho, 0.5 * clear)
    pc.clearance = clear
    return p
