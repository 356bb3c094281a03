"""Plane quartics: smoothness, bitangents, hyperflexes and the Plücker ledger.

Bitangents are found as lines on which the quartic restricts to a constant
times the square of a quadratic.  After a random projective change of
coordinates every line has the form ``X2 = alpha X0 + beta X1``.  Writing the
restriction in ``x = X1 / X0`` as ``c4 x^4 + c3 x^3 + c2 x^2 + c1 x + c0``
with ``c4 != 0``, it is a square exactly when

    R1 = 8 c1 c4^2 - 4 c2 c3 c4 + c3^3 = 0,
    R2 = 64 c0 c4^3 - (4 c2 c4 - c3^2)^2 = 0.

This system in ``(alpha, beta)`` is solved by many-start Newton.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .algebra import COMPLEX, CompiledSystem, LinearSubspace, MultiPoly, is_empty_intersection
from .algebra.linear import nullspace
from .algebra.solve import newton_polish, total_degree_homotopy
from .errors import CheckFailed, InvalidInput, NumericalFailure
from .rng import random_complex, stream

EXPECTED_LINES = 28
DUAL_DEGREE = 12
HYPERFLEX_TOL = 1e-6
SQUARE_RESIDUAL = 1e-8
LINE_MATCH = 1e-6


# Plücker bookkeeping

@dataclass(frozen=True)
class PluckerLedger:
    hyperflexes: int
    flexes: int
    bitangents: int
    dual_degree: int
    dual_genus_check: int

    def as_dict(self) -> dict:
        return {"a2": self.hyperflexes, "a1": self.flexes, "b": self.bitangents,
                "dual_degree": self.dual_degree, "genus": self.dual_genus_check}


def plucker_ledger(a2: int) -> PluckerLedger:
    """Dual-curve numbers of a smooth quartic with ``a2`` hyperflexes.

    The dual has degree 12.  Ordinary flexes give ordinary cusps (delta 1)
    and hyperflexes (3,4)-cusps (delta 3).  Bitangents give nodes.  Flex
    count ``a1 + 2 a2 = 24`` and genus ``3 = 55 - b - a1 - 3 a2`` then fix
    ``b = 28 - a2``.
    """
    if not 0 <= a2 <= 12:
        raise InvalidInput(f"hyperflex count {a2} outside 0..12")
    a1 = 24 - 2 * a2
    b = 28 - a2
    arithmetic = (DUAL_DEGREE - 1) * (DUAL_DEGREE - 2) // 2
    genus = arithmetic - b - a1 - 3 * a2
    if genus != 3:
        raise CheckFailed("Plücker ledger inconsistent")
    if b < 16:
        raise CheckFailed(f"bitangent count {b} below 16")
    return PluckerLedger(a2, a1, b, DUAL_DEGREE, genus)


# the curve

def _random_chart(rng, n: int = 3) -> np.ndarray:
    while True:
        T = random_complex(rng, (n, n))
        if abs(np.linalg.det(T)) > 0.1:
            return T


def _transform(F: MultiPoly, T: np.ndarray) -> MultiPoly:
    """``F o T`` with complex coefficients."""
    images = [MultiPoly.linear_form(list(T[i]), COMPLEX) for i in range(T.shape[0])]
    return F.to_complex().substitute(images)


def _dehomogenize_last(F: MultiPoly) -> MultiPoly:
    """Set the first variable to 1."""
    terms: dict = {}
    for e, c in F.terms.items():
        terms[e[1:]] = terms.get(e[1:], 0) + complex(c)
    return MultiPoly(F.arity - 1, terms, COMPLEX)


@dataclass
class PlaneQuartic:
    poly: MultiPoly
    certificate: dict = field(default_factory=dict)

    def __post_init__(self):
        p = self.poly
        if p.arity != 3 or p.degree() != 4 or not p.is_homogeneous():
            raise InvalidInput("a plane quartic is a homogeneous degree-4 form in X0, X1, X2")
        grads = [p.derivative(i) for i in range(3)]
        emp = is_empty_intersection(grads, LinearSubspace(2, ()), seed=1)
        if not emp.empty:
            raise InvalidInput("quartic is singular", witness=emp.witness)
        self.certificate = {"method": emp.method, **emp.detail}

    @classmethod
    def parse(cls, text: str) -> "PlaneQuartic":
        from .algebra import parse_poly
        return cls(parse_poly(text, 3))

    def __call__(self, x) -> complex:
        return complex(self.poly.evaluate([complex(v) for v in x]))


@dataclass
class BitangentRecord:
    line: tuple[complex, complex, complex]        # l0 X0 + l1 X1 + l2 X2 = 0, normalised
    points: tuple[np.ndarray, np.ndarray]
    hyperflex: bool
    residual: float
    real: bool

    def as_dict(self) -> dict:
        c = lambda z: [float(z.real), float(z.imag)]
        return {"line": [c(x) for x in self.line],
                "points": [[c(x) for x in p] for p in self.points],
                "hyperflex": self.hyperflex, "residual": self.residual, "real": self.real}


def normalize_line(l) -> tuple[complex, ...]:
    l = np.asarray(l, dtype=complex)
    k = int(np.argmax(np.abs(l)))
    l = l / l[k]
    return tuple(complex(x) for x in l)


def _line_distance(a, b) -> float:
    a = np.asarray(a) / np.linalg.norm(a)
    b = np.asarray(b) / np.linalg.norm(b)
    return float(np.sqrt(max(0.0, 1 - abs(np.vdot(a, b)) ** 2)))


def restriction_coeffs(F: MultiPoly, p1, p2) -> np.ndarray:
    """Coefficients ``c_0..c_4`` of ``F(p1 + x p2)`` in ``x``."""
    xs = np.exp(2j * np.pi * np.arange(5) / 5)
    p1 = np.asarray(p1, dtype=complex)
    p2 = np.asarray(p2, dtype=complex)
    vals = np.array([complex(F.evaluate(list(p1 + x * p2))) for x in xs])
    return np.fft.fft(vals) / 5


def square_residual(c: np.ndarray) -> tuple[float, complex, complex]:
    """Relative distance of ``sum c_k x^k`` from ``c4 (x^2 + a x + b)^2``."""
    c0, c1, c2, c3, c4 = c
    a = c3 / (2 * c4)
    b = (c2 / c4 - a * a) / 2
    model = c4 * np.array([b * b, 2 * a * b, a * a + 2 * b, 2 * a, 1])
    return float(np.abs(model - c).max() / np.abs(c).max()), a, b


def _square_conditions(G: MultiPoly) -> list[MultiPoly]:
    """``R1, R2`` in ``(alpha, beta)`` for lines ``X2 = alpha X0 + beta X1``."""
    # G(u, v, alpha u + beta v) in variables (alpha, beta) with coefficients in u^(4-k) v^k
    alpha = MultiPoly.var(0, 4, COMPLEX)
    beta = MultiPoly.var(1, 4, COMPLEX)
    u = MultiPoly.var(2, 4, COMPLEX)
    v = MultiPoly.var(3, 4, COMPLEX)
    R = G.substitute([u, v, alpha * u + beta * v])
    c = [MultiPoly.zero(2, COMPLEX) for _ in range(5)]
    for e, coef in R.terms.items():
        k = e[3]
        c[k] = c[k] + MultiPoly(2, {(e[0], e[1]): coef}, COMPLEX)
    c0, c1, c2, c3, c4 = c
    R1 = 8 * c1 * c4 ** 2 - 4 * c2 * c3 * c4 + c3 ** 3
    R2 = 64 * c0 * c4 ** 3 - (4 * c2 * c4 - c3 ** 2) ** 2
    return [R1, R2]


def _newton_starts(system: CompiledSystem, rng, count: int, iters: int = 80) -> np.ndarray:
    scales = rng.choice([0.5, 1.0, 2.0, 4.0], size=count)
    Z = random_complex(rng, (count, 2)) * scales[:, None]
    for _ in range(iters):
        F, J = system.evaluate(Z)
        det = J[:, 0, 0] * J[:, 1, 1] - J[:, 0, 1] * J[:, 1, 0]
        ok = np.abs(det) > 1e-300
        dz0 = np.where(ok, (-F[:, 0] * J[:, 1, 1] + F[:, 1] * J[:, 0, 1]) / np.where(ok, det, 1), 0)
        dz1 = np.where(ok, (-F[:, 1] * J[:, 0, 0] + F[:, 0] * J[:, 1, 0]) / np.where(ok, det, 1), 0)
        step = np.column_stack([dz0, dz1])
        # damp large steps
        nrm = np.linalg.norm(step, axis=1)
        damp = np.minimum(1.0, 2.0 * (1 + np.linalg.norm(Z, axis=1)) / np.maximum(nrm, 1e-300))
        Z = Z + step * damp[:, None]
        Z[~np.isfinite(Z).all(axis=1)] = 0
    return Z


def find_bitangents(q: PlaneQuartic, seed: int | None = 0, batches: int = 16,
                    batch_size: int = 400, reseeds: int = 3) -> list[BitangentRecord]:
    """All bitangent lines (hyperflex lines included, flagged as degenerate)."""
    last = None
    for attempt in range(reseeds + 1):
        rng = stream(seed, f"bitangents{attempt}")
        try:
            records = _find_bitangents_once(q, rng, batches, batch_size)
        except NumericalFailure as exc:
            last = exc
            continue
        a2 = sum(r.hyperflex for r in records)
        if len(records) == EXPECTED_LINES and 0 <= a2 <= 12 \
                and len(records) - a2 == plucker_ledger(a2).bitangents:
            return records
        last = NumericalFailure(f"found {len(records)} bitangent lines, expected {EXPECTED_LINES}")
    raise NumericalFailure(str(last))


def _find_bitangents_once(q: PlaneQuartic, rng, batches: int, batch_size: int) -> list[BitangentRecord]:
    # a fresh chart per batch changes the Newton basins; lines missed in one
    # chart are typically easy in another
    found: list[BitangentRecord] = []
    for _ in range(batches):
        T = _random_chart(rng)
        system = CompiledSystem(_square_conditions(_transform(q.poly, T)))
        Z = _newton_starts(system, rng, batch_size)
        Z, res = newton_polish(system, Z, 40)
        seen: list[np.ndarray] = []
        for ab in Z[res < 1e-9]:
            if any(np.abs(ab - x).max() < 1e-7 * (1 + np.abs(x).max()) for x in seen):
                continue
            seen.append(ab)
            rec = _record(q, T, ab)
            if rec is not None:
                rec = _refine(q, rec) or rec
            if rec is None:
                continue
            if any(_line_distance(rec.line, r.line) < LINE_MATCH for r in found):
                continue
            found.append(rec)
        if len(found) >= EXPECTED_LINES:
            break
    found.sort(key=lambda r: tuple((round(z.real, 8), round(z.imag, 8)) for z in r.line))
    return found


def _record(q: PlaneQuartic, T: np.ndarray, ab) -> BitangentRecord | None:
    alpha, beta = complex(ab[0]), complex(ab[1])
    p1 = T @ np.array([1, 0, alpha])
    p2 = T @ np.array([0, 1, beta])
    c = restriction_coeffs(q.poly, p1, p2)
    if abs(c[4]) < 1e-8 * np.abs(c).max():
        return None
    res, a, b = square_residual(c)
    if res > SQUARE_RESIDUAL:
        return None
    disc = a * a - 4 * b
    r1 = (-a + np.sqrt(disc)) / 2
    r2 = (-a - np.sqrt(disc)) / 2
    hyper = abs(disc) <= HYPERFLEX_TOL * max(1.0, abs(a) ** 2)
    line = np.cross(p1, p2)
    ln = normalize_line(line)
    pts = (p1 + r1 * p2, p1 + r2 * p2)
    pts = tuple(x / x[np.argmax(np.abs(x))] for x in pts)
    real = bool(np.abs(np.imag(ln)).max() < 1e-9)
    return BitangentRecord(ln, pts, bool(hyper), res, real)


# a fixed generic mixing of the line basis keeps both tangency points finite
_MIX = np.array([[1.0, 0.37 + 0.21j], [-0.29 + 0.53j, 1.0]])


def _line_chart(line) -> np.ndarray:
    """Chart whose first two columns span ``line``."""
    l = np.asarray(line, dtype=complex)
    l = l / np.linalg.norm(l)
    # l @ v = 0 for the conjugated trailing right singular vectors
    _, _, vh = np.linalg.svd(l.reshape(1, 3))
    basis = _MIX @ vh[1:].conj()
    return np.column_stack([basis[0], basis[1], l.conj()])


def _refine(q: PlaneQuartic, rec: BitangentRecord, iters: int = 12) -> BitangentRecord | None:
    """Re-polish a line in a chart centred on it, where the square
    conditions are well scaled; the search chart can be far from that."""
    T = _line_chart(rec.line)
    if np.max(np.abs(np.asarray(rec.line) @ T[:, :2])) > 1e-6:
        return None
    system = CompiledSystem(_square_conditions(_transform(q.poly, T)))
    Z, res = newton_polish(system, np.zeros((1, 2), dtype=complex), iters)
    if not np.isfinite(Z).all() or np.abs(Z).max() > 1e-3:
        return None
    return _record(q, T, Z[0])


def bitangent_summary(q: PlaneQuartic, seed: int | None = 0) -> dict:
    records = find_bitangents(q, seed)
    a2 = sum(r.hyperflex for r in records)
    ledger = plucker_ledger(a2)
    b = len(records) - a2
    if b != ledger.bitangents:
        raise CheckFailed(f"{b} bitangents with {a2} hyperflexes disagrees with the ledger")
    return {"lines": len(records), "bitangents": b, "hyperflexes": a2,
            "ledger": ledger.as_dict(), "records": records}


# independent counts: class and flexes

def _affine_solve(polys: Sequence[MultiPoly], seed, name: str):
    rng = stream(seed, name)
    T = _random_chart(rng)
    aff = [_dehomogenize_last(_transform(p, T)) for p in polys]
    hom = total_degree_homotopy(aff, seed=int(rng.integers(2**31)), name=name,
                                end_tau=1 - 1e-12, polish_iters=200)
    return hom


def dual_degree(q: PlaneQuartic, seed: int | None = 0) -> int:
    """Number of tangent lines through a random point (the class of the curve)."""
    rng = stream(seed, "polar-point")
    p = random_complex(rng, 3)
    polar = sum((complex(p[i]) * q.poly.derivative(i).to_complex() for i in range(3)),
                MultiPoly.zero(3, COMPLEX))
    hom = _affine_solve([q.poly, polar], seed, "polar")
    sols = hom.solutions[hom.residuals < 1e-9]
    return len(_clusters(sols, 1e-6))


def hessian(F: MultiPoly) -> MultiPoly:
    H = [[F.derivative(i).derivative(j) for j in range(3)] for i in range(3)]
    return (H[0][0] * (H[1][1] * H[2][2] - H[1][2] * H[2][1])
            - H[0][1] * (H[1][0] * H[2][2] - H[1][2] * H[2][0])
            + H[0][2] * (H[1][0] * H[2][1] - H[1][1] * H[2][0]))


def flex_counts(q: PlaneQuartic, seed: int | None = 0) -> tuple[int, int]:
    """``(a1, a2)``: ordinary flexes and hyperflexes from ``F`` meeting its Hessian.

    Ordinary flexes are transverse intersections; hyperflexes have
    intersection multiplicity 2.
    """
    hom = _affine_solve([q.poly, hessian(q.poly)], seed, "hessian")
    if hom.n_paths != 24:
        raise NumericalFailure("unexpected Bezout number for the Hessian system")
    sols = hom.solutions[hom.residuals < 1e-7]
    clusters = _clusters(sols, 1e-4)
    mult = [len(c) for c in clusters]
    if sum(mult) != 24 or any(m > 2 for m in mult):
        raise NumericalFailure(f"Hessian intersection multiplicities {sorted(mult)} do not add to 24")
    return sum(1 for m in mult if m == 1), sum(1 for m in mult if m == 2)


def _clusters(points: np.ndarray, tol: float) -> list[list[np.ndarray]]:
    out: list[list[np.ndarray]] = []
    for p in points:
        scale = 1 + np.linalg.norm(p)
        for c in out:
            if np.linalg.norm(c[0] - p) <= tol * scale:
                c.append(p)
                break
        else:
            out.append([p])
    return out


# pullback over a line

@dataclass
class SplittingReport:
    orbits: int
    orbit_sizes: list[int]
    self_intersections: list[int]
    cross_intersection: int | None
    group_order: int
    cycle_types: list[list[int]]

    @property
    def components(self) -> int:
        return self.orbits

    def as_dict(self) -> dict:
        return {"orbits": self.orbits, "orbit_sizes": self.orbit_sizes,
                "self_intersections": self.self_intersections,
                "cross_intersection": self.cross_intersection,
                "group_order": self.group_order, "cycle_types": self.cycle_types}


def quartic_double_plane_cover(q: PlaneQuartic):
    """The cyclic quartic surface ``X3^4 + F(X0, X1, X2) = 0`` projected from (0:0:0:1)."""
    from .algebra import CoverSpec
    F = q.poly
    lifted = MultiPoly(4, {e + (0,): c for e, c in F.terms.items()}, F.field)
    surface = lifted + MultiPoly.var(3, 4, F.field) ** 4
    return CoverSpec(3, (surface,), LinearSubspace.coordinate(3, [0, 1, 2]), "S4")


def _restricted_branch(q: PlaneQuartic, A, B, accuracy: float) -> list:
    """Branch points of ``X3^4 = -F`` over the line ``A + s B``.

    They are the zeros of ``h(s) = F(A + s B)``; a zero of order ``k`` has
    ``gcd(4, k)`` points above it, so it contributes ``4 - gcd(4, k)``.
    Working with ``h`` avoids the badly conditioned discriminant ``h^3``.
    Zeros that an inaccurate special line splits apart are merged back,
    since the check is about the special line itself.
    """
    from .monodromy.pencil import BranchPoint, _cluster_multiple

    h = list(restriction_coeffs(q.poly, A, B))
    while len(h) > 1 and abs(h[-1]) <= 1e-12 * max(abs(x) for x in h):
        h.pop()
    if len(h) < 5:
        raise NumericalFailure("a zero of F on the line sits at infinity")
    roots = np.roots(np.asarray(h[::-1], dtype=complex))
    zeros = _cluster_multiple(h, roots, eps=accuracy, shape_check=False)
    return [BranchPoint(z.value, 4 - math.gcd(4, z.multiplicity)) for z in zeros]


def pullback_splitting_check(q: PlaneQuartic, line, seed: int | None = 0,
                             expect_split: bool | None = None,
                             accuracy: float | None = None) -> SplittingReport:
    """Orbits of the monodromy of ``X3^4 = -F`` restricted over ``line``.

    Each orbit is a component of the pullback curve on the K3; its genus
    from Riemann-Hurwitz gives the self-intersection ``2g - 2``.  The cross
    term follows from ``(sum Gamma_i)^2 = 4``.

    ``line`` is a coefficient triple or a :class:`BitangentRecord`;
    ``accuracy`` is the relative accuracy of its coefficients, by default
    taken from the record (a numerically found line is only as good as its
    residual, and a hyperflex line only as good as the hyperflex test).
    """
    from .monodromy import build_pencil, monodromy_group
    from .monodromy.perm import cycle_type, genus_from_cycles

    if isinstance(line, BitangentRecord):
        if accuracy is None:
            accuracy = HYPERFLEX_TOL if line.hyperflex else max(1e-10, 10 * line.residual)
        line = line.line
    if accuracy is None:
        accuracy = 1e-12
    l = np.asarray([complex(x) for x in line])
    basis = np.array(nullspace([list(l)]), dtype=complex)
    # generic anchors, so that no special point of the line sits at infinity
    mix = _random_chart(stream(seed, "splitting-line"), 2)
    A, B = [list(row) for row in mix @ basis]
    cov = quartic_double_plane_cover(q)
    pc = build_pencil(cov, seed=seed, line=(A, B), strict=False, check_center=False,
                      branch=_restricted_branch(q, A, B, accuracy))
    res = monodromy_group(pc, check_multiplicity=False)
    orbits = res.group.orbits()
    self_ints = []
    for orb in orbits:
        idx = {p: i for i, p in enumerate(orb)}
        cts = []
        for rec in res.loops:
            sub = tuple(idx[rec.permutation[p]] for p in orb)
            cts.append(cycle_type(sub))
        g = genus_from_cycles(len(orb), cts)
        self_ints.append(2 * g - 2)
    cross = None
    if len(orbits) == 2:
        cross = (4 - sum(self_ints)) // 2
    report = SplittingReport(len(orbits), [len(o) for o in orbits], self_ints, cross,
                             res.group.order, [r.cycle_type for r in res.loops])
    if expect_split is True and report.orbits != 2:
        raise NumericalFailure("pullback over a bitangent did not split (transitive monodromy)")
    return report
