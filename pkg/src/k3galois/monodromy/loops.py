"""Lifting loops of the base line and assembling the monodromy group.

Permutation convention: ``perm[i] = j`` when the lift of the loop starting
at basepoint fibre point ``i`` ends at point ``j``; loops compose left to
right (:func:`k3galois.monodromy.perm.compose`).
"""

from __future__ import annotations

import cmath
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..algebra.solve import track_paths
from ..errors import NumericalFailure
from .pencil import PencilCover, build_pencil
from .perm import GaloisVerdict, Perm, PermGroup, cycle_type, genus_from_cycles, identity, \
    is_galois, product

MATCH_TOL = 1e-6
SEPARATION_GUARD = 10.0
TRACK_RESIDUAL = 1e-9
CIRCLE_STEPS = 64
STEP_FLOOR = 2.0 ** -20


@dataclass(frozen=True)
class Segment:
    a: complex
    b: complex

    def at(self, tau):
        return self.a + tau * (self.b - self.a), np.full_like(tau, self.b - self.a, dtype=complex)


@dataclass(frozen=True)
class Arc:
    center: complex
    radius: float
    start: float            # angle
    sweep: float = 2 * math.pi

    def at(self, tau):
        ang = self.start + self.sweep * tau
        z = self.radius * np.exp(1j * ang)
        return self.center + z, 1j * self.sweep * z


def _hfun(pc: PencilCover, piece):
    sysc = pc.system

    def hfun(Z, T):
        s, ds = piece.at(T)
        F, J = sysc.evaluate(np.column_stack([s, Z]))
        return F, J[:, :, 1:], J[:, :, 0] * ds[:, None]

    return hfun


def track_piece(pc: PencilCover, fiber: np.ndarray, piece, hmax: float | None = None) -> tuple[np.ndarray, float]:
    """Transport fibre points along one piece; returns (points, max residual)."""
    if isinstance(piece, Arc):
        h = 1.0 / CIRCLE_STEPS if hmax is None else hmax
        h0 = h
    else:
        h = 0.05 if hmax is None else hmax
        h0 = min(0.01, h)
    res = track_paths(_hfun(pc, piece), fiber, tau0=0.0, tau1=1.0, h0=h0, hmax=h,
                      hmin=STEP_FLOOR * h, common_step=True, max_steps=200000)
    if not np.all(res.status == "ok"):
        raise NumericalFailure(f"path tracking failed along {piece}: {set(res.status)}")
    if res.max_residual > TRACK_RESIDUAL:
        raise NumericalFailure(f"tracking residual {res.max_residual:.2e} above {TRACK_RESIDUAL}")
    return res.points, res.max_residual


def match_fibers(end: np.ndarray, start: np.ndarray, tol: float | None = None) -> Perm:
    """Nearest-neighbour bijection ``start[i] -> end[perm[i]]`` with a separation guard.

    The lift starting at ``start[i]`` finishes at ``end[i]``; the returned
    permutation sends ``i`` to the index ``j`` of ``start`` closest to ``end[i]``.
    """
    tol = MATCH_TOL if tol is None else tol
    D = np.linalg.norm(end[:, None, :] - start[None, :, :], axis=2)
    scale = 1 + np.abs(start).max()
    perm = []
    for i in range(len(end)):
        order = np.argsort(D[i])
        best = D[i, order[0]]
        if best > tol * scale:
            raise NumericalFailure(f"endpoint {i} matches nothing within {tol:g} ({best:.2e})")
        if len(order) > 1 and D[i, order[1]] <= SEPARATION_GUARD * max(best, 1e-300):
            if D[i, order[1]] <= SEPARATION_GUARD * tol * scale:
                raise NumericalFailure(f"ambiguous match for endpoint {i}")
        perm.append(int(order[0]))
    if sorted(perm) != list(range(len(end))):
        raise NumericalFailure("endpoint matching is not a bijection")
    return tuple(perm)


def track_loop(pc: PencilCover, loop: Sequence, fiber: np.ndarray | None = None) -> Perm:
    """Permutation of the fibre induced by a closed chain of pieces.

    ``loop`` is a sequence of :class:`Segment`/:class:`Arc` pieces or of
    complex vertices (a closed polyline).  Step size is halved once on a
    failed match before giving up.
    """
    start = pc.base_fiber if fiber is None else fiber
    pieces = list(loop)
    if pieces and not isinstance(pieces[0], (Segment, Arc)):
        verts = [complex(v) for v in pieces]
        if abs(verts[0] - verts[-1]) > 1e-12:
            verts.append(verts[0])
        pieces = [Segment(a, b) for a, b in zip(verts, verts[1:])]
    last = None
    for refine in (1.0, 0.5):
        try:
            Z = start
            for piece in pieces:
                h = (1.0 / CIRCLE_STEPS if isinstance(piece, Arc) else 0.05) * refine
                Z, _ = track_piece(pc, Z, piece, h)
            return match_fibers(Z, start)
        except NumericalFailure as exc:
            last = exc
    raise last


def petal_loop(pc: PencilCover, b: complex) -> list:
    """Straight segment to the circle of radius ``rho`` around ``b``, the
    counterclockwise circle, and the segment back."""
    p = pc.basepoint
    rho = pc.radius
    u = (p - b) / abs(p - b)
    entry = b + rho * u
    return [Segment(p, entry), Arc(b, rho, cmath.phase(u)), Segment(entry, p)]


def angular_key(base: complex, b: complex) -> float:
    """Direction of ``b`` seen from ``base``, measured from the ray to 0."""
    return cmath.phase((b - base) / (-base if base != 0 else 1))


@dataclass
class LoopRecord:
    branch_point: complex
    multiplicity: int
    permutation: Perm
    cycle_type: list[int]
    residual: float


@dataclass
class MonodromyResult:
    degree: int
    basepoint: complex
    loops: list[LoopRecord]
    group: PermGroup
    sphere_relation: bool
    max_residual: float
    galois: GaloisVerdict = field(init=False)
    genus: int | None = field(init=False)

    def __post_init__(self):
        self.galois = is_galois(self.group)
        # the genus of a disconnected cover is not defined
        self.genus = genus_from_cycles(self.degree, [r.cycle_type for r in self.loops]) \
            if self.group.transitive else None

    @property
    def order(self) -> int:
        return self.group.order

    def as_dict(self) -> dict:
        return {
            "degree": self.degree,
            "basepoint": [self.basepoint.real, self.basepoint.imag],
            "branch_points": [[r.branch_point.real, r.branch_point.imag] for r in self.loops],
            "cycle_types": [r.cycle_type for r in self.loops],
            "order": self.group.order,
            "label": self.group.label(),
            "transitive": self.group.transitive,
            "element_orders": {str(k): v for k, v in self.group.order_multiset().items()},
            "galois": self.galois.galois,
            "galois_reason": self.galois.reason,
            "genus": self.genus,
            "sphere_relation": self.sphere_relation,
            "max_residual": self.max_residual,
        }


def _petal_permutation(pc: PencilCover, b) -> LoopRecord:
    seg, arc, _ = petal_loop(pc, b.value)
    last = None
    for refine in (1.0, 0.5):
        try:
            near, r1 = track_piece(pc, pc.base_fiber, seg, 0.05 * refine)
            around, r2 = track_piece(pc, near, arc, refine / CIRCLE_STEPS)
            # going back along the same segment transports labels identically
            perm = match_fibers(around, near)
            return LoopRecord(b.value, b.multiplicity, perm, cycle_type(perm), max(r1, r2))
        except NumericalFailure as exc:
            last = exc
    raise last


def monodromy_group(pc: PencilCover, threads: int = 1, check_multiplicity: bool = True) -> MonodromyResult:
    """Petal-loop generators ordered by angle at the basepoint, their closure,
    and the sphere relation (the ordered product is the identity)."""
    if pc.basepoint is None:
        raise NumericalFailure("pencil has no basepoint")
    order = sorted(pc.branch, key=lambda b: angular_key(pc.basepoint, b.value))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            loops = list(ex.map(lambda b: _petal_permutation(pc, b), order))
    else:
        loops = [_petal_permutation(pc, b) for b in order]
    d = pc.degree
    if check_multiplicity:
        for rec in loops:
            local = sum(c - 1 for c in rec.cycle_type)
            if local != rec.multiplicity:
                raise NumericalFailure(f"loop around {rec.branch_point} has local ramification "
                                       f"{local}, discriminant multiplicity {rec.multiplicity}")
    # counterclockwise petals taken in counterclockwise angular order compose
    # to a loop around every branch point, which is trivial since the point
    # at infinity of the line is unramified
    sphere = product([r.permutation for r in loops], d) == identity(d)
    if not sphere:
        raise NumericalFailure("sphere relation fails: generators do not multiply to the identity")
    group = PermGroup.generate(d, [r.permutation for r in loops])
    return MonodromyResult(d, pc.basepoint, loops, group, sphere,
                           max(r.residual for r in loops))


def compute_monodromy(cov, seed: int | None = 0, threads: int = 1, reseeds: int = 3) -> MonodromyResult:
    """Build a pencil and compute its monodromy, redrawing the line on failure."""
    last = None
    base = 0 if seed is None else int(seed)
    for attempt in range(reseeds + 1):
        try:
            pc = build_pencil(cov, seed=base + 1000 * attempt)
            return monodromy_group(pc, threads=threads)
        except NumericalFailure as exc:
            last = exc
    raise NumericalFailure(f"monodromy failed after {reseeds} reseeds: {last}")
