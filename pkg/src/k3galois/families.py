"""The three Galois-embedded K3 families and their validators.

* ``S4``: ``X3^4 + F4 = 0`` in P^3, group Z4.
* ``S23``: ``X3^2 + F2 = X4^3 + F3 = 0`` in P^4, group Z6.
* ``S222``: ``X3^2 + F22 = X4^2 + F24 = X5^2 + F25 = 0`` in P^5, group Z2^3.

The forms ``F`` live in ``X0, X1, X2`` and the projection centre is
``{X0 = X1 = X2 = 0}``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .algebra import CoverSpec, LinearSubspace, MultiPoly, is_empty_intersection, parse_poly
from .algebra.linear import rank
from .algebra.roots import root_of_unity
from .algebra.solve import total_degree_homotopy
from .errors import CheckFailed, InvalidInput
from .group_action import ProjGroup, diag, generate_group
from .rng import random_complex, stream

COEFF_BOUND = 5
MAX_REDRAWS = 10

# label -> (ambient N, degrees of the plane forms, exponents of X3.., branch data)
SHAPES = {
    "S4": (3, (4,), (4,), ((4, 4),)),
    "S23": (4, (2, 3), (2, 3), ((3, 3), (2, 2))),
    "S222": (5, (2, 2, 2), (2, 2, 2), ((2, 2), (2, 2), (2, 2))),
}
GROUP_LABELS = {"S4": "Z4", "S23": "Z6", "S222": "Z2^3"}
GENERA = {"S4": 3, "S23": 4, "S222": 5}


@dataclass
class FamilySpec:
    label: str
    N: int
    forms: tuple[MultiPoly, ...]
    cover: CoverSpec
    group: ProjGroup
    seed: int | None = None
    redraws: int = 0
    certificate: dict = field(default_factory=dict)

    @property
    def equations(self) -> tuple[MultiPoly, ...]:
        return self.cover.equations

    @property
    def center_forms(self) -> list[MultiPoly]:
        return list(self.cover.center.forms)

    @property
    def degree(self) -> int:
        return self.cover.degree

    def as_dict(self) -> dict:
        return {"label": self.label, "N": self.N, "forms": [str(f) for f in self.forms],
                "equations": [str(e) for e in self.equations], "group": GROUP_LABELS[self.label],
                "seed": self.seed, "redraws": self.redraws}


def _lift(F: MultiPoly, arity: int) -> MultiPoly:
    return MultiPoly(arity, {e + (0,) * (arity - 3): c for e, c in F.terms.items()}, F.field)


def _monomials(d: int) -> list[tuple[int, int, int]]:
    return [(a, b, d - a - b) for a in range(d, -1, -1) for b in range(d - a, -1, -1)]


def random_form(rng: np.random.Generator, d: int, bound: int = COEFF_BOUND) -> MultiPoly:
    """Plane form of degree ``d`` with integer coefficients in ``[-bound, bound]``."""
    while True:
        coeffs = rng.integers(-bound, bound + 1, size=len(_monomials(d)))
        if np.any(coeffs):
            return MultiPoly(3, {e: Fraction(int(c)) for e, c in zip(_monomials(d), coeffs) if c})


def canonical_group(label: str) -> ProjGroup:
    if label == "S4":
        gens = [diag(1, 1, 1, root_of_unity(4))]
    elif label == "S23":
        gens = [diag(1, 1, 1, -1, 1), diag(1, 1, 1, 1, root_of_unity(3))]
    elif label == "S222":
        gens = [diag(*[1, 1, 1] + [-1 if j == k else 1 for j in range(3)]) for k in range(3)]
    else:
        raise InvalidInput(f"unknown family label {label!r}")
    return generate_group(gens)


def assemble_equations(label: str, forms: Sequence[MultiPoly]) -> list[MultiPoly]:
    N, _, powers, _ = SHAPES[label]
    arity = N + 1
    return [MultiPoly.var(3 + j, arity) ** p + _lift(F, arity)
            for j, (F, p) in enumerate(zip(forms, powers))]


def check_plane_curve(F: MultiPoly, seed: int | None = 1) -> dict:
    """Raise :class:`InvalidInput` with a singular point if ``F = 0`` is singular."""
    grads = [F.derivative(i) for i in range(3)]
    emp = is_empty_intersection(grads, LinearSubspace(2, ()), seed=seed)
    if not emp.empty:
        raise InvalidInput(f"plane curve {F} = 0 is singular", witness=emp.witness)
    return {"method": emp.method}


def jacobian_minors(eqs: Sequence[MultiPoly]) -> list[MultiPoly]:
    """Maximal minors of the Jacobian matrix of ``eqs``."""
    k = len(eqs)
    n = eqs[0].arity
    J = [[e.derivative(i) for i in range(n)] for e in eqs]
    minors = []
    for cols in itertools.combinations(range(n), k):
        acc = None
        for perm in itertools.permutations(range(k)):
            sign = -1 if sum(1 for a, b in itertools.combinations(perm, 2) if a > b) % 2 else 1
            term = math.prod((J[r][cols[perm[r]]] for r in range(k)), start=MultiPoly.constant(1, n))
            term = term if sign > 0 else -term
            acc = term if acc is None else acc + term
        if not acc.is_zero():
            minors.append(acc)
    return minors


def check_surface(eqs: Sequence[MultiPoly], seed: int | None = 1) -> dict:
    """Jacobian criterion: the equations plus all maximal minors have no
    common zero.  Raises :class:`InvalidInput` with the singular point."""
    N = eqs[0].arity - 1
    system = list(eqs) + jacobian_minors(eqs)
    emp = is_empty_intersection(system, LinearSubspace(N, ()), seed=seed)
    if not emp.empty:
        raise InvalidInput("surface is singular", witness=emp.witness)
    return {"method": emp.method, **emp.detail}


def _proportional(F: MultiPoly, G: MultiPoly) -> bool:
    keys = sorted(set(F.terms) | set(G.terms))
    rows = [[F.terms.get(k, Fraction(0)) for k in keys], [G.terms.get(k, Fraction(0)) for k in keys]]
    return rank(rows) < 2


def validate(label: str, forms: Sequence[MultiPoly]) -> dict:
    N, degrees, _, _ = SHAPES[label]
    if len(forms) != len(degrees):
        raise InvalidInput(f"{label} needs {len(degrees)} forms, got {len(forms)}")
    for i, (F, d) in enumerate(zip(forms, degrees)):
        if F.arity != 3 or F.is_zero() or not F.is_homogeneous() or F.degree() != d:
            raise InvalidInput(f"form {i} must be homogeneous of degree {d} in X0, X1, X2")
    for i, j in itertools.combinations(range(len(forms)), 2):
        if forms[i].degree() == forms[j].degree() and _proportional(forms[i], forms[j]):
            raise InvalidInput(f"forms {i} and {j} are proportional",
                               witness={"forms": [str(forms[i]), str(forms[j])]})
    cert = {"curves": [check_plane_curve(F) for F in forms]}
    cert["surface"] = check_surface(assemble_equations(label, forms))
    return cert


def build_family(label: str, forms: Sequence[MultiPoly | str] | None = None,
                 seed: int | None = 0) -> FamilySpec:
    """Validated family from explicit forms, or from seeded random integer forms
    (redrawn up to ``MAX_REDRAWS`` times until every check passes)."""
    if label not in SHAPES:
        raise InvalidInput(f"unknown family label {label!r}; expected one of {sorted(SHAPES)}")
    N, degrees, _, _ = SHAPES[label]
    center = LinearSubspace.coordinate(N, [0, 1, 2])
    G = canonical_group(label)
    if forms is not None:
        polys = tuple(parse_poly(f, 3) if isinstance(f, str) else f for f in forms)
        cert = validate(label, polys)
        return FamilySpec(label, N, polys, CoverSpec(N, assemble_equations(label, polys), center, label),
                          G, None, 0, cert)
    rng = stream(seed, f"family-{label}")
    last = None
    for attempt in range(MAX_REDRAWS):
        polys = tuple(random_form(rng, d) for d in degrees)
        try:
            cert = validate(label, polys)
        except InvalidInput as exc:
            last = exc
            continue
        return FamilySpec(label, N, polys, CoverSpec(N, assemble_equations(label, polys), center, label),
                          G, seed, attempt, cert)
    raise InvalidInput(f"no valid {label} member in {MAX_REDRAWS} draws: {last}",
                       witness=getattr(last, "witness", None))


def fermat_family() -> FamilySpec:
    return build_family("S4", ["X0^4 + X1^4 + X2^4"])


def fermat_galois_points() -> list[LinearSubspace]:
    """The four coordinate points of P^3, each as a projection centre for
    the Fermat quartic."""
    return [LinearSubspace.through_point([int(i == j) for j in range(4)]) for i in range(4)]


@dataclass(frozen=True)
class RamificationLedger:
    components: tuple[tuple[int, int], ...]
    n: int
    contributions: tuple[Fraction, ...]
    total: Fraction

    @property
    def ok(self) -> bool:
        return self.total == 3 * self.n

    def as_dict(self) -> dict:
        return {"components": [list(c) for c in self.components], "n": self.n,
                "contributions": [str(c) for c in self.contributions],
                "total": str(self.total), "expected": 3 * self.n, "ok": self.ok}


def ramification_ledger(fs: FamilySpec | str) -> RamificationLedger:
    """``sum (n_i - 1) (n d_i / n_i) = 3 n``: the ramification divisor is ``3D``."""
    label = fs if isinstance(fs, str) else fs.label
    if label not in SHAPES:
        raise InvalidInput(f"unknown family label {label!r}")
    pairs = SHAPES[label][3]
    n = math.prod(ni for _, ni in pairs) if isinstance(fs, str) else fs.group.order
    contrib = tuple((ni - 1) * Fraction(n * d, ni) for d, ni in pairs)
    led = RamificationLedger(pairs, n, contrib, sum(contrib, Fraction(0)))
    if not led.ok:
        raise CheckFailed(f"ramification total {led.total} != {3 * n}")
    return led


@dataclass(frozen=True)
class TowerReport:
    base_point: tuple[complex, ...]
    fiber_sizes: tuple[int, ...]          # S, S(22), S(2) over the base point
    orbit_sizes: tuple[int, ...]          # under <s1, s2, s3>, <s2, s3>, <s3>

    @property
    def ok(self) -> bool:
        return self.fiber_sizes == (8, 4, 2) and self.orbit_sizes == (8, 4, 2)

    def as_dict(self) -> dict:
        return {"fiber_sizes": list(self.fiber_sizes), "orbit_sizes": list(self.orbit_sizes),
                "ok": self.ok}


def _distinct(points: np.ndarray, tol: float = 1e-8) -> int:
    reps: list[np.ndarray] = []
    for p in points:
        if all(np.linalg.norm(p - q) > tol * (1 + np.linalg.norm(q)) for q in reps):
            reps.append(p)
    return len(reps)


def tower_check(fs: FamilySpec, seed: int | None = 0) -> TowerReport:
    """Fibre cardinalities of ``S -> S(22) -> S(2) -> P^2`` over a random point.

    The fibre of ``S`` is solved from the equations with ``X0..X2`` fixed;
    the intermediate covers forget ``X5``, then ``X4``.
    """
    if fs.label != "S222":
        raise InvalidInput(f"tower check needs an S222 family, got {fs.label}")
    x = random_complex(stream(seed, "tower"), 3)
    sub = [e.substitute([MultiPoly.constant(complex(x[i]), 3, "complex") for i in range(3)]
                        + [MultiPoly.var(j, 3, "complex") for j in range(3)])
           for e in fs.equations]
    hom = total_degree_homotopy(sub, seed=seed, name="tower")
    fiber = np.asarray([y for y, r in zip(hom.solutions, hom.residuals) if r < 1e-10])
    sizes = (_distinct(fiber), _distinct(fiber[:, :2]), _distinct(fiber[:, :1]))
    if sizes[0] != fs.degree:
        raise CheckFailed(f"fibre of S has {sizes[0]} points, expected {fs.degree}")
    # orbits of the stabiliser chain on the fibre: the flips act on (X3, X4, X5)
    flips = [np.diag(np.diag(M)[3:] / np.diag(M)[0]) for M in map(np.asarray, fs.group.generator_matrices())]
    orbits = []
    for k in range(3):
        gens = flips[k:]
        orbit = {tuple(np.round(fiber[0], 8))}
        frontier = [fiber[0]]
        while frontier:
            p = frontier.pop()
            for g in gens:
                q = g @ p
                key = tuple(np.round(q, 8))
                if key not in orbit:
                    orbit.add(key)
                    frontier.append(q)
        orbits.append(len(orbit))
    return TowerReport(tuple(complex(v) for v in x), sizes, tuple(orbits))
