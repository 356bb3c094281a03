"""Exact oracle for the geometric Galois group of a quartic cover ``f(s, t) = 0``.

Independent of path tracking: it uses only exact arithmetic over Q(s).

* ``t^4 + a(s)``: Kummer theory.  The group over C(s) is cyclic of order
  ``4 / e`` where ``e`` is the largest of 1, 2, 4 dividing every root
  multiplicity of ``a`` (for a square-free ``a`` this is Z4).
* otherwise: if ``disc_t f`` has a root of odd multiplicity the geometric
  group is not inside A4.  If some rational specialisation ``s0`` has an
  irreducible cubic resolvent and a non-square discriminant, the arithmetic
  group is S4.  The geometric group is then a transitive normal subgroup of
  S4 outside A4, hence S4.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import sympy

from ..algebra import MultiPoly, resultant
from ..algebra.roots import squarefree_factors, ueval, utrim
from ..errors import InvalidInput


@dataclass(frozen=True)
class ResolventVerdict:
    order: int | None        # None when the oracle cannot decide
    label: str
    reason: str


def _t_coeffs(f: MultiPoly) -> list[list[Fraction]]:
    """Coefficients of ``f`` in ``t`` (low to high), each a list in ``s``."""
    return [c.univariate_coeffs(0) for c in f.coefficients_in(1)]


def _is_square_rational(q: Fraction) -> bool:
    if q < 0:
        return False
    n, d = q.numerator, q.denominator
    return sympy.integer_nthroot(n, 2)[1] and sympy.integer_nthroot(d, 2)[1]


def _cubic_irreducible(coeffs: list[Fraction]) -> bool:
    y = sympy.Symbol("y")
    poly = sympy.Poly([sympy.Rational(c.numerator, c.denominator) for c in reversed(coeffs)], y,
                      domain=sympy.QQ)
    _, factors = poly.factor_list()
    return len(factors) == 1 and factors[0][1] == 1 and factors[0][0].degree() == 3


def quartic_galois_over_q(coeffs: list[Fraction]) -> str:
    """Coarse Galois group of a rational quartic (low to high): only decides S4."""
    if len(coeffs) != 5 or coeffs[4] == 0:
        raise InvalidInput("not a quartic")
    a, b, c, d = (coeffs[3] / coeffs[4], coeffs[2] / coeffs[4], coeffs[1] / coeffs[4],
                  coeffs[0] / coeffs[4])
    # resolvent y^3 - b y^2 + (ac - 4d) y - (a^2 d - 4 b d + c^2), low to high
    res = [-(a * a * d - 4 * b * d + c * c), a * c - 4 * d, -b, Fraction(1)]
    t = sympy.Symbol("t")
    f = sympy.Poly([sympy.Rational(x.numerator, x.denominator) for x in (Fraction(1), a, b, c, d)],
                   t, domain=sympy.QQ)
    if len(f.factor_list()[1]) != 1 or f.factor_list()[1][0][1] != 1:
        return "reducible"
    disc = Fraction(str(sympy.discriminant(f)))
    if _cubic_irreducible(res) and not _is_square_rational(disc):
        return "S4"
    return "smaller"


def geometric_quartic_group(f: MultiPoly, trials: int = 12) -> ResolventVerdict:
    """Geometric Galois group of ``f(s, t)`` over C(s) for ``deg_t f = 4``."""
    if f.arity != 2 or f.degree_in(1) != 4:
        raise InvalidInput("expected a quartic in t over Q(s)")
    cs = _t_coeffs(f)
    lead = utrim(cs[4])
    if len(lead) != 1:
        raise InvalidInput("leading coefficient in t must be constant")
    if all(not utrim(cs[i]) for i in (1, 2, 3)):
        a = [x / lead[0] for x in utrim(cs[0])]
        mults = [m for _, m in squarefree_factors(a)]
        if not mults:
            return ResolventVerdict(None, "reducible", "constant Kummer radicand")
        e = 4 if all(m % 4 == 0 for m in mults) else 2 if all(m % 2 == 0 for m in mults) else 1
        if e == 4:
            return ResolventVerdict(None, "reducible", "radicand is a fourth power")
        return ResolventVerdict(4 // e, "Z4" if e == 1 else "Z2", "Kummer")
    disc = resultant(f, f.derivative(1), 1).univariate_coeffs(0)
    odd = any(m % 2 for _, m in squarefree_factors(disc))
    if not odd:
        return ResolventVerdict(None, "undecided", "discriminant is a square")
    for k in range(trials):
        s0 = Fraction(k * (1 if k % 2 else -1), 1) + Fraction(1, 3)
        spec = [ueval(c, s0) if c else Fraction(0) for c in cs]
        if quartic_galois_over_q(spec) == "S4":
            return ResolventVerdict(24, "S4", f"resolvent irreducible at s = {s0}")
    return ResolventVerdict(None, "undecided", "no S4 specialisation found")
