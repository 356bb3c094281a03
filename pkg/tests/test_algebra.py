from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from k3galois.algebra import (COMPLEX, CoverSpec, LinearSubspace, MultiPoly, PolySyntaxError,
                              act_linear, is_empty_intersection, parse_poly, resultant,
                              roots_univariate, solve_square_system)
from k3galois.algebra.linear import nullspace, rank, right_inverse
from k3galois.algebra.poly import format_poly
from k3galois.algebra.roots import poly_from_roots, squarefree_factors, ueval
from k3galois.errors import NumericalFailure

coeff = st.integers(-4, 4).map(Fraction)


@st.composite
def exact_polys(draw, arity=3, max_deg=3, max_terms=5):
    n = draw(st.integers(0, max_terms))
    terms = {}
    for _ in range(n):
        e = tuple(draw(st.lists(st.integers(0, max_deg), min_size=arity, max_size=arity)))
        terms[e] = draw(coeff)
    return MultiPoly(arity, terms)


int_matrix = st.lists(st.lists(st.integers(-3, 3), min_size=3, max_size=3), min_size=3, max_size=3)


def matmul(A, B):
    return [[sum(A[i][k] * B[k][j] for k in range(3)) for j in range(3)] for i in range(3)]


# parsing and printing

def test_parse_fermat():
    p = parse_poly("X0^4+X1^4+X2^4+X3^4", 4)
    assert p.degree() == 4 and p.is_homogeneous()
    assert len(p.terms) == 4
    assert all(c == 1 for c in p.terms.values())


def test_parse_zero_has_no_degree():
    z = parse_poly("0", 3)
    assert z.is_zero() and z.degree() is None


def test_parse_cancellation():
    assert parse_poly("(X0+X1)^2 - X0^2 - 2*X0*X1", 2) == parse_poly("X1^2", 2)


def test_parse_rational_coefficients():
    p = parse_poly("1/2*X0 - 3/4", 1)
    assert p.coefficient((1,)) == Fraction(1, 2)
    assert p.coefficient((0,)) == Fraction(-3, 4)


@pytest.mark.parametrize("text, pos", [("X0+*X1", 3), ("X5", 0), ("(X0", 3)])
def test_syntax_errors_carry_position(text, pos):
    with pytest.raises(PolySyntaxError) as info:
        parse_poly(text, 3)
    assert info.value.pos == pos


@given(exact_polys())
@settings(max_examples=60, deadline=None)
def test_printer_round_trip(p):
    assert parse_poly(format_poly(p), 3) == p


def test_homogeneity_is_checked():
    with pytest.raises(ValueError):
        parse_poly("X0^2 + X1", 2).require_homogeneous()


# ring axioms

@given(exact_polys(), exact_polys(), exact_polys())
@settings(max_examples=50, deadline=None)
def test_ring_axioms(p, q, r):
    assert (p * q) * r == p * (q * r)
    assert p * (q + r) == p * q + p * r
    assert p + q == q + p
    assert (p - p).is_zero()


@given(exact_polys())
@settings(max_examples=30, deadline=None)
def test_no_stored_zero_coefficients(p):
    assert all(c != 0 for c in (p * p - p * p + p).terms.values())
    assert all(len(e) == p.arity for e in p.terms)


# linear action

@given(exact_polys(), int_matrix, int_matrix)
@settings(max_examples=100, deadline=None)
def test_act_linear_is_right_action(p, A, B):
    assert act_linear(act_linear(p, A), B) == act_linear(p, matmul(A, B))


def test_act_linear_examples(fermat_surface):
    ident = np.eye(4).tolist()
    assert act_linear(fermat_surface, ident).almost_equal(fermat_surface)
    assert act_linear(fermat_surface, np.diag([1, 1, 1, 1j])).almost_equal(fermat_surface)
    q = parse_poly("X3^2 + X0*X1", 4)
    assert act_linear(q, np.diag([1, 1, 1, -1]).tolist()) == q


def test_act_linear_dimension_mismatch(fermat_surface):
    with pytest.raises(ValueError):
        act_linear(fermat_surface, np.eye(3))


@given(exact_polys(max_deg=2), int_matrix)
@settings(max_examples=30, deadline=None)
def test_act_linear_preserves_degree_when_invertible(p, A):
    if p.is_zero() or rank(A) < 3 or not p.is_homogeneous():
        return
    assert act_linear(p, A).degree() == p.degree()


# resultants

def test_resultant_sylvester_sign():
    # res(t^2 - s, 2t) with s = X0, t = X1
    assert resultant(parse_poly("X1^2 - X0", 2), parse_poly("2*X1", 2), 1) == parse_poly("-4*X0", 2)


def test_resultant_linear():
    assert resultant(parse_poly("X1 - X0", 3), parse_poly("X1 - X2", 3), 1) == parse_poly("X0 - X2", 3)


def test_discriminant_of_kummer_quartic_vanishes_only_at_zero():
    f = parse_poly("X1^4 + X0", 2)
    d = resultant(f, f.derivative(1), 1).univariate_coeffs(0)
    facs = squarefree_factors(d)
    assert [(g, m) for g, m in facs] == [([Fraction(0), Fraction(1)], 3)]


@given(st.lists(st.integers(-3, 3), min_size=1, max_size=3),
       st.lists(st.integers(-3, 3), min_size=1, max_size=3))
@settings(max_examples=60, deadline=None)
def test_resultant_vanishes_iff_common_root(ra, rb):
    t = MultiPoly.var(0, 1)

    def from_roots(rs):
        out = MultiPoly.constant(1, 1)
        for r in rs:
            out = out * (t - r)
        return out

    res = resultant(from_roots(ra), from_roots(rb), 0)
    assert res.is_zero() == bool(set(ra) & set(rb))


# univariate roots

def test_roots_of_unity():
    roots = sorted(roots_univariate([1, 0, 0, 0, -1]), key=lambda z: (round(z.real, 6), round(z.imag, 6)))
    assert np.allclose(roots, [-1, -1j, 1j, 1], atol=1e-12)


def test_multiple_root():
    # (t - 2)^2 (t + 1) = t^3 - 3 t^2 + 4
    roots = sorted(roots_univariate([1, -3, 0, 4]), key=lambda z: z.real)
    assert np.allclose(roots, [-1, 2, 2], atol=1e-9)


def test_roots_reject_degree_zero():
    with pytest.raises(ValueError):
        roots_univariate([3])
    with pytest.raises(ValueError):
        roots_univariate([1, float("nan")])


@given(st.integers(1, 10), st.integers(0, 2**32 - 1))
@settings(max_examples=100, deadline=None)
def test_vieta_reconciliation(deg, seed):
    rng = np.random.default_rng(seed)
    c = rng.standard_normal(deg + 1) + 1j * rng.standard_normal(deg + 1)
    c[0] = c[0] if abs(c[0]) > 0.1 else 1.0
    roots = roots_univariate(list(c))
    assert len(roots) == deg
    rebuilt = c[0] * poly_from_roots(roots)
    assert np.max(np.abs(rebuilt - c)) <= 1e-8 * np.max(np.abs(c))


def test_residual_bound():
    c = [1, 2, -3, 0.5, 7]
    for r in roots_univariate(c):
        assert abs(np.polyval(c, r)) < 1e-10 * sum(abs(x) * max(1, abs(r)) ** 4 for x in c)


def test_squarefree_factors_exact():
    # (t - 1)^3 (t + 2), low degree first
    p = [Fraction(c) for c in (-2, 5, -3, -1, 1)]
    facs = {tuple(f): m for f, m in squarefree_factors(p)}
    assert facs == {(Fraction(2), Fraction(1)): 1, (Fraction(-1), Fraction(1)): 3}
    assert ueval(p, Fraction(1)) == 0


# Newton

def test_newton_one_variable():
    z = solve_square_system([parse_poly("X0^2 - 1", 1)], [0.9])
    assert abs(z[0] - 1) < 1e-12


def test_newton_two_variables():
    z = solve_square_system([parse_poly("X0^2 + X1^2 - 2", 2), parse_poly("X0 - X1", 2)], [1.1, 0.9])
    assert np.allclose(z, [1, 1], atol=1e-12)


def test_newton_singular_jacobian():
    with pytest.raises(NumericalFailure):
        solve_square_system([parse_poly("X0^2 + 1", 1)], [0.0])


def test_fermat_fiber_from_four_starts(fermat_surface):
    # fibre over the base point (1 : 2 : 3) of the projection from (0:0:0:1)
    fiber = parse_poly("X0^4 + 98", 1)
    starts = roots_univariate([1, 0, 0, 0, 98])
    sols = [solve_square_system([fiber], [r * 1.01]) for r in starts]
    assert len({(round(s[0].real, 8), round(s[0].imag, 8)) for s in sols}) == 4
    for s in sols:
        assert abs(fermat_surface.evaluate([1, 2, 3, s[0]])) < 1e-9


# linear geometry

def test_nullspace_and_right_inverse_exact():
    rows = [[Fraction(1), Fraction(2), Fraction(3)], [Fraction(0), Fraction(1), Fraction(1)]]
    ker = nullspace(rows)
    assert len(ker) == 1
    assert all(sum(r[j] * ker[0][j] for j in range(3)) == 0 for r in rows)
    P = right_inverse(rows)
    prod = [[sum(rows[i][k] * P[k][j] for k in range(3)) for j in range(2)] for i in range(2)]
    assert prod == [[1, 0], [0, 1]]


def test_subspace_rejects_dependent_forms():
    with pytest.raises(ValueError):
        LinearSubspace.from_vectors([[1, 0, 0], [2, 0, 0]])


def test_cover_degree_is_bezout_product():
    eqs = [parse_poly("X3^2 + X0^2 + X1^2 + X2^2", 5), parse_poly("X4^3 + X0^3 + X1^3 + X2^3", 5)]
    cov = CoverSpec(4, eqs, LinearSubspace.coordinate(4, [0, 1, 2]))
    assert cov.degree == 6
    with pytest.raises(ValueError):
        CoverSpec(4, eqs[:1], LinearSubspace.coordinate(4, [0, 1, 2]))
    with pytest.raises(ValueError):
        CoverSpec(4, eqs, LinearSubspace.coordinate(4, [0, 1]))


# emptiness

def test_fermat_misses_coordinate_point(fermat_surface):
    assert is_empty_intersection([fermat_surface], LinearSubspace.coordinate(3, [0, 1, 2])).empty


def test_s23_center_line_is_empty():
    eqs = [parse_poly("X3^2 + X0^2 + X1^2 + X2^2", 5), parse_poly("X4^3 + X0^3 + X1^3 + X2^3", 5)]
    assert is_empty_intersection(eqs, LinearSubspace.coordinate(4, [0, 1, 2])).empty


def test_missing_variable_gives_witness():
    res = is_empty_intersection([parse_poly("X0^4 + X1^4 + X2^4", 4)], LinearSubspace.coordinate(3, [0, 1, 2]))
    assert not res.empty
    w = np.asarray(res.witness, dtype=complex)
    assert np.allclose(w[:3], 0) and abs(w[3]) > 0


def test_emptiness_on_a_plane_finds_points():
    eqs = [parse_poly("X0^2 + X1^2 - X2^2", 3), parse_poly("X0 - X1", 3)]
    res = is_empty_intersection(eqs, LinearSubspace(2, ()))
    assert not res.empty
    w = np.asarray(res.witness, dtype=complex)
    assert abs(complex(eqs[0].evaluate(list(w)))) < 1e-8 * np.linalg.norm(w) ** 2


def test_complex_polys_interoperate():
    p = MultiPoly.linear_form([1j, 2, 0], COMPLEX)
    assert p.field == COMPLEX and p.degree() == 1
