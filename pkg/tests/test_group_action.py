import itertools

import numpy as np
import pytest

from k3galois.algebra import LinearSubspace, parse_poly
from k3galois.algebra.roots import root_of_unity
from k3galois.errors import InvalidInput
from k3galois.families import canonical_group
from k3galois.group_action import (character_table, cyclic_product_group, diag, equation_scalar,
                                   fixed_curves, fixed_locus, galois_criterion, gamma_decomposition,
                                   generate_group, hypersurface_cyclic_rule, ideal_invariance,
                                   normalize_projective, random_surface_points, residue_form_ratio,
                                   symplectic_character)

I = root_of_unity(4)
E3 = root_of_unity(3)
L3 = [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0]]


def center_forms(N):
    return [[int(i == j) for j in range(N + 1)] for i in range(3)]


def flips():
    return [diag(*[1, 1, 1] + [-1 if j == k else 1 for j in range(3)]) for k in range(3)]


# closure

def test_cyclic_order_four():
    G = generate_group([diag(1, 1, 1, I)])
    assert G.order == 4 and G.is_cyclic()
    assert sorted(G.element_orders()) == [1, 2, 4, 4]


def test_trivial_group():
    G = generate_group([np.eye(4)])
    assert G.order == 1 and G.label() == "1"


def test_sign_flips_give_elementary_abelian():
    G = generate_group(flips())
    assert G.order == 8
    assert G.order_multiset() == {1: 1, 2: 7}
    assert G.label() == "Z2^3"


def test_projective_normalisation_identifies_scalars():
    G = generate_group([diag(1, I), diag(I, 1)])
    assert G.order == 4
    assert G.contains(2 * np.eye(2))


def test_singular_generator_rejected():
    with pytest.raises(InvalidInput):
        generate_group([diag(1, 0, 1)])


def test_closure_bound():
    with pytest.raises(InvalidInput):
        generate_group([diag(1, 2)], bound=50)


@pytest.mark.parametrize("label", ["S4", "S23", "S222"])
def test_group_axioms(label):
    G = canonical_group(label)
    e = G.identity_index()
    for i in range(G.order):
        row = [G.mul(i, j) for j in range(G.order)]
        assert sorted(row) == list(range(G.order))
        assert G.mul(i, e) == i
    for i, j, k in itertools.product(range(G.order), repeat=3):
        assert G.mul(G.mul(i, j), k) == G.mul(i, G.mul(j, k))


def test_normalize_first_nonzero_entry():
    A = normalize_projective(np.array([[0, 2j], [3, 0]]))
    assert A[0, 1] == 1


# the ideal

def test_fermat_invariance(fermat_surface):
    res = ideal_invariance(generate_group([diag(1, 1, 1, I)]), [fermat_surface])
    assert res.ok
    assert all(abs(m[0] - 1) < 1e-12 for m in res.scalars.values())


def test_s23_equations_invariant():
    eqs = [parse_poly("X3^2 + X0^2 + X1*X2", 5), parse_poly("X4^3 + X0^3 - X1^3 + X2^3", 5)]
    res = ideal_invariance([diag(1, 1, 1, -1, 1), diag(1, 1, 1, 1, E3)], eqs)
    assert res.ok
    assert all(abs(m - 1) < 1e-12 for mus in res.scalars.values() for m in mus)


def test_non_invariance_witness(fermat_surface):
    mu, wit = equation_scalar(fermat_surface, diag(1, 1, 1, 2))
    assert mu is None
    assert wit["monomial"] == (0, 0, 0, 4)
    assert abs(wit["ratio"] - 16) < 1e-12
    assert not ideal_invariance([diag(1, 1, 1, 2)], [fermat_surface]).ok


# the criterion

def test_criterion_fermat(fermat_surface):
    rep = galois_criterion(generate_group([diag(1, 1, 1, I)]), [fermat_surface], L3)
    assert rep.invariant and rep.cond1 and rep.cond2 and rep.cond3 and rep.verdict


def test_criterion_s222(families):
    fs = families["S222"]
    rep = galois_criterion(fs.group, fs.equations, fs.center_forms)
    assert rep.verdict and rep.order == 8 == rep.degree


def test_dropping_a_generator_breaks_only_the_order(fermat_surface):
    rep = galois_criterion(generate_group([diag(1, 1, 1, -1)]), [fermat_surface], L3)
    assert (rep.cond1, rep.cond2, rep.cond3) == (False, True, True)


def test_non_scalar_block_breaks_only_cond2(fermat_surface):
    L = [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1]]
    rep = galois_criterion(generate_group([diag(1, 1, 1, I)]), [fermat_surface], L)
    assert (rep.cond1, rep.cond2, rep.cond3) == (True, False, True)


def test_base_point_breaks_only_cond3():
    # invariant, but passes through the centre (0:0:0:1)
    eq = parse_poly("X0^4 + X1^4 + X2^4", 4)
    rep = galois_criterion(generate_group([diag(1, 1, 1, I)]), [eq], L3)
    assert (rep.cond1, rep.cond2, rep.cond3) == (True, True, False)
    assert rep.base_point is not None


def test_dependent_forms_rejected(fermat_surface):
    with pytest.raises(InvalidInput):
        galois_criterion(generate_group([diag(1, 1, 1, I)]), [fermat_surface],
                         [[1, 0, 0, 0], [2, 0, 0, 0], [0, 0, 1, 0]])


@pytest.mark.parametrize("label", ["S4", "S23", "S222"])
def test_conventions_agree(families, label):
    fs = families[label]
    a = galois_criterion(fs.group, fs.equations, fs.center_forms, convention="pullback")
    b = galois_criterion(fs.group, fs.equations, fs.center_forms, convention="pushforward")
    assert a.verdict == b.verdict is True


# gamma decomposition

def test_gamma_z4():
    dec = gamma_decomposition(generate_group([diag(1, 1, 1, I)]), L3)
    assert dec.kernel_order == 1 and dec.image_order == 4


def test_gamma_trivial():
    dec = gamma_decomposition(generate_group([np.eye(4)]), L3)
    assert dec.kernel_order == dec.image_order == 1


def test_gamma_z2_cubed():
    dec = gamma_decomposition(generate_group(flips()), center_forms(5))
    assert dec.kernel_order == 1 and dec.image_order == 8 and dec.kernel_cyclic


def test_gamma_requires_scalar_action():
    with pytest.raises(InvalidInput):
        gamma_decomposition(generate_group([diag(1, -1, 1, 1)]), L3)


@pytest.mark.parametrize("label", ["S4", "S23", "S222"])
def test_gamma_order_product(label):
    G = canonical_group(label)
    dec = gamma_decomposition(G, center_forms(G.size - 1))
    assert dec.kernel_order * dec.image_order == G.order


def test_hypersurface_rule():
    assert not hypersurface_cyclic_rule(3, cyclic_product_group([2, 2]))
    assert hypersurface_cyclic_rule(3, cyclic_product_group([4]))
    assert hypersurface_cyclic_rule(5, generate_group(flips()))


# fixed loci

def test_fermat_fixed_curve(fermat_surface):
    comps = fixed_locus(diag(1, 1, 1, I), [fermat_surface])
    assert [(c.coordinates, c.dimension) for c in comps] == [((0, 1, 2), 1)]
    assert comps[0].restricted == ["X0^4 + X1^4 + X2^4"]


def test_identity_fixes_everything(fermat_surface):
    comps = fixed_locus(np.eye(4), [fermat_surface])
    assert [c.dimension for c in comps] == [2]


def test_fixed_locus_needs_diagonal(fermat_surface):
    with pytest.raises(InvalidInput):
        fixed_locus(np.array([[0, 1, 0, 0], [1, 0, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]]), [fermat_surface])


def test_each_flip_fixes_a_curve(families):
    fs = families["S222"]
    for sigma in flips():
        assert fixed_curves(sigma, fs.equations)


def test_products_of_two_flips_fix_isolated_points(families):
    fs = families["S222"]
    a, b, _ = flips()
    comps = fixed_locus(a @ b, fs.equations)
    assert comps and all(c.dimension == 0 for c in comps)


@pytest.mark.parametrize("label", ["S4", "S23"])
def test_no_free_elements(families, label):
    fs = families[label]
    for i, M in enumerate(fs.group.elements):
        if i != fs.group.identity_index():
            assert fixed_locus(M, fs.equations)


@pytest.mark.xfail(strict=True, reason="diag(1,1,1,-1,-1,-1) acts freely on a smooth S222 member")
def test_no_free_elements_s222(families):
    fs = families["S222"]
    for i, M in enumerate(fs.group.elements):
        if i != fs.group.identity_index():
            assert fixed_locus(M, fs.equations)


def test_total_flip_is_free(families):
    # both eigenspaces miss the surface: F22 = F24 = F25 = 0 has no common
    # zero in the plane, and X3^2 = X4^2 = X5^2 = 0 forces the zero vector
    fs = families["S222"]
    assert fixed_locus(diag(1, 1, 1, -1, -1, -1), fs.equations) == []


# the symplectic character

def test_character_values():
    assert abs(symplectic_character(diag(1, 1, 1, I), [1]) - I) < 1e-12
    assert abs(symplectic_character(diag(1, 1, 1, -1, E3), [1, 1]) - (-E3)) < 1e-12
    for sigma in flips():
        assert abs(symplectic_character(sigma, [1, 1, 1]) + 1) < 1e-12
    with pytest.raises(InvalidInput):
        symplectic_character(diag(1, 1, 1, I), [0])


@pytest.mark.parametrize("label, image, kernel", [("S4", 4, 1), ("S23", 6, 1), ("S222", 2, 4)])
def test_character_table(families, label, image, kernel):
    fs = families[label]
    table = character_table(fs.group, fs.equations, fs.center_forms)
    assert (table.image_order, table.kernel_order) == (image, kernel)
    G = fs.group
    for i, j in itertools.product(range(G.order), repeat=2):
        assert abs(table.epsilons[G.mul(i, j)] - table.epsilons[i] * table.epsilons[j]) < 1e-10
    for z in table.epsilons.values():
        assert abs(z ** G.order - 1) < 1e-10


@pytest.mark.parametrize("label", ["S4", "S23", "S222"])
def test_residue_form_oracle(families, label):
    fs = families[label]
    table = character_table(fs.group, fs.equations, fs.center_forms)
    for p in random_surface_points(fs.equations, 2, seed=3):
        assert max(abs(complex(e.evaluate(list(p)))) for e in fs.equations) < 1e-8
        for i, M in enumerate(fs.group.elements):
            assert abs(residue_form_ratio(M, fs.equations, p) - table.epsilons[i]) < 1e-8
