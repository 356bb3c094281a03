from fractions import Fraction

import pytest

from k3galois.algebra import is_empty_intersection, parse_poly
from k3galois.errors import InvalidInput
from k3galois.families import (GENERA, GROUP_LABELS, assemble_equations, build_family,
                               canonical_group, check_plane_curve, check_surface, fermat_family,
                               fermat_galois_points, jacobian_minors, ramification_ledger,
                               tower_check, validate)
from k3galois.group_action import galois_criterion
from k3galois.monodromy import compute_monodromy

S23_FORMS = ["X0^2 + X1^2 + X2^2", "X0^3 + 2*X1^3 - X2^3"]


@pytest.mark.parametrize("label, N, degree", [("S4", 3, 4), ("S23", 4, 6), ("S222", 5, 8)])
def test_seeded_families(families, label, N, degree):
    fs = families[label]
    assert (fs.N, fs.degree, fs.group.order) == (N, degree, degree)
    assert fs.group.label() == GROUP_LABELS[label]
    assert all(e.is_homogeneous() for e in fs.equations)
    assert fs.as_dict()["group"] == GROUP_LABELS[label]


def test_seeded_build_is_deterministic():
    a = build_family("S23", seed=4).as_dict()
    b = build_family("S23", seed=4).as_dict()
    assert a == b
    assert build_family("S23", seed=5).as_dict()["forms"] != a["forms"]


def test_explicit_forms():
    fs = build_family("S23", S23_FORMS)
    assert [str(e) for e in fs.equations] == [
        "X0^2 + X1^2 + X2^2 + X3^2", "X0^3 + 2*X1^3 - X2^3 + X4^3"]
    assert fs.seed is None and fs.redraws == 0


def test_assembled_shape():
    eqs = assemble_equations("S222", [parse_poly(f, 3) for f in
                                      ("X0^2 + X1^2 + X2^2", "X0^2 - X1^2", "X0*X1 + X2^2")])
    assert [e.degree() for e in eqs] == [2, 2, 2]
    assert [e.coefficient(tuple(2 * int(j == k + 3) for j in range(6))) for k, e in enumerate(eqs)] == [1, 1, 1]


def test_fermat_family(fermat_fs):
    assert fermat_fs.label == "S4"
    assert str(fermat_fs.equations[0]) == "X0^4 + X1^4 + X2^4 + X3^4"


def test_fermat_galois_points(fermat_surface):
    pts = fermat_galois_points()
    assert len(pts) == 4
    for p in pts:
        assert is_empty_intersection([fermat_surface], p).empty


def test_unknown_label():
    with pytest.raises(InvalidInput):
        build_family("S5")
    with pytest.raises(InvalidInput):
        canonical_group("S33")
    with pytest.raises(InvalidInput):
        ramification_ledger("Q")


def test_wrong_number_of_forms():
    with pytest.raises(InvalidInput, match="needs 2 forms"):
        build_family("S23", S23_FORMS[:1])


def test_wrong_degree():
    with pytest.raises(InvalidInput, match="degree 3"):
        build_family("S23", ["X0^2 + X1^2 + X2^2", "X0^2 + X1^2"])


def test_proportional_forms_rejected():
    with pytest.raises(InvalidInput, match="proportional"):
        build_family("S222", ["X0^2 + X1^2 + X2^2", "2*X0^2 + 2*X1^2 + 2*X2^2", "X0*X1"])


def test_singular_curve_rejected_with_witness():
    with pytest.raises(InvalidInput) as info:
        build_family("S4", ["X0^4"])
    assert info.value.witness is not None
    with pytest.raises(InvalidInput):
        check_plane_curve(parse_poly("X0^3 + X1^3 - X0*X1*X2", 3))


def test_smooth_curve_certificate():
    cert = check_plane_curve(parse_poly("X0^3 + X1^3 + X2^3", 3))
    assert isinstance(cert, dict)


def test_tangent_conics_give_singular_surface():
    # the first two conics meet only at (1:0:0), with multiplicity 4
    with pytest.raises(InvalidInput, match="singular") as info:
        build_family("S222", ["X1^2 - X0*X2", "X1^2 - X0*X2 + X2^2", "X0^2 + X1^2 + X2^2"])
    assert info.value.witness is not None


def test_check_surface_on_fermat(fermat_surface):
    assert check_surface([fermat_surface])
    with pytest.raises(InvalidInput):
        check_surface([parse_poly("X0^4 + X1^4 + X2^4", 4)])


def test_jacobian_minors_count():
    eqs = [parse_poly("X0^2 + X3^2", 5), parse_poly("X1^3 + X4^3", 5)]
    minors = jacobian_minors(eqs)
    # the 2x2 minors of a 2x5 Jacobian, zero ones dropped
    assert len(minors) == 4 and all(not m.is_zero() for m in minors)
    assert all(m.degree() == 3 for m in minors)


def test_validate_returns_certificate():
    cert = validate("S23", [parse_poly(f, 3) for f in S23_FORMS])
    assert cert


@pytest.mark.parametrize("label, n, contributions", [
    ("S4", 4, [12]),
    ("S23", 6, [12, 6]),
    ("S222", 8, [8, 8, 8]),
])
def test_ramification_ledger(families, label, n, contributions):
    led = ramification_ledger(families[label])
    assert led.ok and led.n == n and led.total == 3 * n
    assert list(led.contributions) == [Fraction(c) for c in contributions]
    assert ramification_ledger(label) == led


@pytest.mark.parametrize("seed", [0, 1, 7])
def test_tower(seed):
    rep = tower_check(build_family("S222", seed=seed), seed=seed)
    assert rep.fiber_sizes == (8, 4, 2) and rep.orbit_sizes == (8, 4, 2) and rep.ok


def test_tower_needs_s222(families):
    with pytest.raises(InvalidInput):
        tower_check(families["S23"])


@pytest.mark.parametrize("label", ["S4", "S23", "S222"])
def test_families_are_galois_with_expected_genus(families, label):
    fs = families[label]
    assert galois_criterion(fs.group, fs.equations, fs.center_forms).verdict
    res = compute_monodromy(fs.cover, seed=0)
    assert res.order == fs.degree and res.galois.galois
    assert res.group.label() == GROUP_LABELS[label]
    assert res.genus == GENERA[label]

