import pytest

from k3galois.algebra import CoverSpec, LinearSubspace, parse_poly
from k3galois.curves import PlaneQuartic
from k3galois.families import build_family, fermat_family

FERMAT = "X0^4 + X1^4 + X2^4 + X3^4"


@pytest.fixture(scope="session")
def fermat_surface():
    return parse_poly(FERMAT, 4)


def fermat_cover(center: LinearSubspace) -> CoverSpec:
    return CoverSpec(3, [parse_poly(FERMAT, 4)], center, "fermat")


@pytest.fixture(scope="session")
def fermat_galois_cover():
    return fermat_cover(LinearSubspace.coordinate(3, [0, 1, 2]))


@pytest.fixture(scope="session")
def fermat_generic_cover():
    return fermat_cover(LinearSubspace.through_point([1, 2, -1, 3]))


@pytest.fixture(scope="session")
def fermat_fs():
    return fermat_family()


@pytest.fixture(scope="session")
def families():
    return {label: build_family(label, seed=0) for label in ("S4", "S23", "S222")}


@pytest.fixture(scope="session")
def fermat_curve():
    return PlaneQuartic.parse("X0^4 + X1^4 + X2^4")
