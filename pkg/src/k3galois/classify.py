"""Classification of abelian Galois embeddings of K3 surfaces by branch data.

A branch datum is a multiset of pairs ``(d_i, n_i)``: the branch curve
``Delta_i`` of degree ``d_i`` in the plane and the order of its cyclic
stabiliser.  The group is ``G = prod Z_{n_i}`` and ``n = |G| = D^2``.  The
ramification divisor is ``3D``, which gives the balance

    sum_i d_i (1 - 1/n_i) = 3.

Each candidate goes through the exclusion rules below in a fixed priority
order, so every excluded datum gets exactly one reason.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Iterable

from .group_action import cyclic_product_group, hypersurface_cyclic_rule
from .groups import abelian_label

K3_EULER = 24
N_VALUES = (2, 3, 4)


class Reason(str, Enum):
    DEGREE_TOO_SMALL = "EXCL_DEGREE_TOO_SMALL"
    EQ7 = "EXCL_EQ7"
    EULER_CHAR = "EXCL_EULER_CHAR"
    PARITY = "EXCL_PARITY"
    HYPERSURFACE_CYCLIC = "EXCL_HYPERSURFACE_CYCLIC"
    LINE_COMPONENT = "EXCL_LINE_COMPONENT"


RULE_ORDER = (Reason.LINE_COMPONENT, Reason.DEGREE_TOO_SMALL, Reason.EQ7, Reason.EULER_CHAR,
              Reason.PARITY, Reason.HYPERSURFACE_CYCLIC)


@dataclass(frozen=True)
class BranchDatum:
    pairs: tuple[tuple[int, int], ...]      # (d_i, n_i), canonical order

    def __post_init__(self):
        for d, n in self.pairs:
            if d < 1 or n < 2:
                raise ValueError(f"invalid branch pair ({d}, {n})")
        object.__setattr__(self, "pairs", tuple(sorted(self.pairs, reverse=True)))

    @classmethod
    def of(cls, *pairs) -> "BranchDatum":
        return cls(tuple(tuple(p) for p in pairs))

    @classmethod
    def parse(cls, text: str) -> "BranchDatum":
        """``"3,3|2,2"`` or ``"3:3,2:2"`` style input, pairs written ``d,n``."""
        text = text.strip()
        if "|" in text or ":" not in text:
            chunks = text.split("|")
            pairs = [tuple(int(x) for x in c.split(",")) for c in chunks]
        else:
            pairs = [tuple(int(x) for x in c.split(":")) for c in text.split(",")]
        if any(len(p) != 2 for p in pairs):
            raise ValueError(f"cannot parse branch datum {text!r}")
        return cls(tuple(pairs))

    @property
    def r(self) -> int:
        return len(self.pairs)

    @property
    def n(self) -> int:
        return math.prod(n for _, n in self.pairs)

    @property
    def degrees(self) -> list[int]:
        return [d for d, _ in self.pairs]

    @property
    def orders(self) -> list[int]:
        return [n for _, n in self.pairs]

    def balance(self) -> Fraction:
        return sum((Fraction(d) * (1 - Fraction(1, n)) for d, n in self.pairs), Fraction(0))

    def sort_key(self):
        return (self.r, -sum(self.degrees), tuple((-d, -n) for d, n in self.pairs))

    def __str__(self) -> str:
        return "|".join(f"{d},{n}" for d, n in self.pairs)


def _search(ns: list[int], d_min: int, d_max: int, r_max: int) -> set[BranchDatum]:
    """Depth-first search over nondecreasing pair sequences, pruned by the
    remaining balance."""
    # weights scaled by 12 so that every d (1 - 1/n) is an integer
    target = 36
    pool = [(d, n) for d in range(d_min, d_max + 1) for n in ns]
    weights = [12 * d * (n - 1) // n for d, n in pool]
    assert all(12 * d * (n - 1) % n == 0 for d, n in pool)
    found = set()

    def rec(start: int, remaining: int, chosen: list):
        if remaining == 0:
            found.add(BranchDatum(tuple(pool[i] for i in chosen)))
            return
        if len(chosen) == r_max:
            return
        for i in range(start, len(pool)):
            if weights[i] <= remaining:
                chosen.append(i)
                rec(i, remaining - weights[i], chosen)
                chosen.pop()

    rec(0, target, [])
    return found


def enumerate_branch_data(n_max: int = 4, d_max: int = 8, d_min: int = 2, r_max: int = 6,
                          orders: Iterable[int] | None = None) -> list[BranchDatum]:
    """All solutions of the balance equation, canonically sorted."""
    ns = list(orders) if orders is not None else list(range(2, n_max + 1))
    data = _search(ns, d_min, d_max, r_max)
    for bd in data:
        assert bd.balance() == 3 and bd.r <= r_max
    return sorted(data, key=BranchDatum.sort_key)


def enumerate_branch_data_nested(n_max: int = 4, d_max: int = 8, d_min: int = 2,
                                 r_max: int = 6) -> list[BranchDatum]:
    """Independent enumeration with the loops over ``n`` and ``d`` interchanged,
    checked in exact rational arithmetic."""
    found = set()
    pool = [(d, n) for n in range(2, n_max + 1) for d in range(d_min, d_max + 1)]

    def rec(start: int, remaining: Fraction, chosen: list):
        if remaining == 0:
            found.add(BranchDatum(tuple(chosen)))
            return
        if len(chosen) == r_max:
            return
        for i in range(start, len(pool)):
            d, n = pool[i]
            w = Fraction(d) * (1 - Fraction(1, n))
            if w <= remaining:
                rec(i, remaining - w, chosen + [pool[i]])

    rec(0, Fraction(3), [])
    return sorted(found, key=BranchDatum.sort_key)


def eq7_solutions(n: int, chi_min: int = 3, g_min: int = 2) -> list[tuple[int, int]]:
    """Pairs ``(chi(S_i), g(C_i))`` with ``24 = n chi + (n - 1)(2g - 2)``."""
    if n < 2:
        raise ValueError("stabiliser order must be at least 2")
    out = []
    for chi in range(chi_min, K3_EULER // n + 1):
        rest = K3_EULER - n * chi
        if rest % (n - 1):
            continue
        two_g = rest // (n - 1) + 2
        if two_g % 2 == 0 and two_g // 2 >= g_min:
            out.append((chi, two_g // 2))
    return out


def curve_euler(d: int) -> int:
    """Euler characteristic ``2 - 2g`` of a smooth plane curve of degree ``d``."""
    return 3 * d - d * d


def stratified_euler_char(bd: BranchDatum) -> int:
    """Topological Euler characteristic of the cover from its stratification.

    The branch curves are smooth and cross normally in ``d_i d_j`` points.
    The open part is covered ``n`` times, the punctured ``Delta_i`` by
    ``n / n_i`` sheets, and each crossing by ``n / (n_i n_j)`` points.
    """
    n = bd.n
    pairs = bd.pairs
    cross = {(i, j): pairs[i][0] * pairs[j][0] for i in range(len(pairs)) for j in range(i + 1, len(pairs))}
    chi_delta = sum(curve_euler(d) for d, _ in pairs) - sum(cross.values())
    total = n * (3 - chi_delta)
    for i, (d, ni) in enumerate(pairs):
        if n % ni:
            raise ValueError(f"{ni} does not divide {n}")
        punctured = curve_euler(d) - sum(v for (a, b), v in cross.items() if i in (a, b))
        total += (n // ni) * punctured
    for (i, j), v in cross.items():
        q, rem = divmod(n, pairs[i][1] * pairs[j][1])
        if rem:
            raise ValueError("stabiliser orders at a crossing do not divide n")
        total += q * v
    return total


@dataclass(frozen=True)
class ParityResult:
    ok: bool
    witness: tuple[int, ...] | None = None   # indices of an odd-degree double cover branch
    degree: int | None = None

    def __bool__(self) -> bool:
        return self.ok


def parity_exclusion(bd: BranchDatum) -> ParityResult:
    """Every index-2 subgroup gives a double plane branched over the curves
    whose stabiliser it misses; such a branch curve must have even degree."""
    even = [i for i, (_, n) in enumerate(bd.pairs) if n % 2 == 0]
    for size in range(1, len(even) + 1):
        for subset in itertools.combinations(even, size):
            deg = sum(bd.pairs[i][0] for i in subset)
            if deg % 2:
                return ParityResult(False, subset, deg)
    return ParityResult(True)


def embedding_dimension(bd: BranchDatum) -> int:
    """``N = n/2 + 1`` for a K3 embedded by ``D`` with ``D^2 = n``."""
    return bd.n // 2 + 1


SURFACE_LABELS = {3: "S(4)", 4: "S(23)", 5: "S(222)"}


@dataclass
class ExclusionVerdict:
    datum: BranchDatum
    admissible: bool
    reason: Reason | None
    derivation: str
    euler: int
    group: str | None = None
    surface: str | None = None
    reconstructed: bool = False
    details: dict = field(default_factory=dict)

    @property
    def status(self) -> str:
        return "ADMISSIBLE" if self.admissible else "EXCLUDED"

    def as_dict(self) -> dict:
        return {
            "datum": str(self.datum),
            "pairs": [list(p) for p in self.datum.pairs],
            "n": self.datum.n,
            "status": self.status,
            "reason": self.reason.value if self.reason else None,
            "derivation": self.derivation,
            "euler": self.euler,
            "group": self.group,
            "surface": self.surface,
            "reconstructed": self.reconstructed,
        }


def judge(bd: BranchDatum) -> ExclusionVerdict:
    """Apply the exclusion rules in priority order."""
    chi = stratified_euler_char(bd)
    n = bd.n
    if any(d == 1 for d in bd.degrees):
        return ExclusionVerdict(bd, False, Reason.LINE_COMPONENT,
                                "a branch line pulls back to n_i C on the intermediate "
                                "cyclic cover, so n_i = n_i^2 C^2 forces n_i = 1", chi)
    if n < 4:
        return ExclusionVerdict(bd, False, Reason.DEGREE_TOO_SMALL,
                                f"|G| = D^2 = {n} < 4, but D^2 = 2 gives a double plane, "
                                "not an embedding", chi, reconstructed=True)
    for ni in bd.orders:
        if not eq7_solutions(ni):
            return ExclusionVerdict(bd, False, Reason.EQ7,
                                    f"24 = {ni} chi + {ni - 1}(2g - 2) has no solution", chi)
    if chi != K3_EULER:
        return ExclusionVerdict(bd, False, Reason.EULER_CHAR,
                                f"stratified Euler characteristic {chi} != 24", chi)
    par = parity_exclusion(bd)
    if not par:
        return ExclusionVerdict(bd, False, Reason.PARITY,
                                f"double plane branched over curves {list(par.witness)} of odd "
                                f"degree {par.degree}", chi, details={"witness": par.witness})
    N = embedding_dimension(bd)
    G = cyclic_product_group(bd.orders)
    if not hypersurface_cyclic_rule(N, G):
        return ExclusionVerdict(bd, False, Reason.HYPERSURFACE_CYCLIC,
                                f"quartic surface in P^3 with non-cyclic G = {G.label()}", chi)
    label = abelian_label(Counter(G.element_orders()))
    return ExclusionVerdict(bd, True, None, f"all rules pass; G = {label}", chi,
                            group=label, surface=SURFACE_LABELS.get(N, f"P^{N}"))


def classify_all(diagnostic_lines: bool = False) -> list[ExclusionVerdict]:
    """Verdicts for every branch datum, in canonical order.

    With ``diagnostic_lines`` the enumeration also admits ``d_i = 1``; those
    extra data are all excluded as ``EXCL_LINE_COMPONENT``.
    """
    data = enumerate_branch_data(d_min=1 if diagnostic_lines else 2)
    return [judge(bd) for bd in data]
