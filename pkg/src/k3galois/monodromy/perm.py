"""Permutation groups generated by monodromy, regularity and Riemann-Hurwitz."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from ..errors import InvalidInput, NumericalFailure
from ..groups import group_label

Perm = tuple[int, ...]


def compose(p: Perm, q: Perm) -> Perm:
    """Apply ``p`` first, then ``q``."""
    return tuple(q[i] for i in p)


def inverse(p: Perm) -> Perm:
    out = [0] * len(p)
    for i, j in enumerate(p):
        out[j] = i
    return tuple(out)


def identity(d: int) -> Perm:
    return tuple(range(d))


def cycle_type(p: Perm) -> list[int]:
    """Cycle lengths, longest first (fixed points included as 1s)."""
    seen = [False] * len(p)
    lengths = []
    for i in range(len(p)):
        if seen[i]:
            continue
        n, j = 0, i
        while not seen[j]:
            seen[j] = True
            j = p[j]
            n += 1
        lengths.append(n)
    return sorted(lengths, reverse=True)


def perm_order(p: Perm) -> int:
    from math import lcm
    return lcm(*cycle_type(p)) if p else 1


def from_cycles(d: int, cycles: Iterable[Sequence[int]]) -> Perm:
    out = list(range(d))
    for c in cycles:
        for a, b in zip(c, list(c[1:]) + [c[0]]):
            out[a] = b
    return tuple(out)


def product(perms: Sequence[Perm], d: int) -> Perm:
    acc = identity(d)
    for p in perms:
        acc = compose(acc, p)
    return acc


@dataclass
class PermGroup:
    degree: int
    generators: list[Perm]
    elements: list[Perm] = field(repr=False)

    @classmethod
    def generate(cls, degree: int, generators: Sequence[Perm], bound: int = 50000) -> "PermGroup":
        gens = []
        for g in generators:
            g = tuple(int(x) for x in g)
            if sorted(g) != list(range(degree)):
                raise InvalidInput(f"{g} is not a permutation of {degree} letters")
            gens.append(g)
        e = identity(degree)
        seen = {e}
        elements = [e]
        frontier = [e]
        distinct = [g for g in dict.fromkeys(gens) if g != e]
        while frontier:
            nxt = []
            for a in frontier:
                for g in distinct:
                    b = compose(a, g)
                    if b not in seen:
                        seen.add(b)
                        elements.append(b)
                        nxt.append(b)
            if len(elements) > bound:
                raise InvalidInput(f"permutation group exceeds {bound} elements")
            frontier = nxt
        return cls(degree, gens, elements)

    @property
    def order(self) -> int:
        return len(self.elements)

    def orbits(self) -> list[list[int]]:
        parent = list(range(self.degree))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for g in self.generators:
            for i, j in enumerate(g):
                a, b = find(i), find(j)
                if a != b:
                    parent[a] = b
        groups: dict[int, list[int]] = {}
        for i in range(self.degree):
            groups.setdefault(find(i), []).append(i)
        return sorted(groups.values())

    @property
    def transitive(self) -> bool:
        return len(self.orbits()) == 1

    def element_orders(self) -> list[int]:
        return [perm_order(p) for p in self.elements]

    def order_multiset(self) -> dict[int, int]:
        return dict(sorted(Counter(self.element_orders()).items()))

    def is_abelian(self) -> bool:
        gs = self.generators
        return all(compose(a, b) == compose(b, a) for a in gs for b in gs)

    def is_cyclic(self) -> bool:
        return self.is_abelian() and max(self.element_orders()) == self.order

    def label(self) -> str:
        return group_label(self.element_orders(), self.is_abelian(), self.degree)


@dataclass(frozen=True)
class GaloisVerdict:
    galois: bool
    reason: str       # REGULAR | INTRANSITIVE | ORDER_MISMATCH | FIXED_POINTS

    def __bool__(self) -> bool:
        return self.galois


def is_galois(pg: PermGroup) -> GaloisVerdict:
    """Regularity test: transitive, order = degree, no non-identity fixed points."""
    if not pg.transitive:
        return GaloisVerdict(False, "INTRANSITIVE")
    if pg.order != pg.degree:
        return GaloisVerdict(False, "ORDER_MISMATCH")
    e = identity(pg.degree)
    for p in pg.elements:
        if p != e and any(p[i] == i for i in range(pg.degree)):
            return GaloisVerdict(False, "FIXED_POINTS")
    return GaloisVerdict(True, "REGULAR")


def genus_from_cycles(d: int, cycle_types: Iterable[Sequence[int]]) -> int:
    """Genus of a degree-``d`` cover of P^1 from its branch cycle types."""
    if d < 1:
        raise InvalidInput("degree must be positive")
    total = 0
    for ct in cycle_types:
        if sum(ct) != d:
            raise InvalidInput(f"cycle type {list(ct)} is not a partition of {d}")
        total += sum(c - 1 for c in ct)
    chi2 = -2 * d + total
    if chi2 % 2:
        raise NumericalFailure(f"odd ramification total {total}: genus is not an integer")
    g = chi2 // 2 + 1
    if g < 0:
        raise NumericalFailure(f"negative genus {g}")
    return g
