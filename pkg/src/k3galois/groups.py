"""Isomorphism labels for small finite groups from their element orders."""

from __future__ import annotations

import math
from collections import Counter
from typing import Iterable


def _prime_factors(n: int) -> list[int]:
    out, p = [], 2
    while p * p <= n:
        if n % p == 0:
            out.append(p)
            while n % p == 0:
                n //= p
        p += 1
    if n > 1:
        out.append(n)
    return out


def abelian_invariants(order_counts: Counter) -> list[int]:
    """Invariant factors ``[m1 | m2 | ...]`` of an abelian group given the
    multiset of its element orders."""
    n = sum(order_counts.values())
    if n == 1:
        return []
    partitions = {}
    for p in _prime_factors(n):
        exps = []
        k = 1
        prev = 1
        while True:
            # elements whose order divides p^k
            ck =sum(c for o, c in order_counts.items() if (p ** k) % o == 0)
            rank = round(math.log(ck // prev, p)) if ck > prev else 0
            if rank == 0:
                break
            exps.append(rank)
            prev = ck
            k += 1
        # exps[k-1] = number of cyclic p-factors of exponent >= k
        parts = []
        for k in range(len(exps), 0, -1):
            count = exps[k - 1] - (exps[k] if k < len(exps) else 0)
            parts.extend([p ** k] * count)
        partitions[p] = sorted(parts, reverse=True)
    width = max(len(v) for v in partitions.values())
    factors = []
    for i in range(width):
        m = 1
        for parts in partitions.values():
            if i < len(parts):
                m *= parts[i]
        factors.append(m)
    return sorted(factors)


def abelian_label(order_counts: Counter) -> str:
    inv = abelian_invariants(order_counts)
    if not inv:
        return "1"
    grouped = Counter(inv)
    pieces = []
    for m in sorted(grouped):
        c = grouped[m]
        pieces.append(f"Z{m}" if c == 1 else f"Z{m}^{c}")
    return "x".join(pieces)


def group_label(orders: Iterable[int], abelian: bool, degree: int | None = None) -> str:
    counts = Counter(orders)
    n = sum(counts.values())
    if abelian:
        return abelian_label(counts)
    if degree is not None and n == math.factorial(degree):
        return f"S{degree}"
    if degree is not None and 2 * n == math.factorial(degree) and degree > 2:
        return f"A{degree}"
    if n % 2 == 0 and counts.get(n // 2, 0) > 0 and counts.get(2, 0) >= n // 2:
        return f"D{n // 2}"
    return f"nonabelian-{n}"
