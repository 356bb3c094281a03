"""Univariate polynomials: exact gcd/square-free parts and complex roots.

Exact univariate polynomials are lists of :class:`Fraction`, lowest degree
first.  :func:`roots_univariate` takes coefficients highest degree first,
matching :func:`numpy.roots`.
"""

from __future__ import annotations

import cmath
import math
from fractions import Fraction
from typing import Sequence

import numpy as np

CLUSTER_TOL = 1e-8


def utrim(p: Sequence) -> list:
    p = list(p)
    while p and p[-1] == 0:
        p.pop()
    return p


def uderiv(p: Sequence) -> list:
    return [k * c for k, c in enumerate(p)][1:]


def udivmod(a: Sequence, b: Sequence) -> tuple[list, list]:
    a, b = utrim(a), utrim(b)
    if not b:
        raise ZeroDivisionError("division by the zero polynomial")
    q = [Fraction(0)] * max(len(a) - len(b) + 1, 1)
    r = list(a)
    lead = b[-1]
    while len(r) >= len(b) and r:
        shift = len(r) - len(b)
        f = r[-1] / lead
        q[shift] = f
        for i, c in enumerate(b):
            r[shift + i] -= f * c
        r.pop()
        r = utrim(r)
    return utrim(q), r


def umonic(p: Sequence) -> list:
    p = utrim(p)
    if not p:
        return p
    lead = p[-1]
    return [c / lead for c in p]


def ugcd(a: Sequence, b: Sequence) -> list:
    """Monic gcd over Q."""
    a, b = utrim(a), utrim(b)
    while b:
        _, r = udivmod(a, b)
        a, b = b, r
    return umonic(a)


def squarefree_part(p: Sequence) -> list:
    p = utrim([Fraction(c) for c in p])
    if len(p) <= 1:
        return p
    g = ugcd(p, uderiv(p))
    q, r = udivmod(p, g)
    assert not r
    return umonic(q)


def squarefree_factors(p: Sequence) -> list[tuple[list, int]]:
    """Yun's square-free factorisation over Q: ``[(f_i, i)]`` with monic,
    pairwise coprime, square-free ``f_i`` and ``p = c * prod f_i^i``."""
    p = utrim([Fraction(c) for c in p])
    if len(p) <= 1:
        return []
    a = ugcd(p, uderiv(p))
    b, _ = udivmod(p, a)
    c, _ = udivmod(uderiv(p), a)
    d = [x - y for x, y in _pad(c, uderiv(b))]
    out = []
    i = 1
    while len(utrim(b)) > 1:
        f = ugcd(b, d)
        b, _ = udivmod(b, f)
        c, _ = udivmod(d, f)
        d = [x - y for x, y in _pad(c, uderiv(b))]
        if len(f) > 1:
            out.append((umonic(f), i))
        i += 1
    return out


def _pad(a: Sequence, b: Sequence):
    n = max(len(a), len(b))
    a = list(a) + [Fraction(0)] * (n - len(a))
    b = list(b) + [Fraction(0)] * (n - len(b))
    return zip(a, b)


def ueval(p: Sequence, x):
    acc = 0
    for c in reversed(p):
        acc = acc * x + c
    return acc


def _horner_all(coeffs: np.ndarray, x: complex, k: int) -> list[complex]:
    """Values of p, p', ..., p^(k) at x; coeffs highest first."""
    out = []
    c = coeffs.astype(complex)
    for _ in range(k + 1):
        out.append(np.polyval(c, x) if c.size else 0j)
        c = np.polyder(c) if c.size > 1 else np.zeros(0, complex)
    return out


def _polish(coeffs: np.ndarray, r: complex, order: int, iters: int = 30) -> complex:
    """Newton on the ``order``-th derivative (order 0 is p itself)."""
    c = coeffs.astype(complex)
    for _ in range(order):
        c = np.polyder(c)
    dc = np.polyder(c) if c.size > 1 else np.zeros(1, complex)
    for _ in range(iters):
        f = np.polyval(c, r)
        df = np.polyval(dc, r)
        if df == 0:
            break
        step = f / df
        r_new = r - step
        if not np.isfinite(r_new):
            break
        if abs(step) <= 1e-16 * max(1.0, abs(r)):
            r = r_new
            break
        # keep the iterate only if it does not increase the residual
        if abs(np.polyval(c, r_new)) > abs(f) and abs(step) > 1e-6 * max(1.0, abs(r)):
            break
        r = r_new
    return r


def _abs_bound(coeffs: np.ndarray, x: complex, order: int) -> float:
    c = np.abs(coeffs.astype(complex))
    for _ in range(order):
        c = np.polyder(c)
    return float(np.polyval(c, abs(x))) if c.size else 0.0


def roots_univariate(coeffs: Sequence, cluster_tol: float = CLUSTER_TOL) -> list[complex]:
    """All complex roots, with multiplicity, of the polynomial with
    coefficients ``coeffs`` (highest degree first).

    Companion-matrix eigenvalues are Newton-polished; near-coincident roots
    are merged into a multiple root when every lower derivative vanishes
    there to working precision.  Output order is deterministic (sorted by
    real part, then imaginary part).
    """
    c = np.asarray([complex(x) for x in coeffs], dtype=complex)
    if not np.all(np.isfinite(c)):
        raise ValueError("non-finite coefficient")
    nz = np.flatnonzero(c)
    if nz.size == 0:
        raise ValueError("zero polynomial has no well-defined roots")
    c = c[nz[0]:]
    if c.size <= 1:
        raise ValueError("polynomial of degree 0 has no roots")
    # exact zero roots from trailing zeros
    nzero = 0
    while c[-1 - nzero] == 0:
        nzero += 1
    core = c[: c.size - nzero]
    roots: list[complex] = []
    if core.size > 1:
        raw = np.roots(core)
        raw = [_polish(core, complex(r), 0) for r in raw]
        roots = _merge_clusters(core, raw, cluster_tol)
    roots.extend([0j] * nzero)
    roots = [complex(z) for z in roots]
    return sorted(roots, key=lambda z: (round(z.real, 12), round(z.imag, 12)))


def _merge_clusters(core: np.ndarray, raw: list[complex], cluster_tol: float) -> list[complex]:
    scale = max(1.0, max(abs(r) for r in raw))
    loose = max(cluster_tol, 1e-5) * scale
    used = [False] * len(raw)
    out: list[complex] = []
    for i, r in enumerate(raw):
        if used[i]:
            continue
        group = [i]
        for j in range(i + 1, len(raw)):
            if not used[j] and abs(raw[j] - r) < loose:
                group.append(j)
        if len(group) == 1:
            used[i] = True
            out.append(r)
            continue
        m = len(group)
        centre = complex(np.mean([raw[j] for j in group]))
        refined = _polish(core, centre, m - 1)
        vals = _horner_all(core, refined, m - 1)
        ok = all(abs(vals[k]) <= 1e3 * np.finfo(float).eps * max(_abs_bound(core, refined, k), 1e-300)
                 * (m + len(core)) for k in range(m - 1))
        if ok:
            for j in group:
                used[j] = True
            out.extend([refined] * m)
        else:
            used[i] = True
            out.append(r)
    return out


def cluster_points(points: Sequence[complex], tol: float) -> list[tuple[complex, int]]:
    """Greedy clustering; returns (representative, multiplicity) pairs."""
    reps: list[list] = []
    for z in points:
        for rep in reps:
            if abs(rep[0] - z) <= tol:
                rep[1] += 1
                break
        else:
            reps.append([z, 1])
    return [(complex(a), b) for a, b in reps]


def poly_from_roots(roots: Sequence[complex]) -> np.ndarray:
    return np.poly(np.asarray(roots, dtype=complex))


def root_of_unity(order: int, power: int = 1) -> complex:
    if power % order == 0:
        return 1 + 0j
    if 2 * power % order == 0:
        return -1 + 0j
    if 4 * power % order == 0:
        return 1j if (4 * power // order) % 4 == 1 else -1j
    return cmath.exp(2j * math.pi * power / order)


def as_root_of_unity(z: complex, max_order: int = 48, tol: float = 1e-10) -> tuple[int, int] | None:
    """``(order, power)`` with ``z == exp(2 pi i power / order)`` in lowest terms."""
    if abs(abs(z) - 1) > tol:
        return None
    turn = Fraction(cmath.phase(z) / (2 * math.pi)).limit_denominator(max_order) % 1
    if abs(root_of_unity(turn.denominator, turn.numerator) - z) > tol:
        return None
    return turn.denominator, turn.numerator
