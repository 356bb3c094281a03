"""Numerical solving: compiled evaluation, Newton's method, a batched
predictor-corrector path tracker, total-degree homotopy, and the
emptiness test for a homogeneous system restricted to a linear subspace."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from ..errors import NumericalFailure, SingularJacobian
from ..rng import random_complex, random_unit, stream
from .linear import LinearSubspace
from .poly import COMPLEX, EXACT, MultiPoly
from .roots import roots_univariate, squarefree_part, ugcd, utrim

log = logging.getLogger(__name__)

NEWTON_TOL = 1e-12


class CompiledSystem:
    """Vectorised evaluation of polynomials and their Jacobian.

    Points are rows of a ``(m, nvars)`` complex array.  With ``normalize``
    each polynomial is divided by its largest coefficient so residuals are
    relative.
    """

    def __init__(self, polys: Sequence[MultiPoly], normalize: bool = True):
        if not polys:
            raise ValueError("empty system")
        n = polys[0].arity
        self.nvars = n
        self.npolys = len(polys)
        self.scales = np.array([p.max_abs_coeff() if normalize and not p.is_zero() else 1.0
                                for p in polys])
        derivs = [[p.derivative(j) for j in range(n)] for p in polys]
        exps = set()
        for p in polys:
            exps.update(p.terms)
        for row in derivs:
            for d in row:
                exps.update(d.terms)
        if not exps:
            exps = {(0,) * n}
        monos = sorted(exps)
        index = {e: i for i, e in enumerate(monos)}
        self.E = np.array(monos, dtype=np.int64).reshape(len(monos), n)
        self.maxdeg = int(self.E.max()) if self.E.size else 0
        u = len(monos)
        Cp = np.zeros((self.npolys, u), dtype=complex)
        Cd = np.zeros((self.npolys, n, u), dtype=complex)
        for i, p in enumerate(polys):
            for e, c in p.terms.items():
                Cp[i, index[e]] = complex(c) / self.scales[i]
            for j in range(n):
                for e, c in derivs[i][j].terms.items():
                    Cd[i, j, index[e]] = complex(c) / self.scales[i]
        self.Cp = Cp
        self.CdT = Cd.reshape(self.npolys * n, u).T.copy()
        self._vidx = np.arange(n)[None, :]
        self._kpow = np.arange(self.maxdeg + 1)

    def monomials(self, Z: np.ndarray) -> np.ndarray:
        Z = np.atleast_2d(np.asarray(Z, dtype=complex))
        pw = Z[:, :, None] ** self._kpow[None, None, :]
        return np.prod(pw[:, self._vidx, self.E], axis=2)

    def values(self, Z) -> np.ndarray:
        return self.monomials(Z) @ self.Cp.T

    def jacobian(self, Z) -> np.ndarray:
        M = self.monomials(Z)
        return (M @ self.CdT).reshape(M.shape[0], self.npolys, self.nvars)

    def evaluate(self, Z) -> tuple[np.ndarray, np.ndarray]:
        M = self.monomials(Z)
        return M @ self.Cp.T, (M @ self.CdT).reshape(M.shape[0], self.npolys, self.nvars)


def _as_affine(polys: Sequence[MultiPoly]) -> CompiledSystem:
    return polys if isinstance(polys, CompiledSystem) else CompiledSystem(polys)


def solve_square_system(eqs, start: Sequence[complex], tol: float | None = None,
                        max_iter: int = 60) -> np.ndarray:
    """Newton's method from ``start``; raises on singular Jacobian or divergence."""
    tol = NEWTON_TOL if tol is None else tol
    sysc = _as_affine(eqs)
    if sysc.npolys != sysc.nvars:
        raise ValueError(f"system is not square ({sysc.npolys} equations, {sysc.nvars} unknowns)")
    z = np.asarray(start, dtype=complex).reshape(1, -1)
    growth = 0
    prev = np.inf
    for _ in range(max_iter):
        F, J = sysc.evaluate(z)
        res = float(np.linalg.norm(F[0]))
        if res <= tol:
            return z[0]
        if res > prev:
            growth += 1
            if growth >= 3:
                raise NumericalFailure(f"Newton diverging (residual {res:.3e})")
        else:
            growth = 0
        prev = res
        try:
            if np.linalg.cond(J[0]) > 1e14:
                raise SingularJacobian("singular Jacobian")
            dz = np.linalg.solve(J[0], -F[0])
        except np.linalg.LinAlgError as exc:
            raise SingularJacobian("singular Jacobian") from exc
        z = z + dz
        if np.linalg.norm(dz) <= 1e-15 * (1 + np.linalg.norm(z)):
            F = sysc.values(z)
            if np.linalg.norm(F[0]) <= tol:
                return z[0]
    raise NumericalFailure("maximum Newton iterations exceeded")


def newton_polish(sysc: CompiledSystem, Z: np.ndarray, iters: int = 60) -> tuple[np.ndarray, np.ndarray]:
    """Batched Newton that keeps an iterate only if it lowers the residual.

    Tolerates singular solutions (linear convergence).  Returns the points and
    their final residual norms.
    """
    Z = np.array(Z, dtype=complex)
    F, J = sysc.evaluate(Z)
    res = np.linalg.norm(F, axis=1)
    for _ in range(iters):
        try:
            dZ = np.linalg.solve(J, -F[:, :, None])[:, :, 0]
        except np.linalg.LinAlgError:
            dZ = np.stack([np.linalg.lstsq(J[i], -F[i], rcond=None)[0] for i in range(len(Z))])
        dZ[~np.isfinite(dZ).all(axis=1)] = 0
        Zn = Z + dZ
        Fn, Jn = sysc.evaluate(Zn)
        rn = np.linalg.norm(Fn, axis=1)
        better = rn < res
        if not better.any():
            break
        Z[better], F[better], J[better], res[better] = Zn[better], Fn[better], Jn[better], rn[better]
        if np.all(res < 1e-15):
            break
    return Z, res


# path tracking

HFun = Callable[[np.ndarray, np.ndarray], tuple[np.ndarray, np.ndarray, np.ndarray]]


@dataclass
class TrackResult:
    points: np.ndarray
    tau: np.ndarray
    status: np.ndarray          # "ok" | "stalled" | "infinite"
    max_residual: float
    steps: int


def _solve_batch(J: np.ndarray, F: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.solve(J, F[:, :, None])[:, :, 0]
    except np.linalg.LinAlgError:
        out = np.empty_like(F)
        for i in range(len(F)):
            out[i] = np.linalg.lstsq(J[i], F[i], rcond=None)[0]
        return out


def track_paths(hfun: HFun, z0: np.ndarray, *, tau0: float = 0.0, tau1: float = 1.0,
                h0: float = 0.02, hmax: float = 0.05, hmin: float = 1e-13,
                corrector_tol: float = 1e-11, newton_tol: float | None = None,
                max_steps: int = 20000, common_step: bool = False,
                infinity: float = 1e8) -> TrackResult:
    """Track solutions of ``H(z, tau) = 0`` from ``tau0`` to ``tau1``.

    ``hfun(Z, T)`` returns ``(H, H_z, H_tau)`` for points ``Z`` (m x n) at
    parameters ``T`` (m,).  RK4 tangent predictor; up to three Newton
    corrector steps that must contract.  With ``common_step`` all paths share
    one step size, which keeps fibres in lockstep (used for monodromy loops).
    """
    Z = np.array(z0, dtype=complex).reshape(len(z0), -1)
    m = len(Z)
    direction = 1.0 if tau1 >= tau0 else -1.0
    span = abs(tau1 - tau0)
    T = np.full(m, float(tau0))
    H = np.full(m, h0 * span)
    status = np.array(["run"] * m, dtype=object)
    max_res = 0.0
    steps = 0

    def tangent(Zb, Tb):
        _, Hz, Ht = hfun(Zb, Tb)
        return -_solve_batch(Hz, Ht) * direction

    while True:
        act = np.flatnonzero(status == "run")
        if act.size == 0 or steps >= max_steps:
            break
        steps += 1
        if common_step:
            act = act
            H[act] = H[act].min()
        Za, Ta = Z[act], T[act]
        remaining = np.abs(tau1 - Ta)
        h = np.minimum(H[act], remaining)
        hs = h[:, None]
        k1 = tangent(Za, Ta)
        k2 = tangent(Za + 0.5 * hs * k1, Ta + 0.5 * h * direction)
        k3 = tangent(Za + 0.5 * hs * k2, Ta + 0.5 * h * direction)
        k4 = tangent(Za + hs * k3, Ta + h * direction)
        Zp = Za + hs * (k1 + 2 * k2 + 2 * k3 + k4) / 6
        Tn = Ta + h * direction
        ok = np.isfinite(Zp).all(axis=1)
        Zp[~ok] = Za[~ok]
        prev_norm = np.full(act.size, np.inf)
        converged = np.zeros(act.size, dtype=bool)
        # a large first correction means the predictor left the path's basin
        first_bound = 0.25 * np.linalg.norm(Zp - Za, axis=1) + 1e-10 * (1 + np.linalg.norm(Za, axis=1))
        for it in range(3):
            F, Hz, _ = hfun(Zp, Tn)
            dZ = _solve_batch(Hz, -F)
            nrm = np.linalg.norm(dZ, axis=1)
            bad = ~np.isfinite(nrm) | (nrm > 0.5 * prev_norm)
            if it == 0:
                bad |= nrm > first_bound
            # converged points are frozen; later roundoff must not reject them
            bad &= ~converged
            ok &= ~bad
            dZ[~np.isfinite(dZ)] = 0
            dZ[converged | ~ok] = 0
            Zp = Zp + dZ
            prev_norm = np.where(converged, prev_norm, nrm)
            scale = 1 + np.linalg.norm(Zp, axis=1)
            converged |= ok & (nrm <= corrector_tol * scale)
            if np.all(converged | ~ok):
                break
        F, _, _ = hfun(Zp, Tn)
        resid = np.linalg.norm(F, axis=1)
        accept = ok & (converged | (resid <= (newton_tol or NEWTON_TOL) * 10))
        # predictor-corrector displacement must stay small relative to the step
        if common_step:
            accept_all = bool(accept.all())
            accept[:] = accept_all
        acc = act[accept]
        rej = act[~accept]
        Z[acc] = Zp[accept]
        T[acc] = Tn[accept]
        if acc.size:
            max_res = max(max_res, float(resid[accept].max()))
        H[acc] = np.minimum(H[acc] * 1.6, hmax * span)
        H[rej] = H[rej] * 0.5
        done = acc[np.abs(T[acc] - tau1) <= 1e-15 * max(1.0, abs(tau1))]
        status[done] = "ok"
        far = acc[np.linalg.norm(Z[acc], axis=1) > infinity]
        status[far] = "infinite"
        stalled = rej[H[rej] < hmin * span]
        status[stalled] = "stalled"
        if common_step and stalled.size:
            status[act] = np.where(status[act] == "run", "stalled", status[act])
    status[status == "run"] = "stalled"
    return TrackResult(Z, T, status, max_res, steps)


def start_system(degrees: Sequence[int]):
    """Solutions of ``z_i^{d_i} = 1`` (total-degree start system)."""
    grids = np.meshgrid(*[np.exp(2j * np.pi * np.arange(d) / d) for d in degrees], indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1)


@dataclass
class HomotopyResult:
    solutions: np.ndarray        # finite endpoints, polished
    residuals: np.ndarray
    n_paths: int
    n_infinite: int
    n_failed: int
    raw_status: list = field(default_factory=list)


def total_degree_homotopy(target, seed: int | None = 0, name: str = "homotopy",
                          end_tau: float = 1.0 - 1e-9, polish_iters: int = 80) -> HomotopyResult:
    """Solve a square affine system by the gamma-trick total-degree homotopy.

    Paths are tracked to ``end_tau`` and then polished by Newton at the
    target, which also brings singular endpoints close to the solution.
    """
    sysc = _as_affine(target)
    polys = target if not isinstance(target, CompiledSystem) else None
    n = sysc.nvars
    if sysc.npolys != n:
        raise ValueError("homotopy needs a square system")
    if polys is not None:
        degrees = [p.degree() or 0 for p in polys]
    else:
        degrees = list(np.max(sysc.E.sum(axis=1)) * np.ones(n, dtype=int))
    if any(d < 1 for d in degrees):
        raise ValueError("each equation must have positive degree")
    rng = stream(seed, name)
    gamma = random_unit(rng)
    deg = np.asarray(degrees)

    def hfun(Z, T):
        F, JF = sysc.evaluate(Z)
        G = Z ** deg[None, :] - 1
        JG = np.zeros_like(JF)
        idx = np.arange(n)
        JG[:, idx, idx] = deg[None, :] * Z ** (deg[None, :] - 1)
        t = T[:, None]
        Hv = (1 - t) * gamma * G + t * F
        Hz = (1 - t)[:, :, None] * gamma * JG + t[:, :, None] * JF
        Ht = F - gamma * G
        return Hv, Hz, Ht

    Z0 = start_system(degrees)
    res = track_paths(hfun, Z0, tau0=0.0, tau1=end_tau, h0=0.01, hmax=0.05)
    finite = res.status != "infinite"
    far = np.linalg.norm(res.points, axis=1) > 1e6
    keep = finite & ~far
    Zs, resid = newton_polish(sysc, res.points[keep], polish_iters) if keep.any() else \
        (np.zeros((0, n), complex), np.zeros(0))
    n_failed = int(np.sum(res.status[keep] == "stalled"))
    return HomotopyResult(Zs, resid, len(Z0), int((~keep).sum()), n_failed, list(res.status))


# restriction to subspaces and emptiness

def restrict_to_subspace(eqs: Sequence[MultiPoly], basis: Sequence[Sequence]) -> list[MultiPoly]:
    """Pull back along ``u -> sum_j u_j b_j`` for the basis vectors ``b_j``."""
    m = len(basis)
    n = len(basis[0])
    exact = all(isinstance(x, (int, Fraction)) for b in basis for x in b)
    field = EXACT if exact else COMPLEX
    images = []
    for i in range(n):
        images.append(MultiPoly.linear_form([basis[j][i] for j in range(m)], field))
    return [e.substitute(images) for e in eqs]


@dataclass
class EmptinessResult:
    empty: bool
    witness: list | None = None
    method: str = ""
    detail: dict = field(default_factory=dict)

    def __bool__(self) -> bool:
        return self.empty


def _binary_common_zero(forms: list[MultiPoly]) -> list | None:
    """Common zero on P^1 of nonzero binary forms in (u0, u1), or None."""
    # point (0:1)
    if all(f.coefficient((0, f.degree())) == 0 for f in forms):
        return [0, 1]
    dehom = []
    for f in forms:
        coeffs = [f.coefficient((f.degree() - k, k)) for k in range(f.degree() + 1)]
        dehom.append(utrim(coeffs))
    if all(f.field == EXACT for f in forms):
        g = dehom[0]
        for h in dehom[1:]:
            g = ugcd(g, h)
        g = utrim(g)
        if len(g) <= 1:
            return None
        r = roots_univariate([complex(c) for c in reversed(squarefree_part(g))])[0]
        return [1, r]
    # float forms: roots of the lowest-degree one, checked on the rest
    dehom.sort(key=len)
    base = dehom[0]
    if len(base) <= 1:
        return None
    for r in roots_univariate([complex(c) for c in reversed(base)]):
        ok = True
        for h in dehom[1:]:
            val = sum(complex(c) * r ** k for k, c in enumerate(h))
            bound = sum(abs(complex(c)) * abs(r) ** k for k, c in enumerate(h))
            if abs(val) > 1e-8 * max(bound, 1e-300):
                ok = False
                break
        if ok:
            return [1, r]
    return None


def is_empty_intersection(eqs: Sequence[MultiPoly], subspace: LinearSubspace,
                          trials: int = 3, seed: int | None = 0,
                          tol: float = 1e-8) -> EmptinessResult:
    """Decide whether the homogeneous system ``eqs`` has a projective zero on
    ``subspace``.

    Points and lines are decided exactly (for rational input); higher
    dimensional subspaces use random square subsystems solved by homotopy,
    with every endpoint checked against the full system.
    """
    for e in eqs:
        e.require_homogeneous()
    basis = subspace.basis()
    m = len(basis) - 1
    restricted = [r for r in restrict_to_subspace(eqs, basis) if not r.is_zero()]
    if not restricted:
        return EmptinessResult(False, [complex(x) for x in basis[0]], "identically zero")

    def lift(u):
        return [sum(complex(u[j]) * complex(basis[j][i]) for j in range(m + 1))
                for i in range(len(basis[0]))]

    if m == 0:
        return EmptinessResult(True, None, "point")
    if m == 1:
        w = _binary_common_zero(restricted)
        if w is None:
            return EmptinessResult(True, None, "binary gcd")
        return EmptinessResult(False, lift(w), "binary gcd")
    rng = stream(seed, "emptiness")
    r = len(restricted)
    D = max(p.degree() for p in restricted)
    for trial in range(trials):
        P = random_complex(rng, (m + 1, m + 1))
        # chart u = P (1, y)
        images = [MultiPoly.linear_form(list(P[i]), COMPLEX) for i in range(m + 1)]
        affine_images = []
        for im in images:
            terms = {}
            for e, c in im.terms.items():
                k = e.index(1)
                f = [0] * m
                if k > 0:
                    f[k - 1] = 1
                terms[tuple(f)] = c
            affine_images.append(MultiPoly(m, terms, COMPLEX))
        chart = [p.substitute(affine_images) for p in restricted]
        if r <= m:
            extra = [MultiPoly.linear_form(list(random_complex(rng, m)), COMPLEX)
                     + complex(random_complex(rng)) for _ in range(m - r)]
            square = chart + extra
        else:
            square = []
            for _ in range(m):
                acc = MultiPoly.zero(m, COMPLEX)
                for p in chart:
                    mult = MultiPoly.linear_form(list(random_complex(rng, m)), COMPLEX) \
                        + complex(random_complex(rng))
                    acc = acc + complex(random_complex(rng)) * p * mult ** (D - p.degree())
                square.append(acc)
        hom = total_degree_homotopy(square, seed=int(rng.integers(2**31)), name=f"empty{trial}")
        full = CompiledSystem(chart)
        for y in hom.solutions:
            if np.linalg.norm(full.values(y[None, :])[0]) <= tol * (1 + np.linalg.norm(y)) ** D:
                u = P @ np.concatenate([[1.0], y])
                return EmptinessResult(False, lift(u), "homotopy",
                                       {"trial": trial, "paths": hom.n_paths})
        if r <= m:
            break
        expected = int(np.prod([q.degree() for q in square]))
        if len(hom.solutions) + hom.n_infinite == expected and hom.n_failed == 0:
            return EmptinessResult(True, None, "homotopy",
                                   {"trial": trial, "paths": expected,
                                    "finite": len(hom.solutions)})
    if r <= m:
        raise NumericalFailure("could not locate a point on a nonempty intersection")
    return EmptinessResult(True, None, "homotopy", {"trials": trials, "reconciled": False})
