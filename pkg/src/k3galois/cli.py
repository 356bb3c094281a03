"""Command-line entry point.

Exit codes: 0 success, 1 a check failed, 2 invalid input, 3 numerical
failure after retries.  ``--format structured`` prints sorted JSON that is
byte-identical for identical inputs, seed and tolerances.
"""

from __future__ import annotations

import argparse
import ast
import json
import math
import sys
from pathlib import Path
from typing import Callable

import numpy as np

from . import __version__
from .algebra import CoverSpec, LinearSubspace, parse_poly
from .errors import CheckFailed, InvalidInput, NumericalFailure
from .rng import DEFAULT_SEED

EXIT_OK, EXIT_CHECK, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3
EXPECTED_ADMISSIBLE = {("Z4", "S(4)"), ("Z6", "S(23)"), ("Z2^3", "S(222)")}


class StageError(Exception):
    def __init__(self, stage: str, error: Exception):
        super().__init__(f"{stage}: {error}")
        self.stage = stage
        self.error = error


def _stage(name: str, fn: Callable, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except (CheckFailed, InvalidInput, NumericalFailure) as exc:
        raise StageError(name, exc) from exc


def _check(name: str, ok: bool, message: str):
    if not ok:
        raise StageError(name, CheckFailed(message))


# input files

def read_keyvalue(path: str | Path) -> dict[str, list[str]]:
    """``key = value`` lines; ``#`` starts a comment, repeated keys accumulate,
    surrounding quotes are dropped."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InvalidInput(f"cannot read {path}: {exc}") from exc
    out: dict[str, list[str]] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line or (line.startswith("[") and line.endswith("]") and "=" not in line):
            continue
        if "=" not in line:
            raise InvalidInput(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if len(value) >= 2 and value[0] == value[-1] and value[0] in "'\"":
            value = value[1:-1]
        out.setdefault(key.lower(), []).append(value)
    return out


def _one(data: dict, key: str, path) -> str:
    if key not in data:
        raise InvalidInput(f"{path}: missing key {key!r}")
    if len(data[key]) != 1:
        raise InvalidInput(f"{path}: key {key!r} given more than once")
    return data[key][0]


def _literal(text: str, path):
    try:
        return ast.literal_eval(text)
    except (ValueError, SyntaxError) as exc:
        raise InvalidInput(f"{path}: cannot read {text!r} as a list") from exc


FAMILY_KEYS = {"S4": ["f4"], "S23": ["f2", "f3"], "S222": ["f22", "f24", "f25"]}


def load_family(path):
    from .families import build_family
    data = read_keyvalue(path)
    label = _one(data, "label", path).upper()
    if label not in FAMILY_KEYS:
        raise InvalidInput(f"{path}: unknown label {label!r}")
    if "form" in data:
        forms = data["form"]
    else:
        forms = [_one(data, k, path) for k in FAMILY_KEYS[label]]
    return build_family(label, [parse_poly(f, 3) for f in forms])


def load_system(path) -> tuple[int, list]:
    data = read_keyvalue(path)
    eqs = data.get("equation", [])
    if not eqs:
        raise InvalidInput(f"{path}: no 'equation' lines")
    N = int(_one(data, "n", path)) if "n" in data else len(eqs) + 2
    return N, [parse_poly(e, N + 1) for e in eqs]


def load_center(path, N: int) -> LinearSubspace:
    """A centre given as ``point = [..]``, ``forms = [[..], ..]`` or repeated
    ``form = <linear form>`` lines."""
    data = read_keyvalue(path)
    if "point" in data:
        pt = _literal(_one(data, "point", path), path)
        if len(pt) != N + 1:
            raise InvalidInput(f"{path}: point needs {N + 1} coordinates")
        return LinearSubspace.through_point(pt)
    if "forms" in data:
        rows = _literal(_one(data, "forms", path), path)
        return LinearSubspace.from_vectors(rows)
    if "form" in data:
        return LinearSubspace(N, tuple(parse_poly(f, N + 1) for f in data["form"]))
    raise InvalidInput(f"{path}: expected 'point', 'forms' or 'form'")


def load_curve(path):
    from .curves import PlaneQuartic
    data = read_keyvalue(path)
    key = "curve" if "curve" in data else "f4" if "f4" in data else None
    if key is None:
        raise InvalidInput(f"{path}: expected a 'curve' line")
    return PlaneQuartic(parse_poly(_one(data, key, path), 3))


# output

def _clean(obj):
    """JSON-ready copy with complex numbers as pairs and floats rounded."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [_clean(obj.real), _clean(obj.imag)]
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return str(x)
        return float(f"{x:.10g}") + 0.0
    return obj if obj is None or isinstance(obj, str) else str(obj)


def emit(report: dict, fmt: str, plain: Callable[[dict], list[str]]):
    if fmt == "structured":
        print(json.dumps(_clean(report), sort_keys=True, indent=2))
    else:
        for line in plain(report):
            print(line)


# commands

def cmd_classify(args) -> int:
    from .classify import classify_all
    verdicts = classify_all(diagnostic_lines=args.diagnostic_d1)
    rows = [v.as_dict() for v in verdicts]
    adm = {(v.group, v.surface) for v in verdicts if v.admissible}
    n_adm = sum(v.admissible for v in verdicts)
    ok = n_adm == 3 and adm == EXPECTED_ADMISSIBLE
    report = {"candidates": len(rows), "admissible": n_adm, "rows": rows, "ok": ok}

    def plain(r):
        out = [f"{'datum':<22} {'n':>3} {'chi':>4}  status      reason / group"]
        for row in r["rows"]:
            tail = f"{row['group']} on {row['surface']}" if row["status"] == "ADMISSIBLE" \
                else row["reason"] + (" (reconstructed)" if row["reconstructed"] else "")
            out.append(f"{row['datum']:<22} {row['n']:>3} {row['euler']:>4}  {row['status']:<10}  {tail}")
        out.append(f"{r['candidates']} candidates, {r['admissible']} admissible")
        return out

    emit(report, args.format, plain)
    return EXIT_OK if ok else EXIT_CHECK


def _family_certificate(fs, seed: int, threads: int) -> dict:
    from .families import GENERA, GROUP_LABELS, fermat_galois_points, ramification_ledger, tower_check
    from .group_action import character_table, galois_criterion, random_surface_points, \
        residue_form_ratio
    from .monodromy import compute_monodromy

    cert: dict = {"family": fs.as_dict(), "stages": []}
    led = _stage("ledger", ramification_ledger, fs)
    cert["ledger"] = led.as_dict()
    cert["stages"].append("ledger")

    crit = _stage("criterion", galois_criterion, fs.group, fs.equations, fs.center_forms, seed=seed)
    cert["criterion"] = crit.as_dict()
    _check("criterion", crit.verdict, f"criterion verdict false: {crit.as_dict()}")
    cert["stages"].append("criterion")

    mono = _stage("monodromy", compute_monodromy, fs.cover, seed=seed, threads=threads)
    cert["monodromy"] = mono.as_dict()
    want = GROUP_LABELS[fs.label]
    _check("monodromy", mono.galois.galois and mono.group.label() == want,
           f"monodromy group {mono.group.label()} ({mono.galois.reason}), expected {want}")
    cert["stages"].append("monodromy")
    _check("genus", mono.genus == GENERA[fs.label],
           f"genus {mono.genus}, expected {GENERA[fs.label]}")
    cert["genus"] = mono.genus
    cert["stages"].append("genus")

    table = _stage("character", character_table, fs.group, fs.equations, fs.center_forms)
    cert["character"] = table.as_dict()
    pts = _stage("character", random_surface_points, fs.equations, 2, seed=seed)
    err = max(abs(residue_form_ratio(M, fs.equations, p, seed=seed) - table.epsilons[i])
              for i, M in enumerate(fs.group.elements) for p in pts)
    cert["character"]["oracle_error"] = err
    _check("character", err < 1e-8, f"residue-form oracle disagrees by {err:.2e}")
    cert["stages"].append("character")

    if fs.label == "S222":
        tower = _stage("tower", tower_check, fs, seed=seed)
        cert["tower"] = tower.as_dict()
        _check("tower", tower.ok, f"tower fibre sizes {tower.fiber_sizes}")
        cert["stages"].append("tower")
    return cert


def cmd_verify(args) -> int:
    from .families import build_family, fermat_family, fermat_galois_points
    from .monodromy import compute_monodromy

    builtin = (args.builtin or "").lower()
    if args.family:
        fs = _stage("build", load_family, args.family)
    elif builtin == "fermat":
        fs = _stage("build", fermat_family)
    elif builtin in ("s4", "s23", "s222"):
        fs = _stage("build", build_family, builtin.upper(), seed=args.seed)
    else:
        raise InvalidInput("verify needs --builtin fermat|s4|s23|s222 or --family FILE")
    cert = _family_certificate(fs, args.seed, args.threads)
    if builtin == "fermat":
        points = []
        for center in fermat_galois_points():
            cov = CoverSpec(3, list(fs.equations), center, "fermat")
            res = _stage("galois_points", compute_monodromy, cov, seed=args.seed, threads=args.threads)
            points.append({"order": res.order, "label": res.group.label(), "galois": res.galois.galois})
            _check("galois_points", res.galois.galois and res.group.label() == "Z4",
                   f"coordinate point gives {res.group.label()}")
        cert["galois_points"] = points
        cert["stages"].append("galois_points")
    cert["ok"] = True

    def plain(c):
        out = [f"family {c['family']['label']}: " + "; ".join(c["family"]["equations"])]
        out.append(f"ledger: total {c['ledger']['total']} = 3 * {c['ledger']['n']}")
        out.append(f"criterion: verdict {c['criterion']['verdict']}")
        out.append(f"monodromy: {c['monodromy']['label']} (order {c['monodromy']['order']}), "
                   f"galois {c['monodromy']['galois']}, genus {c['genus']}")
        out.append(f"character: image {c['character']['image_order']}, kernel "
                   f"{c['character']['kernel_order']}, oracle error {c['character']['oracle_error']:.1e}")
        if "tower" in c:
            out.append(f"tower: fibre sizes {tuple(c['tower']['fiber_sizes'])}")
        if "galois_points" in c:
            out.append("galois points: " + ", ".join(p["label"] for p in c["galois_points"]))
        out.append("all checks passed")
        return out

    emit(cert, args.format, plain)
    return EXIT_OK


def cmd_monodromy(args) -> int:
    from .monodromy import build_pencil, compute_monodromy
    from .monodromy.resolvent import geometric_quartic_group

    N, eqs = load_system(args.system)
    center = load_center(args.center, N)
    cov = CoverSpec(N, eqs, center, Path(args.system).stem)
    res = compute_monodromy(cov, seed=args.seed, threads=args.threads)
    report = res.as_dict()
    if N == 3 and cov.exact:
        pc = build_pencil(cov, seed=args.seed)
        v = geometric_quartic_group(pc.fiber_polys[0])
        report["resolvent"] = {"order": v.order, "label": v.label, "reason": v.reason}

    def plain(r):
        out = [f"degree {r['degree']}, {len(r['branch_points'])} branch points"]
        out.append(f"group {r['label']} of order {r['order']}, transitive {r['transitive']}")
        out.append(f"galois {r['galois']} ({r['galois_reason']}), genus {r['genus']}")
        out.append(f"sphere relation {r['sphere_relation']}, max residual {r['max_residual']:.1e}")
        if "resolvent" in r:
            out.append(f"resolvent oracle: {r['resolvent']['label']} ({r['resolvent']['reason']})")
        return out

    emit(report, args.format, plain)
    return EXIT_OK


def cmd_bitangents(args) -> int:
    from .curves import bitangent_summary

    q = load_curve(args.curve)
    summary = bitangent_summary(q, seed=args.seed)
    recs = summary.pop("records")
    report = {"summary": summary, "lines": [r.as_dict() for r in recs]}

    def plain(r):
        s = r["summary"]
        out = [f"{s['lines']} lines: {s['bitangents']} bitangents + {s['hyperflexes']} hyperflexes"]
        out.append(f"ledger: b = 28 - a2 = {s['ledger']['b']}, a1 = {s['ledger']['a1']}")
        return out

    emit(report, args.format, plain)
    return EXIT_OK


def cmd_euler(args) -> int:
    from .classify import BranchDatum, stratified_euler_char
    try:
        bd = BranchDatum.parse(args.datum)
    except ValueError as exc:
        raise InvalidInput(str(exc)) from exc
    chi = stratified_euler_char(bd)
    report = {"datum": str(bd), "n": bd.n, "balance": str(bd.balance()), "euler": chi}
    emit(report, args.format, lambda r: [f"{r['datum']}: chi = {r['euler']} (n = {r['n']})"])
    return EXIT_OK


# argument parsing

def _int(text: str) -> int:
    return int(text, 0)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=_int, default=DEFAULT_SEED,
                        help=f"run seed (default {DEFAULT_SEED:#x})")
    common.add_argument("--tol-newton", type=float, default=None, help="Newton residual tolerance")
    common.add_argument("--tol-match", type=float, default=None, help="fibre matching tolerance")
    common.add_argument("--format", choices=("plain", "structured"), default="plain")
    common.add_argument("--threads", type=int, default=1, help="loop-tracking threads")

    p = argparse.ArgumentParser(prog="k3galois", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("classify", parents=[common], help="classify branch data")
    c.add_argument("--diagnostic-d1", action="store_true", help="also enumerate d_i = 1")
    c.set_defaults(func=cmd_classify)

    v = sub.add_parser("verify", parents=[common], help="verify a family end to end")
    g = v.add_mutually_exclusive_group(required=True)
    g.add_argument("--builtin", choices=("fermat", "s4", "s23", "s222"))
    g.add_argument("--family", metavar="FILE")
    v.set_defaults(func=cmd_verify)

    m = sub.add_parser("monodromy", parents=[common], help="monodromy of a projection")
    m.add_argument("system", metavar="SYSTEM")
    m.add_argument("center", metavar="CENTER")
    m.set_defaults(func=cmd_monodromy)

    b = sub.add_parser("bitangents", parents=[common], help="bitangents of a plane quartic")
    b.add_argument("curve", metavar="CURVE")
    b.set_defaults(func=cmd_bitangents)

    e = sub.add_parser("euler", parents=[common], help="stratified Euler characteristic")
    e.add_argument("datum", help='branch datum such as "2:2,2:2,2:2"')
    e.set_defaults(func=cmd_euler)
    return p


def _apply_tolerances(args):
    from .algebra import solve
    from .monodromy import loops
    if args.tol_newton is not None:
        if args.tol_newton <= 0:
            raise InvalidInput("--tol-newton must be positive")
        solve.NEWTON_TOL = args.tol_newton
    if args.tol_match is not None:
        if args.tol_match <= 0:
            raise InvalidInput("--tol-match must be positive")
        loops.MATCH_TOL = args.tol_match


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    from .algebra import solve
    from .monodromy import loops
    saved = solve.NEWTON_TOL, loops.MATCH_TOL
    try:
        _apply_tolerances(args)
        return args.func(args)
    except StageError as exc:
        err = exc.error
        print(f"stage {exc.stage} failed: {err}", file=sys.stderr)
        witness = getattr(err, "witness", None)
        if witness is not None:
            print(f"witness: {_clean(witness)}", file=sys.stderr)
        return _code(err)
    except (CheckFailed, InvalidInput, NumericalFailure, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        witness = getattr(exc, "witness", None)
        if witness is not None:
            print(f"witness: {_clean(witness)}", file=sys.stderr)
        return _code(exc)
    finally:
        # overrides last for one run, so repeated in-process calls stay independent
        solve.NEWTON_TOL, loops.MATCH_TOL = saved


def _code(exc: Exception) -> int:
    if isinstance(exc, CheckFailed):
        return EXIT_CHECK
    if isinstance(exc, NumericalFailure):
        return EXIT_NUMERIC
    return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
