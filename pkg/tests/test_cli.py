import json

from k3galois.cli import main, read_keyvalue

FERMAT_SYSTEM = "N = 3\nequation = X0^4 + X1^4 + X2^4 + X3^4\n"


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def structured(capsys, *argv):
    code, out, err = run(capsys, *argv, "--format", "structured")
    return code, json.loads(out) if out.strip() else None, err


# classify and euler

def test_classify_plain(capsys):
    code, out, _ = run(capsys, "classify")
    assert code == 0
    lines = [l for l in out.splitlines() if "ADMISSIBLE" in l or "EXCLUDED" in l]
    assert len(lines) == 8
    assert sum("ADMISSIBLE" in l for l in lines) == 3


def test_classify_structured(capsys):
    code, data, _ = structured(capsys, "classify")
    assert code == 0 and data["ok"] and data["admissible"] == 3 and data["candidates"] == 8
    assert [r["datum"] for r in data["rows"] if r["status"] == "ADMISSIBLE"] == \
        ["4,4", "3,3|2,2", "2,2|2,2|2,2"]


def test_classify_diagnostic(capsys):
    code, data, _ = structured(capsys, "classify", "--diagnostic-d1")
    assert code == 0 and data["candidates"] == 28


def test_euler(capsys):
    code, data, _ = structured(capsys, "euler", "2:2,2:2,2:2")
    assert code == 0 and data["euler"] == 24 and data["n"] == 8
    code, out, _ = run(capsys, "euler", "2,4|2,4")
    assert code == 0 and "chi = 36" in out


def test_euler_bad_datum(capsys):
    code, _, err = run(capsys, "euler", "2;2")
    assert code == 2 and "error" in err


def test_structured_output_is_byte_stable(capsys):
    a = run(capsys, "classify", "--format", "structured")[1]
    b = run(capsys, "classify", "--format", "structured")[1]
    assert a == b


# argument handling

def test_usage_errors_exit_2(capsys):
    assert run(capsys)[0] == 2
    assert run(capsys, "frobnicate")[0] == 2
    assert run(capsys, "verify")[0] == 2
    assert run(capsys, "classify", "--seed", "zz")[0] == 2


def test_help_and_version_exit_0(capsys):
    assert run(capsys, "--help")[0] == 0
    code, out, _ = run(capsys, "--version")
    assert code == 0 and out.strip()


def test_seed_accepts_hex(capsys):
    assert run(capsys, "euler", "4,4", "--seed", "0x10")[0] == 0


def test_nonpositive_tolerance_rejected(capsys):
    assert run(capsys, "euler", "4,4", "--tol-newton", "0")[0] == 2


# key/value files

def test_read_keyvalue(tmp_path):
    path = write(tmp_path, "a.txt", "# comment\n[family]\nlabel = 'S23'\nform = X0\nform = \"X1\"\n\n")
    assert read_keyvalue(path) == {"label": ["S23"], "form": ["X0", "X1"]}


def test_read_keyvalue_rejects_garbage(tmp_path, capsys):
    fam = write(tmp_path, "bad.txt", "label = S4\nthis line has no equals sign\n")
    code, _, err = run(capsys, "verify", "--family", fam)
    assert code == 2 and "expected 'key = value'" in err


def test_missing_file(capsys, tmp_path):
    code, _, err = run(capsys, "bitangents", str(tmp_path / "nope.txt"))
    assert code == 2 and err


# verify

def test_verify_builtin_s4(capsys):
    code, data, _ = structured(capsys, "verify", "--builtin", "s4", "--seed", "0")
    assert code == 0 and data["ok"]
    assert data["stages"] == ["ledger", "criterion", "monodromy", "genus", "character"]
    assert data["monodromy"]["label"] == "Z4" and data["genus"] == 3
    assert data["character"]["image_order"] == 4 and data["character"]["kernel_order"] == 1


def test_verify_fermat_includes_galois_points(capsys):
    code, data, _ = structured(capsys, "verify", "--builtin", "fermat")
    assert code == 0 and "galois_points" in data["stages"]


def test_verify_s222_runs_tower(capsys):
    code, data, _ = structured(capsys, "verify", "--builtin", "s222", "--seed", "7")
    assert code == 0 and data["stages"][-1] == "tower"
    assert data["tower"]["fiber_sizes"] == [8, 4, 2]


def test_verify_family_file(tmp_path, capsys):
    fam = write(tmp_path, "s23.txt", "label = S23\nf2 = X0^2 + X1^2 + X2^2\nf3 = X0^3 + 2*X1^3 - X2^3\n")
    code, data, _ = structured(capsys, "verify", "--family", fam, "--seed", "1")
    assert code == 0 and data["monodromy"]["label"] == "Z6" and data["genus"] == 4


def test_verify_singular_family_exits_2(tmp_path, capsys):
    fam = write(tmp_path, "broken.txt", "label = S4\nf4 = X0^4\n")
    code, _, err = run(capsys, "verify", "--family", fam)
    assert code == 2 and "witness" in err


def test_verify_unknown_label(tmp_path, capsys):
    fam = write(tmp_path, "q.txt", "label = S7\nf4 = X0^4\n")
    assert run(capsys, "verify", "--family", fam)[0] == 2


# monodromy

def test_monodromy_galois_center(tmp_path, capsys):
    system = write(tmp_path, "fermat.txt", FERMAT_SYSTEM)
    center = write(tmp_path, "c.txt", "point = [0, 0, 0, 1]\n")
    code, data, _ = structured(capsys, "monodromy", system, center)
    assert code == 0 and data["label"] == "Z4" and data["galois"]
    assert data["resolvent"]["label"] == "Z4"


def test_monodromy_generic_center(tmp_path, capsys):
    system = write(tmp_path, "fermat.txt", FERMAT_SYSTEM)
    center = write(tmp_path, "c.txt", "point = [1, 2, -1, 3]\n")
    code, data, _ = structured(capsys, "monodromy", system, center)
    assert code == 0 and data["order"] == 24 and data["galois_reason"] == "ORDER_MISMATCH"
    assert data["resolvent"]["order"] == 24


def test_monodromy_center_given_by_forms(tmp_path, capsys):
    system = write(tmp_path, "fermat.txt", FERMAT_SYSTEM)
    center = write(tmp_path, "c.txt", "form = X0\nform = X1\nform = X2\n")
    code, out, _ = run(capsys, "monodromy", system, center)
    assert code == 0 and "Z4" in out


def test_monodromy_center_on_surface(tmp_path, capsys):
    system = write(tmp_path, "s.txt", "equation = X0^4 - X1^4 + X2^4 + X3^4\n")
    center = write(tmp_path, "c.txt", "point = [1, 1, 0, 0]\n")
    code, _, err = run(capsys, "monodromy", system, center)
    assert code == 2 and "witness" in err


def test_monodromy_numerical_failure_exits_3(tmp_path, capsys):
    system = write(tmp_path, "fermat.txt", FERMAT_SYSTEM)
    center = write(tmp_path, "c.txt", "point = [0, 0, 0, 1]\n")
    code, _, err = run(capsys, "monodromy", system, center, "--tol-match", "1e-30")
    assert code == 3 and err
    # the override does not leak into the next run
    assert run(capsys, "monodromy", system, center)[0] == 0


def test_monodromy_threads_are_byte_stable(tmp_path, capsys):
    system = write(tmp_path, "fermat.txt", FERMAT_SYSTEM)
    center = write(tmp_path, "c.txt", "point = [1, 2, -1, 3]\n")
    one = run(capsys, "monodromy", system, center, "--format", "structured")[1]
    four = run(capsys, "monodromy", system, center, "--format", "structured", "--threads", "4")[1]
    assert one == four


# bitangents

def test_bitangents(tmp_path, capsys):
    curve = write(tmp_path, "q.txt", "curve = X0^4 + X1^4 + X2^4\n")
    code, out, _ = run(capsys, "bitangents", curve)
    assert code == 0 and "16 bitangents + 12 hyperflexes" in out
    code, data, _ = structured(capsys, "bitangents", curve)
    assert data["summary"]["ledger"]["b"] == 16 and len(data["lines"]) == 28


def test_bitangents_singular_curve(tmp_path, capsys):
    curve = write(tmp_path, "q.txt", "curve = X0^4 + X1^4\n")
    assert run(capsys, "bitangents", curve)[0] == 2
