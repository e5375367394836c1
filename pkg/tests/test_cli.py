import json
import subprocess
import sys

import pytest

from kdvls import __version__
from kdvls.cli import main


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def header(csv_text):
    fields = {}
    for line in csv_text.splitlines():
        if line.startswith("# ") and "=" in line and ":" not in line.split("=")[0]:
            k, v = line[2:].split("=", 1)
            fields[k] = v
    return fields


def table(csv_text):
    lines = [l for l in csv_text.splitlines() if not l.startswith("#")]
    cols = lines[0].split(",")
    return cols, [l.split(",") for l in lines[1:]]


def test_exact_bright_momentum(capsys):
    code, out, _ = run(["exact", "--family", "bright", "--c", "1", "--omega", "-0.125"], capsys)
    assert code == 0
    assert float(header(out)["P_U"]) == pytest.approx(96 * 0.125**1.5, rel=1e-6)
    cols, rows = table(out)
    assert cols[:3] == ["xi", "U", "A"] and "residual_U" in cols and "residual_A" in cols


def test_exact_kdv_momentum(capsys):
    code, out, _ = run(["--format", "json", "exact", "--family", "kdv", "--c", "1"], capsys)
    doc = json.loads(out)
    assert code == 0 and doc["summary"]["P"] == pytest.approx(12.0, rel=1e-8)
    for key in ("Q", "P", "H"):
        assert key in doc["summary"]


def test_exact_domain_error(capsys):
    code, out, err = run(["exact", "--family", "bright", "--c", "1", "--omega", "-0.5"], capsys)
    assert code == 2 and out == "" and "domain error" in err


def test_ladder(capsys):
    code, out, _ = run(["--format", "json", "ladder", "--c", "1", "--k", "0.5"], capsys)
    doc = json.loads(out)
    assert code == 0
    assert doc["summary"]["points"] == pytest.approx([-1.0, -0.25])
    assert all(c["passed"] for c in doc["checks"])


def test_projection_row(capsys):
    code, out, _ = run(["projection", "--which", "first", "--p", "1"], capsys)
    cols, rows = table(out)
    assert code == 0 and cols == ["exponent", "integral"]
    assert float(rows[0][1]) == pytest.approx(-0.25, abs=1e-7)


def test_branch_quad_coeff(capsys):
    code, out, _ = run(["--format", "json", "branch", "--j", "1", "--c", "1", "--k",
                        "0.1666667", "--amax", "0.2", "--no-analyze"], capsys)
    doc = json.loads(out)
    assert code == 0
    assert doc["summary"]["quad_coeff"] == pytest.approx(1 / 12, rel=0.03)


def test_numerical_failure_exit(capsys):
    code, _, err = run(["branch", "--j", "1", "--c", "1", "--k", "0.1666667", "--amax", "50",
                        "--na", "1", "--no-analyze"], capsys)
    assert code == 3 and "numerical failure" in err


def test_spectrum_and_stability(capsys):
    code, out, _ = run(["--format", "json", "spectrum", "--target", "primary", "--k", "0.5",
                        "--omega", "-0.5"], capsys)
    assert code == 0
    code, out, _ = run(["--format", "json", "stability", "--k", "0.5"], capsys)
    doc = json.loads(out)
    assert code == 0 and doc["summary"]["embedded"] is True and doc["summary"]["krein"] == -1


def test_header_lines(capsys):
    _, out, _ = run(["ladder", "--c", "1", "--k", "0.5", "--N", "801"], capsys)
    lines = out.splitlines()
    assert lines[0] == f"# kdvls {__version__} command=ladder"
    assert lines[1].startswith("# grid: ") and "n_points=801" in lines[1]
    assert lines[2].startswith("# tolerances: ")


def test_json_key_order(capsys):
    _, out, _ = run(["--format", "json", "ladder", "--c", "1", "--k", "0.5"], capsys)
    assert list(json.loads(out)) == ["command", "version", "grid", "tolerances", "summary",
                                     "checks", "columns", "n_rows"]


def test_deterministic_files(tmp_path, capsys):
    argv = ["exact", "--family", "tanh", "--c", "1", "--omega", "-0.2", "--N", "801"]
    for name in ("a", "b"):
        assert main(["--out", str(tmp_path / name)] + argv) == 0
    for ext in (".csv", ".json"):
        assert (tmp_path / f"a{ext}").read_bytes() == (tmp_path / f"b{ext}").read_bytes()


def test_grid_env_override(monkeypatch, capsys):
    monkeypatch.setenv("KDVLS_GRID_N", "1201")
    _, out, _ = run(["--format", "json", "exact", "--family", "kdv", "--c", "1"], capsys)
    assert json.loads(out)["grid"]["n_points"] == 1201


def test_console_script_module():
    proc = subprocess.run([sys.executable, "-m", "kdvls.cli", "ladder", "--c", "1", "--k",
                           "0.1666667", "--N", "801"], capture_output=True, text=True)
    assert proc.returncode == 0 and "-0.25" in proc.stdout


def test_verify_table(capsys):
    code, out, err = run(["--format", "json", "verify"], capsys)
    doc = json.loads(out)
    assert code == 0 and len(doc["checks"]) == len(err.strip().splitlines())
    assert all(set(c) == {"name", "reference", "computed", "tolerance", "passed"}
               for c in doc["checks"])
