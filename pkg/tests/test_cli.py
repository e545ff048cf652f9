"""CLI behaviour pinned by golden files.

Each case under tests/golden/<name>.txt records the command, exit status,
stdout and stderr.  Set ACSKOD_UPDATE_GOLDEN=1 to rewrite them after an
intentional change.
"""

import json
import os
import subprocess
import sys
from pathlib import Path

import pytest

from acskod import cli

GOLDEN = Path(__file__).parent / "golden"
UPDATE = os.environ.get("ACSKOD_UPDATE_GOLDEN") == "1"

ERRORS = {
    "empty_file": ["acs", "validate", "--manifold", "inputs/empty.json"],
    "json_syntax": ["acs", "validate", "--manifold", "inputs/syntax.json"],
    "missing_file": ["acs", "validate", "--manifold", "inputs/nope.json"],
    "unknown_key": ["acs", "validate", "--manifold", "inputs/unknown_key.json"],
    "not_dual": ["acs", "validate", "--manifold", "inputs/not_dual.json"],
    "bad_expression": ["acs", "validate", "--manifold", "inputs/bad_expr.json"],
    "j_squared": ["acs", "validate", "--manifold", "torus4", "--acs", "inputs/bad_j.json"],
    "unknown_builtin": ["acs", "integrable", "--manifold", "klein_bottle"],
    "bad_gcy": ["acs", "gcy-check", "--manifold", "torus4", "--acs", "standard", "--gcy", "inputs/bad_gcy.json"],
    "m_zero": ["plurigenus", "--manifold", "nilmanifold_N", "--m", "0"],
    "m_missing": ["plurigenus", "--manifold", "nilmanifold_N"],
    "m_not_integer": ["plurigenus", "--manifold", "nilmanifold_N", "--m", "two"],
    "bad_threshold": ["plurigenus", "--manifold", "nilmanifold_N", "--m", "1", "--threshold", "abc"],
    "t_outside_disc": ["plurigenus", "--family", "kodaira_thurston", "--t", "4", "--m-symbolic"],
    "t_syntax": ["plurigenus", "--family", "kodaira_thurston", "--t", "1/", "--m", "1"],
    "t_without_family": ["plurigenus", "--manifold", "nilmanifold_N", "--t", "1", "--m", "1"],
    "tampered_certificate": ["plurigenus", "--verify", "inputs/tampered_cert.json"],
    "unreadable_certificate": ["plurigenus", "--verify", "inputs/empty.json"],
    "family_sign_flip": ["scan", "--family", "inputs/sign_flip_family.json"],
    "no_builtin_samples": ["scan", "--family", "torus_product"],
    "bad_max_m": ["scan", "--family", "kodaira_thurston", "--max-m", "0"],
    "oracle_grid": ["oracle", "--manifold", "torus4", "--acs", "standard", "--m", "1", "--grid", "0"],
    "bad_subcommand": ["frobnicate"],
    "bad_format": ["kodaira", "--manifold", "nilmanifold_N", "--symbolic", "--format", "xml"],
}

OUTPUTS = {
    "kodaira_nilmanifold": ["kodaira", "--manifold", "nilmanifold_N", "--acs", "builtin", "--symbolic"],
    "kodaira_torus": ["kodaira", "--manifold", "torus4", "--acs", "standard", "--max-m", "8"],
    "integrable_torus": ["acs", "integrable", "--manifold", "torus4", "--acs", "standard"],
    "integrable_nilmanifold": ["acs", "integrable", "--manifold", "nilmanifold_N"],
    "coframe_nilmanifold": ["acs", "coframe", "--manifold", "nilmanifold_N"],
    "alpha_nilmanifold": ["acs", "alpha", "--manifold", "nilmanifold_N", "--format", "json"],
    "gcy_torus": ["acs", "gcy-check", "--manifold", "torus4", "--acs", "standard"],
    "plurigenus_kt0": ["plurigenus", "--family", "kodaira_thurston", "--t", "0", "--m", "4", "--format", "json"],
    "plurigenus_symbolic_kt": ["plurigenus", "--family", "kodaira_thurston", "--t", "3*pi/4", "--m-symbolic"],
    "scan_kt": ["scan", "--family", "kodaira_thurston", "--samples", "builtin", "--max-m", "6"],
}


def _run(args, env=None):
    e = dict(os.environ)
    e.update(env or {})
    p = subprocess.run([sys.executable, "-m", "acskod.cli", *args], cwd=GOLDEN, capture_output=True,
                       text=True, env=e)
    return p.returncode, p.stdout, p.stderr


def _render(args, code, out, err) -> str:
    return f"$ acskod {' '.join(args)}\nexit: {code}\n--- stdout\n{out}--- stderr\n{err}"


def _check(name, args, code, out, err):
    path = GOLDEN / f"{name}.txt"
    text = _render(args, code, out, err)
    if UPDATE or not path.exists():
        path.write_text(text, encoding="utf-8")
    assert text == path.read_text(encoding="utf-8")


@pytest.mark.parametrize("name", sorted(ERRORS))
def test_error_golden(name):
    args = ERRORS[name]
    code, out, err = _run(args)
    assert code == 1
    # a failed certificate check is still a report; every other error leaves stdout empty
    assert out == "" or name == "tampered_certificate"
    _check(name, args, code, out, err)


@pytest.mark.parametrize("name", sorted(OUTPUTS))
def test_output_golden(name):
    args = OUTPUTS[name]
    code, out, err = _run(args)
    assert code == 0, err
    assert out.startswith("# acskod 0.1.0\n")
    _check(name, args, code, out, err)


def test_bad_worker_env():
    args = ["scan", "--family", "kodaira_thurston", "--max-m", "1"]
    code, out, err = _run(args, {"ACSKOD_WORKERS": "many"})
    assert code == 1
    _check("bad_workers_env", args, code, out, err)


def test_internal_error_exits_2(monkeypatch, capsys):
    def boom(*a, **k):
        raise cli.InternalInvariantError("strategies disagree at m = 4")

    monkeypatch.setattr(cli, "compute_plurigenus", boom)
    args = ["plurigenus", "--manifold", "nilmanifold_N", "--m", "4"]
    code = cli.main(args)
    cap = capsys.readouterr()
    assert code == 2
    _check("internal_error", args, code, cap.out, cap.err)


def test_unexpected_exception_exits_2(monkeypatch, capsys):
    def boom(*a, **k):
        raise ZeroDivisionError("division by zero")

    monkeypatch.setattr(cli, "kod_from_reports", boom)
    code = cli.main(["kodaira", "--manifold", "nilmanifold_N", "--symbolic"])
    assert code == 2
    assert capsys.readouterr().err == "acskod: internal error: ZeroDivisionError: division by zero\n"


def test_kodaira_headline():
    code, out, _ = _run(OUTPUTS["kodaira_nilmanifold"])
    assert code == 0 and "kod = −∞ (certified)" in out.splitlines()


def test_integrable_torus_is_true():
    assert _run(OUTPUTS["integrable_torus"])[1].splitlines()[1] == "true"


def test_certificate_round_trip(tmp_path):
    cert = tmp_path / "cert.json"
    code, _, _ = _run(["plurigenus", "--manifold", "nilmanifold_N", "--m-symbolic", "--certificate", str(cert)])
    assert code == 0
    code, out, _ = _run(["plurigenus", "--verify", str(cert), "--format", "json"])
    assert code == 0
    doc = json.loads(out.split("\n", 1)[1])
    assert doc["valid"] and doc["claim"] == {"kind": "VanishAllM"}


def test_scan_outputs_are_byte_identical(tmp_path):
    files = {}
    for k in range(2):
        d = tmp_path / str(k)
        d.mkdir()
        args = ["scan", "--family", "kodaira_thurston", "--max-m", "6", "--out", str(d / "t.csv"),
                "--plot-data", str(d / "p.csv"), "--plot", str(d / "fig.png")]
        code, out, _ = _run(args, {"ACSKOD_WORKERS": str(k + 1)})
        assert code == 0
        files[k] = ((d / "t.csv").read_bytes(), (d / "p.csv").read_bytes(), out.replace(str(d), "DIR"))
        assert (d / "fig.png").stat().st_size > 0
    assert files[0] == files[1]


def test_json_outputs_are_byte_identical():
    args = ["scan", "--family", "kodaira_thurston", "--max-m", "4", "--format", "json"]
    a, b = _run(args), _run(args)
    assert a == b
    doc = json.loads(a[1].split("\n", 1)[1])
    assert [r["t"] for r in doc["rows"]][:3] == ["0", "1/2", "-1/2"]


def test_scan_usc_lines():
    code, out, _ = _run(["scan", "--family", "kodaira_thurston", "--max-m", "6", "--usc"])
    assert code == 0
    assert "# P_m, m = 1..6: 0 violation(s)" in out
    assert "# kod: 4 violation(s) (expected: kod is not semicontinuous)" in out
