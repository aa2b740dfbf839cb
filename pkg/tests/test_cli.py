from __future__ import annotations

import json
import os
import subprocess
import sys

import pytest

from pairdim.cli import main, run
from pairdim.formula import parse

KEYS = {"kind", "input", "char", "transcendentals", "payload", "engineVersion", "schemaVersion"}


def _cert(argv):
    code, out = run(argv)
    assert code == 0
    data = json.loads(out)
    assert set(data) == KEYS
    return data


def test_dim_example():
    data = _cert(["dim", "--char", "0", "--trans", "t", "exists u in U. z = u*t"])
    assert data["kind"] == "dim" and data["payload"]["dimension"] == 0
    assert data["transcendentals"] == ["t"]


def test_dim_empty_set_serializes_neg_inf():
    assert _cert(["dim", "--vars", "z", "1 = 0"])["payload"]["dimension"] == "neg_inf"


def test_dichotomy_example():
    data = _cert(["dichotomy", "U(z)"])
    assert data["kind"] == "dichotomy" and data["payload"]["label"] == "Small"


def test_parse_example():
    data = _cert(["parse", "exists x. x*x = a"])
    assert parse(data["payload"]["formula"]) == parse("exists x. x*x = a")


def test_formulas_in_payload_reparse():
    data = _cert(["normalize", "--trans", "t", "~U(z) | z = t"])
    parse(data["payload"]["formula"], tuple(data["transcendentals"]))
    data = _cert(["qe", "exists y. a*y = 1"])
    assert parse(data["payload"]["formula"]) == parse("a != 0")


def test_trans_header_is_honoured():
    assert _cert(["dim", "#trans t. z = t"])["transcendentals"] == ["t"]


def test_witness_and_check_and_pregeo():
    data = _cert(["witness", "z - x1*y1", "--u", "x1", "--param", "y1=t", "--trans", "t"])
    assert data["payload"]["bound"] == 1
    data = _cert(["check", "--trans", "t", "--samples", "20", "exists u in U. z = u*t"])
    assert data["payload"]["total"] == 20 and not data["payload"]["disagreements"]
    data = _cert(["pregeo-check", '{"prime": 2, "vectors": [[1,0],[0,1],[1,1]]}'])
    assert all(v["pass"] for v in data["payload"].values())


def test_exit_codes(capsys):
    assert main(["normalize", "exists w. forall u in U. w*u = 0"]) == 2
    err = capsys.readouterr().err
    assert err.startswith("unsupported:") and "forall u in U" in err
    assert main(["parse", "x = "]) == 1
    assert capsys.readouterr().err.startswith("error:")
    assert main(["qe", "exists y. U(y)"]) == 1
    assert main(["dim", "--char", "4", "x = 0"]) == 1


def test_text_format_and_out_file(tmp_path):
    code, out = run(["dichotomy", "--format", "text", "z != 0"])
    assert code == 0 and out.strip() == "CoSmall"
    path = tmp_path / "cert.json"
    assert main(["dim", "--out", str(path), "U(y) & z != y"]) == 0
    assert json.loads(path.read_text())["payload"]["dimension"] == 1


@pytest.mark.parametrize("argv", [
    ["normalize", "--trans", "t", "(exists u in U. z = u*t) | ~U(z)"],
    ["dim", "--trans", "t", "U(y) & z = t*y"],
])
def test_deterministic_across_processes(argv):
    cmd = [sys.executable, "-m", "pairdim.cli", *argv]
    outs = {subprocess.run(cmd, capture_output=True, check=True,
                           env={**os.environ, "PYTHONHASHSEED": seed}).stdout
            for seed in ("1", "2", "3")}
    assert len(outs) == 1


def test_certificate_reruns_from_its_fields():
    first = _cert(["dichotomy", "--trans", "t", "exists u in U. z^2 = u + t"])
    again = _cert(["dichotomy", "--char", str(first["char"]),
                   "--trans", ",".join(first["transcendentals"]), first["input"]])
    assert again == first
