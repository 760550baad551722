import csv
import io
import json
import math
import os

import pytest
from hypothesis import given, strategies as st

from stokes_wkb import cli


def _rows(text):
    return list(csv.reader(io.StringIO(text)))


def test_spectrum_csv(capsys):
    code = cli.main(["spectrum", "--family", "morse", "--alpha", "1", "--beta", "1", "--lambda", "4",
                     "--m-max", "3", "--method", "jwkb"])
    rows = _rows(capsys.readouterr().out)
    assert code == cli.EXIT_OK
    assert rows[0] == ["method", "family", "params_hash", "m", "E", "residual"]
    assert [r[3] for r in rows[1:]] == ["0", "1", "2", "3"]
    # Morse closed form at lam = 4: -(1 - (m + 1/2)/4)^2
    for r in rows[1:]:
        assert float(r[4]) == pytest.approx(-(1.0 - (int(r[3]) + 0.5) / 4.0) ** 2, rel=1e-9)


def test_compare_exit_codes(tmp_path):
    out = tmp_path / "cmp.json"
    assert cli.main(["compare", "--family", "harmonic", "--m-max", "2", "--assert-match", "--out", str(out)]) == 0
    assert json.loads(out.read_text())["report"]["verdict"] == "MATCH"
    code = cli.main(["compare", "--family", "exp_well", "--alpha", "1", "--beta", "3", "--gamma", "1",
                     "--lambda", "2", "--m-max", "1", "--assert-match", "--out", str(tmp_path / "x.csv")])
    assert code == cli.EXIT_MISMATCH


def test_schema_errors_carry_json_pointers(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"family": "MORSE", "params": {"alpha": "one"}}))
    assert cli.main(["spectrum", "--config", str(cfg)]) == cli.EXIT_ERROR
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "SCHEMA" and err["pointer"] == "/params/alpha"


def test_domain_errors_exit_one(capsys):
    assert cli.main(["spectrum", "--family", "morse", "--alpha", "-1", "--beta", "1"]) == cli.EXIT_ERROR
    assert json.loads(capsys.readouterr().err)["error"] == "PARAM_OUT_OF_RANGE"


def test_flags_override_config(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"family": "HARMONIC", "m_max": 5, "lambda": 1.0}))
    out = tmp_path / "s.csv"
    assert cli.main(["spectrum", "--config", str(cfg), "--m-max", "1", "--lambda", "2", "--out", str(out)]) == 0
    rows = _rows(out.read_text())
    assert [float(r[4]) for r in rows[1:]] == pytest.approx([0.5, 1.5], rel=1e-9)


def test_run_accepts_a_persisted_config(tmp_path):
    cfg = {"command": "phase-audit", "family": "MORSE", "params": {"alpha": 1.0, "beta": 1.0}, "energy": -0.75,
           "x0_real": 2.0, "out": str(tmp_path / "a.json")}
    assert cli.run(cfg) == 0
    first = (tmp_path / "a.json").read_bytes()
    assert cli.run(cfg) == 0
    assert (tmp_path / "a.json").read_bytes() == first
    assert json.loads(first)["difference"] == pytest.approx(-4.0 * math.pi, abs=1e-6)


def test_stokes_command_writes_svg_and_json(tmp_path):
    svg, doc = tmp_path / "h.svg", tmp_path / "h.json"
    assert cli.main(["stokes", "--family", "harmonic", "--energy", "1", "--svg", str(svg), "--json", str(doc)]) == 0
    assert svg.read_text().count('class="stokes-line"') == 6
    assert len(json.loads(doc.read_text())["sectors"]) == 4


def test_atomic_write_leaves_no_temp_files(tmp_path):
    cli.write_atomic(str(tmp_path / "a.txt"), "x")
    cli.write_atomic(str(tmp_path / "a.txt"), "y")
    assert os.listdir(tmp_path) == ["a.txt"]
    assert (tmp_path / "a.txt").read_text() == "y"


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_floats_round_trip_through_json(v):
    assert json.loads(cli.dump_json({"v": v}))["v"] == v


def test_schema_is_printable(capsys):
    assert cli.main(["--print-schema"]) == 0
    assert json.loads(capsys.readouterr().out)["properties"]["command"]["enum"] == list(cli.COMMANDS)
