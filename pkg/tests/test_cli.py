import csv
import json
import subprocess
import sys

import pytest

from lossbandit.cli import build_parser, main

REF_ENV = {
    "type": "no_learning",
    "arms": [
        {"id": "low", "support": [0.5, -0.5], "probs": [0.5, 0.5]},
        {"id": "high", "support": [1, -1], "probs": [0.5, 0.5]},
    ],
}
TWO_ENV = {"type": "two_armed", "p_low": 0.2, "p_high": 0.8, "mu1": 0.5}
EXP0 = {"phi1": "exponential", "c": 0.0, "theta": 0.5}


@pytest.fixture
def files(tmp_path):
    out = {}
    for name, obj in (("ref", REF_ENV), ("two", TWO_ENV), ("u", EXP0)):
        p = tmp_path / f"{name}.json"
        p.write_text(json.dumps(obj))
        out[name] = str(p)
    return out


def run(capsys, *argv):
    code = main(list(argv))
    cap = capsys.readouterr()
    return code, cap.out, cap.err


def test_value_closed_form(capsys):
    code, out, _ = run(capsys, "value", "--c", "0", "--sigma-low", "0.5", "--sigma-high", "1", "--phi1", "exponential", "--method", "closed-form")
    assert code == 0
    d = json.loads(out)
    assert d["v"] == 0.0 and d["method"] == "closed-form-exponential" and "error_estimate" in d


def test_value_quadrature_matches(capsys):
    _, out, _ = run(capsys, "value", "--c", "-0.5", "--sigma-low", "0.5", "--sigma-high", "1")
    assert json.loads(out)["v"] == pytest.approx(0.332267039514944, abs=1e-9)


def test_value_coupling_error(capsys):
    code, _, err = run(capsys, "value", "--c", "0", "--sigma-low", "0.5", "--sigma-high", "1", "--theta", "0.7")
    assert code == 2 and "theta" in err


def test_dp_two_armed_worked_example(capsys, files):
    code, out, _ = run(capsys, "dp", "--env", files["two"], "--n", "1", "--utility", files["u"])
    d = json.loads(out)
    assert code == 0 and d["n"] == 1
    # stage 1: both arms have predictive nonzero probability 1/2
    import math

    assert d["value"] == pytest.approx(0.25 * (1 - math.exp(-1)) + 0.25 * 2 * (math.exp(-0.5) - 1), abs=1e-15)
    assert set(d) == {"n", "value", "atoms_at_boundary", "runtime_ms"}


def test_dp_matches_library(capsys, files):
    _, out, _ = run(capsys, "dp", "--env", files["ref"], "--n", "1")
    assert json.loads(out)["value"] == pytest.approx(-0.0244645468, abs=1e-10)
    _, out, _ = run(capsys, "dp", "--env", files["ref"], "--n", "1", "--strategy", "s_star")
    assert json.loads(out)["value"] == pytest.approx(-0.0774090609, abs=1e-10)
    _, out, _ = run(capsys, "dp", "--env", files["ref"], "--n", "2", "--indicator-c", "0")
    assert json.loads(out)["value"] == 0.75


def test_dp_dump_table(capsys, files, tmp_path):
    path = tmp_path / "table.csv"
    code, _, _ = run(capsys, "dp", "--env", files["ref"], "--n", "3", "--dump-table", str(path))
    rows = list(csv.DictReader(path.open()))
    assert code == 0
    assert list(rows[0]) == ["stage", "sum", "delta1", "delta2", "value", "argmax"]
    assert rows[0]["stage"] == "1" and rows[-1]["stage"] == "4"
    path2 = tmp_path / "table2.csv"
    run(capsys, "dp", "--env", files["two"], "--n", "2", "--dump-table", str(path2))
    rows = list(csv.DictReader(path2.open()))
    assert {r["argmax"] for r in rows if r["stage"] != "3"} <= {"a", "b"}


def test_dp_errors(capsys, files):
    assert run(capsys, "dp", "--env", "{not json", "--n", "2")[0] == 2
    assert run(capsys, "dp", "--env", files["ref"], "--n", "2", "--utility", '{"phi1": "exponential", "c": 0, "theta": 0.9}')[0] == 2
    assert run(capsys, "dp", "--env", files["ref"], "--n", "2", "--utility", '{"phi1": "exponential", "c": 0, "theta": 0.9}', "--allow-uncoupled")[0] == 0
    assert run(capsys, "dp", "--env", files["two"], "--n", "400", "--max-states", "1000")[0] == 2
    assert run(capsys, "dp", "--env", "/nonexistent.json", "--n", "2")[0] == 2
    assert run(capsys, "dp", "--env", '{"type": "no_learning", "arms": [{"support": [1, -1], "probs": [0.6, 0.4]}]}', "--n", "2")[0] == 2


def test_unknown_flag_rejected(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["dp", "--bogus"])
    assert exc.value.code == 2


def test_density_and_sample(capsys):
    code, out, _ = run(capsys, "density", "--sigma-low", "0.5", "--sigma-high", "1", "--y-min", "-1", "--y-max", "1", "--points", "3")
    lines = out.strip().splitlines()
    assert code == 0 and lines[0] == "y,q" and len(lines) == 4
    assert float(lines[2].split(",")[1]) == pytest.approx(1.063846, abs=1e-6)
    code, out, _ = run(capsys, "obm-sample", "--sigma-low", "0.5", "--sigma-high", "1", "--n-steps", "4", "--seed", "3")
    lines = out.strip().splitlines()
    assert lines[0] == "t,W_t" and len(lines) == 6 and lines[1] == "0.0,0.0"


def test_seed_env_override(capsys, monkeypatch):
    args = ("obm-sample", "--sigma-low", "0.5", "--sigma-high", "1", "--n-steps", "5")
    _, a, _ = run(capsys, *args, "--seed", "1")
    monkeypatch.setenv("BANDIT_SEED", "1")
    _, b, _ = run(capsys, *args, "--seed", "99")
    assert a == b


def test_simulate(capsys, files, tmp_path):
    per = tmp_path / "reps.csv"
    code, out, _ = run(capsys, "simulate", "--env", files["ref"], "--strategy", "s_star", "--n", "20", "--reps", "50", "--seed", "2", "--persistence-N", "5", "--per-rep-csv", str(per))
    d = json.loads(out)
    assert code == 0 and d["reps"] == 50 and d["persistence_window"] == [5, 20]
    assert len(per.read_text().splitlines()) == 51


def test_posterior(capsys, files):
    code, out, _ = run(capsys, "posterior", "--env", files["two"], "--n", "100", "--reps", "100")
    d = json.loads(out)
    assert code == 0 and 0 <= d["consistent_fraction"] <= 1
    assert run(capsys, "posterior", "--env", files["ref"], "--n", "10", "--reps", "10")[0] == 2


def test_converge(capsys, files):
    code, out, _ = run(capsys, "converge", "--env", files["ref"], "--n-grid", "16..256")
    d = json.loads(out)
    assert code == 0 and [r["n"] for r in d["rows"]] == [16, 32, 64, 128, 256]
    assert -1.2 <= d["slope"] <= -0.3
    assert run(capsys, "converge", "--env", files["ref"], "--n-grid", "5..2")[0] == 2
    code, out, err = run(capsys, "converge", "--env", files["ref"], "--n-grid", "4,8", "--format", "csv")
    assert out.splitlines()[0] == "n,V_n,V_n_minus_V,V" and "slope" in err


def test_byte_identical(files, tmp_path):
    cmd = [sys.executable, "-m", "lossbandit", "simulate", "--env", files["two"], "--strategy", "s_star_learning", "--n", "15", "--reps", "200"]
    a = subprocess.run(cmd, capture_output=True, check=True).stdout
    b = subprocess.run(cmd, capture_output=True, check=True).stdout
    assert a == b
    cmd = [sys.executable, "-m", "lossbandit", "dp", "--env", files["ref"], "--n", "30", "--no-runtime"]
    assert subprocess.run(cmd, capture_output=True).stdout == subprocess.run(cmd, capture_output=True).stdout


def test_help_lists_every_flag():
    parser = build_parser()
    sub = next(a for a in parser._actions if a.dest == "command")
    for name, sp in sub.choices.items():
        text = sp.format_help()
        for action in sp._actions:
            for opt in action.option_strings:
                assert opt in text, (name, opt)
    out = subprocess.run([sys.executable, "-m", "lossbandit", "--help"], capture_output=True, text=True)
    assert out.returncode == 0 and "converge" in out.stdout


def test_internal_error_exit_code(capsys, monkeypatch):
    import lossbandit.cli as cli

    def boom(args):
        raise RuntimeError("boom")

    monkeypatch.setattr(cli, "cmd_density", boom)
    parser = cli.build_parser
    monkeypatch.setattr(cli, "build_parser", lambda: _patched(parser(), boom))
    assert run(capsys, "density", "--sigma-low", "1", "--sigma-high", "1")[0] == 1


def _patched(parser, func):
    sub = next(a for a in parser._actions if a.dest == "command")
    sub.choices["density"].set_defaults(func=func)
    return parser
