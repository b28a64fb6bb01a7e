import csv
import io
import json

import pytest

from n3il.cli import main
from n3il.model import build_model, parse_model
from n3il.portfolio import read_runs_csv
from n3il.verify import read_config, verify


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_sizes_small_table(capsys):
    code, out, _ = run(capsys, "sizes", "--from", "2", "--to", "5")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[1:] == [["2", "4", "1", "2", "2"], ["3", "9", "2", "8", "3"], ["4", "16", "4", "14", "6"],
                        ["5", "25", "6", "32", "12"]]


def test_verify_bundled_fixture(capsys):
    code, out, _ = run(capsys, "verify", "--fixture", "60", "--expect-2n", "--two-per-line")
    assert code == 0 and "pass" in out and "120 points" in out


def test_solve_n3(capsys, tmp_path):
    sol = tmp_path / "s.json"
    code, out, _ = run(capsys, "solve", "--n", "3", "--seed", "1", "--out", str(sol))
    assert code == 0
    config, _ = read_config(sol)
    assert verify(config, 6)
    assert out.splitlines()[-1] == " ".join(f"({i},{j})" for i, j in sorted(config.points))
    assert run(capsys, "verify", "--in", str(sol), "--expect-2n")[0] == 0


def test_solve_is_reproducible(capsys, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    run(capsys, "solve", "--n", "14", "--reduced", "--seed", "9", "--out", str(a))
    run(capsys, "solve", "--n", "14", "--reduced", "--seed", "9", "--out", str(b))
    assert a.read_text() == b.read_text()
    _, reps = read_config(a)
    assert reps is not None and len(reps.reps) == 7


def test_solve_timeout_exit_code(capsys, tmp_path):
    code, out, _ = run(capsys, "solve", "--n", "16", "--timeout", "0.02", "--out", str(tmp_path / "x.json"))
    assert code == 2 and "timeout" in out


@pytest.mark.parametrize("fmt", ["opb", "text"])
def test_gen_round_trip(capsys, tmp_path, fmt):
    path = tmp_path / f"m.{fmt}"
    assert run(capsys, "gen", "--n", "7", "--reduced", "--format", fmt, "--out", str(path))[0] == 0
    assert parse_model(path.read_bytes()) == build_model(7, True)


def test_expand_then_verify(capsys, tmp_path):
    path = tmp_path / "e.json"
    assert run(capsys, "expand", "--fixture", "47", "--out", str(path))[0] == 0
    code, out, _ = run(capsys, "verify", "--in", str(path), "--expect-2n", "--brute")
    assert code == 0 and "94 points" in out
    reps_only = tmp_path / "r.json"
    doc = json.loads(path.read_text())
    del doc["points"]
    reps_only.write_text(json.dumps(doc))
    out2 = tmp_path / "e2.json"
    assert run(capsys, "expand", "--in", str(reps_only), "--out", str(out2))[0] == 0
    assert out2.read_text() == path.read_text()


def test_verify_failure_exit_code(capsys, tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"format": "n3il-config/1", "n": 3, "points": [[0, 0], [1, 1], [2, 2]]}))
    code, out, _ = run(capsys, "verify", "--in", str(path))
    assert code == 1 and "collinear" in out


def test_race_and_record(capsys, tmp_path):
    rec = tmp_path / "rec.json"
    code, out, _ = run(capsys, "race", "--n", "10", "--reduced", "-M", "3", "--seed-base", "4",
                       "--record", str(rec), "--out", str(tmp_path / "sol.json"))
    assert code == 0 and "winner" in out
    assert json.loads(rec.read_text())["M"] == 3
    config, _ = read_config(tmp_path / "sol.json")
    assert verify(config, 20, two_per_line=True)


def test_cdf_then_fit(capsys, tmp_path):
    path = tmp_path / "runs.csv"
    code, _, _ = run(capsys, "cdf", "--n", "12", "--reduced", "--runs", "60", "--cutoff", "10", "--workers", "1",
                     "--out", str(path))
    assert code == 0 and len(read_runs_csv(path)) == 60
    code, out, _ = run(capsys, "fit", "--in", str(path), "-M", "2")
    assert code == 0
    header, values = list(csv.reader(io.StringIO(out)))
    assert header == ["t0", "t1", "mean", "t_0.5", "t_0.98"]
    assert float(values[1]) > 0


def test_stats_and_oracle(capsys):
    code, out, _ = run(capsys, "stats", "--n", "492", "493")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and float(rows[0]["logC"]) >= 0 > float(rows[1]["logC"])
    code, out, _ = run(capsys, "oracle", "--n", "4")
    assert code == 0 and "formula=44 brute_force=44" in out and "D(4)=8" in out


@pytest.mark.parametrize("argv", [
    ["solve", "--n", "3", "--bogus"],
    ["solve", "--n", "1"],
    ["solve", "--n", "3", "--timeout", "-1"],
    ["verify", "--in", "/nonexistent/file.json"],
    ["sizes", "--from", "5", "--to", "3"],
    ["fit", "--in", "x.csv", "-M", "4", "--window-p", "1.5"],
    ["expand", "--fixture", "48", "--out", "x.json"],
    ["frobnicate"],
])
def test_bad_invocations_exit_1(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 1
    assert err.strip()


def test_malformed_config_exit_1(capsys, tmp_path):
    path = tmp_path / "m.json"
    path.write_text("{not json")
    code, _, err = run(capsys, "verify", "--in", str(path))
    assert code == 1 and "error" in err
