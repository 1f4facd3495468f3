import csv
import io
import json
import math
import subprocess
import sys

import numpy as np
import pytest

import laststop.valuefn as vf
from laststop.cli import main

E = math.exp(-1)


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def parse_csv(text):
    body = [ln for ln in text.splitlines() if not ln.startswith("#")]
    rows = list(csv.reader(io.StringIO("\n".join(body))))
    return rows[0], rows[1:]


def test_roots_reference_values(capsys):
    code, out, _ = run(capsys, "roots", "--theta", "2", "--nu", "5", "--kmax", "10")
    assert code == 0
    head, rows = parse_csv(out)
    assert head == ["k", "alpha_k", "a_k"]
    assert rows[0][:2] == ["1", "0.216390"]
    assert len(rows) == 11 and rows[-1][0] == "inf" and rows[-1][1] == "0.393469"
    assert "# monotonicity: increasing" in out

    _, out, _ = run(capsys, "roots", "--theta", "1.5", "--nu", "1", "--kmax", "1")
    assert parse_csv(out)[1][0][1] == "0.568837"


def test_roots_constant_column(capsys):
    _, out, _ = run(capsys, "roots", "--theta", "3", "--nu", "3")
    _, rows = parse_csv(out)
    want = f"{1 - math.exp(-1 / 3):.6f}"
    assert {r[1] for r in rows} == {want}
    assert "# monotonicity: constant" in out


def test_every_csv_number_has_six_decimals(capsys):
    _, out, _ = run(capsys, "roots", "--theta", "2", "--nu", "5", "--kmax", "5")
    _, rows = parse_csv(out)
    for r in rows:
        for cell in r[1:]:
            assert len(cell.split(".")[1]) == 6


def test_json_keeps_full_precision(capsys):
    _, out, _ = run(capsys, "roots", "--theta", "2", "--nu", "5", "--kmax", "3", "--format", "json")
    doc = json.loads(out)
    assert doc["table"] == "roots" and doc["columns"] == ["k", "alpha_k", "a_k"]
    assert doc["rows"][0][1] == pytest.approx(0.216390, abs=1e-6)
    assert doc["rows"][0][1] != round(doc["rows"][0][1], 6)


def test_threshold(capsys):
    _, out, _ = run(capsys, "threshold", "--theta", "1", "--n", "10", "1000")
    head, rows = parse_csv(out)
    assert head == ["n", "k_n", "k_n_over_n", "win_prob"]
    assert rows[0][:2] == ["10", "3"]
    assert abs(float(rows[1][2]) - E) < 2e-3


def test_winprob_columns(capsys):
    code, out, _ = run(
        capsys, "winprob", "--theta", "1", "--nu", "1", "--qgrid", "0", "0.7", "0.9", "--reps", "0"
    )
    assert code == 0
    head, rows = parse_csv(out)
    assert head == ["q", "win_prob", "win_prob_v2", "mc_estimate", "mc_se"]
    assert float(rows[0][1]) == 0.0
    for r in rows[1:]:
        assert abs(float(r[1]) - E) < 1e-6 and abs(float(r[1]) - float(r[2])) < 1e-6


def test_winprob_with_simulation(capsys):
    _, out, _ = run(
        capsys, "winprob", "--theta", "2", "--nu", "5", "--qgrid", "0.5", "--reps", "100000",
        "--format", "json",
    )
    row = json.loads(out)["rows"][0]
    q, wp, wp2, est, se = row
    assert abs(wp - wp2) < 1e-6
    assert abs(est - wp) <= 3 * se


def test_winprob_small_nu_routes_to_simulation(capsys):
    _, out, _ = run(
        capsys, "winprob", "--theta", "1.5", "--nu", "1", "--qgrid", "0.6", "--reps", "10000",
        "--format", "json",
    )
    doc = json.loads(out)
    assert "Monte Carlo only" in doc["meta"]["note"]
    q, wp, wp2, est, se = doc["rows"][0]
    assert wp is None and wp2 is None and 0 < est < 1


def test_winprob_strategy_file(tmp_path, capsys):
    f = tmp_path / "cut.txt"
    f.write_text("0.6, 0.5\n0.4\n")
    _, out, _ = run(capsys, "winprob", "--strategy", f"file:{f}", "--qgrid", "0.5", "--reps", "0",
                    "--theta", "2", "--nu", "3")
    _, rows = parse_csv(out)
    assert abs(float(rows[0][1]) - float(rows[0][2])) < 1e-6


def test_value_output(capsys):
    code, out, _ = run(capsys, "value", "--theta", "2", "--nu", "5", "--grid-step", "1e-3",
                       "--kmax", "120", "--kshow", "3", "--x-stride", "1", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["columns"] == ["x", "k", "V", "W0", "W1", "in_C"]
    rows = np.array([[r[0], r[1], r[2], r[5]] for r in doc["rows"]], dtype=float)
    assert np.all(rows[rows[:, 0] == 0.0][:, 2] == 0.0)
    alpha = {1: 0.216390, 2: 0.249979, 3: 0.273297}
    for k, a in alpha.items():
        sub = rows[rows[:, 1] == k]
        edge = sub[sub[:, 3] == 1.0][:, 0].max()
        assert abs(edge - a) <= 2e-3


def test_value_stops_greedily_below_alpha_star(capsys):
    _, out, _ = run(capsys, "value", "--theta", "1.5", "--nu", "1", "--grid-step", "1e-3",
                    "--kmax", "120", "--kshow", "6", "--x-stride", "1", "--format", "json")
    rows = json.loads(out)["rows"]
    a_star = 1 - math.exp(-1 / 1.5)
    assert all(r[5] for r in rows if r[1] >= 1 and r[0] <= a_star)


def test_simulate_command(capsys):
    _, out, _ = run(capsys, "simulate", "--theta", "1", "--nu", "1", "--q", "0.9",
                    "--reps", "20000", "--format", "json")
    reps, wins, est, se, exact = json.loads(out)["rows"][0]
    assert reps == 20000 and est == wins / reps
    assert abs(exact - E) < 1e-6 and abs(est - exact) <= 3 * se


def test_figures(tmp_path, capsys):
    args = ["--theta", "2", "--nu", "5", "--q", "0.9", "--qgrid", "0", "0.5", "0.9",
            "--reps", "10000", "--seed", "4", "--grid-step", "1e-3", "--kmax", "120"]
    d = tmp_path / "figs"
    assert main(["figures", *args, "--out", str(d)]) == 0
    assert sorted(p.name for p in d.iterdir()) == ["fig1.csv", "fig2.csv", "fig3.csv", "fig4.csv"]

    _, rows = parse_csv((d / "fig1.csv").read_text())
    r = np.array([[float(c) for c in row] for row in rows if row[1] == "1"])
    diff = r[:, 2] - r[:, 3]
    i = np.flatnonzero(np.sign(diff[:-1]) != np.sign(diff[1:]))
    assert i.size == 1
    x0 = r[i[0], 0] - diff[i[0]] * (r[i[0] + 1, 0] - r[i[0], 0]) / (diff[i[0] + 1] - diff[i[0]])
    assert abs(x0 - 0.216390) < 1e-4

    _, rows = parse_csv((d / "fig2.csv").read_text())
    for k in ("0", "1", "5"):
        w1 = np.array([float(row[4]) for row in rows if row[2] == k])
        s = np.sign(np.diff(w1))
        s = s[s != 0]
        assert np.count_nonzero(s[:-1] != s[1:]) == 1

    wp = tmp_path / "wp.csv"
    assert main(["winprob", *args, "--out", str(wp)]) == 0
    assert wp.read_bytes() == (d / "fig3.csv").read_bytes()


def test_identical_runs_are_byte_identical(tmp_path):
    args = ["winprob", "--theta", "2", "--nu", "5", "--qgrid", "0.5", "0.8", "--reps", "20000",
            "--seed", "9"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main([*args, "--out", str(a)]) == 0
    assert main([*args, "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


@pytest.mark.parametrize(
    "argv",
    [
        ["roots", "--theta", "-1"],
        ["roots", "--q", "1.0"],
        ["roots", "--kmax", "0"],
        ["winprob", "--reps", "50"],
        ["winprob", "--strategy", "bogus", "--reps", "0", "--qgrid", "0.5"],
        ["winprob", "--strategy", "file:/no/such/file", "--reps", "0", "--qgrid", "0.5"],
        ["value", "--grid-step", "0.01"],
        ["threshold", "--n", "0"],
    ],
)
def test_bad_input_exit_code(argv, capsys):
    code, _, err = run(capsys, *argv)
    assert code == 2 and "error" in err


def test_argparse_rejections_exit_with_two():
    with pytest.raises(SystemExit) as exc:
        main(["winprob", "--qgrid", "1.5"])
    assert exc.value.code == 2


def test_numerical_failure_exit_code(monkeypatch, capsys):
    monkeypatch.setattr(vf, "RICHARDSON_TOL", 1e-16)
    code, _, err = run(capsys, "value", "--grid-step", "1e-3", "--kmax", "40")
    assert code == 3 and "numerical failure" in err


def test_module_entry_point():
    res = subprocess.run(
        [sys.executable, "-m", "laststop", "roots", "--theta", "2", "--nu", "5", "--kmax", "2"],
        capture_output=True, text=True, check=False,
    )
    assert res.returncode == 0 and "0.216390" in res.stdout
