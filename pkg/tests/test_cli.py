import csv
import json

import numpy as np
import pytest

from latticetail.cli import main, read_ccdf
from latticetail.montecarlo import TrialConfig, fit_tail, run_trials


def write_json(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


@pytest.fixture
def config(tmp_path):
    return write_json(tmp_path / "cfg.json", {"n": 2, "m": 2, "snr_db": 15, "p_find": 0.99,
                                              "trials": 1000, "seed": 7, "method": "qrd"})


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_simulate_writes_three_files(tmp_path, config, capsys):
    out = tmp_path / "out"
    code, stdout, _ = run(["simulate", "--config", config, "--out-dir", str(out)], capsys)
    assert code == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["found_fraction"] >= 0.97
    assert manifest["config"]["seed"] == 7 and manifest["version"]
    assert sorted(p.name for p in out.iterdir()) == ["ccdf.csv", "manifest.json", "samples.csv"]
    with open(out / "samples.csv", newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["trial", "found", "censored", "S_total", "S_1", "S_2"]
    assert len(rows) == 1001
    assert all(int(r[3]) == int(r[4]) + int(r[5]) for r in rows[1:])
    assert (out / "ccdf.csv").read_text().startswith("L,p\n1,")


def test_simulate_single_trial(tmp_path, config, capsys):
    out = tmp_path / "one"
    code, _, _ = run(["simulate", "--config", config, "--out-dir", str(out), "--trials", "1"],
                     capsys)
    assert code == 0
    assert len((out / "samples.csv").read_text().splitlines()) == 2


def test_missing_key_is_config_error(tmp_path, capsys):
    cfg = write_json(tmp_path / "bad.json", {"n": 2, "snr_db": 15, "trials": 10, "seed": 1})
    code, _, err = run(["simulate", "--config", cfg, "--out-dir", str(tmp_path)], capsys)
    assert code == 2 and "m" in err


def test_unknown_key_is_config_error(tmp_path, capsys):
    cfg = write_json(tmp_path / "bad.json", {"n": 2, "m": 2, "snr_db": 15, "trials": 10,
                                             "seed": 1, "tirals": 5})
    code, _, err = run(["simulate", "--config", cfg], capsys)
    assert code == 2 and "tirals" in err


def test_unreadable_config_is_io_error(tmp_path, capsys):
    code, _, _ = run(["simulate", "--config", str(tmp_path / "nope.json")], capsys)
    assert code == 3


def test_unwritable_out_dir_is_io_error(tmp_path, config, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    code, _, _ = run(["simulate", "--config", config, "--out-dir", str(blocker / "sub")], capsys)
    assert code == 3


def test_fit_round_trip_is_bit_identical(tmp_path, config, capsys):
    out = tmp_path / "out"
    run(["simulate", "--config", config, "--out-dir", str(out), "--trials", "3000"], capsys)
    code, stdout, _ = run(["fit", str(out / "ccdf.csv")], capsys)
    in_process = run_trials(TrialConfig(n=2, m=2, snr_db=15, trials=3000, seed=7)).fit()
    assert json.loads(stdout)["exponent"] == in_process.exponent
    assert code == (0 if in_process.reliable else 4)


def test_fit_synthetic_inverse_square(tmp_path, capsys):
    L = np.unique(np.round(np.logspace(0, 3, 100)))
    path = tmp_path / "ccdf.csv"
    path.write_text("L,p\n" + "".join(f"{int(x)},{float(x) ** -2.0!r}\n" for x in L))
    code, stdout, _ = run(["fit", str(path)], capsys)
    assert code == 0 and round(json.loads(stdout)["exponent"], 3) == 2.0
    assert fit_tail(read_ccdf(path)).exponent == json.loads(stdout)["exponent"]


def test_fit_too_few_points_exit_4(tmp_path, capsys):
    path = tmp_path / "ccdf.csv"
    path.write_text("L,p\n1,1.0\n10,0.1\n100,0.01\n")
    code, stdout, _ = run(["fit", str(path)], capsys)
    assert code == 4 and json.loads(stdout)["reliable"] is False


def test_fit_schema_violation(tmp_path, capsys):
    path = tmp_path / "ccdf.csv"
    path.write_text("threshold,prob\n1,1.0\n")
    assert run(["fit", str(path)], capsys)[0] == 2
    path.write_text("L,p\n1,1.0\n2,abc\n")
    assert run(["fit", str(path)], capsys)[0] == 2


def test_verify_default_config(tmp_path, config, capsys):
    code, stdout, _ = run(["verify", "--config", config], capsys)
    report = json.loads(stdout)
    assert code == 0 and report["deterministic_ok"]
    assert report["conditions"]["checks"]["homogeneity"]["passed"]
    assert all(v["passed"] for v in report["preprocessing"].values())


def test_decode_identity(tmp_path, capsys):
    h = write_json(tmp_path / "h.json", [[[1, 0], [0, 0]], [[0, 0], [1, 0]]])
    r = write_json(tmp_path / "r.json", [[3, 4], [-2, 0]])
    code, stdout, _ = run(["decode", h, r, "--rho", "0.5"], capsys)
    res = json.loads(stdout)
    assert code == 0 and res["solution"] == [[3, 4], [-2, 0]] and res["total"] == 2


def test_decode_not_found(tmp_path, capsys):
    h = write_json(tmp_path / "h.json", [[[1, 0]]])
    r = write_json(tmp_path / "r.json", [[0.5, 0.5]])
    code, stdout, _ = run(["decode", h, r, "--rho", "0.1"], capsys)
    res = json.loads(stdout)
    assert code == 0 and res["found"] is False and res["solution"] is None


@pytest.mark.parametrize("method", ["qrd", "lll", "vblast"])
def test_decode_methods(tmp_path, capsys, method):
    h = write_json(tmp_path / "h.json", [[[1, 0], [0.3, 0.1]], [[0.2, -0.4], [0.9, 0]]])
    r = write_json(tmp_path / "r.json", [[1.3, 0.1], [1.1, -0.4]])
    code, stdout, _ = run(["decode", h, r, "--rho", "0.3", "--method", method], capsys)
    assert code == 0 and json.loads(stdout)["solution"] == [[1, 0], [1, 0]]


def test_decode_errors(tmp_path, capsys):
    h = write_json(tmp_path / "h.json", [[[1, 0], [0, 0]], [[0, 0], [1, 0]]])
    r = write_json(tmp_path / "r.json", [[1, 0]])
    assert run(["decode", h, r, "--rho", "0.5"], capsys)[0] == 2
    singular = write_json(tmp_path / "s.json", [[[1, 0], [2, 0]], [[2, 0], [4, 0]]])
    r2 = write_json(tmp_path / "r2.json", [[1, 0], [0, 0]])
    code, _, err = run(["decode", singular, r2, "--rho", "0.5"], capsys)
    assert code != 0 and "rank" in err.lower()
