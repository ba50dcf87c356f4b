import csv
import json
import math
import subprocess
import sys

import pytest

from elliptic_picard.cli import EXIT_CHECKS_FAILED, EXIT_CONFIG, EXIT_OK, EXIT_REFUSED, load_config, main
from elliptic_picard.errors import ConfigError
from elliptic_picard.grid import build_interval_grid
from elliptic_picard.operators import assemble_operator
from elliptic_picard.spectral import smallest_eigenvalue


def write_config(tmp_path, config, name="run.json"):
    path = tmp_path / name
    path.write_text(json.dumps(config, indent=2))
    return path


def run(tmp_path, config, *extra, out="out"):
    path = write_config(tmp_path, config)
    code = main(["--config", str(path), "--out", str(tmp_path / out), *extra])
    return code, tmp_path / out


def read_csv(path):
    with path.open() as fh:
        return list(csv.DictReader(fh))


def test_zero_solve(tmp_path):
    code, out = run(tmp_path, {"command": "solve", "problem": {"chart": {"kind": "interval", "n": 15}}})
    assert code == EXIT_OK
    report = json.loads((out / "report.json").read_text())
    assert report["converged"] is True and report["iterations"] == 1
    rows = read_csv(out / "solution.csv")
    assert list(rows[0]) == ["x", "re", "im"]
    assert len(rows) == 17
    assert all(float(r["re"]) == 0 and float(r["im"]) == 0 for r in rows)
    assert (out / "steps.csv").read_text().splitlines()[0] == "k,energy_diff,ratio"


def test_eigen_interval(tmp_path):
    config = {"command": "eigen", "problem": {"chart": {"kind": "interval", "n": 511}}}
    code, out = run(tmp_path, config)
    assert code == EXIT_OK
    lam = json.loads((out / "spectral.json").read_text())["lambda1"]
    assert abs(lam - 9.8696) / 9.8696 < 0.01


def test_refusal_exit_code(tmp_path):
    config = {
        "command": "solve",
        "problem": {"chart": {"kind": "interval", "n": 31}, "nonlinearity": {"kind": "linear", "a": 12.0}},
    }
    code, out = run(tmp_path, config)
    assert code == EXIT_REFUSED
    report = json.loads((out / "report.json").read_text())
    assert report["refused"] is True and report["iterations"] == 0
    assert not (out / "solution.csv").exists()


def test_sweep_marks_refused_rows(tmp_path):
    values = [10.0, 1.0, 4.0, 6.5, 7.5]
    config = {
        "command": "sweep",
        "problem": {
            "chart": {"kind": "interval", "n": 63},
            "forcing": {"catalog": "sin_pi_x", "scale": [1, 1]},
            "nonlinearity": {"kind": "phase", "alpha": 1.0},
        },
        "sweep": {"parameter": "alpha", "values": values, "workers": 3},
    }
    code, out = run(tmp_path, config)
    assert code == EXIT_OK
    rows = read_csv(out / "sweep.csv")
    assert list(rows[0]) == ["parameter", "rho", "iterations", "converged", "max_ratio"]
    lam = smallest_eigenvalue(assemble_operator(build_interval_grid(63))).lambda1
    assert [float(r["parameter"]) for r in rows] == sorted(values)
    for r in rows:
        alpha = float(r["parameter"])
        rho = alpha * math.sqrt(2) / lam
        assert float(r["rho"]) == pytest.approx(rho, rel=1e-12)
        if rho >= 1:
            assert r["converged"] == "refused" and r["iterations"] == "0"
        else:
            assert r["converged"] == "true"
            assert float(r["max_ratio"]) <= 1.1 * rho + 1e-8


def test_verify_command(tmp_path):
    code, out = run(tmp_path, {"command": "verify", "verify": {"trials": 10}})
    results = json.loads((out / "verify.json").read_text())
    assert {r["check_name"] for r in results} >= {"check_young", "decompose_mean_zero"}
    expected = EXIT_OK if all(r["pass"] for r in results) else EXIT_CHECKS_FAILED
    assert code == expected


@pytest.mark.parametrize(
    "config,fragment",
    [
        ({"command": "solve"}, "'problem' is a required property"),
        ({"command": "solve", "problem": {"chart": {"kind": "interval", "n": 0}}}, "problem.chart.n"),
        ({"command": "solve", "problem": {"chart": {"kind": "interval", "n": 3}}, "extra": 1}, "extra"),
        ({"command": "dance"}, "command"),
        ({"command": "solve", "problem": {"chart": {"kind": "metric_band", "n": 3, "theta_min": 0.0,
                                                    "theta_max": 1.0}}}, "pole"),
        ({"command": "solve", "problem": {"chart": {"kind": "interval", "n": 3},
                                          "forcing": {"values": [1, 2]}}}, "expected 3"),
    ],
)
def test_config_errors(tmp_path, capsys, config, fragment):
    code, _ = run(tmp_path, config)
    assert code == EXIT_CONFIG
    assert fragment in capsys.readouterr().err


def test_error_message_points_at_line(tmp_path):
    text = '{\n  "command": "solve",\n  "problem": {\n    "chart": {"kind": "interval", "n": -2}\n  }\n}\n'
    path = tmp_path / "bad.json"
    path.write_text(text)
    with pytest.raises(ConfigError, match=r"bad\.json:4: problem\.chart\.n"):
        load_config(path)
    path.write_text('{"command": \n  "solve",,}')
    with pytest.raises(ConfigError, match=r"bad\.json:2: invalid JSON"):
        load_config(path)


def test_understated_constant_is_config_error(tmp_path):
    config = {
        "command": "solve",
        "problem": {
            "chart": {"kind": "interval", "n": 31},
            "forcing": {"catalog": "sin_pi_x"},
            "nonlinearity": {"kind": "saturating", "alpha": 3.0, "c1": 1.0},
        },
    }
    assert run(tmp_path, config)[0] == EXIT_CONFIG


def test_dirichlet_data_and_standing_wave(tmp_path):
    config = {
        "command": "solve",
        "problem": {
            "chart": {"kind": "interval", "n": 63},
            "standing_wave": "schrodinger",
            "xi": 4.0,
            "boundary": {"ends": [0, math.sinh(2.0)]},
        },
    }
    code, out = run(tmp_path, config)
    assert code == EXIT_OK
    rows = read_csv(out / "solution.csv")
    for r in rows:
        assert float(r["re"]) == pytest.approx(math.sinh(2 * float(r["x"])), abs=1e-3)


def test_manufactured_band_and_dump_matrix(tmp_path):
    config = {
        "command": "solve",
        "problem": {
            "chart": {"kind": "metric_band", "n": 31, "theta_min": 0.5235987755982988, "theta_max": 1.5707963267948966},
            "bc": "dirichlet_data",
            "forcing": {"manufactured": "cos_theta"},
            "boundary": {"manufactured": "cos_theta"},
            "nonlinearity": {"kind": "saturating", "alpha": 1.0},
        },
    }
    code, out = run(tmp_path, config, "--dump-matrix")
    assert code == EXIT_OK
    assert (out / "operator.mtx").read_text().startswith("%%MatrixMarket")
    rows = read_csv(out / "solution.csv")
    assert list(rows[0]) == ["theta", "re", "im"]
    assert max(abs(float(r["re"]) - math.cos(float(r["theta"]))) for r in rows) < 1e-3


def test_outputs_are_byte_identical(tmp_path):
    config = {
        "command": "solve",
        "seed": 5,
        "problem": {
            "chart": {"kind": "rectangle", "nx": 9, "ny": 7},
            "forcing": {"catalog": "sin_pi_xy", "scale": [2, -1]},
            "nonlinearity": {"kind": "phase", "alpha": 3.0},
        },
    }
    _, a = run(tmp_path, config, out="a")
    _, b = run(tmp_path, config, out="b")
    for name in ("solution.csv", "report.json", "steps.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_module_entry_point(tmp_path):
    path = write_config(tmp_path, {"command": "eigen", "problem": {"chart": {"kind": "interval", "n": 7}}})
    proc = subprocess.run(
        [sys.executable, "-m", "elliptic_picard", "--config", str(path), "--out", str(tmp_path / "o")],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "o" / "spectral.json").exists()
