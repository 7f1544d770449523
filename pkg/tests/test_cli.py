import csv
import io
import json
import subprocess
import sys

import pytest

from xlris.cli import main
from xlris.dictionary import CACHE_ENV

SMALL = ["--ris-ny", "16", "--ris-nz", "2", "--user-ny", "2", "--user-nz", "2", "--bs-ny", "4", "--bs-nz", "4",
         "--K", "4", "--P", "2", "--Q", "16", "--n-x", "8", "--g-r-z", "8", "--g-u-y", "8", "--g-u-z", "8",
         "--trials", "2"]


def test_trajectory_to_stdout(capsys):
    assert main(["trajectory", "--desired", "45", "45", "20", "--ris-ny", "256", "--ris-nz", "4", "--K", "32",
                 "--f-s", "4e9"]) == 0
    rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    assert len(rows) == 32
    assert abs(float(rows[0]["theta_deg"]) - 40.56) < 0.5


def test_run_writes_csv_and_manifest(tmp_path, capsys):
    assert main(["run", "nmse_vs_Q", "--values", "16", "--methods", "2D-OLS,CC-MMPSR",
                 "--out", str(tmp_path), *SMALL]) == 0
    rows = list(csv.DictReader(open(tmp_path / "nmse_vs_Q.csv")))
    assert [r["method"] for r in rows] == ["2D-OLS", "CC-MMPSR"] and rows[0]["value"] == "16"
    man = json.loads((tmp_path / "nmse_vs_Q.json").read_text())
    assert man["config"]["ris_ny"] == 16 and man["spec"]["values"] == [16]


@pytest.mark.parametrize("suffix", [".json", ".toml"])
def test_config_file_and_flag_override(tmp_path, capsys, suffix):
    path = tmp_path / f"cfg{suffix}"
    if suffix == ".json":
        path.write_text(json.dumps({"ris_ny": 16, "ris_nz": 2, "K": 8, "f_s": 1e9}))
    else:
        path.write_text("ris_ny = 16\nris_nz = 2\nK = 8\nf_s = 1e9\n")
    assert main(["trajectory", "--config", str(path), "--K", "3"]) == 0
    rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    assert len(rows) == 3


def test_gain_curve(tmp_path):
    out = tmp_path / "g.csv"
    assert main(["gain-curve", "--sizes", "16,32", "--distances", "5,50", "--draws", "20",
                 "--output", str(out), *SMALL]) == 0
    rows = list(csv.DictReader(open(out)))
    assert len(rows) == 4 and {r["ris_ny"] for r in rows} == {"16", "32"}


def test_dict_build_uses_cache_env(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv(CACHE_ENV, str(tmp_path))
    assert main(["dict", "build", "--output", str(tmp_path / "d.npz"), *SMALL]) == 0
    assert "G_R=" in capsys.readouterr().out
    assert list(tmp_path.glob("spherical_*.npz")) and (tmp_path / "d.npz").exists()


def test_errors_exit_nonzero(tmp_path, capsys):
    assert main(["run", "nmse_vs_Q", "--values", "16", "--methods", "MUSIC", *SMALL]) == 2
    assert "xlris: error:" in capsys.readouterr().err
    assert main(["run", "nmse_vs_Q", "--values", "16", "--methods", "CC-MMPSR", *SMALL, "--P", "0"]) == 2
    assert "xlris: error:" in capsys.readouterr().err
    assert main(["trajectory", "--config", str(tmp_path / "missing.toml")]) == 2
    with pytest.raises(SystemExit) as e:
        main(["run", "not_an_experiment"])
    assert e.value.code != 0


def test_console_entry_point():
    res = subprocess.run([sys.executable, "-m", "xlris.cli", "trajectory", "--K", "2", "--ris-ny", "16"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.count("\n") == 3
