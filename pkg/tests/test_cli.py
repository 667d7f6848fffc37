import json
import os

import numpy as np
import pytest

from gfra.experiments.cli import main
from gfra.multiplicity import Dataset
from gfra.scene import Deployment

SMALL = """rows = 4
cols = 4
q_samples = 1500
max_epochs = 5
hidden_sizes = 8
trials = 6
m_c_list = 1,2
asym_grid_sides = 3,6
asym_trials = 20
"""


@pytest.fixture
def cfg(tmp_path):
    p = tmp_path / "small.cfg"
    p.write_text(SMALL)
    return str(p)


def run(args, capsys):
    code = main(args)
    return code, capsys.readouterr().err.strip()


def test_gen_data(cfg, tmp_path, capsys):
    out = tmp_path / "gen"
    code, _ = run(["gen-data", "--config", cfg, "--seed", "4", "--out", str(out)], capsys)
    assert code == 0
    ds = Dataset.from_csv(out / "dataset.csv")
    assert len(ds) == 1500 and ds.n_aps == 16
    assert Deployment.from_csv(out / "deployment.csv").n_aps == 16
    man = json.loads((out / "manifest.json").read_text())
    assert man["seed"] == 4 and len(man["config_hash"]) == 64 and "numpy" in man["versions"]


def test_train_then_rates_with_saved_model(cfg, tmp_path, capsys):
    out = tmp_path / "train"
    assert run(["train", "--config", cfg, "--out", str(out)], capsys)[0] == 0
    assert (out / "model.bin").exists() and (out / "ted.txt").exists()
    cfg2 = tmp_path / "rates.cfg"
    cfg2.write_text(SMALL + f"model_file = {out / 'model.bin'}\nted_file = {out / 'ted.txt'}\n")
    code, err = run(["rates", "--config", str(cfg2), "--out", str(tmp_path / "r")], capsys)
    assert code == 0, err
    lines = (tmp_path / "r" / "rate_summary.csv").read_text().splitlines()
    assert lines[0].startswith("scheme,m_c") and len(lines) == 1 + 5 + 2


def test_confusion_and_asymptotic(cfg, tmp_path, capsys):
    out = tmp_path / "c"
    assert run(["confusion", "--config", cfg, "--out", str(out)], capsys)[0] == 0
    cm = np.loadtxt(out / "dnn_confusion.csv", delimiter=",", skiprows=1)[:, 1:]
    np.testing.assert_allclose(cm.sum(1)[cm.sum(1) > 0], 1.0, atol=1e-5)
    assert run(["asymptotic", "--config", cfg, "--out", str(out)], capsys)[0] == 0
    assert (out / "asymptotic.csv").read_text().startswith("M,empirical_sinr")


def test_error_categories(cfg, tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text("colour = red\n")
    code, err = run(["gen-data", "--config", str(bad), "--out", str(tmp_path / "x")], capsys)
    assert code == 3 and err.startswith("error=config ") and "\n" not in err

    code, err = run(["rates", "--config", str(tmp_path / "missing.cfg"), "--out", str(tmp_path)],
                    capsys)
    assert code == 7 and err.startswith("error=io ")

    junk = tmp_path / "junk.bin"
    junk.write_bytes(b"not a model\n")
    cfg3 = tmp_path / "j.cfg"
    cfg3.write_text(SMALL + f"model_file = {junk}\n")
    code, err = run(["rates", "--config", str(cfg3), "--out", str(tmp_path / "y")], capsys)
    assert code == 5 and err.startswith("error=model ")

    code, err = run(["bogus"], capsys)
    assert code == 2 and err.startswith("error=usage")


def test_model_config_mismatch(cfg, tmp_path, capsys):
    out = tmp_path / "t"
    assert run(["train", "--config", cfg, "--out", str(out)], capsys)[0] == 0
    cfg2 = tmp_path / "m.cfg"
    cfg2.write_text(SMALL.replace("rows = 4", "rows = 5") + f"model_file = {out / 'model.bin'}\n")
    code, err = run(["rates", "--config", str(cfg2), "--out", str(tmp_path / "r")], capsys)
    assert code == 4 and err.startswith("error=input ") and "M=" in err


def test_module_entry_point():
    import subprocess
    import sys
    res = subprocess.run([sys.executable, "-m", "gfra.experiments", "--help"], capture_output=True,
                         text=True)
    assert res.returncode == 0 and "gen-data" in res.stdout
