"""Command-line interface: subcommands, outputs, exit codes."""
import json
import subprocess
import sys

import pytest

from pcup.cli import main
from pcup.meshio import read_ply
from pcup.reports import read_report_csv

TINY = {"n_out": 32, "encoder_dims": [4, 8, 8, 16, 8],
        "decoder_hidden": [12, 12], "epochs": 2, "batch_size": 4, "seed": 5}


@pytest.fixture(scope="module")
def data_root(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli-data")
    assert main(["gen-data", "--families", "ellipsoid,box", "--count", "12",
                 "--seed", "7", "--out-dir", str(root)]) == 0
    return root


@pytest.fixture(scope="module")
def config_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("cli-cfg") / "tiny.json"
    path.write_text(json.dumps(TINY))
    return path


@pytest.fixture(scope="module")
def trained(data_root, config_file, tmp_path_factory):
    out = tmp_path_factory.mktemp("cli-train")
    code = main(["train", "--data-dir", str(data_root / "ellipsoid"),
                 "--config", str(config_file), "--out-dir", str(out)])
    assert code == 0
    return out


def test_usage_errors():
    assert main([]) == 1
    assert main(["no-such-command"]) == 1
    assert main(["train"]) == 1  # missing required arguments


def test_gen_data_layout(data_root):
    for family in ("ellipsoid", "box"):
        files = sorted((data_root / family).glob("*.obj"))
        assert len(files) == 12
        assert files[0].name == "000.obj"


def test_sample_writes_clouds(data_root, tmp_path):
    mesh = data_root / "ellipsoid" / "000.obj"
    code = main(["sample", "--mesh", str(mesh), "--n", "32", "--af", "8",
                 "--seed", "3", "--out-dir", str(tmp_path)])
    assert code == 0
    assert len(read_ply(tmp_path / "gt.ply")) == 32
    assert len(read_ply(tmp_path / "input.ply")) == 4


def test_train_outputs(trained):
    assert (trained / "model.ckpt").exists()
    lines = (trained / "losses.csv").read_text().splitlines()
    assert lines[0] == "epoch,train_loss,val_loss"
    assert len(lines) == 1 + TINY["epochs"]


def test_eval_writes_report(trained, data_root, tmp_path):
    code = main(["eval", "--checkpoint", str(trained / "model.ckpt"),
                 "--data-dir", str(data_root / "ellipsoid"),
                 "--out-dir", str(tmp_path)])
    assert code == 0
    rows = read_report_csv(tmp_path / "eval.csv")
    assert len(rows) == 1
    assert rows[0].condition == "af8-uniform-xyz"


def test_morph_writes_frames(trained, data_root, tmp_path):
    code = main(["morph", "--checkpoint", str(trained / "model.ckpt"),
                 "--mesh-a", str(data_root / "ellipsoid" / "000.obj"),
                 "--mesh-b", str(data_root / "ellipsoid" / "001.obj"),
                 "--steps", "3", "--out-dir", str(tmp_path)])
    assert code == 0
    frames = sorted(tmp_path.glob("morph_*.ply"))
    assert len(frames) == 3
    assert all(len(read_ply(f)) == TINY["n_out"] for f in frames)


def test_sweep_alpha_csv(data_root, config_file, tmp_path):
    code = main(["sweep-alpha", "--data-dir", str(data_root / "ellipsoid"),
                 "--config", str(config_file), "--out-dir", str(tmp_path)])
    assert code == 0
    rows = read_report_csv(tmp_path / "alpha.csv")
    assert len(rows) == 11
    assert [r.alpha for r in rows] == [i / 10 for i in range(11)]


def test_sweep_conditions_csv(data_root, config_file, tmp_path):
    code = main(["sweep-conditions", "--data-dir", str(data_root),
                 "--config", str(config_file), "--out-dir", str(tmp_path)])
    assert code == 0
    rows = read_report_csv(tmp_path / "conditions.csv")
    assert len(rows) == 24  # 12 conditions x 2 categories
    assert rows[0].condition.startswith("box/")


def test_inter_class_csv(data_root, config_file, tmp_path):
    code = main(["inter-class", "--data-dir", str(data_root),
                 "--config", str(config_file), "--out-dir", str(tmp_path)])
    assert code == 0
    assert len(read_report_csv(tmp_path / "inter_class.csv")) == 4


def test_multi_class_csv(data_root, config_file, tmp_path):
    code = main(["multi-class", "--data-dir", str(data_root),
                 "--per-category", "2", "--config", str(config_file),
                 "--out-dir", str(tmp_path)])
    assert code == 0
    assert len(read_report_csv(tmp_path / "multi_class.csv")) == 2
    assert (tmp_path / "model.ckpt").exists()


def test_data_error_exit_codes(trained, tmp_path):
    assert main(["train", "--data-dir", str(tmp_path / "missing"),
                 "--out-dir", str(tmp_path)]) == 2
    hurt = tmp_path / "hurt.ckpt"
    data = bytearray((trained / "model.ckpt").read_bytes())
    data[len(data) // 2] ^= 0xFF
    hurt.write_bytes(bytes(data))
    assert main(["eval", "--checkpoint", str(hurt),
                 "--data-dir", str(tmp_path), "--out-dir", str(tmp_path)]) == 2


def test_config_error_exit_codes(data_root, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["train", "--data-dir", str(data_root / "ellipsoid"),
                 "--config", str(bad), "--out-dir", str(tmp_path)]) == 1
    unknown = tmp_path / "unknown.json"
    unknown.write_text('{"learning_rat": 0.001}')
    assert main(["train", "--data-dir", str(data_root / "ellipsoid"),
                 "--config", str(unknown), "--out-dir", str(tmp_path)]) == 1
    assert main(["train", "--data-dir", str(data_root / "ellipsoid"),
                 "--config", str(tmp_path / "nowhere.json"),
                 "--out-dir", str(tmp_path)]) == 1


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_numeric_failure_exit_code(data_root, tmp_path):
    cfg = tmp_path / "explode.json"
    cfg.write_text(json.dumps({**TINY, "learning_rate": 1e18, "epochs": 40}))
    assert main(["train", "--data-dir", str(data_root / "ellipsoid"),
                 "--config", str(cfg), "--out-dir", str(tmp_path)]) == 3


def test_console_script(tmp_path):
    result = subprocess.run(
        [sys.executable, "-m", "pcup.cli", "gen-data", "--families", "box",
         "--count", "1", "--seed", "0", "--out-dir", str(tmp_path)],
        capture_output=True, text=True)
    assert result.returncode == 0, result.stderr
    assert (tmp_path / "box" / "000.obj").exists()
