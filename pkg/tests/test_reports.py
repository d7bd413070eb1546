"""CSV report tables and config files."""
import pytest

from pcup.errors import ConfigError
from pcup.reports import (REPORT_HEADER, ReportRow, format_row,
                          load_config_file, read_report_csv, write_loss_csv,
                          write_report_csv)
from pcup.training import EvaluationReport


def sample_rows():
    return [
        ReportRow(condition="ellipsoid/af8-uniform-xyz", af=8,
                  sampling="uniform", normals=False, alpha=None,
                  report=EvaluationReport(chamfer_loss=1.2345678901234567e-3,
                                          accuracy=0.875, coverage=1 / 3)),
        ReportRow(condition="box/af2-hybrid0.2-normals", af=2,
                  sampling="hybrid", normals=True, alpha=0.2,
                  report=EvaluationReport(chamfer_loss=7.5e-05,
                                          accuracy=1.0, coverage=0.0)),
    ]


def test_format_row_fields():
    line = format_row(sample_rows()[0])
    parts = line.split(",")
    assert parts[0] == "ellipsoid/af8-uniform-xyz"
    assert parts[1] == "8"
    assert parts[2] == "uniform"
    assert parts[3] == "false"
    assert parts[4] == ""  # no alpha outside hybrid mode
    assert float(parts[5]) == 1.2345678901234567e-3
    assert "e" in parts[5] and len(parts[5].split("e")[0]) == 19
    assert parts[6] == "0.875"


def test_format_row_alpha_and_true():
    parts = format_row(sample_rows()[1]).split(",")
    assert parts[3] == "true" and parts[4] == "0.2"


def test_csv_round_trip_exact(tmp_path):
    rows = sample_rows()
    path = tmp_path / "report.csv"
    write_report_csv(path, rows)
    back = read_report_csv(path)
    assert back == rows  # dataclass equality covers every float exactly


def test_csv_header_and_lf(tmp_path):
    path = tmp_path / "report.csv"
    write_report_csv(path, sample_rows())
    raw = path.read_bytes()
    assert raw.startswith(REPORT_HEADER.encode() + b"\n")
    assert b"\r" not in raw and raw.endswith(b"\n")


def test_csv_byte_deterministic(tmp_path):
    write_report_csv(tmp_path / "a.csv", sample_rows())
    write_report_csv(tmp_path / "b.csv", sample_rows())
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_read_rejects_damage(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("nope\n")
    with pytest.raises(ValueError):
        read_report_csv(path)
    path.write_text(REPORT_HEADER + "\nonly,three,fields\n")
    with pytest.raises(ValueError):
        read_report_csv(path)


def test_loss_csv_layout(tmp_path):
    path = tmp_path / "losses.csv"
    write_loss_csv(path, [0.5, 0.4, 0.3], [(1, 0.45)])
    lines = path.read_text().splitlines()
    assert lines[0] == "epoch,train_loss,val_loss"
    assert len(lines) == 4
    assert lines[1].endswith(",")  # epoch 0: no validation this epoch
    epoch1 = lines[2].split(",")
    assert epoch1[0] == "1" and float(epoch1[2]) == 0.45


def test_load_config_file(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text('{"epochs": 12, "learning_rate": 0.001}')
    assert load_config_file(path) == {"epochs": 12, "learning_rate": 0.001}
    path.write_text("[1, 2]")
    with pytest.raises(ConfigError):
        load_config_file(path)
    path.write_text("{broken")
    with pytest.raises(ConfigError):
        load_config_file(path)
