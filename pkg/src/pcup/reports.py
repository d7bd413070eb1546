"""Result tables and run configuration files.

The CSV schema is one row per evaluated condition:

    condition,af,sampling,normals,alpha,chamfer_loss,accuracy,coverage

Chamfer loss is written as %.17e (reads back to the identical double);
accuracy, coverage and alpha use repr(), which is also exact.  Lines end
with LF, the decimal separator is always a dot, and nothing in a file
depends on time or locale, so rerunning a sweep with the same seed must
reproduce the file byte for byte.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Union

from .errors import ConfigError
from .training import EvaluationReport

REPORT_HEADER = "condition,af,sampling,normals,alpha,chamfer_loss,accuracy,coverage"

PathLike = Union[str, Path]


@dataclass
class ReportRow:
    condition: str
    af: int
    sampling: str
    normals: bool
    alpha: Optional[float]
    report: EvaluationReport


def format_row(row: ReportRow) -> str:
    alpha = "" if row.alpha is None else repr(float(row.alpha))
    return ",".join([
        row.condition,
        str(int(row.af)),
        row.sampling,
        "true" if row.normals else "false",
        alpha,
        "%.17e" % row.report.chamfer_loss,
        repr(float(row.report.accuracy)),
        repr(float(row.report.coverage)),
    ])


def write_report_csv(path: PathLike, rows: List[ReportRow]) -> None:
    lines = [REPORT_HEADER] + [format_row(r) for r in rows]
    Path(path).write_bytes(("\n".join(lines) + "\n").encode("ascii"))


def read_report_csv(path: PathLike) -> List[ReportRow]:
    text = Path(path).read_text(encoding="ascii")
    lines = [ln for ln in text.split("\n") if ln]
    if not lines or lines[0] != REPORT_HEADER:
        raise ValueError(f"{path}: missing or wrong header")
    rows = []
    for ln in lines[1:]:
        parts = ln.split(",")
        if len(parts) != 8:
            raise ValueError(f"{path}: bad row {ln!r}")
        rows.append(ReportRow(
            condition=parts[0],
            af=int(parts[1]),
            sampling=parts[2],
            normals={"true": True, "false": False}[parts[3]],
            alpha=None if parts[4] == "" else float(parts[4]),
            report=EvaluationReport(chamfer_loss=float(parts[5]),
                                    accuracy=float(parts[6]),
                                    coverage=float(parts[7])),
        ))
    return rows


def load_config_file(path: PathLike) -> dict:
    """Flat JSON object of config overrides; anything else is an error."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            values = json.load(fh)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: not valid JSON ({e})") from e
    if not isinstance(values, dict):
        raise ConfigError(f"{path}: config must be a JSON object")
    return values


def write_loss_csv(path: PathLike, train_losses, val_history) -> None:
    """Per-epoch loss table: epoch,train_loss,val_loss (val may be blank)."""
    val_at = {epoch: loss for epoch, loss in val_history}
    lines = ["epoch,train_loss,val_loss"]
    for epoch, loss in enumerate(train_losses):
        val = "%.17e" % val_at[epoch] if epoch in val_at else ""
        lines.append(f"{epoch},{'%.17e' % loss},{val}")
    Path(path).write_bytes(("\n".join(lines) + "\n").encode("ascii"))
