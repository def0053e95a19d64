"""CSV emission with a fixed numeric format."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

SIGNIFICANT_DIGITS = 12

RADIATION_COLUMNS = ("theta_deg", "e_t_db", "label")
DYNAMIC_RANGE_COLUMNS = ("y_m", "mode", "k", "snr_p_db", "zeta_db", "trials")
ROC_COLUMNS = ("mode", "snr_p_db", "threshold_log", "p_fa", "p_d", "trials")


class CsvWriteError(OSError):
    pass


@dataclass
class Table:
    columns: tuple
    rows: list = field(default_factory=list)

    def add(self, *values) -> None:
        if len(values) != len(self.columns):
            raise ValueError(f"expected {len(self.columns)} values, got {len(values)}")
        self.rows.append(values)


def format_value(value) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, (int,)) or (hasattr(value, "dtype") and value.dtype.kind in "iu"):
        return str(int(value))
    if isinstance(value, str):
        return value
    x = float(value)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if x == 0.0:
        return "0"
    return format(x, f".{SIGNIFICANT_DIGITS}g")


def emit_csv(table: Table, path) -> Path:
    """Write ``table`` as UTF-8 CSV with LF line endings."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(table.columns)
            for row in table.rows:
                writer.writerow([format_value(v) for v in row])
    except OSError as exc:
        raise CsvWriteError(f"cannot write {path}: {exc}") from exc
    return path
