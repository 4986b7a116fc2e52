"""
Artifact output: run directories and CSV/JSON writers.

Provides:
- RunDirectory for the --out directory of a CLI run
- open_csv context manager with a header row
- format_float with 17 significant digits (round-trips IEEE doubles)
- write_json for records and summaries
"""

import csv
import json
import logging
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Iterator, Optional, Sequence

logger = logging.getLogger(__name__)


def format_float(value: Optional[float]) -> str:
    """17 significant digits; None renders as an empty cell."""
    return "" if value is None else f"{float(value):.17g}"


@contextmanager
def open_csv(path: str | Path, header: Sequence[str]) -> Iterator[Any]:
    """
    Open a CSV file for writing and emit the header row.

    Yields:
        csv.writer for the data rows
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    handle = path.open("w", newline="", encoding="utf-8")
    try:
        writer = csv.writer(handle)
        writer.writerow(header)
        yield writer
    finally:
        handle.close()
    logger.debug(f"[artifacts] wrote {path}")


def write_json(path: str | Path, payload: Any) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2), encoding="utf-8")
    logger.debug(f"[artifacts] wrote {path}")
    return path


def read_csv_rows(path: str | Path) -> list[dict[str, str]]:
    with Path(path).open(newline="", encoding="utf-8") as handle:
        return list(csv.DictReader(handle))


class RunDirectory:
    """Output directory of one CLI run; created on first use."""

    MODEL = "model.json"
    BASIS = "basis.json"
    TRACE = "greedy_trace.csv"
    ERROR_TABLE = "error_table.csv"
    CERTIFICATES = "certificates.json"
    VALIDATION = "validation_report.csv"
    WIDTHS = "nwidth_report.csv"
    WIDTHS_PARAMETRIC = "nwidth_parametric_report.csv"
    WIDTHS_CONTRAST = "nwidth_contrast_report.csv"

    def __init__(self, root: str | Path):
        self.root = Path(root)

    def path(self, name: str) -> Path:
        self.root.mkdir(parents=True, exist_ok=True)
        return self.root / name

    def __str__(self) -> str:
        return str(self.root)
