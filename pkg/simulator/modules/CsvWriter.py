from __future__ import annotations

import csv
import logging
import os
from typing import List, Sequence

from .ExperimentRunner import ResultRow

logger = logging.getLogger(__name__)

RESULT_HEADER = ["sweep_value", "scheme", "mean_sr", "std_sr", "mean_iters", "mean_wall_ms"]
TRACE_HEADER = ["iteration", "secrecy_rate"]


def format_float(value: float) -> str:
    return f"{value:.10g}"


def _write_rows(path: str, header: List[str], rows: List[List[str]]) -> None:
    directory = os.path.dirname(path)
    try:
        if directory:
            os.makedirs(directory, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="") as file:
            writer = csv.writer(file, lineterminator="\n")
            writer.writerow(header)
            writer.writerows(rows)
    except OSError as e:
        raise OSError(f"Cannot write {path}: {e.strerror or e}") from e
    logger.info(f"Wrote {len(rows)} row(s) to {path}")


def write_csv(rows: Sequence[ResultRow], path: str) -> None:
    """Result table sorted by (sweep_value, scheme)."""
    ordered = sorted(rows, key=lambda r: (r.sweep_value, r.scheme.value))
    _write_rows(
        path,
        RESULT_HEADER,
        [
            [
                format_float(r.sweep_value),
                r.scheme.value,
                format_float(r.mean_sr),
                format_float(r.std_sr),
                format_float(r.mean_iters),
                format_float(r.mean_wall_ms),
            ]
            for r in ordered
        ],
    )


def write_trace_csv(trace: Sequence[float], path: str) -> None:
    _write_rows(path, TRACE_HEADER, [[str(i), format_float(v)] for i, v in enumerate(trace)])
