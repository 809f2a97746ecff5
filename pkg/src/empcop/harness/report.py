"""Writing experiment reports to disk.

CSV bodies depend only on the configuration and seed, so reruns produce
byte-identical files. Wall-clock time and versions go to ``report.json``
only.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .experiments import ExperimentReport


def _cell(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return str(x)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, np.generic):
        obj = obj.item()
    if isinstance(obj, float) and not np.isfinite(obj):
        return str(obj)
    if isinstance(obj, (str, int, float, bool)) or obj is None:
        return obj
    return repr(obj)


def emit_report(report: ExperimentReport, out_dir=None, formats=("json", "csv")) -> list:
    """Write ``report.json`` and one CSV per table; return the written paths.

    Raises ``ValueError`` before writing anything if a table is empty, and
    ``OSError`` with the offending path if the directory is not writable.
    """
    out = Path(out_dir or report.config.get("out") or ".")
    for name, (_, rows) in report.tables.items():
        if len(rows) == 0:
            raise ValueError(f"table {name!r} has no rows; nothing written")
    if not report.tables and "csv" in formats and "json" not in formats:
        raise ValueError("report has no tables; nothing written")
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc}") from exc
    written = []
    try:
        if "json" in formats:
            path = out / "report.json"
            path.write_text(json.dumps(_jsonable(report.to_dict()), indent=2, sort_keys=True) + "\n")
            written.append(path)
        if "csv" in formats:
            for name, (header, rows) in report.tables.items():
                path = out / f"{name}.csv"
                with path.open("w", newline="") as fh:
                    w = csv.writer(fh, lineterminator="\n")
                    w.writerow(header)
                    for row in rows:
                        w.writerow([_cell(x) for x in row])
                written.append(path)
    except OSError as exc:
        raise OSError(f"failed writing report under {out}: {exc}") from exc
    return written
