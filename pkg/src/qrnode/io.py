"""Deterministic CSV/JSON writers.

Every file starts with provenance: a ``# config_sha256=... seed=...`` comment
line for CSV, a ``meta`` object for JSON. Floats are written with ``repr`` so
they round-trip exactly and do not depend on locale.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np


def _plain(value):
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [_plain(v) for v in value]
    return value


def _cell(value) -> str:
    value = _plain(value)
    if isinstance(value, float):
        return repr(value)
    return "" if value is None else str(value)


def write_csv(path: str | Path, header: Sequence[str], rows: Iterable[Sequence], *, digest: str, seed: int) -> Path:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        fh.write(f"# config_sha256={digest} seed={seed}\r\n")
        writer = csv.writer(fh, lineterminator="\r\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(v) for v in row])
    return path


def write_json(path: str | Path, payload: dict, *, digest: str, seed: int) -> Path:
    path = Path(path)
    doc = {"meta": {"config_sha256": digest, "seed": seed}, **_plain(payload)}
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def write_table(path: str | Path, fmt: str, header: Sequence[str], rows: Iterable[Sequence], *, digest: str,
                seed: int) -> Path:
    """Write ``rows`` as CSV, or as JSON ``{"columns": ..., "rows": ...}``."""
    path = Path(path).with_suffix("." + fmt)
    if fmt == "csv":
        return write_csv(path, header, rows, digest=digest, seed=seed)
    if fmt == "json":
        return write_json(path, {"columns": list(header), "rows": [list(r) for r in rows]}, digest=digest, seed=seed)
    raise ValueError(f"unknown output format {fmt!r}")


def read_csv(path: str | Path) -> tuple[dict[str, str], list[str], list[list[str]]]:
    """Inverse of :func:`write_csv`: ``(meta, header, rows)`` with string cells."""
    with Path(path).open(newline="", encoding="utf-8") as fh:
        first = fh.readline().strip()
        meta = dict(item.split("=", 1) for item in first.lstrip("# ").split())
        reader = csv.reader(fh)
        header = next(reader)
        return meta, header, list(reader)
