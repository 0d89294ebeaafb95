"""CSV and JSON emission with a fixed, byte-stable format."""
from __future__ import annotations

import dataclasses
import hashlib
import json
from collections.abc import Iterable, Sequence
from pathlib import Path

import numpy as np

from .otoc import OtocSeries

SERIES_COLUMNS = ("n", "re_f", "im_f", "c", "c2", "c4")


def fmt(value) -> str:
    """17 significant digits; ``None``/NaN become an empty field."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    x = float(value)
    if np.isnan(x):
        return ""
    return format(x, ".17g")


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    lines = [",".join(header)]
    lines.extend(",".join(fmt(v) for v in row) for row in rows)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
    return path


def series_rows(series: OtocSeries):
    n = series.n.size
    f = series.f if series.f is not None else [None] * n
    c2 = series.c2 if series.c2 is not None else [None] * n
    c4 = series.c4 if series.c4 is not None else [None] * n
    for k in range(n):
        fk = f[k]
        yield (series.n[k],
               None if fk is None else fk.real,
               None if fk is None else fk.imag,
               series.c[k], c2[k], c4[k])


def write_series(path: Path, series: OtocSeries) -> Path:
    return write_csv(path, SERIES_COLUMNS, series_rows(series))


def jsonable(obj):
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        values = ((f.name, getattr(obj, f.name)) for f in dataclasses.fields(obj))
        return {k: jsonable(v) for k, v in values if not callable(v)}
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return None if np.isnan(x) else x
    if isinstance(obj, (complex, np.complexfloating)):
        return [obj.real, obj.imag]
    if isinstance(obj, Path):
        return str(obj)
    return obj


def write_json(path: Path, payload) -> Path:
    text = json.dumps(jsonable(payload), indent=2, sort_keys=True, allow_nan=False)
    path.write_text(text + "\n", encoding="utf-8", newline="\n")
    return path


def sha256(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()
