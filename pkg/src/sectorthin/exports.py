"""Plain-text exports.  Every writer goes through a temp file and a rename."""
from __future__ import annotations

import csv
import hashlib
import io
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .geometry import layout_rows


def atomic_write_text(path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def csv_text(rows) -> str:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue()


def write_csv(path, rows) -> Path:
    return atomic_write_text(path, csv_text(rows))


def write_json(path, obj) -> Path:
    return atomic_write_text(path, json.dumps(obj, indent=2, sort_keys=True, default=_jsonable) + "\n")


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, Path):
        return str(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def num(value) -> str:
    value = float(value)
    return repr(value)


def write_layout(path, layout, weights=None) -> Path:
    return write_csv(path, layout_rows(layout, weights))


def write_cut(path, cut) -> Path:
    rows = [["angle_deg", "magnitude_db"]]
    rows += [[num(a), num(m)] for a, m in zip(cut.angle_deg, cut.magnitude_db)]
    return write_csv(path, rows)


def write_grid(path, grid) -> Path:
    rows = [["theta_deg", "phi_deg", "magnitude_db"]]
    for i, th in enumerate(grid.theta_deg):
        t = num(th)
        rows += [[t, num(ph), num(m)] for ph, m in zip(grid.phi_deg, grid.magnitude_db[i])]
    return write_csv(path, rows)


def write_trace(path, trace) -> Path:
    rows = [["iteration", "best_fitness"]] + [[str(i), num(f)] for i, f in enumerate(trace)]
    return write_csv(path, rows)


METRICS_HEADER = ["n_total", "active_count", "sll_db", "hpbw_deg", "seed"]


def metrics_row(result) -> list[str]:
    return [str(result.n_total), str(result.active_count), num(result.sll_db),
            num(result.hpbw_deg), str(result.seed)]


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            h.update(block)
    return h.hexdigest()


def write_manifest(directory, files, kind: str, extra: dict | None = None) -> Path:
    """Manifest schema: ``{"schema": 1, "kind", "files": {name: {"sha256", "bytes"}}, ...}``."""
    directory = Path(directory)
    entries = {}
    for name in sorted(files):
        p = directory / name
        entries[name] = {"sha256": sha256_file(p), "bytes": p.stat().st_size}
    doc = {"schema": 1, "kind": kind, "files": entries}
    if extra:
        doc.update(extra)
    return write_json(directory / "manifest.json", doc)


def read_cut(path):
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return data[:, 0], data[:, 1]
