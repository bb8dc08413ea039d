"""Readers for the solver's snapshot pairs and diagnostics CSV.

A snapshot is a `<stem>.meta` text file of `key = value` lines next to a
`<stem>.bin` payload of little-endian float64 in row-major order. The
diagnostics file is comma-separated with one header row.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

REQUIRED_META = ("field", "n_x", "time", "dtype", "byte_order", "order")


class SnapshotFormatError(ValueError):
    pass


def read_meta(meta_path: str | Path) -> dict:
    meta: dict[str, str] = {}
    for line in Path(meta_path).read_text().splitlines():
        if not line.strip():
            continue
        key, sep, raw = line.partition("=")
        if not sep:
            raise SnapshotFormatError(f"malformed line {line!r} in {meta_path}")
        meta[key.strip()] = raw.strip()
    for key in REQUIRED_META:
        if key not in meta:
            raise SnapshotFormatError(f"missing key {key!r} in {meta_path}")
    if meta["dtype"] != "float64":
        raise SnapshotFormatError(f"unsupported dtype {meta['dtype']!r}")
    if meta["byte_order"] != "little":
        raise SnapshotFormatError(f"unsupported byte_order {meta['byte_order']!r}")
    if meta["order"] != "row-major":
        raise SnapshotFormatError(f"unsupported order {meta['order']!r}")
    try:
        int(meta["n_x"])
        float(meta["time"])
    except ValueError as exc:
        raise SnapshotFormatError(f"bad numeric value in {meta_path}: {exc}") from exc
    return meta


def read_snapshot(meta_path: str | Path):
    """Returns (values (n,n), meta dict) for one snapshot pair."""
    meta_path = Path(meta_path)
    meta = read_meta(meta_path)
    n = int(meta["n_x"])
    payload = meta_path.with_suffix(".bin").read_bytes()
    data = np.frombuffer(payload, dtype="<f8")
    if data.size != n * n:
        raise SnapshotFormatError(
            f"payload of {meta_path.stem} holds {data.size} values, expected {n * n}")
    return data.reshape(n, n), meta


def find_snapshots(directory: str | Path, field: str):
    """Snapshot meta paths of one field in a directory, sorted by time."""
    directory = Path(directory)
    found = []
    for meta_path in sorted(directory.glob(f"snap_{field}_*.meta")):
        meta = read_meta(meta_path)
        found.append((float(meta["time"]), meta_path))
    found.sort(key=lambda item: item[0])
    return [p for _, p in found]


def read_diagnostics(csv_path: str | Path):
    """Returns (column names, data array with one row per record)."""
    lines = Path(csv_path).read_text().splitlines()
    if not lines:
        raise SnapshotFormatError(f"{csv_path} is empty")
    names = [tok.strip() for tok in lines[0].split(",")]
    rows = [[float(tok) for tok in ln.split(",")] for ln in lines[1:] if ln.strip()]
    data = np.array(rows, dtype=float).reshape(len(rows), len(names))
    return names, data
