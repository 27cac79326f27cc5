"""Snapshot files and CSV tables.

Snapshot binary layout, all little-endian::

    b"RDMC"            4-byte magic
    version            uint32
    dim                int64
    cells[dim]         int64 each
    N                  int64
    t, eps             float64
    payload            N row-major float64 grids
"""

from __future__ import annotations

import csv
import struct
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .core import FieldState

MAGIC = b"RDMC"
VERSION = 1
SNAPSHOT_DIR = "snapshots"


class SnapshotError(ValueError):
    pass


def encode_snapshot(state: FieldState) -> bytes:
    u = np.ascontiguousarray(state.u, dtype="<f8")
    n, *cells = u.shape
    head = MAGIC + struct.pack("<I", VERSION)
    head += struct.pack(f"<q{len(cells)}qq", len(cells), *cells, n)
    head += struct.pack("<dd", state.t, state.eps)
    return head + u.tobytes(order="C")


def decode_snapshot(data: bytes) -> FieldState:
    if data[:4] != MAGIC:
        raise SnapshotError("bad magic")
    (version,) = struct.unpack_from("<I", data, 4)
    if version != VERSION:
        raise SnapshotError(f"unsupported snapshot version {version}")
    pos = 8
    (dim,) = struct.unpack_from("<q", data, pos)
    pos += 8
    if dim not in (1, 2):
        raise SnapshotError(f"bad dimension {dim}")
    cells = struct.unpack_from(f"<{dim}q", data, pos)
    pos += 8 * dim
    (n,) = struct.unpack_from("<q", data, pos)
    pos += 8
    t, eps = struct.unpack_from("<dd", data, pos)
    pos += 16
    count = n * int(np.prod(cells))
    if len(data) - pos != 8 * count:
        raise SnapshotError("payload size does not match header")
    u = np.frombuffer(data, dtype="<f8", count=count, offset=pos).reshape((n,) + tuple(cells))
    return FieldState(t, eps, u.astype(float))


def write_snapshot(path, state: FieldState, csv_mirror: bool = False) -> None:
    path = Path(path)
    path.write_bytes(encode_snapshot(state))
    if csv_mirror:
        write_snapshot_csv(path.with_suffix(".csv"), state)


def read_snapshot(path) -> FieldState:
    return decode_snapshot(Path(path).read_bytes())


def write_snapshot_csv(path, state: FieldState) -> None:
    """One row per cell: cell index per axis, then u_1 ... u_N."""
    u = state.u
    dim = u.ndim - 1
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"idx{a}" for a in range(dim)] + [f"u{i + 1}" for i in range(u.shape[0])])
        for idx in np.ndindex(*u.shape[1:]):
            w.writerow(list(idx) + [repr(float(u[(i,) + idx])) for i in range(u.shape[0])])


def snapshot_name(k: int) -> str:
    return f"snap_{k:05d}.rdmc"


def write_trajectory(out_dir, snapshots: Sequence[FieldState], csv_mirror: bool = False) -> Path:
    folder = Path(out_dir) / SNAPSHOT_DIR
    folder.mkdir(parents=True, exist_ok=True)
    for old in folder.glob("snap_*"):
        old.unlink()
    for k, st in enumerate(snapshots):
        write_snapshot(folder / snapshot_name(k), st, csv_mirror)
    return folder


def read_trajectory(out_dir) -> list:
    folder = Path(out_dir) / SNAPSHOT_DIR
    files = sorted(folder.glob("snap_*.rdmc"))
    if not files:
        raise FileNotFoundError(f"no snapshots under {folder}")
    return [read_snapshot(f) for f in files]


def write_csv(path, columns: Sequence[str], rows: Iterable[dict], append: bool = False) -> None:
    """Write dict rows; in append mode the header is written only for a new file."""
    path = Path(path)
    fresh = not (append and path.exists() and path.stat().st_size > 0)
    with open(path, "a" if append else "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(columns), lineterminator="\n")
        if fresh:
            w.writeheader()
        for row in rows:
            w.writerow(row)


def read_csv(path) -> list:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


CONDITION_COLUMNS = ("condition", "verdict", "worst_sample", "worst_value", "estimated_K")
ESTIMATE_COLUMNS = ("estimate_id", "i", "T", "value", "bound", "margin", "verdict", "params_hash")
SWEEP_COLUMNS = ("eps", "species", "lp_norm", "mass_margin", "D_to_previous",
                 "runtime_seconds", "status")
