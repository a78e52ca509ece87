"""CSV time series and binary state snapshots.

Snapshot layout: a text header terminated by a line ``END``, then the fields
v1, v2, T one after another as little-endian 8-byte reals, x index fastest.
"""

from __future__ import annotations

import csv
import os

import numpy as np

from .diagnostics import DiagnosticsRecord
from .domain import Grid, Parity, ScalarField, State
from .errors import HeaderMismatch

MAGIC = "ANISOPE-SNAPSHOT 1"
FIELD_NAMES = ("v1", "v2", "T")


def timeseries_columns() -> list:
    return list(DiagnosticsRecord.empty().to_row())


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return format(float(x), ".17g")


def write_timeseries(records, path, append: bool = False) -> None:
    """One CSV row per record under a fixed header.

    With ``append`` and an existing file, rows are added after checking that
    the header matches; otherwise the file is (re)written.
    """
    columns = timeseries_columns()
    exists = append and os.path.exists(path) and os.path.getsize(path) > 0
    if exists:
        with open(path, newline="") as fh:
            header = next(csv.reader(fh), None)
        if header != columns:
            raise HeaderMismatch(f"{path} has a different column layout")
    with open(path, "a" if exists else "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        if not exists:
            writer.writerow(columns)
        for rec in records:
            row = rec.to_row() if isinstance(rec, DiagnosticsRecord) else rec
            writer.writerow([_fmt(row[c]) for c in columns])


def read_timeseries(path) -> dict:
    """Column name -> float array."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[float(x) for x in r] for r in reader if r]
    data = np.array(rows, dtype=float).reshape(-1, len(header))
    return {name: data[:, i] for i, name in enumerate(header)}


def write_snapshot(state: State, path) -> None:
    g = state.grid
    header = [
        MAGIC,
        f"nx = {g.nx}",
        f"ny = {g.ny}",
        f"nz = {g.nz}",
        f"h = {g.h!r}",
        f"t = {float(state.t)!r}",
        "fields = " + " ".join(FIELD_NAMES),
        "parities = " + " ".join(f.parity.value for f in (state.v1, state.v2, state.T)),
        "byte_order = little",
        "element = f8",
        "order = x-fastest",
        "END",
    ]
    with open(path, "wb") as fh:
        fh.write(("\n".join(header) + "\n").encode("ascii"))
        for a in state.arrays:
            fh.write(np.asarray(a, dtype="<f8").ravel(order="F").tobytes())


def read_snapshot(path) -> State:
    with open(path, "rb") as fh:
        blob = fh.read()
    marker = b"\nEND\n"
    end = blob.find(marker)
    if end < 0:
        raise HeaderMismatch("snapshot header is not terminated")
    lines = blob[:end].decode("ascii", errors="replace").split("\n")
    if lines[0] != MAGIC:
        raise HeaderMismatch(f"not a snapshot file (first line {lines[0]!r})")
    meta = {}
    for line in lines[1:]:
        if "=" not in line:
            raise HeaderMismatch(f"malformed header line {line!r}")
        k, v = (s.strip() for s in line.split("=", 1))
        meta[k] = v
    try:
        grid = Grid(int(meta["nx"]), int(meta["ny"]), int(meta["nz"]), float(meta["h"]))
        t = float(meta["t"])
        names = tuple(meta["fields"].split())
        parities = [Parity(p) for p in meta["parities"].split()]
    except (KeyError, ValueError) as err:
        raise HeaderMismatch(f"bad snapshot header: {err}") from None
    if names != FIELD_NAMES or len(parities) != 3:
        raise HeaderMismatch(f"unexpected fields {names}")
    if (meta.get("byte_order"), meta.get("element"), meta.get("order")) != ("little", "f8", "x-fastest"):
        raise HeaderMismatch("unsupported payload encoding")
    payload = blob[end + len(marker):]
    n = grid.nx * grid.ny * grid.nz
    if len(payload) != 3 * n * 8:
        raise HeaderMismatch(f"payload has {len(payload)} bytes, header implies {3 * n * 8}")
    flat = np.frombuffer(payload, dtype="<f8").astype(np.float64)
    arrays = [flat[i * n:(i + 1) * n].reshape(grid.shape, order="F") for i in range(3)]
    f = [ScalarField(grid, p, a) for p, a in zip(parities, arrays)]
    return State((f[0], f[1]), f[2], t)
