"""Diagnostics CSV and self-describing binary snapshots."""
from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .diagnostics import csv_columns
from .fields import FieldState
from .grid import Distribution, PhaseGrid

DIAGNOSTICS_SCHEMA_VERSION = 1

MAGIC = b"RVMFP1"
SNAPSHOT_VERSION = 1
LAYOUT_F_XV1V2_THEN_E1_E2_B = 1
_HEADER = struct.Struct("<6s2xIIdQQdddd56x")
HEADER_SIZE = 128
assert _HEADER.size == HEADER_SIZE


def format_row(values):
    return ",".join(f"{float(v):.17g}" for v in values)


def write_diagnostics(path, records):
    """Header row, then one row per record; floats with 17 significant digits."""
    lines = [",".join(csv_columns())]
    lines += [format_row(r.values()) for r in records]
    Path(path).write_text("\n".join(lines) + "\n")


def read_diagnostics(path):
    """Return (columns, 2D float array) from a diagnostics CSV."""
    text = Path(path).read_text().splitlines()
    cols = text[0].split(",")
    rows = [list(map(float, ln.split(","))) for ln in text[1:] if ln and not ln.startswith("#")]
    return cols, np.array(rows, float).reshape(len(rows), len(cols))


@dataclass(frozen=True)
class SnapshotHeader:
    t: float
    nx: int
    nv: int
    dx: float
    dv: float
    x_min: float
    v_max: float
    version: int = SNAPSHOT_VERSION
    layout: int = LAYOUT_F_XV1V2_THEN_E1_E2_B

    def pack(self) -> bytes:
        return _HEADER.pack(MAGIC, self.version, self.layout, self.t, self.nx, self.nv,
                            self.dx, self.dv, self.x_min, self.v_max)

    @classmethod
    def unpack(cls, raw: bytes):
        if len(raw) < HEADER_SIZE:
            raise ValueError("truncated snapshot header")
        magic, version, layout, t, nx, nv, dx, dv, x_min, v_max = _HEADER.unpack(raw[:HEADER_SIZE])
        if magic != MAGIC:
            raise ValueError(f"bad snapshot magic {magic!r}")
        if version != SNAPSHOT_VERSION or layout != LAYOUT_F_XV1V2_THEN_E1_E2_B:
            raise ValueError(f"unsupported snapshot version/layout {version}/{layout}")
        return cls(t, nx, nv, dx, dv, x_min, v_max, version, layout)

    @property
    def payload_doubles(self):
        return self.nx * self.nv * self.nv + 3 * self.nx

    def grid(self) -> PhaseGrid:
        return PhaseGrid(self.x_min, self.x_min + self.nx * self.dx, self.nx, self.v_max, self.nv)


def write_snapshot(path, f: Distribution, fields: FieldState, t: float):
    g = f.grid
    hdr = SnapshotHeader(t, g.nx, g.nv, g.dx, g.dv, g.x_min, g.v_max)
    le = np.dtype("<f8")
    with open(path, "wb") as fh:
        fh.write(hdr.pack())
        for a in (f.values, fields.E1, fields.E2, fields.B):
            fh.write(np.ascontiguousarray(a, dtype=le).tobytes())


@dataclass
class Snapshot:
    header: SnapshotHeader
    f: np.ndarray
    E1: np.ndarray
    E2: np.ndarray
    B: np.ndarray

    def distribution(self) -> Distribution:
        return Distribution(self.header.grid(), self.f.copy(), time=self.header.t)

    def fields(self) -> FieldState:
        return FieldState.from_fields(self.E1.copy(), self.E2, self.B)


def read_snapshot(path) -> Snapshot:
    """Reconstruct f, E1, E2 and B exactly as written, using only the header."""
    raw = Path(path).read_bytes()
    hdr = SnapshotHeader.unpack(raw)
    data = np.frombuffer(raw, dtype="<f8", offset=HEADER_SIZE)
    if data.size != hdr.payload_doubles:
        raise ValueError(f"payload has {data.size} doubles, header implies {hdr.payload_doubles}")
    nf = hdr.nx * hdr.nv * hdr.nv
    f = data[:nf].reshape(hdr.nx, hdr.nv, hdr.nv).astype(np.float64)
    e1, e2, b = (data[nf + k * hdr.nx: nf + (k + 1) * hdr.nx].astype(np.float64) for k in range(3))
    return Snapshot(hdr, f, e1, e2, b)
