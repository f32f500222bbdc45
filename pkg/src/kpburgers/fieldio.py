"""Binary field dumps and CSV helpers.

A dump is a little-endian header ``{b"KPBF", version u32, nx u32, ny u32,
Lx f64, Ly f64, t f64}`` followed by ``nx*ny`` f64 values with x varying
fastest.
"""

from __future__ import annotations

import csv
import struct
from pathlib import Path

import numpy as np

from .spectral import Grid2D, PhysicalField

MAGIC = b"KPBF"
VERSION = 1
_HEADER = struct.Struct("<4sIIIddd")


def write_field(path, field: PhysicalField, t: float = 0.0) -> None:
    g = field.grid
    head = _HEADER.pack(MAGIC, VERSION, g.nx, g.ny, g.Lx, g.Ly, float(t))
    body = np.asarray(field.values, dtype="<f8").ravel(order="F").tobytes()
    with open(path, "wb") as fh:
        fh.write(head)
        fh.write(body)


def read_field(path):
    """Return ``(PhysicalField, t)`` from a dump written by :func:`write_field`."""
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise ValueError(f"{path}: truncated header")
    magic, version, nx, ny, Lx, Ly, t = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise ValueError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise ValueError(f"{path}: unsupported version {version}")
    count = nx * ny
    if len(raw) != _HEADER.size + 8 * count:
        raise ValueError(f"{path}: expected {count} values")
    values = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size, count=count)
    grid = Grid2D(nx, ny, Lx, Ly)
    return PhysicalField(grid, values.reshape((nx, ny), order="F")), t


def write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return v


def read_csv(path):
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        return list(reader)


def write_trajectory(traj, outdir, every=1) -> Path:
    """Dump every ``every``-th snapshot plus ``index.csv`` (step, t, linf, l2, boundary_mass)."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    rows = []
    g = traj.grid
    last = len(traj.times) - 1
    for k, (t, u) in enumerate(zip(traj.times, traj.u_snapshots)):
        v = u.values
        rows.append((k, t, float(np.abs(v).max()), float(np.sqrt(g.dx * g.dy * np.sum(v * v))),
                     traj.boundary[k]))
        if k % every == 0 or k == last:
            write_field(outdir / f"u_{k:05d}.kpbf", u, t)
    write_csv(outdir / "index.csv", ["step", "t", "linf", "l2", "boundary_mass"], rows)
    return outdir
