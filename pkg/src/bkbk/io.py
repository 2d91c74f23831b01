"""Binary field snapshots and the diagnostics CSV.

Snapshot layout (all little-endian)::

    header   "<4s5I7d"  magic b"BKBK", version, ndim, nx, ny, field count,
                        time, kappa, g, nu, alpha, Lx, Ly
    fields   repeated:  16-byte space-padded ASCII name, nx*ny float64 samples

2D samples are row-major with x fastest, i.e. arrays of shape ``(ny, nx)``.
1D snapshots store ``ny = 1`` and ``Ly = 0``.
"""

import csv
import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import BadMagicError, ShortReadError, SizeMismatchError, SnapshotError

__all__ = [
    "MAGIC", "VERSION", "SnapshotHeader", "Snapshot", "write_snapshot", "read_snapshot",
    "read_header", "DiagnosticsWriter", "csv_columns", "read_diagnostics",
]

MAGIC = b"BKBK"
VERSION = 1
HEADER = struct.Struct("<4s5I7d")
NAME_BYTES = 16
_F64 = np.dtype("<f8")


@dataclass
class SnapshotHeader:
    ndim: int
    nx: int
    ny: int
    nfields: int
    time: float = 0.0
    kappa: float = 0.0
    g: float = 1.0
    nu: float = 0.0
    alpha: float = 0.0
    lx: float = 0.0
    ly: float = 0.0
    version: int = VERSION

    def pack(self):
        return HEADER.pack(MAGIC, self.version, self.ndim, self.nx, self.ny, self.nfields,
                           self.time, self.kappa, self.g, self.nu, self.alpha, self.lx, self.ly)


@dataclass
class Snapshot:
    header: SnapshotHeader
    fields: dict = field(default_factory=dict)


def _encode_name(name):
    raw = name.encode("ascii")
    if len(raw) > NAME_BYTES:
        raise ValueError(f"field name {name!r} longer than {NAME_BYTES} bytes")
    return raw.ljust(NAME_BYTES, b" ")


def write_snapshot(path, fields, *, time=0.0, kappa=0.0, g=1.0, nu=0.0, alpha=0.0,
                   lx=0.0, ly=0.0):
    """Write named real arrays of identical shape (1D ``(n,)`` or 2D ``(ny, nx)``)."""
    if not fields:
        raise ValueError("no fields to write")
    arrays = {k: np.asarray(v, dtype=float) for k, v in fields.items()}
    shapes = {a.shape for a in arrays.values()}
    if len(shapes) != 1:
        raise ValueError(f"fields have different shapes: {sorted(shapes)}")
    (shape,) = shapes
    if len(shape) == 1:
        ndim, ny, nx = 1, 1, shape[0]
    elif len(shape) == 2:
        ndim, (ny, nx) = 2, shape
    else:
        raise ValueError("only 1D and 2D fields are supported")
    header = SnapshotHeader(ndim, nx, ny, len(arrays), time, kappa, g, nu, alpha, lx, ly)
    with open(path, "wb") as fh:
        fh.write(header.pack())
        for name, a in arrays.items():
            fh.write(_encode_name(name))
            fh.write(np.ascontiguousarray(a, dtype=_F64).tobytes())
    return header


def _read_header(fh):
    raw = fh.read(HEADER.size)
    if len(raw) >= 4 and raw[:4] != MAGIC:
        raise BadMagicError(raw[:4])
    if len(raw) < HEADER.size:
        raise ShortReadError("header")
    magic, version, ndim, nx, ny, nf, *rest = HEADER.unpack(raw)
    if version != VERSION:
        raise SnapshotError(f"unsupported snapshot version {version}")
    if ndim not in (1, 2) or (ndim == 1 and ny != 1):
        raise SizeMismatchError(f"inconsistent dimensions ndim={ndim}, nx={nx}, ny={ny}")
    return SnapshotHeader(ndim, nx, ny, nf, *rest, version=version)


def read_header(path):
    with open(path, "rb") as fh:
        return _read_header(fh)


def read_snapshot(path):
    """Read and validate a snapshot; raises a distinct error per failure mode."""
    with open(path, "rb") as fh:
        h = _read_header(fh)
        count = h.nx * h.ny
        shape = (h.nx,) if h.ndim == 1 else (h.ny, h.nx)
        out = Snapshot(h)
        for i in range(h.nfields):
            name = fh.read(NAME_BYTES)
            data = fh.read(8 * count)
            if len(name) < NAME_BYTES or len(data) < 8 * count:
                raise ShortReadError(f"field {i}")
            key = name.decode("ascii").rstrip(" ")
            out.fields[key] = np.frombuffer(data, dtype=_F64).astype(float).reshape(shape)
        if fh.read(1):
            raise SizeMismatchError(f"trailing bytes after {h.nfields} fields")
    return out


# --- diagnostics CSV --------------------------------------------------------


def csv_columns(ndim):
    if ndim == 1:
        return ["t", "mass", "momentum_x", "hamiltonian", "min_eta", "max_speed", "crest_count"]
    return ["t", "mass", "momentum_x", "momentum_y", "hamiltonian", "min_eta", "max_speed",
            "casimir_q", "casimir_q2", "max_abs_q", "crest_count"]


def _fmt(x):
    return "%.17g" % x


class DiagnosticsWriter:
    """Append :class:`~bkbk.diagnostics.DiagnosticsRow` objects to a CSV file.

    Each row is flushed so a run that stops early leaves a valid file.
    """

    def __init__(self, path, ndim):
        self.ndim = ndim
        self._fh = open(path, "w", newline="")
        self._w = csv.writer(self._fh, lineterminator="\n")
        self._w.writerow(csv_columns(ndim))
        self._fh.flush()

    def write(self, row):
        vals = [row.t, row.mass, *row.momentum, row.hamiltonian, row.min_eta, row.max_speed]
        if self.ndim == 2:
            vals += [row.casimir_q, row.casimir_q2, row.max_abs_q]
        self._w.writerow([_fmt(v) for v in vals] + [str(int(row.crest_count))])
        self._fh.flush()

    def close(self):
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def read_diagnostics(path):
    """Column name -> float array."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    cols = list(zip(*body)) if body else [()] * len(header)
    return {name: np.array(col, dtype=float) for name, col in zip(header, cols)}
