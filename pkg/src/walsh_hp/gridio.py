"""Text and binary file formats for grids and spectra.

Text v1::

    walsh-grid 2 N=3
    v v v v v v v v
    ...

one row per line (a single line for 1D).  Spectra use the tag ``walsh-spec``.

Binary: a 16-byte little-endian header (8-byte magic, uint32 dims, uint32 N)
followed by the values as float64, row-major.
"""

import struct

import numpy as np

from .dyadic import resolution

TAGS = ("walsh-grid", "walsh-spec")
MAGIC = {"walsh-grid": b"WALSHGRD", "walsh-spec": b"WALSHSPC"}
_HEADER = struct.Struct("<8sII")


def dumps(values, tag="walsh-grid") -> str:
    if tag not in TAGS:
        raise ValueError(f"unknown tag {tag!r}")
    values = np.asarray(values, dtype=float)
    N = resolution(values)
    rows = values.reshape(1, -1) if values.ndim == 1 else values
    lines = [f"{tag} {values.ndim} N={N}"]
    lines += [" ".join(repr(float(v)) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


def loads(text: str):
    """Parse the text format; returns ``(values, tag)``."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty grid file")
    head = lines[0].split()
    if len(head) != 3 or head[0] not in TAGS or not head[2].startswith("N="):
        raise ValueError(f"bad header line: {lines[0]!r}")
    tag, dims, N = head[0], int(head[1]), int(head[2][2:])
    if dims not in (1, 2):
        raise ValueError(f"dims must be 1 or 2, got {dims}")
    rows = [[float(tok) for tok in ln.split()] for ln in lines[1:]]
    side = 1 << N
    expected_rows = 1 if dims == 1 else side
    if len(rows) != expected_rows or any(len(r) != side for r in rows):
        raise ValueError(f"payload does not match header dims={dims} N={N}")
    values = np.array(rows, dtype=float)
    if dims == 1:
        values = values[0]
    if not np.all(np.isfinite(values)):
        raise ValueError("grid values must be finite")
    return values, tag


def to_bytes(values, tag="walsh-grid") -> bytes:
    values = np.asarray(values, dtype="<f8")
    N = resolution(values)
    return _HEADER.pack(MAGIC[tag], values.ndim, N) + values.tobytes(order="C")


def from_bytes(data: bytes):
    if len(data) < _HEADER.size:
        raise ValueError("truncated header")
    magic, dims, N = _HEADER.unpack_from(data)
    tags = {m: t for t, m in MAGIC.items()}
    if magic not in tags or dims not in (1, 2):
        raise ValueError("not a walsh grid binary file")
    shape = (1 << N,) * dims
    payload = np.frombuffer(data, dtype="<f8", offset=_HEADER.size)
    if payload.size != int(np.prod(shape)):
        raise ValueError("payload size does not match header")
    return payload.reshape(shape).astype(float), tags[magic]


def save(path, values, tag="walsh-grid", binary=None):
    """Write a grid; binary format is chosen by a ``.bin`` suffix unless forced."""
    path = str(path)
    if binary is None:
        binary = path.endswith(".bin")
    if binary:
        with open(path, "wb") as fh:
            fh.write(to_bytes(values, tag))
    else:
        with open(path, "w") as fh:
            fh.write(dumps(values, tag))


def load(path):
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:8] in MAGIC.values():
        return from_bytes(data)
    return loads(data.decode("ascii"))
