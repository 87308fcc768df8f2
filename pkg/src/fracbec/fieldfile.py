"""Persistence of sampled fields.

Binary layout (little endian)::

    b"FRACFLD1" | u32 n | u32 0 | f64 L | n * f64 samples

The text form is JSON ``{"n": ..., "L": ..., "values": [...]}``.
"""

import json
import struct

import numpy as np

from .errors import FieldFormatError
from .spectral import Field, Grid1D

MAGIC = b"FRACFLD1"
_HEADER = struct.Struct("<8sIId")


def to_bytes(f: Field) -> bytes:
    head = _HEADER.pack(MAGIC, f.grid.n, 0, f.grid.L)
    return head + np.asarray(f.values, dtype="<f8").tobytes()


def from_bytes(data: bytes) -> Field:
    if len(data) < _HEADER.size:
        raise FieldFormatError("truncated header")
    magic, n, pad, L = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise FieldFormatError(f"bad magic {magic!r}")
    if pad != 0:
        raise FieldFormatError("nonzero padding word")
    body = data[_HEADER.size :]
    if len(body) != 8 * n:
        raise FieldFormatError(f"expected {8 * n} payload bytes, got {len(body)}")
    values = np.frombuffer(body, dtype="<f8").astype(float)
    return Field(Grid1D(n, L), values)


def to_json(f: Field) -> str:
    return json.dumps({"n": f.grid.n, "L": f.grid.L, "values": [float(v) for v in f.values]})


def from_json(text: str) -> Field:
    try:
        obj = json.loads(text)
        n, L, values = int(obj["n"]), float(obj["L"]), obj["values"]
    except (KeyError, TypeError, ValueError) as exc:
        raise FieldFormatError(f"malformed field JSON: {exc}") from exc
    if len(values) != n:
        raise FieldFormatError(f"n={n} but {len(values)} values")
    return Field(Grid1D(n, L), np.asarray(values, dtype=float))


def save(f: Field, path):
    path = str(path)
    if path.endswith(".json"):
        with open(path, "w") as fh:
            fh.write(to_json(f))
    else:
        with open(path, "wb") as fh:
            fh.write(to_bytes(f))


def load(path) -> Field:
    path = str(path)
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:8] == MAGIC:
        return from_bytes(data)
    return from_json(data.decode())
