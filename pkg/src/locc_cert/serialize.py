"""JSON codecs shared by every module.

A complex scalar is ``[re, im]``; a matrix is
``{"rows": n, "cols": m, "data": [...row-major...]}``; a vector is
``{"dim": d, "data": [...]}``.
"""

from __future__ import annotations

import json

import numpy as np

SCHEMA_VERSION = 1


def encode_complex(z) -> list[float]:
    z = complex(z)
    return [float(z.real), float(z.imag)]


def decode_complex(obj) -> complex:
    if not (isinstance(obj, (list, tuple)) and len(obj) == 2):
        raise ValueError(f"complex scalar must be [re, im], got {obj!r}")
    return complex(float(obj[0]), float(obj[1]))


def encode_vector(v) -> dict:
    v = np.asarray(v, dtype=complex).reshape(-1)
    return {"dim": int(v.size), "data": [encode_complex(z) for z in v]}


def decode_vector(obj) -> np.ndarray:
    try:
        dim = int(obj["dim"])
        data = obj["data"]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed vector: {exc}") from None
    if len(data) != dim:
        raise ValueError(f"vector declares dim {dim} but has {len(data)} entries")
    return np.array([decode_complex(z) for z in data], dtype=complex)


def encode_matrix(M) -> dict:
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2:
        raise ValueError(f"expected a matrix, got shape {M.shape}")
    return {
        "rows": int(M.shape[0]),
        "cols": int(M.shape[1]),
        "data": [encode_complex(z) for z in M.reshape(-1)],
    }


def decode_matrix(obj) -> np.ndarray:
    try:
        rows, cols = int(obj["rows"]), int(obj["cols"])
        data = obj["data"]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed matrix: {exc}") from None
    if len(data) != rows * cols:
        raise ValueError(f"matrix declares {rows}x{cols} but has {len(data)} entries")
    return np.array([decode_complex(z) for z in data], dtype=complex).reshape(rows, cols)


def dumps(obj) -> str:
    # float repr is the shortest string that round-trips exactly
    return json.dumps(obj, separators=(",", ":"), allow_nan=False)
