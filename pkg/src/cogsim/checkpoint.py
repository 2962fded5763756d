"""Versioned binary checkpoint format shared by reasoner and policy models.

Layout: magic ``CGSM``, format version, JSON header (model kind, hidden
size, seed, array manifest), then little-endian float64 array payloads in
manifest order.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

MAGIC = b"CGSM"
VERSION = 1


def save(path: str | Path, kind: str, meta: dict, arrays: dict[str, np.ndarray]) -> None:
    header = {
        "kind": kind,
        "meta": meta,
        "arrays": [{"name": k, "shape": list(v.shape)} for k, v in arrays.items()],
    }
    hdr = json.dumps(header).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", VERSION, len(hdr)))
        fh.write(hdr)
        for v in arrays.values():
            fh.write(np.ascontiguousarray(v, dtype="<f8").tobytes())


def load(path: str | Path, expect_kind: str | None = None) -> tuple[dict, dict[str, np.ndarray]]:
    with open(path, "rb") as fh:
        if fh.read(4) != MAGIC:
            raise ValueError(f"not a checkpoint file: {path}")
        version, hdr_len = struct.unpack("<II", fh.read(8))
        if version != VERSION:
            raise ValueError(f"unsupported checkpoint version {version}")
        header = json.loads(fh.read(hdr_len).decode("utf-8"))
        if expect_kind is not None and header["kind"] != expect_kind:
            raise ValueError(f"expected {expect_kind} checkpoint, found {header['kind']}")
        arrays = {}
        for spec in header["arrays"]:
            shape = tuple(spec["shape"])
            n = int(np.prod(shape)) if shape else 1
            buf = fh.read(8 * n)
            arrays[spec["name"]] = np.frombuffer(buf, dtype="<f8").reshape(shape).copy()
    return header["meta"], arrays
