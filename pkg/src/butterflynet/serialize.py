"""ParamSet container format.

Layout: magic ``BFNP1\\n``, a uint32 header length, a JSON header (network
spec, array names/shapes in order, dtype, byte order), the raw little-endian
float64 array payloads in header order, and a trailing CRC32 of the payload.
A plain-text sidecar ``<path>.spec.txt`` mirrors the spec for humans.
Round-trips are bit exact.
"""

import json
import struct
import zlib
from dataclasses import asdict
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .networks import NetworkSpec, ParamSet

MAGIC = b"BFNP1\n"


def _spec_to_dict(spec: NetworkSpec) -> dict:
    return asdict(spec)


def _spec_from_dict(d: dict) -> NetworkSpec:
    return NetworkSpec(**d)


def save_params(pset: ParamSet, path) -> None:
    path = Path(path)
    header = {
        "spec": _spec_to_dict(pset.spec),
        "arrays": [
            {"name": k, "shape": list(v.shape)} for k, v in pset.arrays.items()
        ],
        "dtype": "<f8",
    }
    hbytes = json.dumps(header, sort_keys=True).encode()
    payload = b"".join(
        np.ascontiguousarray(v, dtype="<f8").tobytes() for v in pset.arrays.values()
    )
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", len(hbytes)))
        fh.write(hbytes)
        fh.write(payload)
        fh.write(struct.pack("<I", zlib.crc32(payload)))
    sidecar = path.with_suffix(path.suffix + ".spec.txt")
    lines = [f"{k} = {v}" for k, v in _spec_to_dict(pset.spec).items()]
    sidecar.write_text("\n".join(lines) + "\n")


def load_params(path) -> ParamSet:
    raw = Path(path).read_bytes()
    if raw[: len(MAGIC)] != MAGIC:
        raise ValidationError(f"{path}: bad magic bytes")
    off = len(MAGIC)
    (hlen,) = struct.unpack_from("<I", raw, off)
    off += 4
    header = json.loads(raw[off : off + hlen])
    off += hlen
    payload = raw[off:-4]
    (crc,) = struct.unpack_from("<I", raw, len(raw) - 4)
    if zlib.crc32(payload) != crc:
        raise ValidationError(f"{path}: checksum mismatch")
    spec = _spec_from_dict(header["spec"])
    arrays = {}
    pos = 0
    for entry in header["arrays"]:
        shape = tuple(entry["shape"])
        n = int(np.prod(shape)) if shape else 1
        arr = np.frombuffer(payload, dtype="<f8", count=n, offset=pos)
        arrays[entry["name"]] = arr.reshape(shape).astype(np.float64)
        pos += n * 8
    if pos != len(payload):
        raise ValidationError(f"{path}: payload length mismatch")
    return ParamSet(spec, arrays)
