"""Reader and writer for FPWT weight containers.

Layout, little-endian throughout:

    bytes 0..3     magic b"FPWT"
    bytes 4..7     u32 format version (currently 1)
    bytes 8..15    u64 header length H
    bytes 16..16+H UTF-8 JSON header:
                     {"tensors": [{"name", "shape", "dtype", "offset", "byte_len"}, ...],
                      "layers":  [{"name", "kind", "n_in", "n_out", ...}, ...],
                      "metadata": {...}}
    then           raw float32 payloads, offsets relative to the end of the header

Tensors are packed flat in row-major order. Only float32 is stored; other
dtypes (integer step counters and the like) travel in the metadata instead.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import FormatError, ShapeError

MAGIC = b"FPWT"
VERSION = 1

LAYER_KINDS = ("conv", "linear", "batchnorm", "add", "input", "output")


@dataclass
class Container:
    """Parsed FPWT content: layer graph, shaped float32 tensors, metadata."""

    layers: list[dict]
    tensors: dict[str, np.ndarray]
    metadata: dict = field(default_factory=dict)

    def layer(self, name: str) -> dict:
        for spec in self.layers:
            if spec["name"] == name:
                return spec
        raise KeyError(name)


def write_fpwt(container: Container, path) -> None:
    entries = []
    payloads = []
    offset = 0
    for name, data in container.tensors.items():
        arr = np.ascontiguousarray(data, dtype=np.float32)
        if not np.isfinite(arr).all():
            raise ShapeError(f"tensor {name!r} contains non-finite values")
        raw = arr.astype("<f4", copy=False).tobytes(order="C")
        entries.append(
            {
                "name": name,
                "shape": list(arr.shape),
                "dtype": "float32",
                "offset": offset,
                "byte_len": len(raw),
            }
        )
        payloads.append(raw)
        offset += len(raw)

    header = {
        "tensors": entries,
        "layers": [dict(spec) for spec in container.layers],
        "metadata": dict(container.metadata),
    }
    header_bytes = json.dumps(header, separators=(",", ":")).encode("utf-8")

    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", VERSION))
        fh.write(struct.pack("<Q", len(header_bytes)))
        fh.write(header_bytes)
        for raw in payloads:
            fh.write(raw)


def read_fpwt(path) -> Container:
    with open(path, "rb") as fh:
        blob = fh.read()

    if blob[:4] != MAGIC:
        raise FormatError(f"bad magic {blob[:4]!r}, expected {MAGIC!r}")
    if len(blob) < 16:
        raise FormatError("file too short for the fixed header")
    (version,) = struct.unpack_from("<I", blob, 4)
    if version != VERSION:
        raise FormatError(f"unsupported format version {version}")
    (header_len,) = struct.unpack_from("<Q", blob, 8)
    if 16 + header_len > len(blob):
        raise FormatError("header length runs past end of file")
    try:
        header = json.loads(blob[16 : 16 + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError(f"header is not valid JSON: {exc}") from exc

    payload = blob[16 + header_len :]
    tensors: dict[str, np.ndarray] = {}
    for entry in header.get("tensors", []):
        name = entry["name"]
        shape = tuple(int(s) for s in entry["shape"])
        if entry.get("dtype", "float32") != "float32":
            raise FormatError(f"tensor {name!r} has unsupported dtype {entry['dtype']!r}")
        start, length = int(entry["offset"]), int(entry["byte_len"])
        count = int(np.prod(shape, dtype=np.int64)) if shape else 1
        if length != 4 * count:
            raise FormatError(
                f"tensor {name!r} declares {length} bytes for {count} float32 values"
            )
        if start < 0 or start + length > len(payload):
            raise FormatError(f"tensor {name!r} payload runs past end of file")
        arr = np.frombuffer(payload[start : start + length], dtype="<f4").reshape(shape)
        tensors[name] = arr.copy()

    return Container(
        layers=[dict(spec) for spec in header.get("layers", [])],
        tensors=tensors,
        metadata=dict(header.get("metadata", {})),
    )
