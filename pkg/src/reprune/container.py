"""Weight container: snapshot types plus FPWT binary and JSON file formats.

FPWT layout (little-endian throughout):

    bytes 0..3    magic b"FPWT"
    bytes 4..7    u32 format version (currently 1)
    bytes 8..15   u64 header length H
    bytes 16..16+H UTF-8 JSON header:
                    {"tensors": [{"name", "shape", "dtype", "offset", "byte_len"}, ...],
                     "layers":  [LayerSpec fields ...],
                     "metadata": {...}}
    then          raw float32 payloads, offsets relative to the end of the header

Tensors are stored flat in row-major order with no padding between them.
Only float32 is supported. Non-finite values are rejected at write time.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BadMagicError,
    HeaderError,
    InvalidSnapshotError,
    NonFiniteTensorError,
    NotConvLayerError,
    TensorSizeError,
    TruncatedPayloadError,
    UnknownLayerError,
    UnsupportedVersionError,
)

MAGIC = b"FPWT"
VERSION = 1

LAYER_KINDS = ("conv", "linear", "batchnorm", "add", "input", "output")


@dataclass
class TensorRecord:
    """One named float32 tensor. `data` is kept shaped, row-major."""

    name: str
    data: np.ndarray

    def __post_init__(self):
        self.data = np.ascontiguousarray(self.data, dtype=np.float32)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(self.data.shape)

    def __eq__(self, other):
        if not isinstance(other, TensorRecord):
            return NotImplemented
        return (
            self.name == other.name
            and self.shape == other.shape
            and self.data.tobytes() == other.data.tobytes()
        )


@dataclass
class LayerSpec:
    """Static description of one layer in the model graph.

    Channel and kernel fields only apply to some kinds; unused fields are 0.
    `predecessors` names the layers feeding this one (empty for the input node).
    """

    name: str
    kind: str
    n_in: int = 0
    n_out: int = 0
    kernel_h: int = 0
    kernel_w: int = 0
    out_h: int = 0
    out_w: int = 0
    stride: int = 1
    padding: int = 0
    predecessors: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "kind": self.kind,
            "n_in": self.n_in,
            "n_out": self.n_out,
            "kernel_h": self.kernel_h,
            "kernel_w": self.kernel_w,
            "out_h": self.out_h,
            "out_w": self.out_w,
            "stride": self.stride,
            "padding": self.padding,
            "predecessors": list(self.predecessors),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LayerSpec":
        return cls(
            name=d["name"],
            kind=d["kind"],
            n_in=int(d.get("n_in", 0)),
            n_out=int(d.get("n_out", 0)),
            kernel_h=int(d.get("kernel_h", 0)),
            kernel_w=int(d.get("kernel_w", 0)),
            out_h=int(d.get("out_h", 0)),
            out_w=int(d.get("out_w", 0)),
            stride=int(d.get("stride", 1)),
            padding=int(d.get("padding", 0)),
            predecessors=list(d.get("predecessors", [])),
        )


@dataclass
class ModelSnapshot:
    """Ordered layer graph plus named tensors plus free-form metadata."""

    layers: list[LayerSpec] = field(default_factory=list)
    tensors: dict[str, TensorRecord] = field(default_factory=dict)
    metadata: dict[str, str] = field(default_factory=dict)

    def layer(self, name: str) -> LayerSpec:
        for spec in self.layers:
            if spec.name == name:
                return spec
        raise UnknownLayerError(f"no layer named {name!r}")

    def conv_layers(self) -> list[LayerSpec]:
        return [s for s in self.layers if s.kind == "conv"]

    def weight(self, layer_name: str) -> TensorRecord:
        key = f"{layer_name}.weight"
        if key not in self.tensors:
            raise UnknownLayerError(f"no weight tensor {key!r}")
        return self.tensors[key]

    def validate(self) -> None:
        """Raise InvalidSnapshotError on any structural violation."""
        names = [s.name for s in self.layers]
        if len(set(names)) != len(names):
            raise InvalidSnapshotError("duplicate layer names")
        by_name = {s.name: s for s in self.layers}
        inputs = [s for s in self.layers if s.kind == "input"]
        if self.layers and len(inputs) != 1:
            raise InvalidSnapshotError(
                f"expected exactly one input node, found {len(inputs)}"
            )
        for spec in self.layers:
            if spec.kind not in LAYER_KINDS:
                raise InvalidSnapshotError(
                    f"layer {spec.name!r} has unknown kind {spec.kind!r}"
                )
            for pred in spec.predecessors:
                if pred not in by_name:
                    raise InvalidSnapshotError(
                        f"layer {spec.name!r} references missing predecessor {pred!r}"
                    )
            if spec.kind == "input" and spec.predecessors:
                raise InvalidSnapshotError("input node must have no predecessors")
            if spec.kind == "conv":
                if min(spec.n_in, spec.n_out, spec.kernel_h, spec.kernel_w) < 1:
                    raise InvalidSnapshotError(
                        f"conv layer {spec.name!r} has non-positive dimensions"
                    )
                key = f"{spec.name}.weight"
                if key not in self.tensors:
                    raise InvalidSnapshotError(f"conv layer {spec.name!r} has no weight")
                want = (spec.n_out, spec.n_in, spec.kernel_h, spec.kernel_w)
                got = self.tensors[key].shape
                if got != want:
                    raise InvalidSnapshotError(
                        f"weight {key!r} has shape {got}, spec says {want}"
                    )
            if spec.kind == "batchnorm":
                for tname, rec in self.tensors.items():
                    if tname.startswith(spec.name + ".") and rec.shape != (spec.n_out,):
                        raise InvalidSnapshotError(
                            f"batchnorm tensor {tname!r} has shape {rec.shape}, "
                            f"expected ({spec.n_out},)"
                        )
        self._check_acyclic(by_name)

    def _check_acyclic(self, by_name) -> None:
        state: dict[str, int] = {}  # 0 visiting, 1 done

        for root in by_name:
            if root in state:
                continue
            stack = [(root, iter(by_name[root].predecessors))]
            state[root] = 0
            while stack:
                node, preds = stack[-1]
                advanced = False
                for pred in preds:
                    if state.get(pred) == 0:
                        raise InvalidSnapshotError(f"cycle through layer {pred!r}")
                    if pred not in state:
                        state[pred] = 0
                        stack.append((pred, iter(by_name[pred].predecessors)))
                        advanced = True
                        break
                if not advanced:
                    state[node] = 1
                    stack.pop()

    def __eq__(self, other):
        if not isinstance(other, ModelSnapshot):
            return NotImplemented
        return (
            [s.to_dict() for s in self.layers] == [s.to_dict() for s in other.layers]
            and list(self.tensors) == list(other.tensors)
            and all(self.tensors[k] == other.tensors[k] for k in self.tensors)
            and self.metadata == other.metadata
        )


@dataclass
class FilterMatrix:
    """One conv layer's filters flattened to rows, ready for clustering.

    Rows are float64 copies of the float32 weights (exact widening), one row
    per output filter, each of length n_in * kernel_h * kernel_w.
    """

    rows: np.ndarray
    layer_name: str = ""

    def __post_init__(self):
        self.rows = np.ascontiguousarray(self.rows, dtype=np.float64)
        if self.rows.ndim != 2:
            raise InvalidSnapshotError("filter matrix must be 2-D")
        if self.rows.shape[0] < 1 or self.rows.shape[1] < 1:
            raise InvalidSnapshotError("filter matrix must be at least 1x1")
        if not np.isfinite(self.rows).all():
            raise InvalidSnapshotError("filter matrix holds non-finite values")

    @property
    def n_filters(self) -> int:
        return self.rows.shape[0]

    @property
    def dim(self) -> int:
        return self.rows.shape[1]


def filters_of(snapshot: ModelSnapshot, layer_name: str) -> FilterMatrix:
    """Flatten one conv layer's weight to a (n_out, n_in*h*w) row matrix."""
    spec = snapshot.layer(layer_name)
    if spec.kind != "conv":
        raise NotConvLayerError(f"layer {layer_name!r} has kind {spec.kind!r}")
    weight = snapshot.weight(layer_name).data
    rows = weight.reshape(spec.n_out, -1)
    return FilterMatrix(rows=rows, layer_name=layer_name)


def _check_finite(snapshot: ModelSnapshot) -> None:
    bad = [name for name, rec in snapshot.tensors.items()
           if not np.isfinite(rec.data).all()]
    if bad:
        raise NonFiniteTensorError(
            "non-finite values in tensor(s): " + ", ".join(sorted(bad))
        )


def write_container(snapshot: ModelSnapshot, path) -> None:
    """Serialize a snapshot to an FPWT file (see module docstring for layout)."""
    snapshot.validate()
    _check_finite(snapshot)

    entries = []
    offset = 0
    payloads = []
    for name, rec in snapshot.tensors.items():
        raw = rec.data.astype("<f4", copy=False).tobytes(order="C")
        entries.append(
            {
                "name": name,
                "shape": list(rec.shape),
                "dtype": "float32",
                "offset": offset,
                "byte_len": len(raw),
            }
        )
        payloads.append(raw)
        offset += len(raw)

    header = {
        "tensors": entries,
        "layers": [s.to_dict() for s in snapshot.layers],
        "metadata": dict(snapshot.metadata),
    }
    header_bytes = json.dumps(header, separators=(",", ":")).encode("utf-8")

    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", VERSION))
        fh.write(struct.pack("<Q", len(header_bytes)))
        fh.write(header_bytes)
        for raw in payloads:
            fh.write(raw)


def read_container(path) -> ModelSnapshot:
    """Parse an FPWT file back into a validated snapshot."""
    with open(path, "rb") as fh:
        blob = fh.read()

    if blob[:4] != MAGIC:
        raise BadMagicError(f"bad magic {blob[:4]!r}, expected {MAGIC!r}")
    if len(blob) < 16:
        raise TruncatedPayloadError("file shorter than the fixed header")
    (version,) = struct.unpack_from("<I", blob, 4)
    if version != VERSION:
        raise UnsupportedVersionError(f"container version {version}, reader supports {VERSION}")
    (header_len,) = struct.unpack_from("<Q", blob, 8)
    if 16 + header_len > len(blob):
        raise TruncatedPayloadError("header extends past end of file")
    try:
        header = json.loads(blob[16 : 16 + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise HeaderError(f"unparsable header: {exc}") from exc

    payload = blob[16 + header_len :]
    tensors: dict[str, TensorRecord] = {}
    for entry in header.get("tensors", []):
        name = entry["name"]
        shape = tuple(int(x) for x in entry["shape"])
        if entry.get("dtype", "float32") != "float32":
            raise HeaderError(f"tensor {name!r} has unsupported dtype {entry['dtype']!r}")
        nbytes = int(entry["byte_len"])
        count = int(np.prod(shape, dtype=np.int64)) if shape else 1
        if nbytes != 4 * count:
            raise TensorSizeError(
                f"tensor {name!r}: shape {shape} needs {4 * count} bytes, "
                f"header declares {nbytes}"
            )
        start = int(entry["offset"])
        if start < 0 or start + nbytes > len(payload):
            raise TruncatedPayloadError(
                f"tensor {name!r} extends past end of payload"
            )
        data = np.frombuffer(payload, dtype="<f4", count=count, offset=start)
        tensors[name] = TensorRecord(name=name, data=data.reshape(shape).copy())

    snapshot = ModelSnapshot(
        layers=[LayerSpec.from_dict(d) for d in header.get("layers", [])],
        tensors=tensors,
        metadata=dict(header.get("metadata", {})),
    )
    snapshot.validate()
    return snapshot


def write_container_json(snapshot: ModelSnapshot, path) -> None:
    """Write the JSON "toy" form: same content, tensors as nested lists."""
    snapshot.validate()
    _check_finite(snapshot)
    doc = {
        "format": "fpwt-json",
        "version": VERSION,
        "layers": [s.to_dict() for s in snapshot.layers],
        "tensors": {
            name: {"shape": list(rec.shape), "dtype": "float32",
                   "data": rec.data.tolist()}
            for name, rec in snapshot.tensors.items()
        },
        "metadata": dict(snapshot.metadata),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)


def read_container_json(path) -> ModelSnapshot:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise HeaderError(f"unparsable JSON container: {exc}") from exc
    if doc.get("format") != "fpwt-json":
        raise BadMagicError("not an fpwt-json document")
    if doc.get("version") != VERSION:
        raise UnsupportedVersionError(f"fpwt-json version {doc.get('version')}")
    tensors = {}
    for name, entry in doc.get("tensors", {}).items():
        data = np.asarray(entry["data"], dtype=np.float32)
        shape = tuple(int(x) for x in entry["shape"])
        if data.shape != shape:
            raise TensorSizeError(
                f"tensor {name!r}: data shape {data.shape} != declared {shape}"
            )
        tensors[name] = TensorRecord(name=name, data=data)
    snapshot = ModelSnapshot(
        layers=[LayerSpec.from_dict(d) for d in doc.get("layers", [])],
        tensors=tensors,
        metadata=dict(doc.get("metadata", {})),
    )
    snapshot.validate()
    return snapshot


def read_snapshot(path, fmt: str = "fpwt") -> ModelSnapshot:
    if fmt == "fpwt":
        return read_container(path)
    if fmt == "json":
        return read_container_json(path)
    raise ValueError(f"unknown container format {fmt!r}")


def write_snapshot(snapshot: ModelSnapshot, path, fmt: str = "fpwt") -> None:
    if fmt == "fpwt":
        write_container(snapshot, path)
    elif fmt == "json":
        write_container_json(snapshot, path)
    else:
        raise ValueError(f"unknown container format {fmt!r}")
