"""Weight-container round trips, layout pins, and validation errors."""

import json
import struct

import numpy as np
import pytest

from reprune.container import (
    MAGIC,
    VERSION,
    FilterMatrix,
    LayerSpec,
    ModelSnapshot,
    TensorRecord,
    filters_of,
    read_container,
    read_container_json,
    read_snapshot,
    write_container,
    write_container_json,
    write_snapshot,
)
from reprune.errors import (
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
from reprune.zoo import conv_chain


def tiny_snapshot(seed=0) -> ModelSnapshot:
    rng = np.random.default_rng(seed)
    w = rng.normal(size=(4, 3, 3, 3)).astype(np.float32)
    layers = [
        LayerSpec(name="input", kind="input", n_out=3),
        LayerSpec(
            name="conv0", kind="conv", n_in=3, n_out=4, kernel_h=3, kernel_w=3,
            out_h=8, out_w=8, predecessors=["input"],
        ),
        LayerSpec(name="output", kind="output", n_in=4, predecessors=["conv0"]),
    ]
    tensors = {"conv0.weight": TensorRecord(name="conv0.weight", data=w)}
    return ModelSnapshot(layers=layers, tensors=tensors, metadata={"note": "tiny"})


class TestRoundTrip:
    def test_binary_round_trip_bit_identical(self, tmp_path):
        snap = conv_chain(widths=(5, 7), seed=1)
        path = tmp_path / "m.fpwt"
        write_container(snap, path)
        again = read_container(path)
        assert again == snap
        for name, rec in snap.tensors.items():
            assert again.tensors[name].data.tobytes() == rec.data.tobytes()

    def test_json_round_trip_bit_identical(self, tmp_path):
        snap = tiny_snapshot()
        path = tmp_path / "m.json"
        write_container_json(snap, path)
        again = read_container_json(path)
        assert again == snap

    def test_signed_zero_survives(self, tmp_path):
        snap = tiny_snapshot()
        snap.tensors["conv0.weight"].data[0, 0, 0, 0] = -0.0
        path = tmp_path / "m.fpwt"
        write_container(snap, path)
        again = read_container(path)
        value = again.tensors["conv0.weight"].data[0, 0, 0, 0]
        assert value == 0.0 and np.signbit(value)

    def test_metadata_survives(self, tmp_path):
        snap = tiny_snapshot()
        snap.metadata["source"] = "unit-test"
        write_container(snap, tmp_path / "m.fpwt")
        assert read_container(tmp_path / "m.fpwt").metadata["source"] == "unit-test"

    def test_empty_snapshot_round_trips(self, tmp_path):
        empty = ModelSnapshot()
        write_container(empty, tmp_path / "e.fpwt")
        again = read_container(tmp_path / "e.fpwt")
        assert again.layers == [] and again.tensors == {}

    def test_format_dispatch(self, tmp_path):
        snap = tiny_snapshot()
        write_snapshot(snap, tmp_path / "a.fpwt", "fpwt")
        write_snapshot(snap, tmp_path / "a.json", "json")
        assert read_snapshot(tmp_path / "a.fpwt", "fpwt") == snap
        assert read_snapshot(tmp_path / "a.json", "json") == snap
        with pytest.raises(ValueError):
            write_snapshot(snap, tmp_path / "a.x", "xml")
        with pytest.raises(ValueError):
            read_snapshot(tmp_path / "a.fpwt", "xml")


class TestBinaryLayout:
    def test_fixed_header_fields(self, tmp_path):
        snap = tiny_snapshot()
        path = tmp_path / "m.fpwt"
        write_container(snap, path)
        blob = path.read_bytes()
        assert blob[:4] == MAGIC == b"FPWT"
        assert struct.unpack_from("<I", blob, 4)[0] == VERSION == 1
        (header_len,) = struct.unpack_from("<Q", blob, 8)
        header = json.loads(blob[16 : 16 + header_len])
        assert set(header) == {"tensors", "layers", "metadata"}

    def test_offsets_are_payload_relative_and_packed(self, tmp_path):
        snap = conv_chain(widths=(5, 7), seed=2)
        path = tmp_path / "m.fpwt"
        write_container(snap, path)
        blob = path.read_bytes()
        (header_len,) = struct.unpack_from("<Q", blob, 8)
        header = json.loads(blob[16 : 16 + header_len])
        expected = 0
        for entry in header["tensors"]:
            assert entry["offset"] == expected
            assert entry["byte_len"] == 4 * int(np.prod(entry["shape"]))
            assert entry["dtype"] == "float32"
            expected += entry["byte_len"]
        assert len(blob) == 16 + header_len + expected

    def test_payload_bytes_match_tensor(self, tmp_path):
        snap = tiny_snapshot()
        path = tmp_path / "m.fpwt"
        write_container(snap, path)
        blob = path.read_bytes()
        (header_len,) = struct.unpack_from("<Q", blob, 8)
        header = json.loads(blob[16 : 16 + header_len])
        entry = header["tensors"][0]
        start = 16 + header_len + entry["offset"]
        raw = blob[start : start + entry["byte_len"]]
        assert raw == snap.tensors["conv0.weight"].data.astype("<f4").tobytes()


class TestReadErrors:
    def write_blob(self, tmp_path, blob):
        path = tmp_path / "bad.fpwt"
        path.write_bytes(blob)
        return path

    def good_blob(self, tmp_path):
        path = tmp_path / "good.fpwt"
        write_container(tiny_snapshot(), path)
        return bytearray(path.read_bytes())

    def test_bad_magic(self, tmp_path):
        with pytest.raises(BadMagicError):
            read_container(self.write_blob(tmp_path, b"NOPE" + b"\0" * 32))

    def test_unsupported_version(self, tmp_path):
        blob = self.good_blob(tmp_path)
        struct.pack_into("<I", blob, 4, 2)
        with pytest.raises(UnsupportedVersionError):
            read_container(self.write_blob(tmp_path, bytes(blob)))

    def test_truncated_payload(self, tmp_path):
        blob = self.good_blob(tmp_path)
        with pytest.raises(TruncatedPayloadError):
            read_container(self.write_blob(tmp_path, bytes(blob[:-8])))

    def test_header_extends_past_file(self, tmp_path):
        blob = self.good_blob(tmp_path)
        struct.pack_into("<Q", blob, 8, len(blob))
        with pytest.raises(TruncatedPayloadError):
            read_container(self.write_blob(tmp_path, bytes(blob)))

    def test_garbage_header(self, tmp_path):
        header = b"not json at all"
        blob = MAGIC + struct.pack("<I", VERSION) + struct.pack("<Q", len(header)) + header
        with pytest.raises(HeaderError):
            read_container(self.write_blob(tmp_path, blob))

    def test_tensor_size_mismatch(self, tmp_path):
        blob = self.good_blob(tmp_path)
        (header_len,) = struct.unpack_from("<Q", blob, 8)
        header = json.loads(bytes(blob[16 : 16 + header_len]))
        header["tensors"][0]["byte_len"] -= 4
        raw = json.dumps(header, separators=(",", ":")).encode()
        patched = bytes(blob[:8]) + struct.pack("<Q", len(raw)) + raw + bytes(blob[16 + header_len :])
        with pytest.raises(TensorSizeError):
            read_container(self.write_blob(tmp_path, patched))

    def test_json_container_wrong_format_marker(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{"format": "something-else"}')
        with pytest.raises(BadMagicError):
            read_container_json(path)


class TestWriteValidation:
    def test_non_finite_rejected(self, tmp_path):
        snap = tiny_snapshot()
        snap.tensors["conv0.weight"].data[1, 1, 1, 1] = np.nan
        with pytest.raises(NonFiniteTensorError) as err:
            write_container(snap, tmp_path / "m.fpwt")
        assert "conv0.weight" in str(err.value)

    def test_duplicate_layer_names(self):
        snap = tiny_snapshot()
        snap.layers.append(LayerSpec(name="conv0", kind="output"))
        with pytest.raises(InvalidSnapshotError):
            snap.validate()

    def test_two_input_nodes(self):
        snap = tiny_snapshot()
        snap.layers.append(LayerSpec(name="input2", kind="input"))
        with pytest.raises(InvalidSnapshotError):
            snap.validate()

    def test_unknown_kind(self):
        snap = tiny_snapshot()
        snap.layers[1].kind = "pool"
        with pytest.raises(InvalidSnapshotError):
            snap.validate()

    def test_missing_predecessor(self):
        snap = tiny_snapshot()
        snap.layers[2].predecessors = ["ghost"]
        with pytest.raises(InvalidSnapshotError):
            snap.validate()

    def test_conv_weight_shape_mismatch(self):
        snap = tiny_snapshot()
        snap.layers[1].n_out = 5
        with pytest.raises(InvalidSnapshotError):
            snap.validate()

    def test_conv_missing_weight(self):
        snap = tiny_snapshot()
        del snap.tensors["conv0.weight"]
        with pytest.raises(InvalidSnapshotError):
            snap.validate()

    def test_cycle_detected(self):
        snap = tiny_snapshot()
        snap.layers[1].predecessors = ["input", "output"]
        with pytest.raises(InvalidSnapshotError):
            snap.validate()


class TestFilterMatrix:
    def test_rows_are_flattened_filters(self):
        snap = tiny_snapshot()
        fm = filters_of(snap, "conv0")
        w = snap.tensors["conv0.weight"].data
        assert fm.n_filters == 4 and fm.dim == 27
        assert fm.rows.dtype == np.float64
        for i in range(4):
            np.testing.assert_array_equal(fm.rows[i], w[i].ravel().astype(np.float64))

    def test_non_conv_layer_rejected(self):
        snap = tiny_snapshot()
        with pytest.raises(NotConvLayerError):
            filters_of(snap, "input")

    def test_unknown_layer_rejected(self):
        snap = tiny_snapshot()
        with pytest.raises(UnknownLayerError):
            filters_of(snap, "ghost")

    def test_matrix_must_be_2d_and_finite(self):
        with pytest.raises(InvalidSnapshotError):
            FilterMatrix(rows=np.zeros(3))
        with pytest.raises(InvalidSnapshotError):
            FilterMatrix(rows=np.array([[1.0, np.inf]]))
        with pytest.raises(InvalidSnapshotError):
            FilterMatrix(rows=np.zeros((0, 3)))
