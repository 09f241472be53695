import numpy as np
import pytest

from ordinalseg.core import LabelMap
from ordinalseg.exceptions import FormatError, ValidationError
from ordinalseg.io import (
    read_label_file,
    read_labels,
    read_tensor,
    write_labels,
    write_tensor,
)
from ordinalseg.io.labels import decode_labels, encode_labels
from ordinalseg.io.tensor import decode_tensor, encode_tensor


def test_tensor_values_survive_exactly(tmp_path):
    values = np.array([[0.1, 1 / 3, -0.0], [1e-300, -2.5e17, np.nextafter(1.0, 2.0)]])
    path = tmp_path / "values.tensor"
    write_tensor(path, values)
    loaded = read_tensor(path)
    assert loaded.dtype == np.float64
    assert loaded.shape == (2, 3)
    assert loaded.tobytes() == values.tobytes()


def test_tensor_layout():
    content = encode_tensor(np.array([[1.0, 2.0]]))
    header = b"OTSR1\ndtype=f64 dims=2 shape=1,2 order=row-major endian=little\n"
    assert content.startswith(header)
    assert content[len(header) :] == np.array([1.0, 2.0], dtype="<f8").tobytes()


def test_tensor_rejects_non_finite_values():
    with pytest.raises(ValidationError, match=r"index \(1,\)"):
        encode_tensor(np.array([1.0, np.nan]))
    with pytest.raises(ValidationError):
        encode_tensor(np.array(1.0))


def test_tensor_wrong_magic_reports_offset():
    content = b"OTSR2\n" + encode_tensor(np.ones(2))[6:]
    with pytest.raises(FormatError, match="magic") as excinfo:
        decode_tensor(content, "bad.tensor")
    assert excinfo.value.offset == 4
    assert excinfo.value.path == "bad.tensor"


def test_tensor_truncated_payload():
    content = encode_tensor(np.ones((2, 2)))
    with pytest.raises(FormatError, match="Payload holds 24 bytes") as excinfo:
        decode_tensor(content[:-8])
    assert excinfo.value.offset == len(content) - 8


@pytest.mark.parametrize(
    ("header", "message"),
    [
        (b"dtype=f32 dims=1 shape=2 order=row-major endian=little\n", "Malformed"),
        (b"dtype=f64 dims=2 shape=2 order=row-major endian=little\n", "2 dims"),
        (b"dtype=f64 dims=2 shape=2,0 order=row-major endian=little\n", "empty axis"),
    ],
)
def test_tensor_bad_headers(header, message):
    with pytest.raises(FormatError, match=message):
        decode_tensor(b"OTSR1\n" + header + bytes(16))


def test_missing_files(tmp_path):
    with pytest.raises(FormatError, match="Cannot read tensor file"):
        read_tensor(tmp_path / "absent.tensor")
    with pytest.raises(FormatError, match="Cannot read label file"):
        read_labels(tmp_path / "absent.pgm")


def test_label_layout():
    labels = LabelMap(np.array([[1, 2, 3], [2, 3, 4]]))
    assert encode_labels(labels, 4) == b"P2\n3 2\n4\n1 2 3\n2 3 4\n"
    assert encode_labels(labels) == encode_labels(labels, 4)
    with pytest.raises(ValidationError, match="maxval 3"):
        encode_labels(labels, 3)


def test_labels_round_trip_with_wrapped_rows(tmp_path):
    values = np.tile(np.arange(1, 6), (3, 9))
    path = tmp_path / "wide.pgm"
    write_labels(path, LabelMap(values), 6)
    assert max(len(line.split()) for line in path.read_bytes().splitlines()) == 32
    loaded = read_label_file(path)
    assert loaded.maxval == 6
    assert np.array_equal(loaded.labels.values, values)


def test_labels_with_comments():
    content = b"P2\n# written by hand\n2 1 # width height\n3\n1 3\n"
    assert np.array_equal(decode_labels(content).labels.values, [[1, 3]])


@pytest.mark.parametrize(
    ("content", "message", "offset"),
    [
        (b"P5\n1 1\n2\n1\n", "magic 'P2'", 0),
        (b"P2\n2 2\n3\n1 2 3\n", "File ends before pixel", 15),
        (b"P2\n2 1\n3\n0 1\n", "class 0", 9),
        (b"P2\n2 1\n2\n1 3\n", "class 3, expected 1..2", 11),
        (b"P2\n2 1\n0\n1 1\n", "maxval 0", 7),
        (b"P2\n0 1\n3\n", "is empty", 7),
        (b"P2\n1 1\n3\nx\n", "found 'x'", 9),
        (b"P2\n1 1\n3\n1 2\n", "after the last pixel", 11),
    ],
)
def test_malformed_label_files(content, message, offset):
    with pytest.raises(FormatError, match=message) as excinfo:
        decode_labels(content, "labels.pgm")
    assert excinfo.value.offset == offset
    assert str(excinfo.value).endswith("in file labels.pgm")
