"""
Binary tensor files holding exact float64 values.

Layout::

    OTSR1\n
    dtype=f64 dims=<d> shape=<n1,...,nd> order=row-major endian=little\n
    <8 * n1 * ... * nd bytes of little-endian IEEE 754 doubles>
"""

from __future__ import annotations

import re
from pathlib import Path
from typing import Union

import numpy as np

from ..exceptions import FormatError, ValidationError

MAGIC = b"OTSR1\n"
HEADER_PATTERN = re.compile(
    rb"dtype=f64 dims=(\d+) shape=(\d+(?:,\d+)*) order=row-major endian=little\n"
)
MAX_HEADER = 4096


def encode_tensor(array: np.ndarray) -> bytes:
    values = np.asarray(array, dtype=np.float64)
    if values.ndim == 0:
        raise ValidationError("Tensor files hold arrays with at least one axis")
    if not np.isfinite(values).all():
        location = tuple(int(i) for i in np.argwhere(~np.isfinite(values))[0])
        raise ValidationError(
            f"Cannot store non-finite value at index {location}", location=location
        )
    header = (
        f"dtype=f64 dims={values.ndim} "
        f"shape={','.join(str(n) for n in values.shape)} "
        "order=row-major endian=little\n"
    )
    return MAGIC + header.encode("ascii") + values.astype("<f8").tobytes(order="C")


def decode_tensor(content: bytes, path: Union[str, Path, None] = None) -> np.ndarray:
    source = None if path is None else str(path)
    if not content.startswith(MAGIC):
        mismatch = next(
            (
                index
                for index, (got, want) in enumerate(zip(content, MAGIC))
                if got != want
            ),
            min(len(content), len(MAGIC)),
        )
        raise FormatError(
            "Not a tensor file, expected magic 'OTSR1'", path=source, offset=mismatch
        )

    header_end = content.find(b"\n", len(MAGIC), len(MAGIC) + MAX_HEADER)
    match = (
        HEADER_PATTERN.fullmatch(content, len(MAGIC), header_end + 1)
        if header_end >= 0
        else None
    )
    if match is None:
        raise FormatError(
            "Malformed tensor header, expected 'dtype=f64 dims=D shape=N1,...,ND "
            "order=row-major endian=little'",
            path=source,
            offset=len(MAGIC),
        )

    dims = int(match.group(1))
    shape = tuple(int(n) for n in match.group(2).split(b","))
    if 0 in shape:
        raise FormatError(
            f"Shape {shape} has an empty axis", path=source, offset=match.start(2)
        )
    if dims != len(shape):
        raise FormatError(
            f"Header declares {dims} dims but a shape with {len(shape)} entries",
            path=source,
            offset=match.start(1),
        )

    payload_start = header_end + 1
    expected = 8 * int(np.prod(shape))
    actual = len(content) - payload_start
    if actual != expected:
        raise FormatError(
            f"Payload holds {actual} bytes but shape {shape} needs {expected}",
            path=source,
            offset=payload_start + min(actual, expected),
        )
    return (
        np.frombuffer(content, dtype="<f8", offset=payload_start)
        .reshape(shape)
        .astype(np.float64)
    )


def write_tensor(path: Union[str, Path], array: np.ndarray):
    Path(path).write_bytes(encode_tensor(array))


def read_tensor(path: Union[str, Path]) -> np.ndarray:
    try:
        content = Path(path).read_bytes()
    except OSError as error:
        raise FormatError(
            f"Cannot read tensor file: {error.strerror}", path=str(path)
        ) from error
    return decode_tensor(content, path)
