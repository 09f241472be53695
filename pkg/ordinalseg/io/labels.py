"""
Label maps as plain-text PGM (P2) files whose maxval is the number of classes.
"""

from __future__ import annotations

import re
from pathlib import Path
from typing import NamedTuple, Optional, Union

import numpy as np

from ..core import LabelMap
from ..exceptions import FormatError, ValidationError

TOKEN_PATTERN = re.compile(rb"#[^\n]*|\S+")
VALUES_PER_LINE = 32


class LabelFile(NamedTuple):
    labels: LabelMap
    maxval: int


def encode_labels(labels: LabelMap, k_classes: Optional[int] = None) -> bytes:
    if not isinstance(labels, LabelMap):
        labels = LabelMap(np.asarray(labels))
    values = labels.values
    maxval = int(values.max()) if k_classes is None else k_classes
    if values.max() > maxval:
        raise ValidationError(
            f"Label {values.max()} does not fit maxval {maxval}"
        )
    height, width = values.shape
    lines = [b"P2", f"{width} {height}".encode(), str(maxval).encode()]
    for row in values:
        for start in range(0, width, VALUES_PER_LINE):
            lines.append(
                " ".join(str(v) for v in row[start : start + VALUES_PER_LINE]).encode()
            )
    return b"\n".join(lines) + b"\n"


def _tokens(content: bytes):
    for match in TOKEN_PATTERN.finditer(content):
        if not match.group().startswith(b"#"):
            yield match.start(), match.group()


def decode_labels(content: bytes, path: Union[str, Path, None] = None) -> LabelFile:
    source = None if path is None else str(path)
    tokens = _tokens(content)

    def next_int(what: str) -> tuple[int, int]:
        try:
            offset, token = next(tokens)
        except StopIteration:
            raise FormatError(
                f"File ends before {what}", path=source, offset=len(content)
            ) from None
        if not token.isdigit():
            raise FormatError(
                f"Expected {what} but found {token[:16].decode(errors='replace')!r}",
                path=source,
                offset=offset,
            )
        return offset, int(token)

    magic = next(tokens, None)
    if magic is None or magic[1] != b"P2":
        raise FormatError(
            "Not a plain PGM file, expected magic 'P2'",
            path=source,
            offset=0 if magic is None else magic[0],
        )
    _, width = next_int("image width")
    _, height = next_int("image height")
    maxval_offset, maxval = next_int("maxval")
    if width < 1 or height < 1:
        raise FormatError(
            f"Image size {width}x{height} is empty", path=source, offset=maxval_offset
        )
    if not 1 <= maxval < 65536:
        raise FormatError(
            f"maxval {maxval} is outside 1..65535", path=source, offset=maxval_offset
        )

    values = np.empty(height * width, dtype=np.int64)
    for index in range(values.size):
        offset, value = next_int(f"pixel {divmod(index, width)}")
        if not 1 <= value <= maxval:
            raise FormatError(
                f"Pixel {divmod(index, width)} has class {value}, expected 1..{maxval}",
                path=source,
                offset=offset,
            )
        values[index] = value

    trailing = next(tokens, None)
    if trailing is not None:
        raise FormatError(
            "Unexpected data after the last pixel", path=source, offset=trailing[0]
        )
    return LabelFile(LabelMap(values.reshape(height, width)), maxval)


def write_labels(
    path: Union[str, Path], labels: LabelMap, k_classes: Optional[int] = None
):
    Path(path).write_bytes(encode_labels(labels, k_classes))


def read_label_file(path: Union[str, Path]) -> LabelFile:
    try:
        content = Path(path).read_bytes()
    except OSError as error:
        raise FormatError(
            f"Cannot read label file: {error.strerror}", path=str(path)
        ) from error
    return decode_labels(content, path)


def read_labels(path: Union[str, Path]) -> LabelMap:
    return read_label_file(path).labels
