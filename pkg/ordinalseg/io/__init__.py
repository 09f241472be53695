from .labels import LabelFile, read_label_file, read_labels, write_labels
from .tensor import read_tensor, write_tensor

__all__ = [
    "LabelFile",
    "read_label_file",
    "read_labels",
    "read_tensor",
    "write_labels",
    "write_tensor",
]
