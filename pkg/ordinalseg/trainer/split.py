"""
Cross-validation partitions: a held-out test share fixed across folds, with the
remaining samples rotated through validation windows.
"""

from __future__ import annotations

import math
from typing import NamedTuple, Union

import numpy as np

from ..core import Batch
from ..exceptions import PartitionError

TEST_SHARE = 0.2


class FoldPartition(NamedTuple):
    train: tuple[int, ...]
    validation: tuple[int, ...]
    test: tuple[int, ...]


def _round_half_up(value: float) -> int:
    return int(math.floor(value + 0.5))


def kfold_split(
    data: Union[Batch, int], folds: int, seed: int
) -> list[FoldPartition]:
    """
    Shuffle the samples with a PCG64 stream seeded by ``seed``, hold out the first
    20% (at least one sample) as the test set and give fold f the validation
    window of round(n_rest / folds) samples starting at f * n_rest // folds,
    wrapping around. Everything else in the rest trains.
    """
    count = data.count if isinstance(data, Batch) else int(data)
    if folds < 2:
        raise PartitionError(f"Cross-validation needs at least 2 folds, got {folds}")
    if count < 2 * folds:
        raise PartitionError(
            f"{count} samples are too few for {folds} folds, at least "
            f"{2 * folds} are needed"
        )

    order = np.random.Generator(np.random.PCG64(seed)).permutation(count)
    test_size = max(1, _round_half_up(TEST_SHARE * count))
    test, rest = order[:test_size], order[test_size:]
    validation_size = _round_half_up(len(rest) / folds)

    partitions = []
    for fold in range(folds):
        start = fold * len(rest) // folds
        window = (start + np.arange(validation_size)) % len(rest)
        in_window = np.zeros(len(rest), dtype=bool)
        in_window[window] = True
        partitions.append(
            FoldPartition(
                train=tuple(sorted(int(i) for i in rest[~in_window])),
                validation=tuple(sorted(int(i) for i in rest[in_window])),
                test=tuple(sorted(int(i) for i in test)),
            )
        )
    return partitions
