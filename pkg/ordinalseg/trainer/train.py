"""
The training protocol: Adam on minibatches of the combined objective, early
stopping on the validation loss and a final test evaluation of the restored
best parameters.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Callable, Optional

import numpy as np

from ..autodiff import Node, softmax
from ..core import Batch
from ..exceptions import ConfigValidationError, NumericError, TrainingError
from ..losses import Objective
from ..metrics import MetricReport, evaluate_batch
from ..options import Bound, OrdOptions
from .model import SegModel
from .optim import Adam, EarlyStopping
from .split import FoldPartition, kfold_split

if TYPE_CHECKING:
    from collections.abc import Sequence

class TrainConfig(OrdOptions):
    learning_rate: float = 1e-4
    batch_size: int = 16
    max_epochs: int = 200
    patience: int = 15
    loss_selection: str = "ce"
    lambda_combine: float = 1.0
    # weight inside qul (outer hinges) and expmse (variance)
    inner_lambda: float = 1.0
    folds: int = 5
    seed: int = 0
    # smallest drop in validation loss that counts as an improvement
    min_delta: float = 1e-6

    bounds = {
        "learning_rate": Bound(low=0.0, low_open=True),
        "batch_size": Bound(low=1),
        "max_epochs": Bound(low=1),
        "patience": Bound(low=1),
        "inner_lambda": Bound(low=0.0, low_open=True),
        "lambda_combine": Bound(low=0.0),
        "folds": Bound(low=2),
        "seed": Bound(low=0),
        "min_delta": Bound(low=0.0),
    }

    def validate(self):
        if self.patience > self.max_epochs:
            raise ConfigValidationError(
                f"patience ({self.patience}) cannot exceed max_epochs "
                f"({self.max_epochs})",
                option="patience",
            )
        Objective.parse_selection(self.loss_selection)

    def objective(self, safe: bool = True) -> Objective:
        return Objective.from_selection(
            self.loss_selection,
            {
                "lambda_combine": self.lambda_combine,
                "qul_lambda": self.inner_lambda,
                "expmse_lambda": self.inner_lambda,
            },
            safe=safe,
        )


@dataclass(frozen=True)
class EpochStats:
    fold: int
    epoch: int
    train_loss: float
    validation_loss: float
    improved: bool


@dataclass(frozen=True)
class RunRecord:
    loss: str
    lambda_combine: float
    fold: int
    train_losses: tuple[float, ...]
    validation_losses: tuple[float, ...]
    selected_epoch: int
    test_report: MetricReport
    wall_clock: float = field(default=0.0, compare=False)

    def __post_init__(self):
        if len(self.train_losses) != len(self.validation_losses):
            raise TrainingError("Train and validation curves differ in length")
        if not 1 <= self.selected_epoch <= len(self.validation_losses):
            raise TrainingError(
                f"Selected epoch {self.selected_epoch} is outside the "
                f"{len(self.validation_losses)} epochs run"
            )

    @property
    def stopped_epoch(self) -> int:
        return len(self.validation_losses)


def _batch_loss(
    model: SegModel,
    objective: Objective,
    images: np.ndarray,
    labels: np.ndarray,
    params: Optional[dict[str, Node]] = None,
) -> Node:
    probs = softmax(model.forward(images, params))
    return objective.build(probs, labels)


def train_step(
    model: SegModel,
    optimizer: Adam,
    objective: Objective,
    images: np.ndarray,
    labels: np.ndarray,
) -> float:
    """One optimizer step on a minibatch, returns the loss before the step."""
    params = {name: Node(value) for name, value in model.params.items()}
    loss = _batch_loss(model, objective, images, labels, params)
    if not math.isfinite(loss.item()):
        raise NumericError(f"Loss is {loss.item()}", op="objective")
    loss.backward()
    optimizer.step(
        model.params,
        {name: node.grad for name, node in params.items() if node.grad is not None},
    )
    return loss.item()


def evaluate_loss(
    model: SegModel, objective: Objective, data: Batch, batch_size: int
) -> float:
    """Pixel-weighted mean objective over ``data`` without building gradients."""
    images, labels = data.image_array(), data.label_array()
    total = 0.0
    for start in range(0, data.count, batch_size):
        stop = min(start + batch_size, data.count)
        loss = _batch_loss(model, objective, images[start:stop], labels[start:stop])
        total += loss.item() * (stop - start)
    return total / data.count


def train(
    model: SegModel,
    data: Batch,
    config: TrainConfig,
    partition: Optional[FoldPartition] = None,
    fold: int = 0,
    objective: Optional[Objective] = None,
    on_epoch: Optional[Callable[[EpochStats], None]] = None,
) -> RunRecord:
    """
    Train ``model`` in place on one fold and return its record. Without a
    partition the first fold of ``kfold_split`` is used. Shuffling draws from a
    PCG64 stream seeded by the config seed and the fold index.
    """
    started = time.perf_counter()
    if partition is None:
        partition = kfold_split(data, config.folds, config.seed)[fold]
    if objective is None:
        objective = config.objective()

    train_data = data.subset(partition.train)
    validation_data = data.subset(partition.validation)
    images, labels = train_data.image_array(), train_data.label_array()
    rng = np.random.Generator(np.random.PCG64([config.seed, fold]))
    optimizer = Adam(config.learning_rate)
    stopping = EarlyStopping(config.patience, config.min_delta)
    train_losses: list[float] = []
    validation_losses: list[float] = []

    for epoch in range(1, config.max_epochs + 1):
        order = rng.permutation(train_data.count)
        epoch_total = 0.0
        try:
            for start in range(0, len(order), config.batch_size):
                chosen = order[start : start + config.batch_size]
                epoch_total += len(chosen) * train_step(
                    model, optimizer, objective, images[chosen], labels[chosen]
                )
            validation_loss = evaluate_loss(
                model, objective, validation_data, config.batch_size
            )
        except NumericError as error:
            raise TrainingError(
                f"Training diverged in epoch {epoch} of fold {fold}",
                error,
                epoch=epoch,
            ) from error
        if not math.isfinite(validation_loss):
            raise TrainingError(
                f"Validation loss is {validation_loss} in epoch {epoch} of fold {fold}",
                epoch=epoch,
            )

        train_losses.append(epoch_total / train_data.count)
        validation_losses.append(validation_loss)
        stop = stopping.update(epoch, validation_loss, model.state)
        if on_epoch is not None:
            on_epoch(
                EpochStats(
                    fold=fold,
                    epoch=epoch,
                    train_loss=train_losses[-1],
                    validation_loss=validation_loss,
                    improved=stopping.best_epoch == epoch,
                )
            )
        if stop:
            break

    assert stopping.best_state is not None
    model.load_state(stopping.best_state)
    test_data = data.subset(partition.test)
    report = evaluate_batch(
        model.predict(test_data.image_array()),
        test_data.label_array(),
        data.k_classes,
    )
    return RunRecord(
        loss=objective.name,
        lambda_combine=objective.lambda_combine,
        fold=fold,
        train_losses=tuple(train_losses),
        validation_losses=tuple(validation_losses),
        selected_epoch=stopping.best_epoch,
        test_report=report,
        wall_clock=time.perf_counter() - started,
    )


def mean_variance(model: SegModel, images: np.ndarray) -> float:
    """Mean per-pixel variance of the predicted class index."""
    probs = model.predict(images)
    classes = np.arange(1, probs.shape[-1] + 1)
    mean = probs @ classes
    return float((probs @ classes**2 - mean**2).mean())


def fold_records(
    data: Batch,
    config: TrainConfig,
    objective: Optional[Objective] = None,
    folds: Optional[Sequence[int]] = None,
    on_epoch: Optional[Callable[[EpochStats], None]] = None,
) -> list[RunRecord]:
    """Train a fresh model per fold, each initialised from the config seed."""
    partitions = kfold_split(data, config.folds, config.seed)
    records = []
    for fold in folds if folds is not None else range(config.folds):
        model = SegModel(
            data.k_classes, in_channels=data.images[0].shape[-1], seed=config.seed
        )
        records.append(
            train(model, data, config, partitions[fold], fold, objective, on_epoch)
        )
    return records
