from .grid import GridConfig, GridPoint, GridResult, grid_run
from .model import SegModel
from .optim import Adam, EarlyStopping
from .split import FoldPartition, kfold_split
from .train import (
    EpochStats,
    RunRecord,
    TrainConfig,
    fold_records,
    train,
    train_step,
)

__all__ = [
    "Adam",
    "EarlyStopping",
    "EpochStats",
    "FoldPartition",
    "GridConfig",
    "GridPoint",
    "GridResult",
    "RunRecord",
    "SegModel",
    "TrainConfig",
    "fold_records",
    "grid_run",
    "kfold_split",
    "train",
    "train_step",
]
