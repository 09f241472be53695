"""
Hyperparameter grids: one training run per grid point and fold, fold scores
aggregated into intervals and every configuration compared with the
cross-entropy baseline.
"""

from __future__ import annotations

import itertools
from collections.abc import Iterator, Mapping
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Any, Callable, NamedTuple, Optional

from ..core import Batch
from ..exceptions import UsageError
from ..losses import Objective
from ..options import Bound
from ..stats import ComparisonVerdict, Interval, compare_intervals, fold_interval
from .model import SegModel
from .split import kfold_split
from .train import EpochStats, RunRecord, TrainConfig, train

# grid axes each ordinal term responds to, by option name
LOSS_AXES: Mapping[str, Mapping[str, str]] = {
    "qul": {"delta": "qul_delta", "inner_lambda": "qul_lambda"},
    "expmse": {"inner_lambda": "expmse_lambda"},
    "o2": {"delta": "o2_delta"},
    "cssdf": {"gamma": "gamma_decay", "p": "p_exponent"},
}

# columns of GridPoint.label, also used as csv headers
LABEL_KEYS = ("loss", "weight", "lambda", "delta", "gamma", "p")

# metric name, MetricReport attribute, whether higher is better
METRICS = (
    ("dice", "dice_percent", True),
    ("cs", "cs_percent", False),
    ("up", "up_percent", True),
)


class GridConfig(TrainConfig):
    """
    Training settings plus the axes of a grid. Each entry of ``losses`` is a loss
    selection such as ``qul`` or ``qul+cssdf``. Axes a loss does not respond to
    collapse to a single unset value.
    """

    losses: tuple[str, ...] = ("qul",)
    lambdas: tuple[float, ...] = (1.0,)
    inner_lambdas: tuple[float, ...] = (1.0,)
    deltas: tuple[float, ...] = (0.05,)
    gammas: tuple[float, ...] = (0.5,)
    p_exponents: tuple[int, ...] = (1,)
    baseline: bool = False
    rho_threshold: float = 0.5

    bounds = {
        **TrainConfig.bounds,
        "lambdas": Bound(low=0.0),
        "inner_lambdas": Bound(low=0.0, low_open=True),
        "deltas": Bound(low=0.0, low_open=True),
        "gammas": Bound(low=0.0, low_open=True),
        "p_exponents": Bound(low=1, high=2),
        "rho_threshold": Bound(low=0.0, low_open=True),
    }

    def validate(self):
        super().validate()
        for selection in self.losses:
            Objective.parse_selection(selection)

    def points(self) -> list[GridPoint]:
        if not self.losses or not self.lambdas:
            raise UsageError("The hyperparameter grid is empty")
        points = [GridPoint("ce", 0.0)] if self.baseline else []
        for selection in self.losses:
            names = Objective.parse_selection(selection)
            if not names:
                points.append(GridPoint("ce", 0.0))
                continue
            axes = {axis for name in names for axis in LOSS_AXES.get(name, {})}
            values = [
                self.lambdas,
                self.deltas if "delta" in axes else (None,),
                self.gammas if "gamma" in axes else (None,),
                self.p_exponents if "p" in axes else (None,),
                self.inner_lambdas if "inner_lambda" in axes else (None,),
            ]
            if not all(values):
                raise UsageError(f"The grid for {selection!r} is empty")
            points.extend(
                GridPoint(selection, *combination)
                for combination in itertools.product(*values)
            )
        # a baseline listed twice trains once
        return list(dict.fromkeys(points))


class GridPoint(NamedTuple):
    loss: str
    lambda_combine: float
    delta: Optional[float] = None
    gamma: Optional[float] = None
    p: Optional[int] = None
    inner_lambda: Optional[float] = None

    def options(self) -> dict[str, Any]:
        options: dict[str, Any] = {"lambda_combine": self.lambda_combine}
        for name in Objective.parse_selection(self.loss):
            for axis, option in LOSS_AXES.get(name, {}).items():
                value = getattr(self, axis)
                if value is not None:
                    options[option] = value
        return options

    def objective(self, safe: bool = True) -> Objective:
        return Objective.from_selection(self.loss, self.options(), safe=safe)

    def label(self) -> str:
        values = (
            self.lambda_combine,
            self.inner_lambda,
            self.delta,
            self.gamma,
            self.p,
        )
        return " ".join(
            [f"loss={self.loss}"]
            + [
                f"{key}=" + ("-" if value is None else format(value, "g"))
                for key, value in zip(LABEL_KEYS[1:], values)
            ]
        )


@dataclass(frozen=True)
class GridComparison:
    point: GridPoint
    metric: str
    verdict: ComparisonVerdict


@dataclass(frozen=True)
class GridResult:
    records: Mapping[GridPoint, tuple[RunRecord, ...]]
    intervals: Mapping[GridPoint, Mapping[str, Optional[Interval]]]
    comparisons: tuple[GridComparison, ...]

    def iter_records(self) -> Iterator[tuple[GridPoint, RunRecord]]:
        for point, records in self.records.items():
            for record in records:
                yield point, record


def _run_task(
    task: tuple[Batch, GridConfig, GridPoint, int, bool],
) -> tuple[GridPoint, RunRecord]:
    data, config, point, fold, safe = task
    partition = kfold_split(data, config.folds, config.seed)[fold]
    model = SegModel(
        data.k_classes, in_channels=data.images[0].shape[-1], seed=config.seed
    )
    return point, train(
        model, data, config, partition, fold, point.objective(safe=safe)
    )


def _intervals(records: tuple[RunRecord, ...]) -> dict[str, Optional[Interval]]:
    intervals: dict[str, Optional[Interval]] = {}
    for metric, attribute, _ in METRICS:
        scores = [getattr(record.test_report, attribute) for record in records]
        intervals[metric] = (
            None if any(score is None for score in scores) else fold_interval(scores)
        )
    return intervals


def grid_run(
    data: Batch,
    grid: GridConfig,
    jobs: int = 1,
    safe: bool = True,
    on_epoch: Optional[Callable[[EpochStats], None]] = None,
    on_record: Optional[Callable[[GridPoint, RunRecord], None]] = None,
) -> GridResult:
    """
    Train every grid point on every fold. With ``jobs`` above 1 the runs go to a
    process pool, results are keyed by grid point and fold so the outcome does
    not depend on completion order. Per-epoch progress is only reported for
    sequential runs.
    """
    if jobs < 1:
        raise UsageError(f"jobs must be at least 1, got {jobs}")
    points = grid.points()
    for point in points:
        point.objective(safe=safe)

    tasks = [
        (data, grid, point, fold, safe)
        for point in points
        for fold in range(grid.folds)
    ]
    collected: dict[tuple[GridPoint, int], RunRecord] = {}
    if jobs == 1:
        partitions = kfold_split(data, grid.folds, grid.seed)
        for _, _, point, fold, _ in tasks:
            model = SegModel(
                data.k_classes, in_channels=data.images[0].shape[-1], seed=grid.seed
            )
            record = train(
                model,
                data,
                grid,
                partitions[fold],
                fold,
                point.objective(safe=safe),
                on_epoch,
            )
            collected[(point, fold)] = record
            if on_record is not None:
                on_record(point, record)
    else:
        with ProcessPoolExecutor(max_workers=jobs) as executor:
            for point, record in executor.map(_run_task, tasks):
                collected[(point, record.fold)] = record
                if on_record is not None:
                    on_record(point, record)

    records = {
        point: tuple(collected[(point, fold)] for fold in range(grid.folds))
        for point in points
    }
    intervals = {point: _intervals(runs) for point, runs in records.items()}

    comparisons = []
    baseline = GridPoint("ce", 0.0)
    if baseline in intervals:
        for point in points:
            if point == baseline:
                continue
            for metric, _, higher_is_better in METRICS:
                first, second = intervals[baseline][metric], intervals[point][metric]
                if first is None or second is None:
                    continue
                comparisons.append(
                    GridComparison(
                        point,
                        metric,
                        compare_intervals(
                            first,
                            second,
                            rho_threshold=grid.rho_threshold,
                            higher_is_better=higher_is_better,
                        ),
                    )
                )
    return GridResult(records, intervals, tuple(comparisons))
