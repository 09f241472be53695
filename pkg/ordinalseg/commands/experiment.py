from __future__ import annotations

import argparse
import csv
from pathlib import Path
from typing import Any

from ..config import ExperimentConfigFile
from ..exceptions import ConfigValidationError, UsageError
from ..synth import SceneSpec, make_dataset
from ..trainer import (
    EpochStats,
    GridConfig,
    GridPoint,
    GridResult,
    RunRecord,
    grid_run,
)
from ..trainer.grid import LABEL_KEYS, METRICS
from .base import OrdSegCommand
from .data import add_scene_flags, scene_overrides

MIN_SCENES = 10
DEFAULT_OUT = "ordseg-results"


def _number(value: float) -> str:
    return format(value, ".17g")


def record_line(point: GridPoint, record: RunRecord) -> str:
    """One fold as key=value pairs, floats written with full precision."""
    report = record.test_report
    fields = [
        point.label(),
        f"fold={record.fold + 1}",
        f"selected_epoch={record.selected_epoch}",
        f"epochs={record.stopped_epoch}",
        f"dice={_number(report.dice_percent)}",
        f"cs={_number(report.cs_percent)}",
        "up=-" if report.up_percent is None else f"up={_number(report.up_percent)}",
        "train_loss=" + ",".join(map(_number, record.train_losses)),
        "val_loss=" + ",".join(map(_number, record.validation_losses)),
    ]
    return " ".join(fields)


def summary_rows(result: GridResult) -> list[list[str]]:
    rows = [[*LABEL_KEYS, "folds", *(metric for metric, _, _ in METRICS)]]
    for point, intervals in result.intervals.items():
        keys = [pair.split("=", 1)[1] for pair in point.label().split(" ")]
        rows.append(
            [
                *keys,
                str(len(result.records[point])),
                *(
                    "-" if intervals[metric] is None else intervals[metric].format()
                    for metric, _, _ in METRICS
                ),
            ]
        )
    return rows


class TrainDemoCommand(OrdSegCommand):
    __key__ = "train-demo"
    __help__ = "Cross-validate losses on synthetic scenes and tabulate the metrics"

    @classmethod
    def add_arguments(cls, parser: argparse.ArgumentParser):
        parser.add_argument(
            "--loss",
            metavar="SELECTION",
            help="Loss selection such as ce, qul or qul+cssdf",
        )
        parser.add_argument(
            "--weight", type=float, help="Weight of the ordinal terms next to ce"
        )
        parser.add_argument(
            "--lambda",
            dest="lambda_",
            type=float,
            help="Weight inside the loss (qul: outer hinges, expmse: variance)",
        )
        parser.add_argument("--delta", type=float, help="Margin of qul or o2")
        parser.add_argument("--gamma", type=float, help="Boundary decay of cssdf")
        parser.add_argument(
            "--p", type=int, choices=(1, 2), help="Discrepancy exponent of cssdf"
        )
        parser.add_argument("--scenes", type=int, help="Number of synthetic scenes")
        parser.add_argument("--seed", type=int, help="Seed of scenes, splits and models")
        parser.add_argument(
            "--config", metavar="PATH", help="Experiment file (toml, yaml or json)"
        )
        parser.add_argument(
            "--baseline",
            action="store_const",
            const=True,
            help="Also train cross-entropy alone and compare against it",
        )
        parser.add_argument("--epochs", type=int, help="Maximum number of epochs")
        parser.add_argument("--patience", type=int, help="Early stopping patience")
        parser.add_argument("--lr", type=float, help="Adam learning rate")
        parser.add_argument("--batch-size", type=int, help="Minibatch size")
        parser.add_argument("--folds", type=int, help="Cross-validation folds")
        parser.add_argument(
            "--jobs", type=int, default=1, help="Train folds in this many processes"
        )
        parser.add_argument(
            "--unsafe",
            action="store_true",
            default=False,
            help="Allow hyperparameters outside the tuned ranges",
        )
        parser.add_argument(
            "--out",
            metavar="DIR",
            default=DEFAULT_OUT,
            help="Directory for records.txt and summary.csv (default: %(default)s)",
        )
        add_scene_flags(parser)

    def load_settings(
        self, args: argparse.Namespace
    ) -> tuple[GridConfig, SceneSpec, int]:
        content: dict[str, Any] = {}
        if args.config:
            content = dict(ExperimentConfigFile(args.config).load())
        scene_table = content.pop("scene", {})
        configured = content.pop("scenes", None)
        scenes = args.scenes if args.scenes is not None else configured
        if scenes is None:
            raise UsageError("The number of scenes is required (--scenes)")
        if not isinstance(scenes, int) or scenes < MIN_SCENES:
            raise UsageError(
                f"train-demo needs at least {MIN_SCENES} scenes, got {scenes}"
            )

        overrides = {
            "losses": None if args.loss is None else (args.loss,),
            "lambdas": None if args.weight is None else (args.weight,),
            "inner_lambdas": None if args.lambda_ is None else (args.lambda_,),
            "deltas": None if args.delta is None else (args.delta,),
            "gammas": None if args.gamma is None else (args.gamma,),
            "p_exponents": None if args.p is None else (args.p,),
            "max_epochs": args.epochs,
            "patience": args.patience,
            "learning_rate": args.lr,
            "batch_size": args.batch_size,
            "folds": args.folds,
            "seed": args.seed,
            "baseline": args.baseline,
        }
        merged = {**content, **{k: v for k, v in overrides.items() if v is not None}}
        max_epochs = merged.get("max_epochs", GridConfig.max_epochs)
        if "patience" not in merged and isinstance(max_epochs, int):
            merged["patience"] = min(GridConfig.patience, max_epochs)

        try:
            grid = GridConfig.load(merged)
        except ConfigValidationError as error:
            if args.config and error.filename is None:
                error.filename = args.config
            raise
        if not isinstance(scene_table, dict):
            raise ConfigValidationError(
                "Expected a table of scene options", option="scene", filename=args.config
            )
        scene = SceneSpec.load(scene_table, **scene_overrides(args)).replace(
            seed=grid.seed
        )
        return grid, scene, scenes

    def run(self, args: argparse.Namespace):
        grid, scene, scenes = self.load_settings(args)
        data = make_dataset(scene, scenes)
        self.ui.print_msg(
            f"Training {len(grid.points())} configuration(s) on {scenes} "
            f"{scene.height}x{scene.width} scenes, {grid.folds} folds",
            verbosity=1,
        )

        def on_epoch(stats: EpochStats):
            self.ui.print_msg(
                f"  fold {stats.fold + 1} epoch {stats.epoch}: "
                f"train={stats.train_loss:.6g} val={stats.validation_loss:.6g}"
                + (" <em>*</em>" if stats.improved else ""),
                verbosity=2,
            )

        def on_record(point: GridPoint, record: RunRecord):
            self.ui.print_msg(
                f"<em2>{point.label()}</em2> fold={record.fold + 1} "
                f"{record.test_report.format()} epoch={record.selected_epoch}",
                verbosity=1,
            )

        result = grid_run(
            data,
            grid,
            jobs=args.jobs,
            safe=not args.unsafe,
            on_epoch=on_epoch,
            on_record=on_record,
        )
        self.write_results(Path(args.out), result)

        for point, intervals in result.intervals.items():
            self.ui.print_result(
                point.label()
                + "".join(
                    f" {metric}=" + ("-" if value is None else value.format())
                    for metric, value in intervals.items()
                )
            )
        for comparison in result.comparisons:
            self.ui.print_result(
                f"ce vs {comparison.point.label()} metric={comparison.metric} "
                f"verdict={comparison.verdict.format()}"
            )

    def write_results(self, out: Path, result: GridResult):
        out.mkdir(parents=True, exist_ok=True)
        with (out / "records.txt").open("w", encoding="utf-8") as file:
            for point, record in result.iter_records():
                file.write(record_line(point, record) + "\n")
        with (out / "summary.csv").open("w", encoding="utf-8", newline="") as file:
            csv.writer(file, lineterminator="\n").writerows(summary_rows(result))
        if result.comparisons:
            with (out / "verdicts.csv").open("w", encoding="utf-8", newline="") as file:
                writer = csv.writer(file, lineterminator="\n")
                writer.writerow([*LABEL_KEYS, "metric", "verdict"])
                for comparison in result.comparisons:
                    keys = [
                        pair.split("=", 1)[1]
                        for pair in comparison.point.label().split(" ")
                    ]
                    writer.writerow(
                        [*keys, comparison.metric, comparison.verdict.format()]
                    )
        self.ui.print_msg(f"Wrote results to <em>{out}</em>", verbosity=1)
