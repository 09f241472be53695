from __future__ import annotations

import argparse

from ..exceptions import ValidationError
from ..metrics import DEFAULT_EPSILON, evaluate
from ..stats import DEFAULT_RHO_THRESHOLD, Interval, compare_intervals
from .base import OrdSegCommand, interval_pair


class EvalCommand(OrdSegCommand):
    __key__ = "eval"
    __help__ = "Dice, CS and UP of a prediction against ground-truth labels"

    @classmethod
    def add_arguments(cls, parser: argparse.ArgumentParser):
        parser.add_argument(
            "--pred",
            required=True,
            metavar="PATH",
            help="Probability tensor file, or a PGM label map",
        )
        parser.add_argument(
            "--gt", required=True, metavar="PATH", help="Ground-truth PGM label map"
        )
        parser.add_argument(
            "--epsilon",
            type=float,
            default=DEFAULT_EPSILON,
            help="Stabiliser of the CS ratios (default: %(default)g)",
        )

    def run(self, args: argparse.Namespace):
        gt, gt_maxval = self.read_labels(args.gt)
        probs, pred_labels, k_classes = self.read_prediction(args.pred)
        if probs is not None:
            if probs.ndim == 3 and probs.shape[:2] != gt.values.shape:
                raise ValidationError(
                    f"Prediction grid {probs.shape[:2]} does not match ground truth "
                    f"grid {gt.values.shape}"
                )
            if gt_maxval > k_classes:
                raise ValidationError(
                    f"Ground truth declares {gt_maxval} classes but the prediction "
                    f"has {k_classes}"
                )
            report = evaluate(probs, gt, k_classes, args.epsilon)
        else:
            assert pred_labels is not None
            report = evaluate(
                pred_labels, gt, max(k_classes, gt_maxval), args.epsilon
            )

        self.ui.print_result(report.format())
        for k, score in enumerate(report.per_class_dice, start=1):
            self.ui.print_msg(f"dice_class_{k}={100 * score:.1f}", verbosity=1)


class CompareCommand(OrdSegCommand):
    __key__ = "compare"
    __help__ = "Decide whether one mean ± std interval is inferior to another"

    @classmethod
    def add_arguments(cls, parser: argparse.ArgumentParser):
        parser.add_argument(
            "--a", required=True, metavar="MU,SIGMA", help="First interval"
        )
        parser.add_argument(
            "--b", required=True, metavar="MU,SIGMA", help="Second interval"
        )
        parser.add_argument(
            "--rho",
            type=float,
            default=DEFAULT_RHO_THRESHOLD,
            help="Threshold of the overlap ratio condition (default: %(default)g)",
        )
        parser.add_argument(
            "--lower-is-better",
            action="store_true",
            default=False,
            help="Compare a metric where lower values are better, such as CS",
        )

    def run(self, args: argparse.Namespace):
        first = Interval(*interval_pair(args.a))
        second = Interval(*interval_pair(args.b))
        verdict = compare_intervals(
            first,
            second,
            rho_threshold=args.rho,
            higher_is_better=not args.lower_is_better,
        )
        self.ui.print_result(verdict.format())
        if verdict.rho is not None:
            self.ui.print_msg(f"rho={verdict.rho:.6g}", verbosity=1)
        if verdict.skipped:
            self.ui.print_msg(
                f"skipped={','.join(verdict.skipped)} (zero standard deviation)",
                verbosity=1,
            )
