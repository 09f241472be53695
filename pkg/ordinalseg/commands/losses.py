from __future__ import annotations

import argparse
from typing import Any

import numpy as np

from ..autodiff import finite_diff_check, softmax
from ..core import softmax_array
from ..exceptions import UsageError
from ..io import write_tensor
from ..losses import OrdinalLoss
from .base import OrdSegCommand

# the option each hyperparameter flag sets, per loss
LOSS_FLAGS: dict[str, dict[str, str]] = {
    "ce": {},
    "qul": {"lambda": "qul_lambda", "delta": "qul_delta"},
    "expmse": {"lambda": "expmse_lambda"},
    "o2": {"delta": "o2_delta"},
    "csnp": {},
    "csdt": {"delta": "delta_conf", "gamma": "gamma_clamp"},
    "cssdf": {
        "delta": "delta_conf",
        "gamma": "gamma_decay",
        "gamma_hat": "gamma_hat",
        "p": "p_exponent",
    },
}

# losses that read ground-truth labels
NEEDS_LABELS = ("ce", "qul", "expmse", "o2", "cssdf")


def add_hyperparameter_flags(parser: argparse.ArgumentParser):
    group = parser.add_argument_group("hyperparameters")
    group.add_argument(
        "--lambda",
        dest="lambda_",
        type=float,
        help="Weight inside the loss (qul: outer hinges, expmse: variance)",
    )
    group.add_argument(
        "--delta",
        type=float,
        help="Margin (qul, o2) or confidence threshold (csdt, cssdf)",
    )
    group.add_argument(
        "--gamma",
        type=float,
        help="Distance clamp (csdt) or boundary decay rate (cssdf)",
    )
    group.add_argument(
        "--gamma-hat", type=float, help="Signed distance clamp (cssdf)"
    )
    group.add_argument(
        "--p", type=int, choices=(1, 2), help="Discrepancy exponent (cssdf)"
    )
    group.add_argument(
        "--unsafe",
        action="store_true",
        default=False,
        help="Allow hyperparameters outside the tuned ranges",
    )


def loss_options(name: str, args: argparse.Namespace) -> dict[str, Any]:
    flags = LOSS_FLAGS[name]
    options = {}
    for flag in ("lambda", "delta", "gamma", "gamma_hat", "p"):
        value = getattr(args, "lambda_" if flag == "lambda" else flag)
        if value is None:
            continue
        if flag not in flags:
            raise UsageError(
                f"--{flag.replace('_', '-')} does not apply to loss {name!r}"
            )
        options[flags[flag]] = value
    return options


class LossCommand(OrdSegCommand):
    __key__ = "loss"
    __help__ = "Evaluate one loss on a probability tensor and ground-truth labels"

    @classmethod
    def add_arguments(cls, parser: argparse.ArgumentParser):
        parser.add_argument(
            "--name", required=True, choices=tuple(LOSS_FLAGS), help="Loss to compute"
        )
        parser.add_argument(
            "--pred", required=True, metavar="PATH", help="Probability tensor file"
        )
        parser.add_argument("--gt", metavar="PATH", help="Ground-truth PGM label map")
        parser.add_argument(
            "--grad",
            metavar="PATH",
            help="Also write the gradient with respect to the probabilities here",
        )
        add_hyperparameter_flags(parser)

    def run(self, args: argparse.Namespace):
        loss = OrdinalLoss.lookup(args.name).from_mapping(
            loss_options(args.name, args), safe=not args.unsafe
        )
        probs, _, _ = self.read_prediction(args.pred)
        if probs is None:
            raise UsageError("--pred must be a probability tensor, not a label map")
        if args.gt is not None:
            labels = self.read_labels(args.gt)[0].values
        elif args.name in NEEDS_LABELS:
            raise UsageError(f"Loss {args.name!r} needs ground-truth labels (--gt)")
        else:
            labels = np.ones(probs.shape[:-1], dtype=np.int64)

        value = loss(probs, labels)
        # normalise -0.0
        self.ui.print_result(format(value.total + 0.0, ".12g"))
        if args.grad:
            write_tensor(args.grad, loss.gradient(probs, labels))
            self.ui.print_msg(f"Wrote gradient to <em>{args.grad}</em>", verbosity=1)


class GradCheckCommand(OrdSegCommand):
    __key__ = "gradcheck"
    __help__ = "Check a loss gradient through softmax against finite differences"

    @classmethod
    def add_arguments(cls, parser: argparse.ArgumentParser):
        parser.add_argument(
            "--loss", required=True, choices=tuple(LOSS_FLAGS), help="Loss to check"
        )
        parser.add_argument("--classes", type=int, default=3, help="Number of classes")
        parser.add_argument("--size", type=int, default=6, help="Grid side length")
        parser.add_argument("--seed", type=int, default=0, help="Random seed")
        parser.add_argument(
            "--step", type=float, default=1e-5, help="Finite difference step"
        )
        parser.add_argument(
            "--tol", type=float, default=1e-4, help="Relative error tolerance"
        )
        add_hyperparameter_flags(parser)

    def run(self, args: argparse.Namespace):
        if args.classes < 2 or args.size < 1:
            raise UsageError("gradcheck needs --classes >= 2 and --size >= 1")
        loss = OrdinalLoss.lookup(args.loss).from_mapping(
            loss_options(args.loss, args), safe=not args.unsafe
        )
        rng = np.random.Generator(np.random.PCG64(args.seed))
        logits = rng.standard_normal((1, args.size, args.size, args.classes))
        labels = rng.integers(1, args.classes + 1, size=(1, args.size, args.size))
        # geometry from thresholded predictions stays fixed at the base point
        reference = softmax_array(logits)

        report = finite_diff_check(
            lambda x: loss.build(softmax(x), labels, reference),
            logits,
            h=args.step,
            tol_rel=args.tol,
        )
        self.ui.print_result(f"loss={args.loss} {report.describe()}")
        report.raise_for_failure()
