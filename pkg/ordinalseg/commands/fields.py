from __future__ import annotations

import argparse

import numpy as np

from ..distance import (
    BinaryMask,
    clamp_sdf,
    euclidean_dt,
    saturated_dt,
    signed_df,
)
from ..exceptions import UsageError
from ..io import write_tensor
from .base import OrdSegCommand


def format_field(values: np.ndarray) -> list[str]:
    return [" ".join(format(value, ".6g") for value in row) for row in values]


class DistanceCommand(OrdSegCommand):
    __key__ = "dt"
    __help__ = "Distance transform or signed distance field of one class region"

    @classmethod
    def add_arguments(cls, parser: argparse.ArgumentParser):
        parser.add_argument(
            "--labels", required=True, metavar="PATH", help="PGM label map"
        )
        parser.add_argument(
            "--class",
            dest="class_index",
            required=True,
            type=int,
            help="The class whose region is measured",
        )
        parser.add_argument(
            "--gamma", type=float, help="Saturate the distance transform at this value"
        )
        parser.add_argument(
            "--signed",
            action="store_true",
            default=False,
            help="Compute the signed distance field instead",
        )
        parser.add_argument(
            "--gamma-hat", type=float, help="Clamp the signed distance field"
        )
        parser.add_argument(
            "--out", metavar="PATH", help="Write the field to a tensor file"
        )

    def run(self, args: argparse.Namespace):
        labels, maxval = self.read_labels(args.labels)
        if not 1 <= args.class_index <= maxval:
            raise UsageError(f"--class must lie in 1..{maxval}, got {args.class_index}")
        mask = BinaryMask(labels.values == args.class_index)

        if args.signed:
            if args.gamma is not None:
                raise UsageError("--gamma applies to unsigned transforms, use --gamma-hat")
            field = signed_df(mask)
            if args.gamma_hat is None:
                values = field.finite_values()
            else:
                values = clamp_sdf(field, args.gamma_hat).values
        else:
            if args.gamma_hat is not None:
                raise UsageError("--gamma-hat applies to signed fields (--signed)")
            if args.gamma is not None:
                values = saturated_dt(mask, args.gamma).values
            else:
                values = euclidean_dt(mask).values

        if args.out:
            write_tensor(args.out, values)
            self.ui.print_msg(f"Wrote field to <em>{args.out}</em>", verbosity=1)
        else:
            for line in format_field(values):
                self.ui.print_result(line)
