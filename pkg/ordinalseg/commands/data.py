from __future__ import annotations

import argparse
from pathlib import Path
from typing import get_args

from ..exceptions import UsageError
from ..io import write_labels, write_tensor
from ..synth import Geometry, SceneSpec, generate
from .base import OrdSegCommand


def add_scene_flags(parser: argparse.ArgumentParser):
    group = parser.add_argument_group("scenes")
    group.add_argument("--size", type=int, help="Height and width of each scene")
    group.add_argument("--classes", type=int, help="Number of ordinal classes")
    group.add_argument(
        "--geometry", choices=get_args(Geometry), help="Layout of the class layers"
    )
    group.add_argument(
        "--noise", type=float, help="Standard deviation of the image noise"
    )


def scene_overrides(args: argparse.Namespace) -> dict:
    return {
        "height": args.size,
        "width": args.size,
        "k_classes": args.classes,
        "geometry": args.geometry,
        "noise_sigma": args.noise,
        "seed": args.seed,
    }


class SynthCommand(OrdSegCommand):
    __key__ = "synth"
    __help__ = "Write synthetic ordinal scenes as tensor and PGM file pairs"

    @classmethod
    def add_arguments(cls, parser: argparse.ArgumentParser):
        parser.add_argument(
            "--out", required=True, metavar="DIR", help="Directory to write scenes to"
        )
        parser.add_argument("--count", type=int, default=1, help="Number of scenes")
        parser.add_argument("--seed", type=int, help="Seed of the first scene")
        add_scene_flags(parser)

    def run(self, args: argparse.Namespace):
        if args.count < 1:
            raise UsageError(f"--count must be at least 1, got {args.count}")
        spec = SceneSpec.load(**scene_overrides(args))
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        for index in range(args.count):
            image, labels = generate(spec.replace(seed=spec.seed + index))
            write_tensor(out / f"scene_{index:03d}.tensor", image)
            write_labels(out / f"scene_{index:03d}.pgm", labels, spec.k_classes)
            self.ui.print_msg(f"Wrote <em>scene_{index:03d}</em>", verbosity=1)
        self.ui.print_result(f"scenes={args.count} out={out}")
