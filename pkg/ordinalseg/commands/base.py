from __future__ import annotations

import argparse
from collections.abc import Sequence
from pathlib import Path
from typing import TYPE_CHECKING, ClassVar, NoReturn, Optional

import numpy as np

from ..exceptions import UsageError
from ..io import read_label_file, read_tensor

if TYPE_CHECKING:
    from ..core import LabelMap
    from ..ui import OrdSegUi


def raise_usage_error(message: str) -> NoReturn:
    raise UsageError(message)


def interval_pair(text: str) -> tuple[float, float]:
    parts = text.split(",")
    try:
        if len(parts) != 2:
            raise ValueError
        mu, sigma = (float(part) for part in parts)
    except ValueError:
        raise UsageError(
            f"Malformed interval {text!r}, expected 'mean,std' e.g. '0.8,0.05'"
        ) from None
    return mu, sigma


class MetaCommand(type):
    """
    This metaclass makes all descendants of OrdSegCommand register themselves
    under their key on declaration.
    """

    def __init__(cls, *args):
        super().__init__(*args)
        if cls.__name__ == "OrdSegCommand":
            return

        assert isinstance(getattr(cls, "__key__", None), str)
        assert isinstance(getattr(cls, "__help__", None), str)
        OrdSegCommand._OrdSegCommand__command_types[cls.__key__] = cls


class OrdSegCommand(metaclass=MetaCommand):
    """
    A subcommand of the CLI. Subclasses declare their flags in ``add_arguments``
    and do their work in ``run``, returning the exit code.
    """

    __key__: ClassVar[str]
    __help__: ClassVar[str]
    __command_types: ClassVar[dict[str, type[OrdSegCommand]]] = {}

    def __init__(self, ui: OrdSegUi):
        self.ui = ui

    @classmethod
    def get_commands(cls) -> tuple[tuple[str, str], ...]:
        return tuple(
            (key, command.__help__) for key, command in cls.__command_types.items()
        )

    @classmethod
    def lookup(cls, name: str) -> type[OrdSegCommand]:
        try:
            return cls.__command_types[name]
        except KeyError:
            raise UsageError(
                f"Unknown command {name!r}, expected one of: "
                + ", ".join(cls.__command_types)
            ) from None

    @classmethod
    def add_arguments(cls, parser: argparse.ArgumentParser):
        pass

    def build_parser(self) -> argparse.ArgumentParser:
        parser = argparse.ArgumentParser(
            prog=f"{self.ui.program_name} {self.__key__}",
            description=self.__help__,
            add_help=False,
            allow_abbrev=False,
        )
        parser.error = raise_usage_error  # type: ignore[method-assign]
        parser.add_argument(
            "-h",
            "--help",
            dest="help",
            action="store_true",
            default=False,
            help="Show this help page and exit",
        )
        self.add_arguments(parser)
        return parser

    def __call__(self, cli_args: Sequence[str]) -> int:
        parser = self.build_parser()
        args = parser.parse_args(cli_args)
        if args.help:
            self.ui.print_msg(parser.format_help().rstrip("\n"))
            return 0
        return self.run(args) or 0

    def run(self, args: argparse.Namespace) -> Optional[int]:
        raise NotImplementedError

    @staticmethod
    def read_labels(path: str) -> tuple[LabelMap, int]:
        label_file = read_label_file(path)
        return label_file.labels, label_file.maxval

    @staticmethod
    def read_prediction(path: str) -> tuple[Optional[np.ndarray], Optional[LabelMap], int]:
        """
        A prediction file holds probabilities as a tensor, or decoded labels as a
        PGM. Returns the probabilities or the labels, and the class count.
        """
        if Path(path).suffix == ".pgm":
            labels, maxval = OrdSegCommand.read_labels(path)
            return None, labels, maxval
        probs = read_tensor(path)
        return probs, None, probs.shape[-1]
