import sys
from collections.abc import Sequence
from typing import IO, TYPE_CHECKING

from .exceptions import ComputationError, OrdSegException, UsageError

if TYPE_CHECKING:
    from .ui import OrdSegUi


class OrdSegApp:
    """
    :param output:
        A stream for the application to write its own output to, defaults to sys.stdout
    :type output: IO, optional

    :param program_name:
        The name of the program that is being run. This is used primarily when
        outputting help messages, defaults to "ordseg"
    :type program_name: str, optional

    Exit codes: 0 on success, 1 when input or options are invalid, 2 when a
    computation fails (divergence, non-finite values, failed gradient checks).
    """

    ui: "OrdSegUi"

    def __init__(self, output: IO = sys.stdout, program_name: str = "ordseg"):
        from .ui import OrdSegUi

        self.ui = OrdSegUi(output=output, program_name=program_name)

    def __call__(self, cli_args: Sequence[str]) -> int:
        """
        :param cli_args:
            A sequence of command line arguments (i.e. sys.argv[1:])
        """
        from .commands import OrdSegCommand

        try:
            self.ui.parse_args(cli_args)
        except UsageError as error:
            self.ui.print_error(error)
            return 1

        if self.ui["version"]:
            self.ui.print_version()
            return 0

        command = tuple(self.ui["command"])
        if not command:
            if self.ui["help"]:
                self.print_help()
                return 0
            self.print_help(info="No command specified.")
            return 1

        try:
            command_type = OrdSegCommand.lookup(command[0])
        except UsageError as error:
            self.print_help(error=error)
            return 1

        args = list(command[1:])
        if self.ui["help"]:
            args.append("--help")

        try:
            return command_type(self.ui)(args)
        except OrdSegException as error:
            self.ui.print_error(error)
            return 1
        except ComputationError as error:
            self.ui.print_error(error)
            return 2

    def print_help(self, info=None, error=None):
        from .commands import OrdSegCommand

        self.ui.print_help(
            commands=OrdSegCommand.get_commands(), info=info, error=error
        )
