from typing import Optional


# ruff: noqa: N818
class OrdSegException(RuntimeError):
    cause: Optional[str]

    def __init__(self, msg, *args):
        super().__init__(msg, *args)
        self.msg = msg

        if args:
            cause = args[0]
            position_clause = (
                f", near line {cause.line}, position {cause.position}."
                if getattr(cause, "has_position", False)
                else "."
            )
            self.cause = str(cause.args[0]) + position_clause
        else:
            self.cause = None


class ValidationError(OrdSegException):
    """
    Input data violates a structural invariant, e.g. a probability map that does not
    sum to one or a label outside 1..K.
    """

    location: Optional[tuple[int, ...]]

    def __init__(self, msg, *args, location: Optional[tuple[int, ...]] = None):
        super().__init__(msg, *args)
        self.location = location


class ConfigValidationError(OrdSegException):
    option: Optional[str]
    context: Optional[str]
    filename: Optional[str]

    def __init__(
        self,
        msg,
        *args,
        option: Optional[str] = None,
        context: Optional[str] = None,
        filename: Optional[str] = None,
    ):
        super().__init__(msg, *args)
        self.option = option
        self.context = context
        self.filename = filename


class FormatError(ValidationError):
    path: Optional[str]
    offset: Optional[int]

    def __init__(
        self,
        msg,
        *args,
        path: Optional[str] = None,
        offset: Optional[int] = None,
    ):
        if offset is not None:
            msg = f"{msg} (at byte offset {offset})"
        if path is not None:
            msg = f"{msg} in file {path}"
        super().__init__(msg, *args)
        self.path = path
        self.offset = offset


class GeometryError(ValidationError):
    pass


class PartitionError(ValidationError):
    pass


class InsufficientDataError(ValidationError):
    pass


class UsageError(OrdSegException):
    pass


class AutodiffUsageError(OrdSegException):
    pass


class GraphCycleError(OrdSegException):
    pass


class EmptyRegionError(OrdSegException):
    pass


class UnboundedFieldError(OrdSegException):
    pass


class ComputationError(RuntimeError):
    cause: Optional[str]

    def __init__(self, msg, *args):
        self.msg = msg
        self.cause = args[0].args[0] if args else None
        self.args = (msg, *args)


class NumericError(ComputationError):
    op: Optional[str]

    def __init__(self, msg, *args, op: Optional[str] = None):
        super().__init__(msg, *args)
        self.op = op


class OracleError(ComputationError):
    pass


class GradientCheckFailure(ComputationError):
    pass


class TrainingError(ComputationError):
    epoch: Optional[int]

    def __init__(self, msg, *args, epoch: Optional[int] = None):
        super().__init__(msg, *args)
        self.epoch = epoch
