from .base import OrdSegCommand
from .data import SynthCommand
from .evaluate import CompareCommand, EvalCommand
from .experiment import TrainDemoCommand
from .fields import DistanceCommand
from .losses import GradCheckCommand, LossCommand

__all__ = [
    "CompareCommand",
    "DistanceCommand",
    "EvalCommand",
    "GradCheckCommand",
    "LossCommand",
    "OrdSegCommand",
    "SynthCommand",
    "TrainDemoCommand",
]
