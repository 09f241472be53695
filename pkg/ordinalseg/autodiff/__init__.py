from .gradcheck import GradCheckReport, finite_diff_check
from .node import ComputationGraph, Node, backward, constant, zero_grad
from .ops import absolute, clip, concat, exp, log, pad, power, relu, repeat, softmax

__all__ = [
    "ComputationGraph",
    "GradCheckReport",
    "Node",
    "absolute",
    "backward",
    "clip",
    "concat",
    "constant",
    "exp",
    "finite_diff_check",
    "log",
    "pad",
    "power",
    "relu",
    "repeat",
    "softmax",
    "zero_grad",
]
