from __future__ import annotations

import math
from collections.abc import Mapping
from typing import TYPE_CHECKING, Callable, Optional

import numpy as np

from ..exceptions import ConfigValidationError

if TYPE_CHECKING:
    from .model import Params


class Adam:
    """
    Adam with bias-corrected moment estimates, updating parameter arrays in place.
    """

    def __init__(
        self,
        learning_rate: float,
        beta1: float = 0.9,
        beta2: float = 0.999,
        epsilon: float = 1e-8,
    ):
        if not learning_rate > 0:
            raise ConfigValidationError(
                f"learning_rate must be > 0, got {learning_rate}",
                option="learning_rate",
            )
        self.learning_rate = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.epsilon = epsilon
        self.steps = 0
        self._first: dict[str, np.ndarray] = {}
        self._second: dict[str, np.ndarray] = {}

    def step(self, params: dict[str, np.ndarray], grads: Mapping[str, np.ndarray]):
        self.steps += 1
        correction1 = 1 - self.beta1**self.steps
        correction2 = 1 - self.beta2**self.steps
        for name, grad in grads.items():
            first = self._first.get(name, np.zeros_like(grad))
            second = self._second.get(name, np.zeros_like(grad))
            first = self.beta1 * first + (1 - self.beta1) * grad
            second = self.beta2 * second + (1 - self.beta2) * grad**2
            self._first[name], self._second[name] = first, second
            params[name] -= (
                self.learning_rate
                * (first / correction1)
                / (np.sqrt(second / correction2) + self.epsilon)
            )


class EarlyStopping:
    """
    Tracks the best validation loss and the parameters that achieved it, and
    signals a stop after ``patience`` epochs without an improvement larger than
    ``min_delta``.
    """

    def __init__(self, patience: int, min_delta: float = 1e-6):
        self.patience = patience
        self.min_delta = min_delta
        self.best = math.inf
        self.best_epoch = 0
        self.best_state: Optional[Params] = None
        self.waited = 0

    def update(
        self, epoch: int, value: float, state: Callable[[], Params]
    ) -> bool:
        """Record an epoch's validation loss, returns whether to stop."""
        if value < self.best - self.min_delta:
            self.best, self.best_epoch = value, epoch
            self.best_state = state()
            self.waited = 0
            return False
        self.waited += 1
        return self.waited >= self.patience
