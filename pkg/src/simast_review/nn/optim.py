"""Adam with bias correction over named parameter tensors."""

from __future__ import annotations

import logging
from collections.abc import Mapping
from dataclasses import dataclass, field

import numpy as np

from simast_review.errors import ConfigError, MissingGradientError
from simast_review.nn.tensor import Array, Tensor


logger = logging.getLogger(__name__)


@dataclass
class AdamState:
    """Moment accumulators and hyperparameters for one optimization run."""

    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    step: int = 0
    first_moment: dict[str, Array] = field(default_factory=dict)
    second_moment: dict[str, Array] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.learning_rate <= 0:
            raise ConfigError(f"learning rate must be positive, got {self.learning_rate}")
        if not (0.0 <= self.beta1 < 1.0 and 0.0 <= self.beta2 < 1.0):
            raise ConfigError(f"Adam betas must lie in [0, 1), got {self.beta1}, {self.beta2}")
        if self.epsilon <= 0:
            raise ConfigError(f"Adam epsilon must be positive, got {self.epsilon}")

    @classmethod
    def for_params(
        cls,
        params: Mapping[str, Tensor],
        *,
        learning_rate: float = 1e-3,
        beta1: float = 0.9,
        beta2: float = 0.999,
        epsilon: float = 1e-8,
    ) -> AdamState:
        state = cls(learning_rate=learning_rate, beta1=beta1, beta2=beta2, epsilon=epsilon)
        for name, param in params.items():
            state.first_moment[name] = np.zeros_like(param.data)
            state.second_moment[name] = np.zeros_like(param.data)
        return state


def adam_step(params: Mapping[str, Tensor], state: AdamState) -> None:
    """Apply one update to every parameter in ``params`` and zero their gradients."""
    missing = [name for name, param in params.items() if param.grad is None]
    if missing:
        raise MissingGradientError(f"no gradient for parameter(s): {', '.join(missing)}")

    state.step += 1
    correction1 = 1.0 - state.beta1**state.step
    correction2 = 1.0 - state.beta2**state.step
    for name, param in params.items():
        grad = param.grad
        assert grad is not None
        first = state.first_moment.setdefault(name, np.zeros_like(param.data))
        second = state.second_moment.setdefault(name, np.zeros_like(param.data))
        first *= state.beta1
        first += (1.0 - state.beta1) * grad
        second *= state.beta2
        second += (1.0 - state.beta2) * grad * grad
        update = state.learning_rate * (first / correction1) / (
            np.sqrt(second / correction2) + state.epsilon
        )
        param.data = param.data - update
        param.grad = np.zeros_like(param.data)
    logger.debug("Adam step %d over %d parameters", state.step, len(params))
