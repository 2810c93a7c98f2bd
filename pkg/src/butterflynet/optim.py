"""ADAM with a staircase exponential learning-rate schedule.

Schedule: effective rate = base * decay**(step // interval), i.e. the rate
is multiplied by `decay` every `interval` steps.  Constants beta1=0.9,
beta2=0.999, eps=1e-8 are the usual defaults; they and the schedule are
recorded in every emitted result file.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError


@dataclass(frozen=True)
class LrSchedule:
    base: float = 1e-3
    decay: float = 0.85
    interval: int = 500

    def rate(self, step: int) -> float:
        return self.base * self.decay ** (step // self.interval)


@dataclass
class AdamState:
    schedule: LrSchedule
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    step: int = 0
    first_moment: dict = field(default_factory=dict)
    second_moment: dict = field(default_factory=dict)

    def describe(self) -> dict:
        return {
            "optimizer": "adam",
            "beta1": self.beta1,
            "beta2": self.beta2,
            "epsilon": self.epsilon,
            "lr_base": self.schedule.base,
            "lr_decay": self.schedule.decay,
            "lr_interval": self.schedule.interval,
        }


def adam_step(params: dict, grads: dict, state: AdamState) -> None:
    """One bias-corrected update, in place on the param arrays.

    `params` and `grads` map names to congruent arrays; moments are created
    lazily on first use and keep those shapes forever after.
    """
    state.step += 1
    t = state.step
    lr = state.schedule.rate(t - 1)
    b1, b2 = state.beta1, state.beta2
    for name, p in params.items():
        g = grads[name]
        if g.shape != p.shape:
            raise ValidationError(
                f"gradient shape {g.shape} != param shape {p.shape} for '{name}'"
            )
        m = state.first_moment.get(name)
        if m is None:
            m = state.first_moment[name] = np.zeros_like(p)
        v = state.second_moment.get(name)
        if v is None:
            v = state.second_moment[name] = np.zeros_like(p)
        m *= b1
        m += (1 - b1) * g
        v *= b2
        v += (1 - b2) * g * g
        mhat = m / (1 - b1**t)
        vhat = v / (1 - b2**t)
        p -= lr * mhat / (np.sqrt(vhat) + state.epsilon)
