"""Training loop: ADAM over tape gradients, infinite or fixed-set batches."""

import numpy as np

from .. import autodiff as ad
from ..errors import TrainingDiverged
from ..optim import AdamState, LrSchedule, adam_step


def mse_loss(pred: ad.Node, target: np.ndarray) -> ad.Node:
    """Mean over the batch of the squared two-norm residual."""
    diff = ad.sub(pred, ad.constant(target))
    per_sample = ad.sum_axis(ad.square(diff), tuple(range(1, pred.value.ndim)))
    return ad.mean_all(per_sample)


class WarmupSchedule:
    """A low-rate ramp before a staircase schedule.

    Used for losses whose landscape near a structured initialization is
    narrow (the solve-train objective): the ramp lets the second-moment
    estimates absorb the stiff directions before the main rate applies.
    """

    def __init__(self, warmup_steps: int, warmup_lr: float, main: LrSchedule):
        self.warmup_steps = warmup_steps
        self.warmup_lr = warmup_lr
        self.main = main

    def rate(self, step: int) -> float:
        if step < self.warmup_steps:
            frac = step / self.warmup_steps
            return self.warmup_lr + frac * (self.main.base - self.warmup_lr)
        return self.main.rate(step - self.warmup_steps)


def train(model, batch_fn, loss_fn, steps: int,
          schedule: LrSchedule | None = None, trace_every: int = 1):
    """Runs `steps` ADAM updates in place on model.params.

    batch_fn(step) yields the batch; loss_fn(model, nodes, batch) builds the
    scalar loss node.  Returns the per-step loss trace.  A non-finite loss
    aborts with the trace attached.
    """
    state = AdamState(schedule or LrSchedule())
    names = list(model.params)
    trace = []
    for step in range(steps):
        batch = batch_fn(step)
        nodes = model.make_nodes()
        loss = loss_fn(model, nodes, batch)
        lval = float(loss.value)
        if not np.isfinite(lval):
            raise TrainingDiverged(step, trace)
        if step % trace_every == 0:
            trace.append((step, lval))
        grads = ad.backward(loss, [nodes[k] for k in names])
        adam_step(model.params, dict(zip(names, grads)), state)
    return trace


def infinite_batches(draw, rng: np.random.Generator):
    """Fresh data each step: draw(rng) -> batch."""

    def batch_fn(step):
        return draw(rng)

    return batch_fn


def epoch_batches(arrays: tuple, batch_size: int, rng: np.random.Generator):
    """Cycle a fixed dataset in shuffled minibatches (reshuffled per epoch)."""
    n = arrays[0].shape[0]
    order = {"perm": rng.permutation(n), "pos": 0}

    def batch_fn(step):
        if order["pos"] + batch_size > n:
            order["perm"] = rng.permutation(n)
            order["pos"] = 0
        idx = order["perm"][order["pos"] : order["pos"] + batch_size]
        order["pos"] += batch_size
        return tuple(a[idx] for a in arrays)

    return batch_fn


def evaluate_in_batches(predict, inputs: np.ndarray, batch: int = 1024) -> np.ndarray:
    outs = [predict(inputs[i : i + batch]) for i in range(0, len(inputs), batch)]
    return np.concatenate(outs, axis=0)
