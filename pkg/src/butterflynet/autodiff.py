"""Reverse-mode differentiation on a define-by-run tape.

Nodes wrap float64 ndarrays.  Each op records vector-Jacobian closures for
its inputs; ``backward`` visits the DAG once in reverse topological order and
accumulates gradients.  Only the ops the networks actually need are defined.
"""

import numpy as np

from . import kernels
from .errors import ValidationError


class Node:
    """One tape entry: a cached forward value plus vjp links to parents."""

    __slots__ = ("value", "parents")

    def __init__(self, value, parents=()):
        self.value = np.asarray(value, dtype=np.float64)
        self.parents = parents

    @property
    def shape(self):
        return self.value.shape


def param(value) -> Node:
    return Node(value)


constant = param


def _unbroadcast(grad, shape):
    """Sum grad back down to shape after numpy broadcasting."""
    extra = grad.ndim - len(shape)
    if extra:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad


def add(a: Node, b: Node) -> Node:
    return Node(
        a.value + b.value,
        (
            (a, lambda g: _unbroadcast(g, a.value.shape)),
            (b, lambda g: _unbroadcast(g, b.value.shape)),
        ),
    )


def sub(a: Node, b: Node) -> Node:
    return Node(
        a.value - b.value,
        (
            (a, lambda g: _unbroadcast(g, a.value.shape)),
            (b, lambda g: _unbroadcast(-g, b.value.shape)),
        ),
    )


def mul(a: Node, b: Node) -> Node:
    return Node(
        a.value * b.value,
        (
            (a, lambda g: _unbroadcast(g * b.value, a.value.shape)),
            (b, lambda g: _unbroadcast(g * a.value, b.value.shape)),
        ),
    )


def scale(a: Node, c: float) -> Node:
    return Node(a.value * c, ((a, lambda g: g * c),))


def square(a: Node) -> Node:
    return Node(a.value * a.value, ((a, lambda g: 2.0 * g * a.value),))


def relu(a: Node) -> Node:
    mask = a.value > 0
    return Node(np.where(mask, a.value, 0.0), ((a, lambda g: g * mask),))


def reshape(a: Node, shape) -> Node:
    old = a.value.shape
    return Node(a.value.reshape(shape), ((a, lambda g: g.reshape(old)),))


def transpose(a: Node, axes) -> Node:
    inv = np.argsort(axes)
    return Node(
        np.ascontiguousarray(a.value.transpose(axes)),
        ((a, lambda g: np.ascontiguousarray(g.transpose(inv))),),
    )


def sum_axis(a: Node, axis) -> Node:
    shape = a.value.shape

    def vjp(g):
        return np.broadcast_to(np.expand_dims(g, axis), shape).copy()

    return Node(a.value.sum(axis=axis), ((a, vjp),))


def mean_all(a: Node) -> Node:
    n = a.value.size
    return Node(a.value.mean(), ((a, lambda g: np.full(a.value.shape, g / n)),))


def conv(x: Node, w: Node, kernel: int, groups: int, cin_g: int) -> Node:
    """Grouped non-overlapping conv: x [B, S, C] with C = groups*cin_g,
    w [groups, kernel, cin_g, cout_g] -> [B, S/kernel, groups*cout_g]."""
    B, S, C = x.value.shape
    if C != groups * cin_g:
        raise ValidationError(f"channel extent {C} != groups*cin_g {groups * cin_g}")
    if S % kernel != 0:
        raise ValidationError(f"spatial extent {S} not divisible by kernel {kernel}")
    s_out = S // kernel
    x5 = np.ascontiguousarray(x.value.reshape(B, s_out, kernel, groups, cin_g))
    out = kernels.conv_forward(x5, w.value)
    cout_g = w.value.shape[3]

    def vjp_x(g):
        g4 = np.ascontiguousarray(g.reshape(B, s_out, groups, cout_g))
        dx = kernels.conv_backward_input(g4, w.value, x5.shape)
        return dx.reshape(B, S, C)

    def vjp_w(g):
        g4 = np.ascontiguousarray(g.reshape(B, s_out, groups, cout_g))
        return kernels.conv_backward_weights(x5, g4)

    return Node(out.reshape(B, s_out, groups * cout_g), ((x, vjp_x), (w, vjp_w)))


def bias_add(x: Node, b: Node) -> Node:
    """x [B, S, C] + b [C]."""
    return Node(
        x.value + b.value,
        ((x, lambda g: g), (b, lambda g: g.sum(axis=(0, 1)))),
    )


def switch_dense(x: Node, d: Node, b: Node) -> Node:
    """Per-position block-dense layer: x [B, I, J, c], d [I, J, c, c],
    b [I, J, c]; out[bat,i,j,:] = d[i,j] @ x[bat,i,j,:] + b[i,j]."""
    out = np.einsum("ijoc,bijc->bijo", d.value, x.value) + b.value
    return Node(
        out,
        (
            (x, lambda g: np.einsum("ijoc,bijo->bijc", d.value, g)),
            (d, lambda g: np.einsum("bijo,bijc->ijoc", g, x.value)),
            (b, lambda g: g.sum(axis=0)),
        ),
    )


def odd_extend(x: Node) -> Node:
    """[B, N] -> [B, 2N] with out[:, 2N-j] = -out[:, j]; grid point N is 0."""
    B, N = x.value.shape
    out = np.zeros((B, 2 * N))
    out[:, :N] = x.value
    out[:, N + 1 :] = -x.value[:, :0:-1]

    def vjp(g):
        dx = g[:, :N].copy()
        dx[:, 1:] -= g[:, N + 1 :][:, ::-1]
        return dx

    return Node(out, ((x, vjp),))


def decode_component(x: Node, part: str) -> Node:
    """Real or imaginary part of embedded complex channels: [.., 4K] -> [.., K]."""
    off = 0 if part == "real" else 1
    shape = x.value.shape

    def vjp(g):
        dx = np.zeros(shape)
        dx[..., off::4] = g
        dx[..., off + 2 :: 4] = -g
        return dx

    return Node(x.value[..., off::4] - x.value[..., off + 2 :: 4], ((x, vjp),))


def symmetrize_spectrum(x: Node, K: int) -> Node:
    """Reflect a half spectrum onto [-K, K) as a 2K-long complex sequence.

    Input [B, 4K] (embedded values for frequencies [0, K)); output
    [B, 2K, 4] ordered by frequency m - K for m in [0, 2K).  Slot 0
    (frequency -K) is zero; negative frequencies carry conjugates, and
    conjugation permutes embedded components (a, b, c, d) -> (a, d, c, b).
    """
    B = x.value.shape[0]
    if x.value.shape[1] != 4 * K:
        raise ValidationError(f"expected {4 * K} channels, got {x.value.shape[1]}")
    v = x.value.reshape(B, K, 4)
    out = np.zeros((B, 2 * K, 4))
    out[:, K:, :] = v
    conj = v[:, 1:, :][:, :, (0, 3, 2, 1)]
    out[:, 1:K, :] = conj[:, ::-1, :]

    def vjp(g):
        dv = g[:, K:, :].copy()
        dneg = g[:, 1:K, :][:, ::-1, :][:, :, (0, 3, 2, 1)]
        dv[:, 1:, :] += dneg
        return dv.reshape(B, 4 * K)

    return Node(out, ((x, vjp),))


def backward(loss: Node, wanted: list[Node]) -> list[np.ndarray]:
    """Gradients of a scalar loss for the requested nodes.

    Reverse accumulation over the DAG; every reachable node is visited
    exactly once.
    """
    if loss.value.size != 1:
        raise ValidationError(f"loss must be scalar, got shape {loss.value.shape}")

    order = []
    seen = set()
    stack = [(loss, False)]
    while stack:
        node, processed = stack.pop()
        if processed:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for parent, _ in node.parents:
            if id(parent) not in seen:
                stack.append((parent, False))

    grads = {id(loss): np.ones_like(loss.value)}
    for node in reversed(order):
        g = grads.pop(id(node), None)
        if g is None:
            continue
        for parent, vjp in node.parents:
            contrib = vjp(g)
            pid = id(parent)
            if pid in grads:
                grads[pid] = grads[pid] + contrib
            else:
                grads[pid] = contrib
        if node not in wanted:
            continue
        grads[id(node)] = g  # keep for the caller

    out = []
    for node in wanted:
        g = grads.get(id(node))
        out.append(np.zeros_like(node.value) if g is None else g)
    return out
