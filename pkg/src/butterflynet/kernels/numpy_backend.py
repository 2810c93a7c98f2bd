"""Pure-numpy implementation of the grouped non-overlapping conv kernels.

Contraction is accumulated per (group, tap) with one GEMM each.  That keeps
the in-channel summation sequential per output element, which makes a dense
layer applied to block-diagonal weights bit-identical to the grouped layer
(zero products add exact zeros without re-associating the nonzero terms).
"""

import numpy as np

NAME = "numpy"


def conv_forward(x, w):
    """x: [B, S, T, G, ci], w: [G, T, ci, co] -> out [B, S, G, co]."""
    B, S, T, G, ci = x.shape
    co = w.shape[3]
    out = np.zeros((B, S, G, co))
    for g in range(G):
        for t in range(T):
            out[:, :, g, :] += x[:, :, t, g, :] @ w[g, t]
    return out


def conv_backward_input(grad, w, x_shape):
    """grad: [B, S, G, co] -> dx [B, S, T, G, ci]."""
    B, S, T, G, ci = x_shape
    dx = np.empty(x_shape)
    for g in range(G):
        for t in range(T):
            dx[:, :, t, g, :] = grad[:, :, g, :] @ w[g, t].T
    return dx


def conv_backward_weights(x, grad):
    """x: [B, S, T, G, ci], grad: [B, S, G, co] -> dw [G, T, ci, co]."""
    B, S, T, G, ci = x.shape
    co = grad.shape[3]
    dw = np.empty((G, T, ci, co))
    gm = grad.reshape(B * S, G, -1)
    xm = x.reshape(B * S, T, G, ci)
    for g in range(G):
        for t in range(T):
            dw[g, t] = xm[:, t, g, :].T @ gm[:, g, :]
    return dw
