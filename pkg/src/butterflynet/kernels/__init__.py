"""Kernel backend selection and the public non-overlapping conv primitive.

Two interchangeable backends provide the hot grouped-conv kernels:

* ``numpy``: per-(group, tap) GEMM accumulation (BLAS-backed),
* ``cython``: the compiled extension (``butterflynet.kernels._ext``).

The numpy backend is the default: on BLAS-enabled builds it wins at the
dense-channel shapes that dominate training (see ``benchmarks/
bench_kernels.py``), while the compiled core avoids BLAS call overhead on
very small blocks.  Set ``BUTTERFLYNET_BACKEND=cython|numpy`` to force one.
"""

import os

import numpy as np

from ..errors import DimensionError
from ..tensor import as_tensor
from . import numpy_backend

_BACKENDS = {"numpy": numpy_backend}
try:
    from . import _ext  # compiled at install time; optional

    _BACKENDS["cython"] = _ext
except ImportError:
    _ext = None


def available_backends():
    return sorted(_BACKENDS)


def _select():
    choice = os.environ.get("BUTTERFLYNET_BACKEND", "auto")
    if choice == "auto":
        return numpy_backend
    try:
        return _BACKENDS[choice]
    except KeyError:
        raise ImportError(
            f"BUTTERFLYNET_BACKEND={choice!r} not available; "
            f"built backends: {available_backends()}"
        ) from None


_active = _select()


def active_backend() -> str:
    return _active.NAME


def set_backend(name: str) -> None:
    """Switch kernel backend at runtime (used by tests and benchmarks)."""
    global _active
    if name not in _BACKENDS:
        raise ImportError(f"backend {name!r} not built; have {available_backends()}")
    _active = _BACKENDS[name]


def conv_forward(x, w):
    return _active.conv_forward(x, w)


def conv_backward_input(grad, w, x_shape):
    return _active.conv_backward_input(grad, w, x_shape)


def conv_backward_weights(x, grad):
    return _active.conv_backward_weights(x, grad)


def blocked_conv1d(x, weights, bias, kernel: int, stride: int):
    """Non-overlapping 1D convolution of a single sample.

    x: [spatial, in_ch]; weights: [kernel, in_ch, out_ch]; bias: [out_ch].
    Requires kernel == stride and spatial divisible by stride.  Returns
    [spatial // stride, out_ch] without any activation.
    """
    x = as_tensor(x, "input")
    weights = as_tensor(weights, "weights")
    bias = as_tensor(bias, "bias")
    if x.ndim != 2:
        raise DimensionError("input.ndim", 2, x.ndim)
    if weights.ndim != 3:
        raise DimensionError("weights.ndim", 3, weights.ndim)
    if kernel != stride:
        raise DimensionError("stride", kernel, stride)
    spatial, in_ch = x.shape
    if weights.shape[0] != kernel:
        raise DimensionError("weights.kernel", kernel, weights.shape[0])
    if weights.shape[1] != in_ch:
        raise DimensionError("weights.in_ch", in_ch, weights.shape[1])
    out_ch = weights.shape[2]
    if bias.shape != (out_ch,):
        raise DimensionError("bias.out_ch", out_ch, bias.shape)
    if spatial % stride != 0:
        raise DimensionError("input.spatial", f"multiple of {stride}", spatial)
    x5 = np.ascontiguousarray(x.reshape(1, spatial // stride, kernel, 1, in_ch))
    w4 = np.ascontiguousarray(weights.reshape(1, kernel, in_ch, out_ch))
    out = conv_forward(x5, w4)
    return out.reshape(spatial // stride, out_ch) + bias
