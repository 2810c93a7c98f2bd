"""Butterfly-structured sparse 1D conv networks with Fourier-transform
initialization, and the experiment harness around them."""

from .chebyshev import (
    ChebSystem,
    Interval,
    cheb_points,
    dense_dft_matrix,
    dft_kernel,
    interp_error_bound,
    theorem_bound,
)
from .complexreal import decode, embed, extend_assign
from .ftinit import ft_init, ft_init_cnn, inverse_ft_init
from .kernels import active_backend, blocked_conv1d
from .networks import (
    NetworkSpec,
    ParamSet,
    bnet2_to_cnn,
    build,
    forward,
    forward_complex,
    induced_matrix,
    param_count,
)
from .serialize import load_params, save_params

__version__ = "0.1.0"

__all__ = [
    "ChebSystem",
    "Interval",
    "NetworkSpec",
    "ParamSet",
    "active_backend",
    "blocked_conv1d",
    "bnet2_to_cnn",
    "build",
    "cheb_points",
    "decode",
    "dense_dft_matrix",
    "dft_kernel",
    "embed",
    "extend_assign",
    "forward",
    "forward_complex",
    "ft_init",
    "ft_init_cnn",
    "induced_matrix",
    "interp_error_bound",
    "inverse_ft_init",
    "load_params",
    "param_count",
    "save_params",
    "theorem_bound",
]
