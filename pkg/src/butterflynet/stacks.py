"""Task models composed from the base networks.

Every model exposes a flat ``params`` dict of trainable arrays, a
``forward_nodes(nodes, x)`` tape forward returning the task-space
prediction, and a convenience ``predict``.
"""

import numpy as np

from . import autodiff as ad
from .complexreal import extend_blocks
from .errors import ValidationError
from .ftinit import ft_init
from .networks import NetworkSpec, ParamSet, build, forward_nodes
from .pde import galerkin_sine_matrix


class Model:
    params: dict

    def make_nodes(self) -> dict:
        return {k: ad.param(v) for k, v in self.params.items()}

    def predict(self, x: np.ndarray) -> np.ndarray:
        return self.forward_nodes(self.make_nodes(), ad.constant(x)).value

    def forward_nodes(self, nodes: dict, x: ad.Node) -> ad.Node:
        raise NotImplementedError


def _namespaced(pset: ParamSet, prefix: str, params: dict) -> None:
    for k, v in pset.arrays.items():
        params[f"{prefix}.{k}"] = v


def _sub_nodes(nodes: dict, prefix: str) -> dict:
    plen = len(prefix) + 1
    return {k[plen:]: v for k, v in nodes.items() if k.startswith(prefix + ".")}


def _dense_blocks(mat: np.ndarray) -> np.ndarray:
    """Complex [out, in] matrix as conv weights [1, 1, 4*in, 4*out]."""
    blocks = extend_blocks(mat)  # [out, in, 4, 4]
    n_out, n_in = mat.shape
    w = np.zeros((1, 1, 4 * n_in, 4 * n_out))
    for alpha in range(4):
        for beta in range(4):
            w[0, 0, beta::4, alpha::4] = blocks[:, :, alpha, beta].T
    return w


class TransformModel(Model):
    """A bare network predicting embedded transform values [B, 4*k_out]."""

    def __init__(self, pset: ParamSet):
        self.pset = pset
        self.params = dict(pset.arrays)

    @classmethod
    def create(cls, spec: NetworkSpec, init: str, seed: int | None = None):
        return cls(build(spec, init, seed))

    def forward_nodes(self, nodes, x):
        return forward_nodes(self.pset, nodes, x)


class EnergyModel(Model):
    """Encoder plus a squared-magnitude head with trainable diagonal weights
    for the real and imaginary parts of each frequency."""

    def __init__(self, pset: ParamSet, d_re: np.ndarray, d_im: np.ndarray):
        self.pset = pset
        self.params = dict(pset.arrays)
        self.params["head.d_re"] = d_re
        self.params["head.d_im"] = d_im

    @classmethod
    def create(cls, spec: NetworkSpec, init: str, seed: int | None = None):
        pset = build(spec, init, seed)
        k = np.arange(spec.k_out)
        d = np.zeros(spec.k_out)
        # Poisson quadratic form: -(2/n^2) / (2 pi k)^2 per one-sided frequency
        d[1:] = -2.0 / (spec.n_in**2 * (2.0 * np.pi * k[1:]) ** 2)
        return cls(pset, d.copy(), d.copy())

    def forward_nodes(self, nodes, x):
        out = forward_nodes(self.pset, nodes, x)
        re = ad.decode_component(out, "real")
        im = ad.decode_component(out, "imag")
        e_re = ad.sum_axis(ad.mul(ad.square(re), nodes["head.d_re"]), 1)
        e_im = ad.sum_axis(ad.mul(ad.square(im), nodes["head.d_im"]), 1)
        return ad.add(e_re, e_im)


class SineSolverModel(Model):
    """Odd extension -> sine-transform encoder -> dense middle (bias + ReLU)
    -> inverse-sine decoder (imaginary-part readout).

    The transform-initialized middle realizes the pseudo-inverted Galerkin
    stiffness of -(a u')' in the sine basis, so the whole stack approximates
    the solution map at initialization.
    """

    def __init__(self, enc: ParamSet, mid_w, mid_b, dec: ParamSet):
        self.enc, self.dec = enc, dec
        self.params = {}
        _namespaced(enc, "enc", self.params)
        self.params["mid.w"] = mid_w
        self.params["mid.b"] = mid_b
        _namespaced(dec, "dec", self.params)
        self.k_en = enc.spec.k_out
        self.k_de = dec.spec.n_in

    @classmethod
    def specs(cls, n_grid: int, k_en: int, k_de: int, depth: int, r: int, variant: str):
        enc = NetworkSpec(
            variant, 2 * n_grid, k_en, depth, r, 2 * n_grid // 2**depth
        )
        dec = NetworkSpec(
            variant, k_de, n_grid, depth, r, k_de // 2**depth,
            freq_window=k_de / 2.0, kernel_sign=+1, complex_input=True,
        )
        return enc, dec

    @classmethod
    def create(cls, n_grid: int, k_en: int, k_de: int, depth: int, r: int,
               variant: str, init: str, a_coeff: np.ndarray, seed: int | None = None,
               nonlinearity: float = 0.0):
        enc_spec, dec_spec = cls.specs(n_grid, k_en, k_de, depth, r, variant)
        if init == "ft":
            enc = ft_init(enc_spec)
            dec = ft_init(dec_spec)
            stiff = galerkin_sine_matrix(np.asarray(a_coeff, float), k_de)
            dmat = np.linalg.solve(stiff, np.eye(k_de))[:, :k_en] * (
                1j / (2.0 * n_grid)
            )
            dmat[0, :] = 0.0
            if nonlinearity > 0.0:
                # seed the constant-mode pathway with the linearized mean
                # response (see pde.dc_response_slope): v_0 = i*alpha*mean(f)
                from .pde import dc_response_slope

                alpha = dc_response_slope(
                    np.asarray(a_coeff, float), k_en, k_de, n_grid, nonlinearity
                )
                x = np.arange(n_grid) / n_grid
                g = np.sin(np.pi * np.outer(np.arange(k_en), x)).mean(axis=1)
                dmat[0, :] = -alpha * g / n_grid
            mid_w = _dense_blocks(dmat)
            mid_b = np.zeros(4 * k_de)
        else:
            rng = np.random.default_rng(np.random.SeedSequence(seed))
            enc = build(enc_spec, "random", int(rng.integers(2**31)))
            dec = build(dec_spec, "random", int(rng.integers(2**31)))
            bound = np.sqrt(6.0 / (4 * k_en + 4 * k_de))
            mid_w = rng.uniform(-bound, bound, size=(1, 1, 4 * k_en, 4 * k_de))
            mid_b = np.zeros(4 * k_de)
        return cls(enc, mid_w, mid_b, dec)

    def forward_nodes(self, nodes, x):
        ext = ad.odd_extend(x)
        h = forward_nodes(self.enc, _sub_nodes(nodes, "enc"), ext)
        b = h.value.shape[0]
        h = ad.reshape(h, (b, 1, 4 * self.k_en))
        h = ad.conv(h, nodes["mid.w"], 1, 1, 4 * self.k_en)
        h = ad.relu(ad.bias_add(h, nodes["mid.b"]))
        h = ad.reshape(h, (b, self.k_de, 4))
        out = forward_nodes(self.dec, _sub_nodes(nodes, "dec"), h)
        return ad.decode_component(out, "imag")


class DenoiseModel(Model):
    """Encoder to the half spectrum [0, K), conjugate symmetrization onto
    [-K, K), inverse-transform decoder back to the signal (real readout).
    Transform-initialized, this is a unit-gain low-pass filter."""

    def __init__(self, enc: ParamSet, dec: ParamSet):
        self.enc, self.dec = enc, dec
        self.k = enc.spec.k_out
        self.params = {}
        _namespaced(enc, "enc", self.params)
        _namespaced(dec, "dec", self.params)

    @classmethod
    def specs(cls, n: int, k: int, depth: int, r: int, variant: str):
        enc = NetworkSpec(variant, n, k, depth, r, n // 2**depth)
        dec = NetworkSpec(
            variant, 2 * k, n, depth, r, 2 * k // 2**depth,
            freq_window=2.0 * k, kernel_sign=+1, complex_input=True,
        )
        return enc, dec

    @classmethod
    def create(cls, n: int, k: int, depth: int, r: int, variant: str,
               init: str, seed: int | None = None):
        enc_spec, dec_spec = cls.specs(n, k, depth, r, variant)
        if init == "ft":
            enc = ft_init(enc_spec)
            # fold centered-spectrum phase exp(-2 pi i k x_c) and 1/n gain
            x_out = np.arange(n) / n
            phase = np.exp(-2j * np.pi * k * x_out)
            dec = ft_init(dec_spec, out_phase=phase, out_scale=1.0 / n)
        else:
            rng = np.random.default_rng(np.random.SeedSequence(seed))
            enc = build(enc_spec, "random", int(rng.integers(2**31)))
            dec = build(dec_spec, "random", int(rng.integers(2**31)))
        return cls(enc, dec)

    def forward_nodes(self, nodes, x):
        h = forward_nodes(self.enc, _sub_nodes(nodes, "enc"), x)
        h = ad.symmetrize_spectrum(h, self.k)
        out = forward_nodes(self.dec, _sub_nodes(nodes, "dec"), h)
        return ad.decode_component(out, "real")


def warm_start_cnn(trained: ParamSet) -> ParamSet:
    """Dense network initialized from a trained block-sparse one."""
    from .networks import bnet2_to_cnn

    if trained.spec.variant != "bnet2":
        raise ValidationError("warm start expects a bnet2 ParamSet")
    return bnet2_to_cnn(trained)
