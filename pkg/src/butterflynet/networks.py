"""Network architectures built from non-overlapping convolutions.

Three variants share one execution engine:

* ``cnn``: dense channel mixing everywhere.
* ``bnet2``: channels partitioned into dyadic frequency-panel blocks; layer
  ``ell`` mixes only within each of its ``2**ell`` panel groups, and the
  readout is block-diagonal over panels.  When the panel count exceeds the
  number of output frequencies, only panels containing an output frequency
  are instantiated.
* ``bnet``: the switch-layer variant; panel-blocked layers up to the switch
  depth, a per-position dense switch that exchanges the spatial and channel
  roles, transposed convolutions afterwards, and a per-position readout.

All activations are [batch, spatial, channels] float64 arrays with each
complex channel stored as 4 consecutive real channels.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from . import autodiff as ad
from .errors import DimensionError, ValidationError

VARIANTS = ("cnn", "bnet2", "bnet")


@dataclass(frozen=True)
class NetworkSpec:
    """Architecture hyperparameters; n_in == half_kernel * 2**depth."""

    variant: str
    n_in: int
    k_out: int
    depth: int
    cheb_order: int
    half_kernel: int
    switch_depth: int | None = None
    freq_window: float | None = None
    kernel_sign: int = -1
    complex_input: bool = False
    final_bias_relu: bool = False

    def __post_init__(self):
        validate_spec(self)

    @property
    def window(self) -> float:
        """Frequency span covered by the outputs (defaults to k_out)."""
        return float(self.k_out if self.freq_window is None else self.freq_window)

    def out_frequencies(self) -> np.ndarray:
        """Uniform output frequency grid on [0, window)."""
        return np.arange(self.k_out) * (self.window / self.k_out)

    def populated(self, level: int) -> list[int]:
        """Indices of level-`level` frequency panels containing an output."""
        m = 2**level
        if m <= self.k_out:
            return list(range(m))
        step = m // self.k_out
        return [j * step for j in range(self.k_out)]


def validate_spec(spec: NetworkSpec) -> None:
    if spec.variant not in VARIANTS:
        raise ValidationError(f"unknown variant {spec.variant!r}; expected {VARIANTS}")
    if spec.depth < 1:
        raise ValidationError(f"depth must be >= 1, got {spec.depth}")
    if spec.cheb_order < 1:
        raise ValidationError(f"cheb_order must be >= 1, got {spec.cheb_order}")
    if spec.half_kernel < 1:
        raise ValidationError(f"half_kernel must be >= 1, got {spec.half_kernel}")
    if spec.n_in != spec.half_kernel * 2**spec.depth:
        raise ValidationError(
            f"n_in must equal half_kernel * 2**depth "
            f"({spec.half_kernel * 2 ** spec.depth}), got {spec.n_in}"
        )
    two_l = 2**spec.depth
    if spec.k_out >= two_l:
        if spec.k_out % two_l != 0:
            raise ValidationError(
                f"k_out {spec.k_out} must be divisible by 2**depth {two_l}"
            )
    elif two_l % spec.k_out != 0:
        raise ValidationError(
            f"k_out {spec.k_out} must divide 2**depth {two_l} when smaller"
        )
    if spec.freq_window is not None and not spec.freq_window > 0:
        raise ValidationError(f"freq_window must be positive, got {spec.freq_window}")
    if spec.variant == "bnet":
        if spec.switch_depth is None or not 1 <= spec.switch_depth < spec.depth:
            raise ValidationError(
                f"switch_depth must satisfy 1 <= L_t < depth, got {spec.switch_depth}"
            )
        if spec.k_out % two_l != 0:
            raise ValidationError(
                "bnet requires k_out divisible by 2**depth (no panel pruning)"
            )


# ---------------------------------------------------------------------------
# Layer definitions


@dataclass(frozen=True)
class ConvDef:
    name: str
    kernel: int
    groups: int
    cin_g: int
    cout_g: int
    bias: bool
    relu: bool


@dataclass(frozen=True)
class SwitchDef:
    name: str
    positions: int
    parts: int
    chan: int


@dataclass(frozen=True)
class TConvDef:
    """Transposed conv, spatial doubling; weights [G, 1, cin_g, 2*cout_g]."""

    name: str
    groups: int
    cin_g: int
    cout_g: int


@dataclass(frozen=True)
class FoldDef:
    """Fold remaining spatial extent into channels before the readout."""

    name: str


def layer_defs(spec: NetworkSpec):
    """The layer sequence realizing the spec, with group/channel extents."""
    L, r, w = spec.depth, spec.cheb_order, spec.half_kernel
    r4 = 4 * r
    cin0 = 4 if spec.complex_input else 1
    defs = []
    if spec.variant == "cnn":
        defs.append(ConvDef("layer0", 2 * w, 1, cin0, 2 * r4, True, True))
        for ell in range(1, L):
            defs.append(
                ConvDef(f"layer{ell}", 2, 1, 2**ell * r4, 2 ** (ell + 1) * r4, True, True)
            )
        defs.append(
            ConvDef(
                "readout", 1, 1, 2**L * r4, 4 * spec.k_out,
                spec.final_bias_relu, spec.final_bias_relu,
            )
        )
    elif spec.variant == "bnet2":
        pops = [len(spec.populated(v)) for v in range(L + 1)]
        defs.append(ConvDef("layer0", 2 * w, 1, cin0, pops[1] * r4, True, True))
        for ell in range(1, L):
            defs.append(
                ConvDef(
                    f"layer{ell}", 2, pops[ell], r4,
                    (pops[ell + 1] // pops[ell]) * r4, True, True,
                )
            )
        defs.append(
            ConvDef(
                "readout", 1, pops[L], r4, 4 * (spec.k_out // pops[L]),
                spec.final_bias_relu, spec.final_bias_relu,
            )
        )
    else:  # bnet
        lt = spec.switch_depth
        defs.append(ConvDef("layer0", 2 * w, 1, cin0, 2 * r4, True, True))
        for ell in range(1, lt):
            defs.append(ConvDef(f"layer{ell}", 2, 2**ell, r4, 2 * r4, True, True))
        defs.append(SwitchDef("switch", 2 ** (L - lt), 2**lt, r4))
        for ell in range(lt, L):
            defs.append(TConvDef(f"tconv{ell}", 2 ** (L - ell - 1), 2 * r4, r4))
        defs.append(FoldDef("fold"))
        defs.append(
            ConvDef("readout", 1, 2**L, r4, 4 * (spec.k_out // 2**L), False, False)
        )
    return defs


def _array_shapes(d):
    if isinstance(d, ConvDef):
        shapes = {f"{d.name}.w": (d.groups, d.kernel, d.cin_g, d.cout_g)}
        if d.bias:
            shapes[f"{d.name}.b"] = (d.groups * d.cout_g,)
        return shapes
    if isinstance(d, SwitchDef):
        return {
            f"{d.name}.d": (d.positions, d.parts, d.chan, d.chan),
            f"{d.name}.b": (d.positions, d.parts, d.chan),
        }
    if isinstance(d, TConvDef):
        return {
            f"{d.name}.w": (d.groups, 1, d.cin_g, 2 * d.cout_g),
            f"{d.name}.b": (d.groups * d.cout_g,),
        }
    return {}


@dataclass
class ParamSet:
    """Per-layer weight and bias arrays, in the real 4-block layout."""

    spec: NetworkSpec
    arrays: dict = field(default_factory=dict)

    def copy(self) -> "ParamSet":
        return ParamSet(self.spec, {k: v.copy() for k, v in self.arrays.items()})

    def total_real_params(self) -> int:
        return sum(a.size for a in self.arrays.values())


def build(spec: NetworkSpec, init: str = "zeros", seed: int | None = None) -> ParamSet:
    """Allocate a ParamSet with zeros, seeded random, or transform init."""
    if init == "ft":
        from . import ftinit

        return ftinit.ft_init(spec)
    rng = None
    if init == "random":
        if seed is None:
            raise ValidationError("random init requires a seed")
        rng = np.random.default_rng(np.random.SeedSequence(seed))
    elif init != "zeros":
        raise ValidationError(f"unknown init {init!r}")
    arrays = {}
    for d in layer_defs(spec):
        for name, shape in _array_shapes(d).items():
            if rng is not None and name.endswith(".w"):
                if isinstance(d, ConvDef):
                    fan_in, fan_out = d.kernel * d.cin_g, d.kernel * d.cout_g
                else:
                    fan_in, fan_out = shape[-2], shape[-1]
                bound = np.sqrt(6.0 / (fan_in + fan_out))
                arrays[name] = rng.uniform(-bound, bound, size=shape)
            elif rng is not None and name.endswith(".d"):
                bound = np.sqrt(6.0 / (shape[-2] + shape[-1]))
                arrays[name] = rng.uniform(-bound, bound, size=shape)
            else:
                arrays[name] = np.zeros(shape)
    return ParamSet(spec, arrays)


# ---------------------------------------------------------------------------
# Forward evaluation


def input_nodes(pset: ParamSet) -> dict:
    return {name: ad.param(arr) for name, arr in pset.arrays.items()}


def forward_nodes(pset: ParamSet, nodes: dict, x: ad.Node) -> ad.Node:
    """Tape forward; x is [B, n_in] real or [B, n_in, 4] embedded complex."""
    spec = pset.spec
    if spec.complex_input:
        if x.value.ndim != 3 or x.value.shape[1] != spec.n_in:
            raise DimensionError("input.spatial", spec.n_in, x.value.shape[1:])
    else:
        if x.value.ndim != 2 or x.value.shape[1] != spec.n_in:
            raise DimensionError("input.length", spec.n_in, x.value.shape[1:])
        x = ad.reshape(x, (x.value.shape[0], spec.n_in, 1))
    for d in layer_defs(spec):
        if isinstance(d, ConvDef):
            x = ad.conv(x, nodes[f"{d.name}.w"], d.kernel, d.groups, d.cin_g)
            if d.bias:
                x = ad.bias_add(x, nodes[f"{d.name}.b"])
            if d.relu:
                x = ad.relu(x)
        elif isinstance(d, SwitchDef):
            b = x.value.shape[0]
            x = ad.reshape(x, (b, d.positions, d.parts, d.chan))
            x = ad.switch_dense(x, nodes[f"{d.name}.d"], nodes[f"{d.name}.b"])
            x = ad.relu(x)
            x = ad.transpose(x, (0, 2, 1, 3))
            x = ad.reshape(x, (b, d.parts, d.positions * d.chan))
        elif isinstance(d, TConvDef):
            b, s, _ = x.value.shape
            x = ad.conv(x, nodes[f"{d.name}.w"], 1, d.groups, d.cin_g)
            x = ad.reshape(x, (b, s, d.groups, 2, d.cout_g))
            x = ad.transpose(x, (0, 1, 3, 2, 4))
            x = ad.reshape(x, (b, 2 * s, d.groups * d.cout_g))
            x = ad.bias_add(x, nodes[f"{d.name}.b"])
            x = ad.relu(x)
        else:  # FoldDef
            b, s, c = x.value.shape
            x = ad.reshape(x, (b, 1, s * c))
    b = x.value.shape[0]
    return ad.reshape(x, (b, x.value.shape[1] * x.value.shape[2]))


def forward(pset: ParamSet, x: np.ndarray) -> np.ndarray:
    """Plain forward: returns [B, 4*k_out] embedded output values."""
    return forward_nodes(pset, input_nodes(pset), ad.constant(x)).value


def forward_complex(pset: ParamSet, x: np.ndarray) -> np.ndarray:
    """Forward then decode: [B, k_out] complex."""
    from .complexreal import decode

    return decode(forward(pset, x))


# ---------------------------------------------------------------------------
# Structure conversions and counting


def bnet2_to_cnn(pset: ParamSet) -> ParamSet:
    """Zero-fill embedding of block-sparse weights into a dense variant.

    Forward outputs are identical bit for bit: the dense contraction visits
    the nonzero block in the same in-channel order and the added terms are
    exact zeros.
    """
    spec = pset.spec
    if spec.variant != "bnet2":
        raise ValidationError(f"expected a bnet2 ParamSet, got {spec.variant}")
    cnn_spec = replace(spec, variant="cnn")
    out = build(cnn_spec, "zeros")
    L, r4 = spec.depth, 4 * spec.cheb_order
    kp = spec.k_out // len(spec.populated(L))

    src = pset.arrays
    dst = out.arrays
    for i, panel in enumerate(spec.populated(1)):
        dst["layer0.w"][0, :, :, panel * r4 : (panel + 1) * r4] = src["layer0.w"][
            0, :, :, i * r4 : (i + 1) * r4
        ]
        dst["layer0.b"][panel * r4 : (panel + 1) * r4] = src["layer0.b"][
            i * r4 : (i + 1) * r4
        ]
    for ell in range(1, L):
        wname, bname = f"layer{ell}.w", f"layer{ell}.b"
        parents = spec.populated(ell)
        children = spec.populated(ell + 1)
        nchild = len(children) // len(parents)
        for g, ip in enumerate(parents):
            for s in range(nchild):
                ic = children[g * nchild + s]
                dst[wname][
                    0, :, ip * r4 : (ip + 1) * r4, ic * r4 : (ic + 1) * r4
                ] = src[wname][g, :, :, s * r4 : (s + 1) * r4]
                dst[bname][ic * r4 : (ic + 1) * r4] = src[bname][
                    (g * nchild + s) * r4 : (g * nchild + s + 1) * r4
                ]
    for g, ip in enumerate(spec.populated(L)):
        dst["readout.w"][
            0, :, ip * r4 : (ip + 1) * r4, g * 4 * kp : (g + 1) * 4 * kp
        ] = src["readout.w"][g]
        if spec.final_bias_relu:
            dst["readout.b"][g * 4 * kp : (g + 1) * 4 * kp] = src["readout.b"][
                g * 4 * kp : (g + 1) * 4 * kp
            ]
    return out


def extract_bnet2_from_cnn(cnn_pset: ParamSet, spec: NetworkSpec) -> ParamSet:
    """Inverse gather of bnet2_to_cnn (used for round-trip checks and for
    warm-starting a sparse net from a dense one)."""
    if spec.variant != "bnet2":
        raise ValidationError("target spec must be bnet2")
    out = build(spec, "zeros")
    L, r4 = spec.depth, 4 * spec.cheb_order
    kp = spec.k_out // len(spec.populated(L))
    src, dst = cnn_pset.arrays, out.arrays
    for i, panel in enumerate(spec.populated(1)):
        dst["layer0.w"][0, :, :, i * r4 : (i + 1) * r4] = src["layer0.w"][
            0, :, :, panel * r4 : (panel + 1) * r4
        ]
        dst["layer0.b"][i * r4 : (i + 1) * r4] = src["layer0.b"][
            panel * r4 : (panel + 1) * r4
        ]
    for ell in range(1, L):
        wname, bname = f"layer{ell}.w", f"layer{ell}.b"
        parents = spec.populated(ell)
        children = spec.populated(ell + 1)
        nchild = len(children) // len(parents)
        for g, ip in enumerate(parents):
            for s in range(nchild):
                ic = children[g * nchild + s]
                dst[wname][g, :, :, s * r4 : (s + 1) * r4] = src[wname][
                    0, :, ip * r4 : (ip + 1) * r4, ic * r4 : (ic + 1) * r4
                ]
                dst[bname][
                    (g * nchild + s) * r4 : (g * nchild + s + 1) * r4
                ] = src[bname][ic * r4 : (ic + 1) * r4]
    for g, ip in enumerate(spec.populated(L)):
        dst["readout.w"][g] = src["readout.w"][
            0, :, ip * r4 : (ip + 1) * r4, g * 4 * kp : (g + 1) * 4 * kp
        ]
    return out


def param_count(spec: NetworkSpec) -> dict:
    """Closed-form parameter counts.

    Complex units count one coefficient per complex weight/bias; real counts
    apply the embedding multipliers (16 reals per complex-to-complex weight,
    4 per real-input weight and per bias).  These formulas equal the
    enumerated array sizes of a built ParamSet exactly.
    """
    L, r, w, K = spec.depth, spec.cheb_order, spec.half_kernel, spec.k_out
    in_mult = 16 if spec.complex_input else 4
    s_last = spec.n_in // (2**L * w)
    if spec.variant == "cnn":
        w0 = 2 * w * 2 * r
        wmid = sum(2 * (2**ell * r) * (2 ** (ell + 1) * r) for ell in range(1, L))
        wlast = s_last * (2**L * r) * K
        bias = sum(2 ** (ell + 1) * r for ell in range(L))
    elif spec.variant == "bnet2":
        pops = [len(spec.populated(v)) for v in range(L + 1)]
        w0 = 2 * w * pops[1] * r
        wmid = sum(2 * r * r * pops[ell + 1] for ell in range(1, L))
        wlast = s_last * r * K
        bias = sum(r * pops[v] for v in range(1, L + 1))
    else:
        lt = spec.switch_depth
        w0 = 2 * w * 2 * r
        wmid = sum(2 ** (ell + 2) * r * r for ell in range(1, lt))
        wswitch = 2**L * r * r
        wtconv = sum(2 ** (L - ell + 1) * r * r for ell in range(lt, L))
        wmid += wswitch + wtconv
        wlast = r * K
        bias = 2 * r + sum(2 ** (ell + 1) * r for ell in range(1, lt))
        bias += 2**L * r  # switch bias is position dependent
        bias += sum(2 ** (L - ell - 1) * r for ell in range(lt, L))
    if spec.final_bias_relu:
        bias += K
    weight_complex = w0 + wmid + wlast
    weight_real = in_mult * w0 + 16 * (wmid + wlast)
    bias_real = 4 * bias
    return {
        "weight_complex": weight_complex,
        "bias_complex": bias,
        "weight_real": weight_real,
        "bias_real": bias_real,
        "total_real": weight_real + bias_real,
    }


def induced_matrix(pset: ParamSet, chunk: int = 512) -> np.ndarray:
    """The K x N complex matrix whose column j is decode(forward(e_j)).

    For transform-initialized nets (zero bias) this is exactly the linear
    operator the network realizes on nonnegative-split inputs.
    """
    from .complexreal import decode

    spec = pset.spec
    n = spec.n_in
    cols = []
    for j0 in range(0, n, chunk):
        nb = min(chunk, n - j0)
        x = np.zeros((nb, n))
        x[np.arange(nb), j0 + np.arange(nb)] = 1.0
        cols.append(decode(forward(pset, x)))
    return np.concatenate(cols, axis=0).T.copy()
