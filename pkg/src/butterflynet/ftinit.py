"""Transform initialization: weights that make an untrained network evaluate
the discrete Fourier transform up to Chebyshev interpolation error.

Construction per layer (forward kernel exp(sign*2*pi*i*xi*t), sign from the
spec):

* Layer 0 interpolates each length-2w input block onto r Chebyshev nodes,
  demodulated at the center of each populated level-1 frequency panel.
* Middle layer ``ell`` re-interpolates coefficients from node pairs on the
  two child time panels onto the parent panel's nodes, demodulated at the
  center of the refined (level ell+1) frequency panel.  Node positions enter
  only through differences, so one kernel serves every spatial position.
* The last layer evaluates the kernel at the actual output frequencies
  against the nodes on the full time interval.

Biases are zero.  The switch-layer variant additionally needs the butterfly
second half: a per-position switch block evaluating the kernel on frequency
times time Chebyshev nodes, transposed-conv layers interpolating in
frequency, and a per-panel readout interpolating to the output frequencies.
"""

from dataclasses import replace

import numpy as np

from .chebyshev import ChebSystem, Interval
from .complexreal import extend_blocks, real_input_columns
from .errors import ValidationError
from .networks import NetworkSpec, ParamSet, bnet2_to_cnn, build


def _kernel(spec: NetworkSpec, phase):
    return np.exp(spec.kernel_sign * 2j * np.pi * np.asarray(phase))


def _embed_weight(spec: NetworkSpec, wc: np.ndarray, complex_in: bool) -> np.ndarray:
    """Complex [kernel, cin_cplx, cout_cplx] -> real conv block.

    Real input columns use the 4-vector (Re, Im, -Re, -Im); complex inputs
    use full 4x4 extension blocks.
    """
    kernel, cin, cout = wc.shape
    if not complex_in:
        if cin != 1:
            raise ValidationError("real-input layer must have one in channel")
        cols = real_input_columns(wc[:, 0, :])  # [kernel, cout, 4]
        out = np.zeros((kernel, 1, 4 * cout))
        for alpha in range(4):
            out[:, 0, alpha::4] = cols[:, :, alpha]
        return out
    blocks = extend_blocks(wc)  # [kernel, cin, cout, 4, 4]
    out = np.zeros((kernel, 4 * cin, 4 * cout))
    for alpha in range(4):
        for beta in range(4):
            out[:, beta::4, alpha::4] = blocks[:, :, :, alpha, beta]
    return out


def _local_system(r: int, width: float) -> ChebSystem:
    return ChebSystem(r, Interval(width / 2.0, width))


def ft_init_layer0(spec: NetworkSpec) -> np.ndarray:
    """Layer-0 weights [1, 2w, cin, 4*r*P1]."""
    r, w, n = spec.cheb_order, spec.half_kernel, spec.n_in
    width_b = 2.0 * w / n
    sys_b = _local_system(r, width_b)
    taps = np.arange(2 * w) / n
    lag = sys_b.lagrange_all(taps)  # [r, 2w]
    panels = spec.populated(1)
    wc = np.zeros((2 * w, 1, len(panels) * r), dtype=np.complex128)
    for gi, panel in enumerate(panels):
        xi0 = (panel + 0.5) * spec.window / 2.0
        for k in range(r):
            wc[:, 0, gi * r + k] = _kernel(spec, xi0 * (taps - sys_b.points[k])) * lag[k]
    return _embed_weight(spec, wc, spec.complex_input)[None, :, :, :]


def ft_init_middle(spec: NetworkSpec, ell: int) -> np.ndarray:
    """Middle-layer weights [G, 2, 4r, nchild*4r] for 1 <= ell < depth."""
    if not 1 <= ell < spec.depth:
        raise ValidationError(f"middle layer index {ell} outside [1, {spec.depth})")
    r = spec.cheb_order
    width_out = 2.0 ** (ell + 1 - spec.depth)
    width_in = width_out / 2.0
    sys_out = _local_system(r, width_out)
    sys_in = _local_system(r, width_in)
    parents = spec.populated(ell)
    children = spec.populated(ell + 1)
    nchild = len(children) // len(parents)
    out = np.zeros((len(parents), 2, 4 * r, nchild * 4 * r))
    panel_width = spec.window / 2.0 ** (ell + 1)
    for g in range(len(parents)):
        wc = np.zeros((2, r, nchild * r), dtype=np.complex128)
        for s in range(nchild):
            child = children[g * nchild + s]
            xi0 = (child + 0.5) * panel_width
            for p in range(2):
                t_in = p * width_in + sys_in.points  # in-nodes, parent-local
                lag = sys_out.lagrange_all(t_in)  # [r(k), r(k')]
                for k in range(r):
                    wc[p, :, s * r + k] = (
                        _kernel(spec, xi0 * (t_in - sys_out.points[k])) * lag[k]
                    )
        out[g] = _embed_weight(spec, wc.reshape(2, r, nchild * r), True).reshape(
            2, 4 * r, nchild * 4 * r
        )
    return out


def ft_init_last(spec: NetworkSpec, out_phase=None, out_scale: float = 1.0) -> np.ndarray:
    """Readout weights [G, 1, 4r, 4*(k_out/G)]: kernel at output frequencies
    against nodes on [0, 1), with optional per-output complex phase/scale
    folded in (used by inverse-transform decoders).

    The readout is affine (no activation), so both sign copies of each
    embedded component survive to the decode; the blocks carry a factor 1/2
    to compensate, making decode(forward) the complex transform exactly.
    """
    r = spec.cheb_order
    sys_full = _local_system(r, 1.0)
    panels = spec.populated(spec.depth)
    kp = spec.k_out // len(panels)
    freqs = spec.out_frequencies()
    phase = np.ones(spec.k_out, dtype=np.complex128) if out_phase is None else out_phase
    out = np.zeros((len(panels), 1, 4 * r, 4 * kp))
    for g in range(len(panels)):
        wc = np.zeros((1, r, kp), dtype=np.complex128)
        for c_loc in range(kp):
            c = g * kp + c_loc
            wc[0, :, c_loc] = (
                _kernel(spec, freqs[c] * sys_full.points) * phase[c] * out_scale
            )
        out[g] = _embed_weight(spec, 0.5 * wc, True)
    return out


def ft_init(spec: NetworkSpec, out_phase=None, out_scale: float = 1.0) -> ParamSet:
    """Full transform initialization for any variant; biases zero."""
    if spec.variant == "cnn":
        sibling = replace(spec, variant="bnet2")
        return ParamSet(spec, bnet2_to_cnn(ft_init(sibling, out_phase, out_scale)).arrays)
    if spec.variant == "bnet":
        return _bnet_ft_init(spec, out_phase, out_scale)
    pset = build(spec, "zeros")
    pset.arrays["layer0.w"][...] = ft_init_layer0(spec)
    for ell in range(1, spec.depth):
        pset.arrays[f"layer{ell}.w"][...] = ft_init_middle(spec, ell)
    pset.arrays["readout.w"][...] = ft_init_last(spec, out_phase, out_scale)
    return pset


def ft_init_cnn(spec: NetworkSpec) -> ParamSet:
    """Dense-variant transform initialization (zero-fill of the sparse one)."""
    if spec.variant != "cnn":
        raise ValidationError(f"expected a cnn spec, got {spec.variant}")
    return ft_init(spec)


def inverse_ft_init(spec: NetworkSpec, out_phase=None) -> ParamSet:
    """Decoder initialization: conjugate kernel with 1/n_in normalization.

    The spec must carry kernel_sign=+1; the 1/n_in factor and any per-output
    phase are folded into the readout weights.
    """
    if spec.kernel_sign != 1:
        raise ValidationError("inverse transform init expects kernel_sign=+1")
    return ft_init(spec, out_phase=out_phase, out_scale=1.0 / spec.n_in)


# ---------------------------------------------------------------------------
# Switch-layer variant


def _bnet_ft_init(spec: NetworkSpec, out_phase, out_scale) -> ParamSet:
    r, L, lt = spec.cheb_order, spec.depth, spec.switch_depth
    pset = build(spec, "zeros")
    arrays = pset.arrays
    b2_like = replace(spec, variant="bnet2", switch_depth=None)
    arrays["layer0.w"][...] = ft_init_layer0(b2_like)
    for ell in range(1, lt):
        arrays[f"layer{ell}.w"][...] = ft_init_middle(b2_like, ell)

    # Switch: per (time panel i, freq panel j) evaluate the kernel on
    # frequency Chebyshev nodes against global time nodes of panel i.
    width_b = 2.0 ** (lt - L)
    sys_t = _local_system(r, width_b)
    width_a = spec.window / 2.0**lt
    sys_xi = _local_system(r, width_a)
    d = arrays["switch.d"]
    n_pos, n_parts = d.shape[0], d.shape[1]
    for i in range(n_pos):
        t_nodes = i * width_b + sys_t.points
        for j in range(n_parts):
            xi_nodes = j * width_a + sys_xi.points
            mc = _kernel(spec, np.outer(xi_nodes, t_nodes))  # [c_out, k_in]
            blocks = extend_blocks(mc)
            for alpha in range(4):
                for beta in range(4):
                    d[i, j, alpha::4, beta::4] = blocks[:, :, alpha, beta]

    # Transposed-conv layers: interpolation in frequency.  Channel (v, m) is
    # node m on time panel v; carrier is that panel's global center.
    for ell in range(lt, L):
        w_arr = arrays[f"tconv{ell}.w"]
        width_a_in = spec.window / 2.0**ell
        width_a_out = width_a_in / 2.0
        sys_a_in = _local_system(r, width_a_in)
        sys_a_out = _local_system(r, width_a_out)
        t_width = 2.0 ** (ell - L)
        groups = w_arr.shape[0]
        for vv in range(groups):
            wc = np.zeros((2 * r, 2 * r), dtype=np.complex128)  # [in (v,m), out (i,m')]
            for child in range(2):
                v_global = 2 * vv + child
                t0 = (v_global + 0.5) * t_width
                for i_pos in range(2):
                    xi_out = i_pos * width_a_out + sys_a_out.points
                    lag = sys_a_in.lagrange_all(xi_out)  # [m, m']
                    for m in range(r):
                        vals = _kernel(spec, (xi_out - sys_a_in.points[m]) * t0) * lag[m]
                        wc[child * r + m, i_pos * r : (i_pos + 1) * r] = vals
            blocks = extend_blocks(wc)
            for alpha in range(4):
                for beta in range(4):
                    w_arr[vv, 0, beta::4, alpha::4] = blocks[:, :, alpha, beta]

    # Readout: interpolate from the level-L frequency nodes to the actual
    # output frequencies, demodulated at the time-interval center 0.5.  The
    # affine readout carries the same 1/2 block factor as ft_init_last.
    w_arr = arrays["readout.w"]
    width_a = spec.window / 2.0**L
    sys_a = _local_system(r, width_a)
    kp = spec.k_out // 2**L
    freqs = spec.out_frequencies()
    phase = np.ones(spec.k_out, dtype=np.complex128) if out_phase is None else out_phase
    for u in range(2**L):
        xi_nodes = u * width_a + sys_a.points
        wc = np.zeros((r, kp), dtype=np.complex128)
        for c_loc in range(kp):
            c = u * kp + c_loc
            xi = freqs[c]
            lag = sys_a.lagrange_all(np.array([xi - u * width_a]))[:, 0]
            wc[:, c_loc] = (
                _kernel(spec, (xi - xi_nodes) * 0.5) * lag * phase[c] * out_scale
            )
        blocks = extend_blocks(0.5 * wc)
        for alpha in range(4):
            for beta in range(4):
                w_arr[u, 0, beta::4, alpha::4] = blocks[:, :, alpha, beta]
    return pset
