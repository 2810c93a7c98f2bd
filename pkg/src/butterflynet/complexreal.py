"""Complex arithmetic embedded into nonnegative 4-real vectors.

A complex value x is stored as ((Re x)+, (Im x)+, (Re x)-, (Im x)-), and a
complex coefficient a becomes the signed 4x4 block ``extend_assign(a)``.
ReLU applied after the block product re-canonicalizes the split, so chains
of such layers compute complex products exactly; this is the property the
Fourier-transform initialization relies on.

Channel layout convention used by the whole package: each complex channel
occupies 4 consecutive real channels, so a network with r complex channels
is a real network with 4r channels.
"""

import numpy as np


def embed(x) -> np.ndarray:
    """Canonical 4-real embedding of complex value(s); last axis is 4."""
    x = np.asarray(x, dtype=np.complex128)
    out = np.zeros(x.shape + (4,))
    out[..., 0] = np.maximum(x.real, 0.0)
    out[..., 1] = np.maximum(x.imag, 0.0)
    out[..., 2] = np.maximum(-x.real, 0.0)
    out[..., 3] = np.maximum(-x.imag, 0.0)
    return out


def decode(v: np.ndarray) -> np.ndarray:
    """Inverse of embed: (v0 - v2) + i (v1 - v3) over the last axis.

    Accepts signed entries (pre-activation layers may leave the nonnegative
    cone; the decoded value is unaffected).
    """
    v = np.asarray(v, dtype=np.float64)
    if v.shape[-1] % 4 != 0:
        raise ValueError(f"last axis must be a multiple of 4, got {v.shape[-1]}")
    v4 = v.reshape(v.shape[:-1] + (v.shape[-1] // 4, 4))
    out = (v4[..., 0] - v4[..., 2]) + 1j * (v4[..., 1] - v4[..., 3])
    return out[..., 0] if v.shape[-1] == 4 else out


def extend_assign(a) -> np.ndarray:
    """The 4x4 signed block representing multiplication by complex a.

    Block times an embedded x gives the +/- split of a*x pre-activation;
    each row sums to zero by construction.
    """
    a = complex(a)
    re, im = a.real, a.imag
    return np.array(
        [
            [re, -im, -re, im],
            [im, re, -im, -re],
            [-re, im, re, -im],
            [-im, -re, im, re],
        ]
    )


def extend_matrix(m: np.ndarray) -> np.ndarray:
    """Entrywise extension of a complex matrix: [p, q] -> [4p, 4q] real.

    Row blocks index outputs, column blocks inputs, so the real matrix acts
    on stacked embedded vectors.
    """
    m = np.asarray(m, dtype=np.complex128)
    p, q = m.shape
    out = np.empty((4 * p, 4 * q))
    for i in range(p):
        for j in range(q):
            out[4 * i : 4 * i + 4, 4 * j : 4 * j + 4] = extend_assign(m[i, j])
    return out


def real_input_columns(a) -> np.ndarray:
    """Weight column for a raw real input: a * x embeds to x*(Re,Im,-Re,-Im).

    Layer-0 weights absorb the input embedding this way, so real signals
    enter the network as single real channels.  Shape: a.shape + (4,).
    """
    a = np.asarray(a, dtype=np.complex128)
    out = np.empty(a.shape + (4,))
    out[..., 0] = a.real
    out[..., 1] = a.imag
    out[..., 2] = -a.real
    out[..., 3] = -a.imag
    return out


def extend_blocks(m: np.ndarray) -> np.ndarray:
    """Vectorized extend_assign over an array of complex coefficients.

    Returns m.shape + (4, 4) with [..., alpha, beta] = block rows/cols, i.e.
    out_component alpha, in_component beta.
    """
    m = np.asarray(m, dtype=np.complex128)
    re, im = m.real, m.imag
    out = np.empty(m.shape + (4, 4))
    out[..., 0, 0] = re
    out[..., 0, 1] = -im
    out[..., 0, 2] = -re
    out[..., 0, 3] = im
    out[..., 1, 0] = im
    out[..., 1, 1] = re
    out[..., 1, 2] = -im
    out[..., 1, 3] = -re
    out[..., 2, :] = -out[..., 0, :]
    out[..., 3, :] = -out[..., 1, :]
    return out
