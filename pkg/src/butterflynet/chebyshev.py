"""Chebyshev nodes, transformed Lagrange polynomials, the discrete Fourier
kernel, and the closed-form approximation bounds used by the error gates.

The oscillatory kernel ``exp(-2*pi*i*xi*t)`` restricted to a frequency panel
of width ``a`` and a time panel of width ``b`` is numerically low-rank once
``a*b`` is small: interpolating the demodulated kernel on ``r`` Chebyshev
nodes leaves an error bounded by

    (2 + (2/pi) ln r) * (pi e a b / (4 r))**r

per panel pair, which is what ``interp_error_bound`` evaluates for the dyadic
panel hierarchy (``a*b = K / 2**(L+1)`` at every level).
"""

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError


def cheb_points(r: int) -> np.ndarray:
    """Chebyshev points (first kind) of order r on [-1/2, 1/2], decreasing.

    z_i = cos((2i+1)*pi/(2r)) / 2 for i in [0, r).  These are the minimax
    interpolation nodes; the dyadic error gates of the operator-decay tables
    are calibrated to this family.
    """
    if r < 1:
        raise ValidationError(f"Chebyshev order must be >= 1, got {r}")
    i = np.arange(r)
    return 0.5 * np.cos((2 * i + 1) * np.pi / (2 * r))


@dataclass(frozen=True)
class Interval:
    center: float
    width: float

    def __post_init__(self):
        if not self.width > 0:
            raise ValidationError(f"interval width must be positive, got {self.width}")

    @property
    def lo(self) -> float:
        return self.center - self.width / 2.0

    @property
    def hi(self) -> float:
        return self.center + self.width / 2.0


class ChebSystem:
    """Chebyshev nodes of order r mapped onto an interval, with the
    transformed Lagrange basis.

    The transformed polynomial satisfies L'_k(x) = Ltilde_k((x - z'_k)/width),
    where Ltilde_k is independent of the interval placement, so weights built
    from node differences are translation invariant across equal panels.
    """

    def __init__(self, r: int, interval: Interval):
        self.r = r
        self.interval = interval
        self.ref_points = cheb_points(r)
        self.points = interval.width * self.ref_points + interval.center

    def lagrange(self, k: int, x) -> np.ndarray:
        """Evaluate the Lagrange polynomial anchored at node k at x."""
        if not 0 <= k < self.r:
            raise ValidationError(f"node index {k} outside [0, {self.r})")
        x = np.asarray(x, dtype=np.float64)
        pts = self.points
        num = np.ones_like(x)
        den = 1.0
        for p in range(self.r):
            if p == k:
                continue
            num = num * (x - pts[p])
            den = den * (pts[k] - pts[p])
        return num / den

    def lagrange_all(self, x) -> np.ndarray:
        """All r Lagrange polynomials at x; shape [r, *x.shape]."""
        x = np.asarray(x, dtype=np.float64)
        return np.stack([self.lagrange(k, x) for k in range(self.r)])

    def lagrange_reference(self, k: int, y) -> np.ndarray:
        """The interval-free form Ltilde_k evaluated at y = (x - z'_k)/width."""
        y = np.asarray(y, dtype=np.float64)
        z = self.ref_points
        num = np.ones_like(y)
        den = 1.0
        for p in range(self.r):
            if p == k:
                continue
            num = num * (y + z[k] - z[p])
            den = den * (z[k] - z[p])
        return num / den


def dft_kernel(xi, t, sign: int = -1) -> np.ndarray:
    """Unit-modulus Fourier kernel exp(sign * 2*pi*i * xi * t).

    The default sign -1 is the forward transform convention used everywhere
    in this package; pass sign=+1 for the inverse/conjugate kernel.
    """
    xi = np.asarray(xi, dtype=np.float64)
    t = np.asarray(t, dtype=np.float64)
    return np.exp(sign * 2j * np.pi * xi * t)


def dense_dft_matrix(N: int, K: int) -> np.ndarray:
    """K x N forward transform matrix: entry (xi, j) = exp(-2*pi*i*xi*j/N)."""
    if N < 1 or K < 1:
        raise ValidationError(f"N and K must be >= 1, got N={N}, K={K}")
    xi = np.arange(K)[:, None]
    t = np.arange(N)[None, :] / N
    return dft_kernel(xi, t)


def bound_precondition_holds(r: int, K: int, L: int) -> bool:
    """pi*e*K <= r * 2**L, the regime where the closed-form bounds apply."""
    return np.pi * np.e * K <= r * 2.0**L


def interp_error_bound(r: int, K: int, L: int, ell: int) -> float:
    """Single-panel Chebyshev interpolation error bound for the dyadic
    hierarchy: (2 + (2/pi) ln r) * (pi e K / (r 2^(L+1)))**r.

    The bound is independent of the level ell (panel widths trade off
    exactly); ell is accepted for interface symmetry and range-checked.
    """
    if not 0 <= ell < L:
        raise ValidationError(f"level {ell} outside [0, {L})")
    if not bound_precondition_holds(r, K, L):
        raise ValidationError(
            f"bound precondition pi*e*K <= r*2^L violated for r={r}, K={K}, L={L}"
        )
    return (2.0 + (2.0 / np.pi) * np.log(r)) * (
        np.pi * np.e * K / (r * 2.0 ** (L + 1))
    ) ** r


def theorem_bound(r: int, K: int, L: int, p: float) -> float:
    """End-to-end operator approximation ceiling for the L-layer network:

        C_{r,K} * (r^(1-1/p) * ((2/pi) ln r + 1) / 2^(r-2))**L

    with C_{r,K} = (2 + (4/pi) ln r)^3 (pi e K)^r / (2r)^(r-1).
    """
    if p not in (1, 2, np.inf):
        raise ValidationError(f"p must be 1, 2 or inf, got {p}")
    if not bound_precondition_holds(r, K, L):
        raise ValidationError(
            f"bound precondition pi*e*K <= r*2^L violated for r={r}, K={K}, L={L}"
        )
    pinv = 0.0 if p == np.inf else 1.0 / p
    c = (2.0 + (4.0 / np.pi) * np.log(r)) ** 3 * (np.pi * np.e * K) ** r / (
        2.0 * r
    ) ** (r - 1)
    factor = r ** (1.0 - pinv) * ((2.0 / np.pi) * np.log(r) + 1.0) / 2.0 ** (r - 2)
    return c * factor**L
