"""Elliptic operator -(a(x) u')' + b u^3 on the periodic unit interval,
its reference solvers, the sine-basis helpers for the solver stacks, and
the Poisson energy functional.

Conventions (recorded in result metadata): forward transform is the
unnormalized sum over grid points, inverse carries 1/n; PDE right-hand
sides for the periodic solver are mean-zero and solutions gauge-fixed to
zero mean.
"""

import numpy as np

from . import autodiff as ad
from .errors import SolverNonConvergence, ValidationError


def high_contrast_a(n: int) -> np.ndarray:
    """The piecewise {10, 1} diffusion coefficient: 10 where
    floor((8i - n) / (2n)) is even, 1 where odd."""
    if n % 8 != 0:
        raise ValidationError(f"grid size must be divisible by 8, got {n}")
    i = np.arange(n)
    parity = np.floor_divide(8 * i - n, 2 * n) % 2
    return np.where(parity == 0, 10.0, 1.0)


class EllipticProblem:
    """-(a u')' + b u^3 = f on a uniform periodic grid of n points."""

    def __init__(self, n: int, a: np.ndarray | float = 1.0, b: float = 0.0):
        self.n = n
        self.a = np.broadcast_to(np.asarray(a, dtype=np.float64), (n,)).copy()
        if not (self.a > 0).all():
            raise ValidationError("coefficient a(x) must be strictly positive")
        self.b = float(b)
        self.h = 1.0 / n
        # harmonic-mean face coefficients a_{i+1/2}, robust for high contrast
        ar = np.roll(self.a, -1)
        self.a_face = 2.0 * self.a * ar / (self.a + ar)

    def apply_linear(self, u: np.ndarray) -> np.ndarray:
        """Flux-form second-order difference of -(a u')'; self-adjoint."""
        flux = self.a_face * (np.roll(u, -1, axis=-1) - u)  # a_{i+1/2}(u_{i+1}-u_i)
        return -(flux - np.roll(flux, 1, axis=-1)) / self.h**2

    def apply(self, u: np.ndarray) -> np.ndarray:
        return self.apply_linear(u) + self.b * u**3


def apply_operator(prob: EllipticProblem, u: np.ndarray) -> np.ndarray:
    return prob.apply(np.asarray(u, dtype=np.float64))


def apply_operator_node(prob: EllipticProblem, u: ad.Node) -> ad.Node:
    """Tape op for the operator; linear part is self-adjoint, cubic part
    contributes 3 b u^2 as a diagonal factor."""
    val = prob.apply(u.value)

    def vjp(g):
        return prob.apply_linear(g) + 3.0 * prob.b * u.value**2 * g

    return ad.Node(val, ((u, vjp),))


def spectral_apply_linear(a: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Pseudo-spectral -(a u')' via FFT differentiation (periodic).

    The Nyquist mode's derivative is zeroed on even grids, keeping the
    differentiation matrix antisymmetric (so the operator stays symmetric
    positive semidefinite, which the CG solve needs).
    """
    n = u.shape[-1]
    k = np.fft.fftfreq(n, d=1.0 / n)
    if n % 2 == 0:
        k = k.copy()
        k[n // 2] = 0.0
    ik = 2j * np.pi * k
    du = np.fft.ifft(ik * np.fft.fft(u)).real
    return -np.fft.ifft(ik * np.fft.fft(a * du)).real


def spectral_reference_solve(
    prob: EllipticProblem,
    f: np.ndarray,
    fine_factor: int = 16,
    tol: float = 1e-10,
    max_iter: int = 2000,
) -> np.ndarray:
    """Reference solve of the linear problem (b = 0): preconditioned CG in
    Fourier space on a fine_factor*n grid, restricted back to n points.

    The fine-grid operator is pseudo-spectral; the preconditioner inverts
    the constant-coefficient operator with the mean coefficient.  Requires
    mean-zero f (periodic solvability); the solution is gauged to zero mean.
    """
    if prob.b != 0.0:
        raise ValidationError("reference solver handles the linear case only")
    f = np.asarray(f, dtype=np.float64)
    if abs(f.mean()) > 1e-9 * max(1.0, np.abs(f).max()):
        raise ValidationError("right-hand side must be mean-zero (periodic)")
    n, m = prob.n, prob.n * fine_factor
    # sample coefficient and rhs on the fine grid
    a_fine = np.repeat(prob.a, fine_factor)
    if m == n:
        # the symmetrized spectral operator also annihilates the Nyquist
        # mode on even grids; project it out of the data
        spec_f = np.fft.fft(f)
        spec_f[0] = 0.0
        if m % 2 == 0:
            spec_f[m // 2] = 0.0
        f_fine = np.fft.ifft(spec_f).real
    else:
        spectrum = np.fft.fft(f)
        pad = np.zeros(m, dtype=np.complex128)
        half = n // 2
        pad[:half] = spectrum[:half]
        pad[m - half :] = spectrum[half:]
        if n % 2 == 0:
            pad[half] = spectrum[half] / 2.0
            pad[m - half] = spectrum[half] / 2.0
        f_fine = np.fft.ifft(pad).real * (m / n)
        f_fine -= f_fine.mean()

    k2 = (2.0 * np.pi * np.fft.fftfreq(m, d=1.0 / m)) ** 2
    abar = a_fine.mean()

    def precond(v):
        vh = np.fft.fft(v)
        vh[0] = 0.0
        vh[1:] /= abar * k2[1:]
        if m % 2 == 0:
            vh[m // 2] = 0.0  # operator null mode on even grids
        return np.fft.ifft(vh).real

    def op(v):
        return spectral_apply_linear(a_fine, v)

    u = np.zeros(m)
    res = f_fine - op(u)
    z = precond(res)
    p = z.copy()
    rz = res @ z
    fnorm = np.linalg.norm(f_fine)
    for _ in range(max_iter):
        if np.linalg.norm(res) <= tol * fnorm:
            break
        ap = op(p)
        alpha = rz / (p @ ap)
        u += alpha * p
        res -= alpha * ap
        z = precond(res)
        rz_new = res @ z
        p = z + (rz_new / rz) * p
        rz = rz_new
    else:
        raise SolverNonConvergence(np.linalg.norm(res) / fnorm, tol, max_iter)
    coarse = u[::fine_factor].copy()
    coarse -= coarse.mean()  # gauge after restriction
    return coarse


def dirichlet_reference_solve(a: np.ndarray, f: np.ndarray, fine_factor: int = 16):
    """Solve -(a u')' = f on [0,1] with u(0)=u(1)=0 (sine-basis data):
    odd-extend f and even-extend a onto a doubled periodic domain, solve
    there, restrict.  The doubled-domain rescaling contributes a factor 4."""
    n = len(f)
    f_ext = np.concatenate([f, [0.0], -f[:0:-1]])
    f_ext[0] = 0.0
    a_ext = np.concatenate([a, a[::-1]])
    prob = EllipticProblem(2 * n, a_ext)
    u_ext = spectral_reference_solve(prob, f_ext, fine_factor=fine_factor)
    return 4.0 * u_ext[:n]


def gen_sine_data(k: int, n: int, rng: np.random.Generator, batch: int = 1) -> np.ndarray:
    """f_j = sum_{m=1}^{k-1} c_m sin(pi m j / n); c_0 fixed to zero, the
    rest uniform in [-1, 1]."""
    c = rng.uniform(-1.0, 1.0, size=(batch, k))
    c[:, 0] = 0.0
    j = np.arange(n)
    basis = np.sin(np.pi * np.outer(np.arange(k), j) / n)  # [k, n]
    return c @ basis


def sine_transform(f: np.ndarray, k: int) -> np.ndarray:
    """First k coefficients of the sine expansion: c_m = (2/n) sum_j f_j
    sin(pi m j / n)."""
    n = f.shape[-1]
    basis = np.sin(np.pi * np.outer(np.arange(k), np.arange(n)) / n)
    return (2.0 / n) * f @ basis.T


def galerkin_sine_matrix(a: np.ndarray, n_modes: int, quad_points: int = 4096) -> np.ndarray:
    """Stiffness matrix of -(a u')' in the sin(pi k x) basis on [0,1]:
    A[k,m] = pi^2 k m * integral a(x) cos(pi k x) cos(pi m x) dx, computed by
    midpoint quadrature on a fine grid.  Row/column 0 is the (empty) constant
    mode; it is set to identity so the matrix inverts cleanly."""
    x = (np.arange(quad_points) + 0.5) / quad_points
    idx = np.minimum((x * len(a)).astype(int), len(a) - 1)
    ax = a[idx]
    k = np.arange(n_modes)
    cosines = np.cos(np.pi * np.outer(k, x))  # [n_modes, quad]
    weighted = cosines * ax
    mat = (weighted @ cosines.T) / quad_points
    mat *= np.pi**2 * np.outer(k, k)
    mat[0, :] = 0.0
    mat[:, 0] = 0.0
    mat[0, 0] = 1.0
    return mat


def dc_response_slope(a: np.ndarray, k_en: int, k_de: int, n: int, b: float) -> float:
    """Statistically linearized mean response of -(a u')' + b u^3 = f for
    sine-coefficient data with entries uniform in [-1, 1].

    The oscillatory part w of the solution leaves a mean balance
    b*(ubar^3 + 3 E[w^2] ubar) = mean(f); linearizing over the data
    distribution gives ubar = alpha * mean(f).  This slope seeds the
    constant-mode pathway of the solver stack, which is otherwise the
    slowest direction of the solve-train loss (the divergence part of the
    operator annihilates constants).
    """
    stiff = galerkin_sine_matrix(np.asarray(a, float), k_de)
    ginv = np.linalg.solve(stiff, np.eye(k_de))
    m_map = ginv[:, 1:k_en] / 2.0  # c_k -> ubar_k, rhs projection c/2
    # E[w^2] = (1/2) sum_k Var(ubar_k), Var(c) = 1/3
    sigma2 = float((m_map**2).sum()) / 6.0
    x = np.arange(n) / n
    g = np.sin(np.pi * np.outer(np.arange(k_en), x)).mean(axis=1)
    sigma_m = np.sqrt((g[1:] ** 2).sum() / 3.0)
    if sigma_m == 0.0 or b == 0.0:
        return 0.0
    # alpha = E[m u(m)] / E[m^2] over m ~ N(0, sigma_m) via quadrature
    ms = np.linspace(-4 * sigma_m, 4 * sigma_m, 201)
    weights = np.exp(-(ms**2) / (2 * sigma_m**2))
    us = np.empty_like(ms)
    for i, m in enumerate(ms):
        roots = np.roots([b, 0.0, 3.0 * b * sigma2, -m])
        us[i] = float(np.real(roots[np.isreal(roots)][0]))
    return float((weights * ms * us).sum() / (weights * ms * ms).sum())


def energy_ground_truth(f: np.ndarray) -> np.ndarray:
    """Poisson energy -<u, f>/n for -u'' = f periodic, mean-zero f:
    equals -(1/n^2) sum_{k != 0} |fhat_k|^2 / (2 pi k)^2 under the
    unnormalized forward transform."""
    f = np.atleast_2d(np.asarray(f, dtype=np.float64))
    n = f.shape[-1]
    if np.abs(f.mean(axis=-1)).max() > 1e-9 * max(1.0, np.abs(f).max()):
        raise ValidationError("energy functional requires mean-zero input")
    spec = np.fft.fft(f, axis=-1)
    k = np.fft.fftfreq(n, d=1.0 / n)
    weights = np.zeros(n)
    weights[1:] = 1.0 / (2.0 * np.pi * k[1:]) ** 2
    vals = -(np.abs(spec) ** 2 * weights).sum(axis=-1) / n**2
    return vals if vals.size > 1 else vals[0]
