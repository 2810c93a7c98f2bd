"""Operator-norm metrics and error measures."""

import numpy as np

from ..chebyshev import dense_dft_matrix
from ..errors import PowerIterationStagnation, ValidationError
from ..networks import ParamSet, induced_matrix


def power_iteration(mat: np.ndarray, tol: float = 1e-6, max_iter: int = 10_000,
                    seed: int = 0) -> float:
    """Largest singular value by alternating applications of mat and its
    adjoint, to relative tolerance on the singular-value estimate."""
    if mat.size == 0:
        return 0.0
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    v = rng.standard_normal(mat.shape[1])
    v /= np.linalg.norm(v)
    sigma_prev = 0.0
    for _ in range(max_iter):
        w = mat @ v
        sigma = np.linalg.norm(w)
        if sigma == 0.0:
            return 0.0
        v = mat.conj().T @ (w / sigma)
        nv = np.linalg.norm(v)
        if nv == 0.0:
            return 0.0
        v /= nv
        if abs(sigma - sigma_prev) <= tol * sigma:
            return float(sigma)
        sigma_prev = sigma
    raise PowerIterationStagnation(
        f"no convergence to rel tol {tol} within {max_iter} iterations"
    )


def matrix_pnorm(mat: np.ndarray, p, **kw) -> float:
    if p == 1:
        return float(np.abs(mat).sum(axis=0).max())
    if p == np.inf or p == "inf":
        return float(np.abs(mat).sum(axis=1).max())
    if p == 2:
        return power_iteration(mat, **kw)
    raise ValidationError(f"p must be 1, 2 or inf, got {p}")


def operator_rel_error(pset: ParamSet, p, chunk: int = 512) -> float:
    """Relative operator p-norm between the exact transform matrix and the
    matrix induced by the network on basis vectors."""
    spec = pset.spec
    target = dense_dft_matrix(spec.n_in, spec.k_out)
    realized = induced_matrix(pset, chunk=chunk)
    return matrix_pnorm(target - realized, p) / matrix_pnorm(target, p)


def operator_rel_errors(pset: ParamSet, chunk: int = 512) -> dict:
    """All three norms from one induced matrix."""
    spec = pset.spec
    target = dense_dft_matrix(spec.n_in, spec.k_out)
    realized = induced_matrix(pset, chunk=chunk)
    diff = target - realized
    return {
        "eps_1": matrix_pnorm(diff, 1) / matrix_pnorm(target, 1),
        "eps_2": matrix_pnorm(diff, 2) / matrix_pnorm(target, 2),
        "eps_inf": matrix_pnorm(diff, np.inf) / matrix_pnorm(target, np.inf),
    }


def rel_l2(pred: np.ndarray, target: np.ndarray) -> np.ndarray:
    """Per-sample relative two-norm error over the last axis."""
    num = np.linalg.norm(pred - target, axis=-1)
    den = np.linalg.norm(target, axis=-1)
    return num / den


def fit_log_rate(depths, errors) -> float:
    """Least-squares slope of log10(error) against depth."""
    depths = np.asarray(depths, dtype=np.float64)
    logs = np.log10(np.asarray(errors, dtype=np.float64))
    return float(np.polyfit(depths, logs, 1)[0])
