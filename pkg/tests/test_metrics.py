import numpy as np
import pytest

from butterflynet.errors import PowerIterationStagnation
from butterflynet.ftinit import ft_init
from butterflynet.harness.metrics import (
    fit_log_rate,
    matrix_pnorm,
    operator_rel_error,
    operator_rel_errors,
    power_iteration,
    rel_l2,
)
from butterflynet.networks import NetworkSpec


def jacobi_svd_values(mat: np.ndarray, sweeps: int = 60) -> np.ndarray:
    """One-sided Jacobi SVD: orthogonalize the columns of mat by plane
    rotations; singular values are the final column norms.  Independent of
    both LAPACK and the power iteration under test."""
    a = np.array(mat, dtype=np.complex128)
    if a.shape[0] < a.shape[1]:
        a = a.conj().T
    n = a.shape[1]
    for _ in range(sweeps):
        off = 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[:, p].conj() @ a[:, q]
                app = (a[:, p].conj() @ a[:, p]).real
                aqq = (a[:, q].conj() @ a[:, q]).real
                off = max(off, abs(apq))
                if abs(apq) < 1e-15 * np.sqrt(app * aqq + 1e-300):
                    continue
                # rotate in the (p, q) plane to zero the cross term
                tau = (aqq - app) / (2 * abs(apq))
                t = np.sign(tau) / (abs(tau) + np.sqrt(1 + tau * tau))
                if tau == 0:
                    t = 1.0
                c = 1.0 / np.sqrt(1 + t * t)
                s = c * t * (apq / abs(apq))
                ap = a[:, p].copy()
                a[:, p] = c * ap - np.conj(s) * a[:, q]
                a[:, q] = s * ap + c * a[:, q]
        if off < 1e-14:
            break
    return np.sort(np.linalg.norm(a, axis=0))[::-1]


def test_power_iteration_matches_jacobi_oracle():
    rng = np.random.default_rng(0)
    mat = rng.standard_normal((16, 64)) + 1j * rng.standard_normal((16, 64))
    sigma = power_iteration(mat, tol=1e-9, seed=1)
    oracle = jacobi_svd_values(mat)[0]
    assert abs(sigma - oracle) / oracle < 1e-6


def test_power_iteration_flat_spectrum_and_zero():
    from butterflynet.chebyshev import dense_dft_matrix

    mat = dense_dft_matrix(64, 16)
    assert power_iteration(mat) == pytest.approx(np.sqrt(64.0), rel=1e-9)
    assert power_iteration(np.zeros((4, 7))) == 0.0


def test_power_iteration_stagnation_reported():
    rng = np.random.default_rng(1)
    mat = rng.standard_normal((12, 12))
    with pytest.raises(PowerIterationStagnation):
        power_iteration(mat, tol=0.0, max_iter=5)


def test_matrix_pnorms_hand_values():
    mat = np.array([[1.0, -2.0], [3.0, 4.0]])
    assert matrix_pnorm(mat, 1) == 6.0  # max column abs sum
    assert matrix_pnorm(mat, np.inf) == 7.0  # max row abs sum


def test_operator_rel_error_zero_for_exact_net():
    # evaluates through the network path; exact at the degenerate depth
    spec = NetworkSpec("bnet2", 32, 8, 4, 6, 2)
    err = operator_rel_error(ft_init(spec), 2, chunk=32)
    assert err < 1e-3
    all_errs = operator_rel_errors(ft_init(spec), chunk=32)
    assert set(all_errs) == {"eps_1", "eps_2", "eps_inf"}


def test_rel_l2_and_rate_fit():
    pred = np.array([[3.0, 4.0], [1.0, 0.0]])
    target = np.array([[3.0, 0.0], [1.0, 0.0]])
    errs = rel_l2(pred, target)
    assert errs[0] == pytest.approx(4.0 / 3.0)
    assert errs[1] == 0.0
    depths = [4, 5, 6, 7]
    vals = [10.0 ** (-1.3 * d + 0.2) for d in depths]
    assert fit_log_rate(depths, vals) == pytest.approx(-1.3, abs=1e-12)
