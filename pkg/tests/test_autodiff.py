import numpy as np
import pytest

from butterflynet import autodiff as ad
from butterflynet.errors import ValidationError


def _fd_check(build_loss, params, rel_tol=1e-4, h=1e-5, max_components=40, seed=0):
    """Central finite differences on randomly sampled components."""
    nodes = [ad.param(p) for p in params]
    loss = build_loss(nodes)
    grads = ad.backward(loss, nodes)
    rng = np.random.default_rng(seed)
    for p, g in zip(params, grads):
        flat = p.ravel()
        idx = rng.choice(flat.size, size=min(max_components, flat.size), replace=False)
        for i in idx:
            old = flat[i]
            flat[i] = old + h
            hi = float(build_loss([ad.param(q) for q in params]).value)
            flat[i] = old - h
            lo = float(build_loss([ad.param(q) for q in params]).value)
            flat[i] = old
            fd = (hi - lo) / (2 * h)
            scale = max(abs(fd), abs(g.ravel()[i]), 1e-8)
            assert abs(fd - g.ravel()[i]) / scale < rel_tol


def test_backward_quadratic():
    p = ad.param(np.array([1.0, 2.0]))
    loss = ad.sum_axis(ad.square(p), 0)
    (grad,) = ad.backward(loss, [p])
    assert np.array_equal(grad, [2.0, 4.0])


def test_backward_constant_loss_zero_grads():
    p = ad.param(np.array([1.0, 2.0]))
    loss = ad.constant(np.array(3.0))
    (grad,) = ad.backward(loss, [p])
    assert not grad.any()


def test_backward_rejects_nonscalar():
    p = ad.param(np.array([1.0, 2.0]))
    with pytest.raises(ValidationError):
        ad.backward(p, [p])


def test_relu_gradient_matches_fd_away_from_kinks():
    rng = np.random.default_rng(1)
    x = rng.standard_normal(64)
    x[np.abs(x) < 1e-3] += 0.1  # stay off the kink

    def loss_fn(nodes):
        return ad.mean_all(ad.square(ad.relu(nodes[0])))

    _fd_check(loss_fn, [x], rel_tol=1e-6)


def test_shared_node_gradient_accumulates():
    p = ad.param(np.array([3.0]))
    loss = ad.mean_all(ad.mul(p, p))
    (grad,) = ad.backward(loss, [p])
    assert grad == pytest.approx([6.0])


def test_broadcast_mul_backward():
    rng = np.random.default_rng(2)
    x, d = rng.standard_normal((5, 4)), rng.standard_normal(4)

    def loss_fn(nodes):
        return ad.mean_all(ad.square(ad.mul(nodes[0], nodes[1])))

    _fd_check(loss_fn, [x, d])


def test_conv_and_bias_gradients():
    rng = np.random.default_rng(3)
    x = rng.standard_normal((3, 8, 6))
    w = rng.standard_normal((2, 2, 3, 4))
    b = rng.standard_normal(8)

    def loss_fn(nodes):
        h = ad.conv(nodes[0], nodes[1], 2, 2, 3)
        h = ad.relu(ad.bias_add(h, nodes[2]))
        return ad.mean_all(ad.square(h))

    _fd_check(loss_fn, [x, w, b])


def test_switch_dense_gradients():
    rng = np.random.default_rng(4)
    x = rng.standard_normal((2, 3, 2, 4))
    d = rng.standard_normal((3, 2, 4, 4))
    b = rng.standard_normal((3, 2, 4))

    def loss_fn(nodes):
        return ad.mean_all(ad.square(ad.switch_dense(nodes[0], nodes[1], nodes[2])))

    _fd_check(loss_fn, [x, d, b])


def test_odd_extend_values_and_gradient():
    x = np.array([[0.0, 1.0, 2.0, 3.0]])
    out = ad.odd_extend(ad.param(x)).value
    assert np.array_equal(out, [[0.0, 1, 2, 3, 0, -3, -2, -1]])

    rng = np.random.default_rng(5)
    y = rng.standard_normal((2, 6))

    def loss_fn(nodes):
        return ad.mean_all(ad.square(ad.odd_extend(nodes[0])))

    _fd_check(loss_fn, [y])


def test_symmetrize_spectrum_values_and_gradient():
    # frequencies [0, K) reflected onto [-K, K): conj reverses imaginary split
    v = np.zeros((1, 8))
    v[0, 4:8] = [1.0, 2.0, 3.0, 4.0]  # frequency 1 embedded value 1+2i - 3 - 4i
    out = ad.symmetrize_spectrum(ad.param(v), 2).value
    assert out.shape == (1, 4, 4)
    assert np.array_equal(out[0, 3], [1.0, 2.0, 3.0, 4.0])  # +1 slot
    assert np.array_equal(out[0, 1], [1.0, 4.0, 3.0, 2.0])  # -1 slot: conjugate
    assert not out[0, 0].any()

    rng = np.random.default_rng(6)
    y = rng.standard_normal((3, 8))

    def loss_fn(nodes):
        return ad.mean_all(ad.square(ad.symmetrize_spectrum(nodes[0], 2)))

    _fd_check(loss_fn, [y])


def test_decode_component_gradient():
    rng = np.random.default_rng(7)
    y = rng.standard_normal((2, 8))

    def loss_fn(nodes):
        re = ad.decode_component(nodes[0], "real")
        im = ad.decode_component(nodes[0], "imag")
        return ad.mean_all(ad.add(ad.square(re), ad.square(im)))

    _fd_check(loss_fn, [y])


def test_transpose_reshape_gradients():
    rng = np.random.default_rng(8)
    y = rng.standard_normal((2, 3, 4, 5))

    def loss_fn(nodes):
        h = ad.transpose(nodes[0], (0, 2, 1, 3))
        h = ad.reshape(h, (2, 60))
        return ad.mean_all(ad.square(h))

    _fd_check(loss_fn, [y])


def test_tape_determinism():
    rng = np.random.default_rng(9)
    x = rng.standard_normal((2, 8, 2))
    w = rng.standard_normal((1, 2, 2, 4))

    def run():
        xn, wn = ad.param(x.copy()), ad.param(w.copy())
        loss = ad.mean_all(ad.square(ad.relu(ad.conv(xn, wn, 2, 1, 2))))
        g = ad.backward(loss, [wn])[0]
        return loss.value.copy(), g

    l1, g1 = run()
    l2, g2 = run()
    assert np.array_equal(l1, l2) and np.array_equal(g1, g2)
