import numpy as np

from butterflynet.complexreal import (
    decode,
    embed,
    extend_assign,
    extend_blocks,
    extend_matrix,
    real_input_columns,
)


def test_embed_examples():
    assert np.array_equal(embed(-2 + 3j), [0.0, 3.0, 2.0, 0.0])
    assert np.array_equal(embed(0), [0.0, 0.0, 0.0, 0.0])


def test_decode_examples():
    assert decode(np.array([1.0, 0, 0, 0])) == 1.0
    assert decode(np.array([0.0, 0, 1, 0])) == -1.0


def test_decode_embed_roundtrip_exact():
    rng = np.random.default_rng(0)
    x = rng.normal(size=1000) + 1j * rng.normal(size=1000)
    assert np.array_equal(decode(embed(x)), x)


def test_extend_assign_identity_and_rotation():
    x = 0.7 - 0.2j
    for a in (1.0, 1j):
        out = decode(np.maximum(extend_assign(a) @ embed(x), 0.0))
        assert abs(out - a * x) < 1e-15


def test_extend_assign_multiplication_oracle():
    rng = np.random.default_rng(1)
    for _ in range(1000):
        a = complex(rng.normal(), rng.normal())
        x = complex(rng.normal(), rng.normal())
        v = np.maximum(extend_assign(a) @ embed(x), 0.0)
        assert abs(decode(v) - a * x) < 1e-14


def test_extend_rows_sum_to_zero():
    # algebraic identity; float summation order leaves sub-ulp residue
    rng = np.random.default_rng(2)
    for _ in range(20):
        a = complex(rng.normal(), rng.normal())
        block = extend_assign(a)
        assert np.abs(block.sum(axis=1)).max() < 4 * np.finfo(float).eps * abs(a)


def test_relu_transparent_multiply_chain():
    """Chained blocks with ReLU between equal the complex product."""
    rng = np.random.default_rng(3)
    for _ in range(100):
        depth = int(rng.integers(2, 8))
        coeffs = rng.normal(size=depth) + 1j * rng.normal(size=depth)
        x = complex(rng.normal(), rng.normal())
        v = embed(x)
        for a in coeffs:
            v = np.maximum(extend_assign(a) @ v, 0.0)
        assert abs(decode(v) - np.prod(coeffs) * x) < 1e-12


def test_matrix_extension_action():
    rng = np.random.default_rng(4)
    m, n = 3, 5
    mat = rng.normal(size=(m, n)) + 1j * rng.normal(size=(m, n))
    x = rng.normal(size=n) + 1j * rng.normal(size=n)
    v = np.maximum(extend_matrix(mat) @ embed(x).ravel(), 0.0)
    got = decode(v.reshape(m, 4))
    assert np.abs(got - mat @ x).max() < 1e-12


def test_extend_blocks_matches_scalar_form():
    rng = np.random.default_rng(5)
    mat = rng.normal(size=(2, 3)) + 1j * rng.normal(size=(2, 3))
    blocks = extend_blocks(mat)
    for i in range(2):
        for j in range(3):
            assert np.array_equal(blocks[i, j], extend_assign(mat[i, j]))


def test_real_input_columns_action():
    rng = np.random.default_rng(6)
    a = rng.normal(size=7) + 1j * rng.normal(size=7)
    x = 1.7
    cols = real_input_columns(a)  # [7, 4]
    decoded = decode(np.maximum(cols * x, 0.0))
    assert np.abs(decoded - a * x).max() < 1e-14


def test_signed_inputs_decode_consistently():
    # non-canonical nonnegative forms decode to the same value
    v = np.array([1.5, 0.2, 0.5, 0.2])  # decodes to 1.0 + 0j
    assert decode(v) == 1.0 + 0.0j
    a = 2.0 - 1.0j
    out = decode(np.maximum(extend_assign(a) @ v, 0.0))
    assert abs(out - a * 1.0) < 1e-14
