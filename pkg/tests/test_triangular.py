"""Tests for the block upper-triangular corner representation."""

import math

import numpy as np
import pytest

from opderiv.core import DEFAULT_TOL, eig_hermitian, operator_norm
from opderiv.derivation import chain_norm, derivative_chain
from opderiv.scenarios import circle_generator, circle_shift
from opderiv.triangular import (
    CornerOperator,
    ad_expansion_check,
    amplify,
    conjugation_identity_check,
    corner_exponential,
    homomorphism_check,
    load_corner_operator,
    nilpotent_shift,
    norm_sandwich_check,
    save_corner_operator,
    triangular_representation,
)


def rng_operator(rng, n):
    return rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))


def rng_generator(rng, n, spread=2.0):
    z = rng_operator(rng, n)
    return eig_hermitian((z + z.conj().T) / 2 * spread)


# ------------------------------------------------------------ nilpotent shift


def test_nilpotent_shift_small_orders():
    assert nilpotent_shift(0).matrix.shape == (1, 1)
    assert nilpotent_shift(0).matrix[0, 0] == 0.0
    np.testing.assert_array_equal(nilpotent_shift(1).matrix, [[0.0, 1.0], [0.0, 0.0]])


def test_nilpotent_shift_powers():
    b = nilpotent_shift(2).matrix
    b2 = b @ b
    expected = np.zeros((3, 3))
    expected[0, 2] = 1.0
    np.testing.assert_array_equal(b2, expected)
    np.testing.assert_array_equal(b2 @ b, np.zeros((3, 3)))


@pytest.mark.parametrize("n", range(5))
def test_nilpotent_shift_index(n):
    b = nilpotent_shift(n).matrix
    assert operator_norm(np.linalg.matrix_power(b, n + 1)) == 0.0
    if n >= 1:
        assert operator_norm(np.linalg.matrix_power(b, n)) > 0.0


# ------------------------------------------------------------ corner operator


def test_corner_operator_blocks():
    m = np.arange(16, dtype=complex).reshape(4, 4)
    c = CornerOperator(m, base_dim=2, order=1)
    np.testing.assert_array_equal(c.block(0, 1), m[0:2, 2:4])
    with pytest.raises(IndexError):
        c.block(0, 2)
    with pytest.raises(ValueError):
        CornerOperator(m, base_dim=3, order=1)


def test_amplify_is_block_diagonal():
    x = np.array([[1.0, 2.0], [3.0, 4.0]])
    amp = amplify(x, 2)
    for i in range(3):
        np.testing.assert_array_equal(amp.block(i, i), x)
        for j in range(3):
            if i != j:
                assert operator_norm(amp.block(i, j)) == 0.0


# --------------------------------------------------------- representation


def test_representation_of_identity():
    d = eig_hermitian(np.diag([0.0, 1.0]))
    rep = triangular_representation(derivative_chain(d, np.eye(2), 3))
    np.testing.assert_allclose(rep.matrix, np.eye(8), atol=1e-14)


def test_representation_blocks_hand_2x2():
    d = eig_hermitian(np.diag([0.0, 1.0]))
    x = np.array([[0.0, 1.0], [0.0, 0.0]])
    rep = triangular_representation(derivative_chain(d, x, 1))
    np.testing.assert_allclose(rep.block(0, 0), x, atol=1e-15)
    np.testing.assert_allclose(rep.block(1, 1), x, atol=1e-15)
    np.testing.assert_allclose(rep.block(0, 1), [[0.0, -1j], [0.0, 0.0]], atol=1e-15)
    assert operator_norm(rep.block(1, 0)) == 0.0


def test_representation_circle_diagonals():
    d = circle_generator(3)
    s = circle_shift(3, 1)
    rep = triangular_representation(derivative_chain(d, s, 2))
    for i in range(3):
        for j in range(i, 3):
            expected = (1j) ** (j - i) * s / math.factorial(j - i)
            np.testing.assert_allclose(rep.block(i, j), expected, atol=1e-14)


def test_representation_linear_and_injective():
    rng = np.random.default_rng(20)
    d = rng_generator(rng, 3)
    x, y = rng_operator(rng, 3), rng_operator(rng, 3)
    a, b = 1.3 - 0.2j, -0.7j
    lhs = triangular_representation(derivative_chain(d, a * x + b * y, 2)).matrix
    rhs = (
        a * triangular_representation(derivative_chain(d, x, 2)).matrix
        + b * triangular_representation(derivative_chain(d, y, 2)).matrix
    )
    assert operator_norm(lhs - rhs) <= DEFAULT_TOL.alg(operator_norm(x), operator_norm(y))
    # block (0, 0) recovers the operator exactly
    rep = triangular_representation(derivative_chain(d, x, 2))
    np.testing.assert_array_equal(rep.block(0, 0), x)


def test_representation_restriction_compatibility():
    # the leading (j+1)-block corner of the order-n representation is the order-j one
    rng = np.random.default_rng(21)
    d = rng_generator(rng, 3)
    x = rng_operator(rng, 3)
    rep3 = triangular_representation(derivative_chain(d, x, 3)).matrix
    for j in range(3):
        repj = triangular_representation(derivative_chain(d, x, j)).matrix
        k = 3 * (j + 1)
        np.testing.assert_array_equal(rep3[:k, :k], repj)


def test_representation_shift_invariance():
    # D and D + cI induce identical chains and identical representations
    rng = np.random.default_rng(22)
    d = rng_generator(rng, 3)
    x = rng_operator(rng, 3)
    rep = triangular_representation(derivative_chain(d, x, 2)).matrix
    rep_shifted = triangular_representation(derivative_chain(d.shifted(-1.8), x, 2)).matrix
    assert operator_norm(rep - rep_shifted) <= DEFAULT_TOL.alg(
        (1 + d.norm()) ** 2, operator_norm(x)
    )


# ------------------------------------------------------- corner exponential


def test_corner_exponential_order_zero():
    d = eig_hermitian(np.diag([0.3, 0.9]))
    fwd, bwd = corner_exponential(d, 0)
    np.testing.assert_array_equal(fwd.matrix, np.eye(2))
    np.testing.assert_array_equal(bwd.matrix, np.eye(2))


def test_corner_exponential_order_one_hand():
    d = eig_hermitian(np.diag([0.0, 1.0]))
    fwd, bwd = corner_exponential(d, 1)
    expected = np.eye(4, dtype=complex)
    expected[0:2, 2:4] = 1j * d.base
    np.testing.assert_allclose(fwd.matrix, expected, atol=1e-15)
    expected[0:2, 2:4] = -1j * d.base
    np.testing.assert_allclose(bwd.matrix, expected, atol=1e-15)


@pytest.mark.parametrize("n", range(1, 5))
def test_corner_exponential_inverse(n):
    rng = np.random.default_rng(30 + n)
    d = rng_generator(rng, 3)
    fwd, bwd = corner_exponential(d, n)
    dim = 3 * (n + 1)
    assert operator_norm(fwd.matrix @ bwd.matrix - np.eye(dim)) <= 1e-10 * (1 + fwd.norm())


def test_corner_exponential_shifted():
    d = eig_hermitian(np.diag([0.0, 1.0]))
    fwd, _ = corner_exponential(d, 1, shift=1.0)
    np.testing.assert_allclose(fwd.block(0, 1), 1j * (d.base + np.eye(2)), atol=1e-15)


# ------------------------------------------------------- conjugation identity


def test_conjugation_identity_trivial():
    d = eig_hermitian(np.diag([0.0, 1.0]))
    report = conjugation_identity_check(d, derivative_chain(d, np.eye(2), 2))
    assert report.passed and report.residuals[0] <= 1e-13


def test_conjugation_identity_random_2x2():
    rng = np.random.default_rng(31)
    d = rng_generator(rng, 2)
    report = conjugation_identity_check(d, derivative_chain(d, rng_operator(rng, 2), 1))
    assert report.passed and report.residuals[0] <= 1e-10


def test_conjugation_identity_circle_n3():
    d = circle_generator(4)  # dimension 9
    s = circle_shift(4, 1)
    report = conjugation_identity_check(d, derivative_chain(d, s, 3))
    assert report.passed and report.residuals[0] <= 1e-8


# ----------------------------------------------------------- homomorphism


def test_homomorphism_identity_pair():
    d = eig_hermitian(np.diag([0.0, 1.0]))
    cx = derivative_chain(d, np.eye(2), 2)
    report = homomorphism_check(cx, cx)
    assert report.passed and report.residuals[0] <= 1e-14


def test_homomorphism_random_pairs():
    rng = np.random.default_rng(32)
    d = rng_generator(rng, 3)
    cx = derivative_chain(d, rng_operator(rng, 3), 2)
    cy = derivative_chain(d, rng_operator(rng, 3), 2)
    report = homomorphism_check(cx, cy)
    assert report.passed and report.residuals[0] <= 1e-9 * (1 + chain_norm(cx) * chain_norm(cy))


def test_homomorphism_circle_shift_product():
    # S_1 S_2 = S_3 as truncated matrices, and its derivatives are (3i)^j S_3
    n_modes = 4
    d = circle_generator(n_modes)
    s1, s2, s3 = (circle_shift(n_modes, k) for k in (1, 2, 3))
    np.testing.assert_array_equal(s1 @ s2, s3)
    cx = derivative_chain(d, s1, 2)
    cy = derivative_chain(d, s2, 2)
    report = homomorphism_check(cx, cy)
    assert report.passed and report.residuals[0] <= 1e-9
    rep = triangular_representation(derivative_chain(d, s3, 2))
    for j in range(3):
        np.testing.assert_allclose(
            rep.block(0, j), (3j) ** j * s3 / math.factorial(j), atol=1e-12
        )


def test_homomorphism_rejects_mismatched_chains():
    d = eig_hermitian(np.diag([0.0, 1.0]))
    d2 = eig_hermitian(np.diag([0.0, 2.0]))
    with pytest.raises(ValueError):
        homomorphism_check(derivative_chain(d, np.eye(2), 1), derivative_chain(d, np.eye(2), 2))
    with pytest.raises(ValueError):
        homomorphism_check(derivative_chain(d, np.eye(2), 1), derivative_chain(d2, np.eye(2), 1))


# ------------------------------------------------------------ norm sandwich


def test_norm_sandwich_identity():
    d = eig_hermitian(np.diag([0.0, 1.0]))
    report = norm_sandwich_check(derivative_chain(d, np.eye(2), 2))
    assert report.passed
    assert report.details["chain_norm"] == pytest.approx(1.0)
    assert report.details["rep_norm"] == pytest.approx(1.0)


def test_norm_sandwich_circle_values():
    d = circle_generator(2)
    s = circle_shift(2, 1)
    report = norm_sandwich_check(derivative_chain(d, s, 2))
    assert report.passed
    assert report.details["chain_norm"] == pytest.approx(2.5, abs=1e-12)
    assert 2.5 / 3 - 1e-12 <= report.details["rep_norm"] <= 2.5 + 1e-12


@pytest.mark.parametrize("seed", range(6))
def test_norm_sandwich_sweep(seed):
    rng = np.random.default_rng(330 + seed)
    d = rng_generator(rng, 4)
    for n in range(4):
        report = norm_sandwich_check(derivative_chain(d, rng_operator(rng, 4), n))
        assert report.passed


# ------------------------------------------------------------- ad expansion


def test_ad_expansion_trivial_orders():
    rng = np.random.default_rng(34)
    s, b = rng_operator(rng, 3), rng_operator(rng, 3)
    assert ad_expansion_check(s, b, 0).residuals[0] <= 1e-14
    # n = 1: [s, b] + b s = s b by hand
    assert ad_expansion_check(s, b, 1).passed


@pytest.mark.parametrize("n", range(2, 6))
def test_ad_expansion_random(n):
    rng = np.random.default_rng(340 + n)
    s, b = rng_operator(rng, 4), rng_operator(rng, 4)
    report = ad_expansion_check(s, b, n)
    assert report.passed
    assert report.residuals[0] <= 1e-10 * (1 + operator_norm(s) ** n * operator_norm(b))


# -------------------------------------------------------------- serialization


def test_corner_operator_json_roundtrip(tmp_path):
    import json

    rng = np.random.default_rng(35)
    d = rng_generator(rng, 2)
    rep = triangular_representation(derivative_chain(d, rng_operator(rng, 2), 2))
    path = tmp_path / "corner.json"
    save_corner_operator(path, rep.corner)
    payload = json.loads(path.read_text())
    assert payload["base_dim"] == 2 and payload["order"] == 2 and payload["dim"] == 6
    loaded = load_corner_operator(path)
    np.testing.assert_array_equal(loaded.matrix, rep.matrix)
    assert loaded.base_dim == 2 and loaded.order == 2
    from opderiv.core import save_operator

    save_operator(tmp_path / "plain.json", np.eye(2))
    with pytest.raises(ValueError):
        load_corner_operator(tmp_path / "plain.json")
