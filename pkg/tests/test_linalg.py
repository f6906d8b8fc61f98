import numpy as np
import pytest
from hypothesis import given

from cbnorm import linalg as la
from cbnorm.errors import DomainError

from strategies import complex_matrices, dims, seeds


@given(complex_matrices())
def test_svd_reconstructs(A):
    res = la.svd(A)
    assert np.allclose(res.reconstruct(), A, atol=1e-12)
    assert np.all(np.diff(res.singular_values) <= 1e-12)


@given(complex_matrices())
def test_trace_and_operator_norm_match_numpy(A):
    assert la.trace_norm(A) == pytest.approx(np.linalg.norm(A, "nuc"), rel=1e-12)
    assert la.operator_norm(A) == pytest.approx(np.linalg.norm(A, 2), rel=1e-12)


@given(complex_matrices())
def test_polar_unitary_attains_trace_norm(A):
    W = la.polar_unitary(A)
    assert np.real(np.trace(la.dag(W) @ A)) == pytest.approx(la.trace_norm(A), rel=1e-10)
    assert la.operator_norm(W) <= 1 + 1e-10


@given(complex_matrices(rows=3, cols=3))
def test_hahn_decomposition(A):
    H = la.hermitian_part(A)
    hd = la.hahn_decompose(H)
    assert np.allclose(hd.positive_part - hd.negative_part, H, atol=1e-10)
    assert np.linalg.eigvalsh(hd.positive_part).min() > -1e-10
    assert np.linalg.eigvalsh(hd.negative_part).min() > -1e-10
    assert np.linalg.norm(hd.positive_part @ hd.negative_part) < 1e-9


def _partial_trace_loops(X, dl, dr, which):
    if which == "left":
        out = np.zeros((dr, dr), dtype=complex)
        for i in range(dl):
            out += X[i * dr:(i + 1) * dr, i * dr:(i + 1) * dr]
        return out
    out = np.zeros((dl, dl), dtype=complex)
    for a in range(dl):
        for b in range(dl):
            out[a, b] = np.trace(X[a * dr:(a + 1) * dr, b * dr:(b + 1) * dr])
    return out


@given(dims, dims, seeds)
def test_partial_trace_against_block_loops(dl, dr, seed):
    X = la.ginibre(dl * dr, dl * dr, seed)
    for which in ("left", "right"):
        assert np.allclose(la.partial_trace(X, dl, dr, which),
                           _partial_trace_loops(X, dl, dr, which), atol=1e-12)


@given(dims, dims, seeds)
def test_partial_transpose_on_products(dl, dr, seed):
    g = np.random.default_rng(seed)
    A, B = la.ginibre(dl, dl, g), la.ginibre(dr, dr, g)
    X = np.kron(A, B)
    assert np.allclose(la.partial_transpose(X, dl, dr, "left"), np.kron(A.T, B))
    assert np.allclose(la.partial_transpose(X, dl, dr, "right"), np.kron(A, B.T))
    assert np.allclose(la.swap_factors(X, dl, dr), np.kron(B, A))


def test_max_entangled_partial_transpose_is_swap_over_n():
    for n in range(1, 5):
        tau = la.max_entangled_state(n)
        assert np.trace(tau) == pytest.approx(1)
        assert la.trace_norm(la.partial_transpose(tau, n, n, "left")) == pytest.approx(n)
        assert np.allclose(la.schmidt_coefficients(la.max_entangled_vector(n), n, n),
                           np.full(n, n ** -0.5))


@given(dims, seeds)
def test_random_unitary_and_density(n, seed):
    U = la.random_unitary(n, seed)
    assert np.allclose(la.dag(U) @ U, np.eye(n), atol=1e-12)
    rho = la.random_density(n, seed)
    assert np.trace(rho).real == pytest.approx(1)
    assert np.linalg.eigvalsh(rho).min() > -1e-12


def test_isometry_shape_guard():
    with pytest.raises(DomainError):
        la.random_isometry(2, 3, 0)


@given(complex_matrices())
def test_json_round_trip_is_bitwise(A):
    B = la.matrix_from_json(la.matrix_to_json(A))
    assert np.array_equal(A, B)


def test_numerical_rank_cutoff():
    assert la.numerical_rank(np.array([1.0, 1e-3, 1e-12])) == 2
    assert la.numerical_rank(np.array([])) == 0
