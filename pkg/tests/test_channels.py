import json

import numpy as np
import pytest
from hypothesis import given

from cbnorm import channels as ch
from cbnorm import linalg as la
from cbnorm.errors import DomainError

from strategies import dims, linear_maps, quantum_channels, seeds


def choi_by_definition(action, n):
    """Sum of Phi(E_ab) (x) E_ab, output factor first."""
    return sum(np.kron(action(la.elementary(n, a, b)), la.elementary(n, a, b))
               for a in range(n) for b in range(n))


@given(dims, dims, seeds)
def test_kraus_choi_matches_definition(n, m, seed):
    g = np.random.default_rng(seed)
    A = [la.ginibre(m, n, g) for _ in range(2)]
    B = [la.ginibre(m, n, g) for _ in range(2)]
    phi = ch.from_kraus(ch.KrausSet(A, B))
    oracle = choi_by_definition(lambda X: sum(a @ X @ la.dag(b) for a, b in zip(A, B)), n)
    assert np.allclose(phi.choi, oracle, atol=1e-12)
    X = la.ginibre(n, n, g)
    assert np.allclose(phi(X), sum(a @ X @ la.dag(b) for a, b in zip(A, B)))


def test_named_choi_matrices():
    for n in range(1, 5):
        swap = sum(np.kron(la.elementary(n, a, b), la.elementary(n, b, a))
                   for a in range(n) for b in range(n))
        assert np.array_equal(ch.transpose_map(n).choi, swap)
        assert np.allclose(ch.identity_map(n).choi, n * la.max_entangled_state(n))
        assert np.allclose(ch.depolarizing_channel(n).choi, np.eye(n * n) / n)


@given(linear_maps(), seeds)
def test_adjoint_is_hilbert_schmidt_adjoint(phi, seed):
    g = np.random.default_rng(seed)
    X, Y = la.ginibre(phi.in_dim, phi.in_dim, g), la.ginibre(phi.out_dim, phi.out_dim, g)
    lhs = np.vdot(Y, phi(X))
    rhs = np.vdot(ch.apply_adjoint(phi, Y), X)
    assert lhs == pytest.approx(rhs, abs=1e-12)
    assert np.allclose(ch.adjoint_map(phi)(Y), ch.apply_adjoint(phi, Y))


@given(linear_maps(), dims, seeds)
def test_multiplicity_matches_explicit_tensor(phi, k, seed):
    g = np.random.default_rng(seed)
    n, m = phi.in_dim, phi.out_dim
    X = la.ginibre(n * k, n * k, g)
    big = ch.tensor_with_identity(phi, k)
    assert np.allclose(ch.apply_multiplicity(phi, X, k), big(X), atol=1e-12)
    # product inputs: (Phi (x) id)(A (x) B) = Phi(A) (x) B
    A, B = la.ginibre(n, n, g), la.ginibre(k, k, g)
    assert np.allclose(ch.apply_multiplicity(phi, np.kron(A, B), k), np.kron(phi(A), B))
    Y = la.ginibre(m * k, m * k, g)
    assert np.vdot(Y, big(X)) == pytest.approx(
        np.vdot(ch.apply_adjoint_multiplicity(phi, Y, k), X), abs=1e-11)


@given(linear_maps(), seeds)
def test_composition_order(phi, seed):
    g = np.random.default_rng(seed)
    psi = ch.random_map(phi.out_dim, 2, g)
    X = la.ginibre(phi.in_dim, phi.in_dim, g)
    assert np.allclose((psi @ phi)(X), psi(phi(X)))
    assert np.allclose(ch.compose_transpose(phi)(X), phi(X.T))
    assert np.allclose((2 * phi - phi)(X), phi(X))


@given(quantum_channels())
def test_random_channels_are_channels(phi):
    assert ch.is_completely_positive(phi)
    assert ch.is_trace_preserving(phi)
    assert ch.is_hermiticity_preserving(phi)
    assert ch.is_channel(phi)


def test_transpose_is_positive_not_completely_positive():
    T = ch.transpose_map(3)
    assert ch.is_trace_preserving(T) and ch.is_hermiticity_preserving(T)
    assert not ch.is_completely_positive(T)
    assert ch.cp_residual(T) == pytest.approx(1.0)


def test_werner_holevo_channels():
    for n in range(2, 6):
        phi0, phi1, lam = ch.wh_channels(n)
        assert lam == pytest.approx((n + 1) / (2 * n))
        assert ch.is_channel(phi0) and ch.is_channel(phi1)
        X = la.random_density(n, n)
        assert np.allclose(phi0(X), (np.eye(n) + X.T) / (n + 1))
    with pytest.raises(DomainError):
        ch.wh_channels(1)


@given(dims, seeds)
def test_reversible_embedding_is_channel(n, seed):
    (U, sigma, V), phi = ch.random_reversible_embedding(n, 2, 2 * n + 1, seed)
    assert ch.is_channel(phi, 1e-9)
    X = la.ginibre(n, n, seed)
    assert np.allclose(phi(X), U @ np.kron(X, sigma) @ la.dag(V))


def test_range_projector_of_block_embedding():
    E = np.zeros((4, 2))
    E[2:, :] = np.eye(2)
    P = ch.range_projector(ch.conjugation_map(E))
    assert np.allclose(P, np.diag([0, 0, 1, 1]))


@given(linear_maps())
def test_map_json_round_trip(phi):
    back = ch.map_from_json(json.loads(json.dumps(ch.map_to_json(phi))))
    assert np.array_equal(back.choi, phi.choi)


def test_map_from_json_kraus_and_errors():
    obj = {"kind": "kraus", "in_dim": 2, "out_dim": 2,
           "left": [la.matrix_to_json(np.eye(2))]}
    assert np.allclose(ch.map_from_json(obj).choi, ch.identity_map(2).choi)
    for bad in ({}, {"kind": "choi", "in_dim": 2, "out_dim": 2},
                {"kind": "nope", "in_dim": 2, "out_dim": 2},
                {"kind": "choi", "in_dim": 0, "out_dim": 2, "choi": la.matrix_to_json(np.eye(1))}):
        with pytest.raises(DomainError):
            ch.map_from_json(bad)


def test_choi_shape_and_immutability():
    with pytest.raises(DomainError):
        ch.LinearMapRep(2, 2, np.eye(3))
    phi = ch.identity_map(2)
    with pytest.raises(ValueError):
        phi.choi[0, 0] = 5
