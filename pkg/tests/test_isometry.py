import numpy as np
import pytest
from hypothesis import given, strategies as st

from cbnorm import channels as ch
from cbnorm import isometry as iso
from cbnorm import linalg as la
from cbnorm.errors import CertificationRefused, DomainError

from strategies import seeds

shapes = st.tuples(st.integers(1, 3), st.integers(1, 2), st.integers(0, 2))


def embedding(n, r, extra, seed, positive):
    return ch.random_reversible_embedding(n, r, n * r + extra, seed, positive=positive)


@given(shapes, seeds, st.booleans())
def test_embeddings_preserve_trace_norm_with_ancilla(shape, seed, positive):
    n, r, extra = shape
    _, phi = embedding(n, r, extra, seed, positive)
    X = la.ginibre(2 * n, 2 * n, seed)
    assert la.trace_norm(ch.apply_multiplicity(phi, X, 2)) == pytest.approx(la.trace_norm(X))
    assert iso.certify_complete_isometry(phi).verdict


@given(shapes, seeds, st.booleans())
def test_extraction_recovers_the_map(shape, seed, positive):
    n, r, extra = shape
    (U, sigma, V), phi = embedding(n, r, extra, seed, positive)
    dec = iso.extract_isometry_structure(phi)
    assert np.allclose(dec.to_map().choi, phi.choi, atol=1e-9)
    assert dec.r == np.linalg.matrix_rank(sigma, tol=1e-9)
    # the singular values of sigma are an invariant of the structure
    expected = np.sort(np.linalg.svd(sigma, compute_uv=False))[::-1][:dec.r]
    assert np.allclose(np.sort(np.abs(np.diag(dec.sigma)))[::-1], expected, atol=1e-9)
    if positive:
        assert dec.variant == "positive"


@given(shapes, seeds, st.booleans())
def test_left_inverse(shape, seed, positive):
    n, r, extra = shape
    _, phi = embedding(n, r, extra, seed, positive)
    dec = iso.extract_isometry_structure(phi)
    psi = iso.left_inverse(dec)
    assert np.allclose((psi @ phi).choi, ch.identity_map(n).choi, atol=1e-9)
    if positive:
        assert ch.is_channel(psi, 1e-9)


def test_transpose_is_refused():
    for n in (2, 3):
        rep = iso.certify_complete_isometry(ch.transpose_map(n))
        assert not rep.verdict
        assert rep.check("choi_trace_norm").residual == pytest.approx(n * n - n)
        with pytest.raises(CertificationRefused) as info:
            iso.extract_isometry_structure(ch.transpose_map(n))
        assert info.value.report is not None


def test_signed_decomposition_weights():
    U = la.random_isometry(6, 6, 3)
    h = np.array([0.5, -0.3, -0.2])
    phi = ch.embedding_map(U, np.diag(h))
    sd = iso.herm_signed_decompose(phi)
    assert sd.r_weight == pytest.approx(0.5)
    assert sd.ranges_orthogonal < 1e-9 and sd.reconstruction_residual < 1e-9
    assert ch.is_channel(sd.psi0, 1e-9) and ch.is_channel(sd.psi1, 1e-9)


def test_signed_decomposition_of_a_channel_has_no_negative_part():
    _, phi = embedding(2, 2, 1, 0, True)
    sd = iso.herm_signed_decompose(phi)
    assert sd.r_weight == pytest.approx(1.0) and sd.psi1 is None


def test_signed_decomposition_needs_hermiticity_preservation():
    _, phi = embedding(2, 1, 0, 4, False)
    with pytest.raises(DomainError):
        iso.herm_signed_decompose(phi)


@given(st.integers(1, 3), st.integers(1, 2), seeds)
def test_max_entangled_structure(n, r, seed):
    g = np.random.default_rng(seed)
    m = n * r + 1
    U, V = la.random_isometry(m, n * r, g), la.random_isometry(m, n * r, g)
    sigma = np.diag(g.dirichlet(np.ones(r))).astype(complex)
    X = np.kron(np.eye(n), U) @ np.kron(la.max_entangled_state(n), sigma) @ la.dag(
        np.kron(np.eye(n), V))
    dec = iso.extract_max_entangled_structure(X, n, m)
    assert dec.residuals["matrix_reconstruction"] < 1e-9


def test_max_entangled_preconditions_refuse_product_states():
    X = np.kron(la.random_density(2, 0), la.random_density(2, 1))
    with pytest.raises(CertificationRefused):
        iso.extract_max_entangled_structure(X, 2, 2)


def test_relations_hold_for_embeddings():
    _, phi = embedding(3, 2, 1, 8, False)
    rep = iso.verify_multiplication_relations(phi, samples=5)
    assert rep.verdict, rep.failures()


def test_relations_refute_transpose_and_depolarizing():
    rep = iso.verify_multiplication_relations(ch.transpose_map(3), samples=5)
    assert not rep.verdict
    assert rep.check("restricted").passed is False or rep.check("full").passed is False
    dep = iso.verify_multiplication_relations(ch.depolarizing_channel(3), samples=5)
    assert dep.check("restricted_sweep_standard").residual < 1e-12
    assert dep.check("restricted_sweep_fourier").residual > 1e-2


def test_block_norm_iff():
    E = [[la.elementary(2, a, b) for b in range(2)] for a in range(2)]
    rep = iso.block_2x2_norm_test(E[0][0], E[0][1], E[1][0], E[1][1])
    assert rep.verdict
    assert rep.info["block_norm"] == pytest.approx(2) and rep.info["sum_of_norms"] == pytest.approx(4)
    assert not rep.info["products_vanish"]
    Z = np.zeros((2, 2))
    rep = iso.block_2x2_norm_test(E[0][0], Z, Z, E[1][1])
    assert rep.verdict and rep.info["norm_equal"] and rep.info["products_vanish"]


@given(seeds)
def test_block_norm_iff_on_random_blocks(seed):
    g = np.random.default_rng(seed)
    A, B, C, D = (la.ginibre(2, 2, g) for _ in range(4))
    assert iso.block_2x2_norm_test(A, B, C, D).verdict
