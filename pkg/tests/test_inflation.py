import numpy as np
import pytest

from cbnorm import channels as ch
from cbnorm import inflation as inf
from cbnorm import linalg as la
from cbnorm.errors import CertificationRefused

FAST = {"restarts": 10}


@pytest.mark.parametrize("n,k", [(2, 1), (2, 2), (3, 2), (3, 3)])
def test_transpose_saturates_up_to_n(n, k):
    rep, wit = inf.verify_saturation(ch.transpose_map(n), k, **FAST)
    assert rep.verdict and rep.info["status"] == "saturated"
    assert np.allclose(wit.schmidt_u, k ** -0.5, atol=1e-6)
    fact = inf.transpose_factorization(ch.transpose_map(n), wit)
    assert fact.verdict


@pytest.mark.parametrize("n", [1, 2, 3])
def test_transpose_does_not_saturate_past_n(n):
    rep, wit = inf.verify_saturation(ch.transpose_map(n), n + 1, **FAST)
    assert not rep.verdict and wit is None
    assert rep.info["status"] == "not saturated"
    assert rep.info["value"] == pytest.approx(n, abs=1e-6)


def test_rescaling_is_reported():
    rep, wit = inf.verify_saturation(3.0 * ch.transpose_map(2), 2, **FAST)
    assert rep.verdict and wit.norm_scale == pytest.approx(3.0)


def test_proof_chain_slacks_are_nonnegative():
    rng = np.random.default_rng(0)
    phi = ch.transpose_map(3)
    for _ in range(10):
        u = la.ginibre(9, 1, rng)[:, 0]
        v = la.ginibre(9, 1, rng)[:, 0]
        audit = inf.proof_chain_audit(phi, u / np.linalg.norm(u), v / np.linalg.norm(v), 3)
        for key in ("slack_triangle", "slack_termwise", "slack_cauchy_schwarz", "slack_rank"):
            assert audit[key] >= -1e-10, key


def test_factorization_refuses_missing_or_weak_witness():
    with pytest.raises(CertificationRefused):
        inf.transpose_factorization(ch.transpose_map(2), None)
    wit = inf.make_witness(np.eye(4)[0], np.eye(4)[0], 2, 2, 1.0)
    with pytest.raises(CertificationRefused):
        inf.transpose_factorization(ch.transpose_map(2), wit)


def test_embedded_map_of_transpose_is_identity_like():
    rep, wit = inf.verify_saturation(ch.transpose_map(2), 2, **FAST)
    G = inf.embedded_map(ch.transpose_map(2), wit)
    X = la.ginibre(2, 2, 1)
    # G(X) = (U X^T V^*)^T, an isometric two-sided unitary conjugation of X
    assert la.trace_norm(G(X)) == pytest.approx(la.trace_norm(X))


def test_corollary_coherent_on_both_sides():
    good = inf.corollary_check(ch.transpose_map(2), **FAST)
    assert good.verdict and good.info["coherent"]
    assert good.info["psi_reversible_channel"]
    bad = inf.corollary_check(ch.random_channel(2, 2, 3), **FAST)
    assert not bad.verdict and bad.info["coherent"]
