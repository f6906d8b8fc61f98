import numpy as np
import pytest
from hypothesis import given, settings

from cbnorm import channels as ch
from cbnorm import linalg as la
from cbnorm import norms

from strategies import linear_maps, seeds

FAST = {"restarts": 8}


def cp_induced_oracle(phi):
    # for completely positive maps ||Phi||_1 = ||Phi^*(I)||
    return la.operator_norm(ch.apply_adjoint(phi, np.eye(phi.out_dim)))


@given(seeds)
def test_induced_norm_of_cp_map(seed):
    g = np.random.default_rng(seed)
    A = [la.ginibre(3, 2, g) for _ in range(2)]
    phi = ch.from_kraus(A)
    est = norms.induced_trace_norm(phi, **FAST)
    assert est.value == pytest.approx(cp_induced_oracle(phi), rel=1e-7)


@given(linear_maps())
def test_witness_reproduces_value(phi):
    est = norms.induced_trace_norm(phi, **FAST)
    u, v = est.witness
    assert np.linalg.norm(u) == pytest.approx(1) and np.linalg.norm(v) == pytest.approx(1)
    assert la.trace_norm(phi(np.outer(u, np.conj(v)))) == pytest.approx(est.value, rel=1e-9)
    assert np.all(np.diff(est.history) > -1e-12)


@settings(max_examples=10)
@given(linear_maps())
def test_seesaw_is_below_sdp_upper_bound(phi):
    lo = norms.diamond_norm_seesaw(phi, **FAST)
    hi = norms.diamond_norm_sdp(phi)
    assert lo.value <= hi.upper_bound + 1e-9
    assert hi.value == pytest.approx(lo.value, abs=1e-4)


@settings(max_examples=10)
@given(linear_maps())
def test_trace_operator_duality(phi):
    a = norms.induced_trace_norm(phi, **FAST).value
    b = norms.induced_operator_norm(ch.adjoint_map(phi), **FAST).value
    assert a == pytest.approx(b, abs=1e-6)


@pytest.mark.parametrize("n", [2, 3])
def test_transpose_norms(n):
    T = ch.transpose_map(n)
    assert norms.induced_trace_norm(T).value == pytest.approx(1, abs=1e-10)
    est = norms.multiplicity_norm(T, n)
    assert est.value == pytest.approx(n, abs=1e-8)
    assert est.info["saturated"]
    assert norms.diamond_norm_sdp(T).value == pytest.approx(n, abs=1e-6)
    assert norms.hermitian_induced_norm(T).value == pytest.approx(1, abs=1e-10)


def test_cp_shortcut_certifies_channels():
    phi = ch.random_channel(2, 3, 5)
    est = norms.diamond_norm_seesaw(phi, **FAST)
    assert est.upper_bound == pytest.approx(1, abs=1e-12)
    assert est.value == pytest.approx(1, abs=1e-9)


def test_hermitian_variants():
    # X -> X - X^T/2 style map: signed and pure-state values differ in general
    phi = ch.identity_map(2) - 0.5 * ch.transpose_map(2)
    est = norms.hermitian_induced_norm(phi, **FAST)
    assert est.value >= est.info["pure_state_value"] - 1e-12
    full = norms.induced_trace_norm(phi, **FAST).value
    assert est.value <= full + 1e-9


def test_choi_invariants_of_named_maps():
    for n in (2, 3):
        j, jt = norms.choi_isometry_invariants(ch.identity_map(n))
        assert (j, jt) == (pytest.approx(n), pytest.approx(n * n))
        j, jt = norms.choi_isometry_invariants(ch.transpose_map(n))
        assert (j, jt) == (pytest.approx(n * n), pytest.approx(n))


def test_seed_determinism():
    phi = ch.random_map(3, 2, 11)
    a = norms.induced_trace_norm(phi, restarts=5, seed=3)
    b = norms.induced_trace_norm(phi, restarts=5, seed=3)
    assert a.value == b.value
    assert np.array_equal(a.witness[0], b.witness[0])


def test_multiplicity_rejects_bad_k():
    with pytest.raises(ValueError):
        norms.multiplicity_norm(ch.identity_map(2), 0)
