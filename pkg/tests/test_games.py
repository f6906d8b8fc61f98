import json

import numpy as np
import pytest

from cbnorm import acceptance
from cbnorm import channels as ch
from cbnorm import games as gm
from cbnorm import linalg as la
from cbnorm.errors import DomainError

FAST = {"restarts": 10}


@pytest.mark.parametrize("n", [2, 3, 4])
def test_wh_success_with_max_entangled_input(n):
    # by hand: delta (x) id applied to tau equals swap / n^2, trace norm 1
    g = gm.wh_game(n)
    tau = la.max_entangled_state(n)
    swap = ch.transpose_map(n).choi
    assert np.allclose(ch.apply_multiplicity(g.delta, tau, n), swap / n ** 2)
    assert gm.success_given_strategy(g, tau, k=n) == pytest.approx(1.0)


@pytest.mark.parametrize("n", [2, 3])
def test_wh_success_with_pure_product_input(n):
    # delta(xx^*) = conj(x) x^T / n, so the success probability is 1/2 + 1/(2n)
    x = la.random_unitary(n, 5)[:, 0]
    p = gm.success_given_strategy(gm.wh_game(n), np.outer(x, np.conj(x)))
    assert p == pytest.approx(0.5 + 0.5 / n)


def test_wh_optimal_values():
    g = gm.wh_game(3)
    assert gm.optimal_entangled(g) == pytest.approx(1.0, abs=1e-6)
    un = gm.optimal_unentangled(g, **FAST)
    assert un.value == pytest.approx(2 / 3, abs=1e-8)
    assert un.hermitian_value >= un.value - 1e-12


def test_invalid_states_rejected():
    g = gm.wh_game(2)
    for rho in (np.eye(2), np.diag([1.5, -0.5]), np.ones((3, 3)) / 3):
        with pytest.raises(DomainError):
            gm.success_given_strategy(g, rho)


def test_game_validation_and_json():
    g = gm.wh_game(2)
    back = gm.game_from_json(json.loads(json.dumps(g.to_json())))
    assert back.lam == g.lam and np.array_equal(back.gamma0.choi, g.gamma0.choi)
    with pytest.raises(DomainError):
        gm.GameTriple(0.5, ch.transpose_map(2), ch.identity_map(2))
    with pytest.raises(DomainError):
        gm.game_from_json({"lambda": 0.5})


@pytest.mark.parametrize("r", [0.0, 0.4, 1.0])
def test_construct_then_decompose(r):
    psi0, psi1 = acceptance.block_channels(2, 8, 1)
    g = gm.construct_game(r, psi0, psi1)
    assert gm.check_max_gap(g, **FAST).verdict
    dec = gm.decompose_wh_equivalent(g, **FAST)
    assert dec.r_weight == pytest.approx(r, abs=1e-8)
    assert dec.lambda_check == pytest.approx(g.lam, abs=1e-10)
    if 0 < r < 1:
        assert np.allclose(dec.psi0.choi, psi0.choi, atol=1e-8)
        assert np.allclose(dec.psi1.choi, psi1.choi, atol=1e-8)


def test_construct_rejects_bad_inputs():
    psi0, psi1 = acceptance.block_channels(2, 8, 1)
    with pytest.raises(DomainError):
        gm.construct_game(1.5, psi0, psi1)
    with pytest.raises(DomainError):
        gm.construct_game(0.5, psi0, None)
    with pytest.raises(DomainError):
        gm.construct_game(0.5, psi0, psi0)


def test_depolarizing_game_has_no_gap():
    dep = ch.depolarizing_channel(2)
    g = gm.GameTriple(0.5, dep, dep)
    assert gm.optimal_entangled(g) == 0.5
    assert not gm.check_max_gap(g, **FAST).verdict


def test_equal_probability_on_wh():
    rep = gm.equal_probability_check(gm.wh_game(2), samples=20)
    assert rep.verdict


def test_cp_difference_uniqueness_for_transpose():
    phi0, phi1, lam = ch.wh_channels(2)
    rep = gm.cp_difference_uniqueness(0.5 * ch.transpose_map(2), lam * phi0,
                                      (1 - lam) * phi1, **FAST)
    assert rep.verdict


def test_explore_report_has_no_checks():
    rep = gm.explore_hermitian_inflation(ch.transpose_map(2), 2, **FAST)
    assert rep.checks == [] and rep.info["ratio"] <= 2 + 1e-4
    with pytest.raises(DomainError):
        gm.explore_hermitian_inflation(ch.random_map(2, 2, 0), 2, **FAST)
