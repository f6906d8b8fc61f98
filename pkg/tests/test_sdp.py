import numpy as np
import pytest
from hypothesis import given, strategies as st

from cbnorm import channels as ch
from cbnorm import linalg as la
from cbnorm import sdp
from cbnorm.errors import SolverError

from strategies import seeds


def max_eig_problem(A):
    """minimize t subject to t I - A >= 0; the optimum is lambda_max(A)."""
    d = A.shape[0]
    return sdp.SdpProblem(
        c=np.array([1.0]),
        F0=[A],
        apply=lambda y: [y[0] * np.eye(d)],
        adjoint=lambda X: np.array([np.trace(X[0]).real]),
        schur=lambda X, Sinv: np.array([[np.real(np.trace(X[0] @ Sinv[0]))]]),
    )


@given(st.integers(1, 5), seeds)
def test_toy_sdp_finds_largest_eigenvalue(d, seed):
    A = la.hermitian_part(la.ginibre(d, d, seed))
    res = sdp.solve_sdp(max_eig_problem(A), tol=1e-9)
    top = np.linalg.eigvalsh(A)[-1]
    assert res.converged
    assert res.primal_objective == pytest.approx(top, abs=1e-7)
    assert res.dual_objective == pytest.approx(top, abs=1e-7)


def test_iteration_cap_raises_with_last_iterate():
    A = la.hermitian_part(la.ginibre(4, 4, 0))
    with pytest.raises(SolverError) as info:
        sdp.solve_sdp(max_eig_problem(A), tol=1e-12, max_iter=2)
    assert info.value.last_iterate is not None
    res = sdp.solve_sdp(max_eig_problem(A), tol=1e-12, max_iter=2, raise_on_failure=False)
    assert not res.converged


def unitary_difference_diamond(theta):
    """|||U.U^* - V.V^*|||_1 for V^*U = diag(1, e^{i theta}), 0 <= theta <= pi."""
    return 2 * abs(np.sin(theta / 2))


@pytest.mark.parametrize("theta", [0.3, 1.0, 2.0, np.pi])
def test_cb_norm_of_unitary_difference(theta):
    W = la.random_unitary(2, 7)
    U = W @ np.diag([1, np.exp(1j * theta)])
    phi = ch.conjugation_map(U) - ch.conjugation_map(W)
    res = sdp.solve_sdp(sdp.cb_norm_problem(phi.choi, 2, 2), tol=1e-9)
    upper = sdp.cb_norm_certified_upper_bound(res, phi.choi, 2, 2)
    exact = unitary_difference_diamond(theta)
    assert res.dual_objective == pytest.approx(exact, abs=1e-6)
    assert upper >= exact - 1e-9
    assert upper - exact < 1e-6


@pytest.mark.parametrize("n", [1, 2, 3])
def test_cb_norm_of_transpose_and_identity(n):
    for phi, exact in ((ch.transpose_map(n), n), (ch.identity_map(n), 1)):
        res = sdp.solve_sdp(sdp.cb_norm_problem(phi.choi, n, n), tol=1e-9)
        assert res.dual_objective == pytest.approx(exact, abs=1e-6)


@given(seeds)
def test_certified_upper_bound_dominates_dual(seed):
    phi = ch.random_map(2, 2, seed)
    res = sdp.solve_sdp(sdp.cb_norm_problem(phi.choi, 2, 2), tol=1e-8)
    upper = sdp.cb_norm_certified_upper_bound(res, phi.choi, 2, 2)
    assert upper >= res.dual_objective - 1e-9
    assert upper - res.dual_objective < 1e-5
