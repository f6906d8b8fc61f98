"""Dense primal-dual interior-point solver for small block SDPs.

Problems are written in LMI form over complex Hermitian blocks::

    minimize    c . y
    subject to  S_b = sum_i y_i F_{b,i} - F0_b  >= 0     for every block b

with y real. The conic dual is::

    maximize    sum_b <F0_b, X_b>
    subject to  sum_b <F_{b,i}, X_b> = c_i,   X_b >= 0

where <A, B> = Re Tr(A B). The solver uses the HKM search direction with a
Mehrotra predictor-corrector and an infeasible starting point.

The linear map y -> (F_b(y))_b is supplied as callbacks so that problems with
full Hermitian matrix variables (such as the completely bounded norm program)
never materialize the coefficient matrices.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.linalg
import scipy.sparse

from . import linalg as la
from .errors import SolverError

log = logging.getLogger(__name__)

Blocks = list  # list of Hermitian np.ndarray, one per block


@dataclass
class SdpProblem:
    """LMI-form SDP with operator callbacks.

    ``apply(y)`` returns the blocks sum_i y_i F_{b,i};
    ``adjoint(X)`` returns the vector (sum_b <F_{b,i}, X_b>)_i;
    ``schur(X, Sinv)`` returns M_ij = sum_b Re Tr(F_{b,i} X_b F_{b,j} Sinv_b).
    """

    c: np.ndarray
    F0: Blocks
    apply: Callable[[np.ndarray], Blocks]
    adjoint: Callable[[Blocks], np.ndarray]
    schur: Callable[[Blocks, Blocks], np.ndarray]

    @property
    def block_sizes(self) -> list[int]:
        return [B.shape[0] for B in self.F0]

    @property
    def num_vars(self) -> int:
        return len(self.c)


@dataclass
class SdpResult:
    y: np.ndarray
    X: Blocks
    S: Blocks
    primal_objective: float  # c . y (minimization side)
    dual_objective: float  # <F0, X> (maximization side)
    gap: float
    primal_infeasibility: float
    dual_infeasibility: float
    iterations: int
    converged: bool
    history: list = field(default_factory=list)


def _inner(A: Blocks, B: Blocks) -> float:
    return float(sum(np.real(np.vdot(a, b)) for a, b in zip(A, B)))


def _bnorm(A: Blocks) -> float:
    return float(np.sqrt(sum(np.linalg.norm(a) ** 2 for a in A)))


def _max_step(X: np.ndarray, dX: np.ndarray) -> float:
    """Largest alpha with X + alpha dX >= 0 (inf if unbounded)."""
    L = np.linalg.cholesky(X)
    Linv_dX = scipy.linalg.solve_triangular(L, dX, lower=True)
    T = scipy.linalg.solve_triangular(L, la.dag(Linv_dX), lower=True)
    lam = np.linalg.eigvalsh(la.hermitian_part(T))[0]
    return np.inf if lam >= 0 else -1.0 / lam


def _step(Xs: Blocks, dXs: Blocks, gamma: float) -> float:
    alpha = min(_max_step(X, dX) for X, dX in zip(Xs, dXs))
    return min(1.0, gamma * alpha)


def solve_sdp(problem: SdpProblem, tol: float = 1e-8, max_iter: int = 100,
              gamma: float = 0.95, raise_on_failure: bool = True) -> SdpResult:
    c = np.asarray(problem.c, dtype=float)
    F0 = [la.hermitian_part(np.asarray(B, dtype=complex)) for B in problem.F0]
    sizes = problem.block_sizes
    nu = float(sum(sizes))

    scale = 1.0 + max(_bnorm(F0), float(np.linalg.norm(c)))
    X = [scale * np.eye(d, dtype=complex) for d in sizes]
    S = [scale * np.eye(d, dtype=complex) for d in sizes]
    y = np.zeros_like(c)
    norm_c, norm_F0 = 1.0 + np.linalg.norm(c), 1.0 + _bnorm(F0)

    history = []
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        Ay = problem.apply(y)
        rp = c - problem.adjoint(X)
        Rd = [f0 - a + s for f0, a, s in zip(F0, Ay, S)]
        pobj = float(c @ y)
        dobj = _inner(F0, X)
        mu = _inner(X, S) / nu
        rel_gap = abs(pobj - dobj) / (1.0 + abs(pobj) + abs(dobj))
        pinf = float(np.linalg.norm(rp)) / norm_c
        dinf = _bnorm(Rd) / norm_F0
        history.append((pobj, dobj, rel_gap, pinf, dinf))
        log.debug("iter %d pobj %.10g dobj %.10g gap %.2e pinf %.2e dinf %.2e",
                  it, pobj, dobj, rel_gap, pinf, dinf)
        if rel_gap < tol and pinf < tol and dinf < tol:
            converged = True
            break

        try:
            Sinv = [np.linalg.inv(s) for s in S]
            Sinv = [la.hermitian_part(s) for s in Sinv]
            M = problem.schur(X, Sinv)
            cho = scipy.linalg.cho_factor(M)
            solve = lambda r: scipy.linalg.cho_solve(cho, r)  # noqa: E731
        except (np.linalg.LinAlgError, scipy.linalg.LinAlgError):
            # Schur complement lost definiteness near the boundary
            M = problem.schur(X, Sinv)
            solve = lambda r: np.linalg.lstsq(M, r, rcond=None)[0]  # noqa: E731

        XRdSinv = [x @ rd @ si for x, rd, si in zip(X, Rd, Sinv)]

        def direction(sigma_mu, corr):
            R = [sigma_mu * si - x for si, x in zip(Sinv, X)]
            if corr is not None:
                R = [r - cr for r, cr in zip(R, corr)]
            dy = solve(problem.adjoint([r + xr for r, xr in zip(R, XRdSinv)]) - rp)
            dS = [a - rd for a, rd in zip(problem.apply(dy), Rd)]
            dX = [la.hermitian_part(r - x @ ds @ si)
                  for r, x, ds, si in zip(R, X, dS, Sinv)]
            return dy, dX, dS

        # predictor
        dy_a, dX_a, dS_a = direction(0.0, None)
        ap = _step(X, dX_a, 1.0)
        ad = _step(S, dS_a, 1.0)
        mu_aff = _inner([x + ap * dx for x, dx in zip(X, dX_a)],
                        [s + ad * ds for s, ds in zip(S, dS_a)]) / nu
        sigma = min(1.0, max(0.0, (mu_aff / mu) ** 3))
        # corrector
        corr = [dxa @ dsa @ si for dxa, dsa, si in zip(dX_a, dS_a, Sinv)]
        dy, dX, dS = direction(sigma * mu, corr)
        ap = _step(X, dX, gamma)
        ad = _step(S, dS, gamma)
        X = [la.hermitian_part(x + ap * dx) for x, dx in zip(X, dX)]
        S = [la.hermitian_part(s + ad * ds) for s, ds in zip(S, dS)]
        y = y + ad * dy

    pobj, dobj = float(c @ y), _inner(F0, X)
    rp = c - problem.adjoint(X)
    Rd = [f0 - a + s for f0, a, s in zip(F0, problem.apply(y), S)]
    result = SdpResult(
        y=y, X=X, S=S, primal_objective=pobj, dual_objective=dobj,
        gap=abs(pobj - dobj),
        primal_infeasibility=float(np.linalg.norm(rp)) / norm_c,
        dual_infeasibility=_bnorm(Rd) / norm_F0,
        iterations=it, converged=converged, history=history,
    )
    if not converged and raise_on_failure:
        raise SolverError(
            f"interior-point method stopped after {it} iterations "
            f"(gap {result.gap:.2e}, pinf {result.primal_infeasibility:.2e}, "
            f"dinf {result.dual_infeasibility:.2e})",
            last_iterate=result, gap=result.gap,
        )
    return result


class HermitianBasis:
    """Orthonormal basis of d x d Hermitian matrices for <A, B> = Re Tr(AB).

    Element k has value ``cu[k]`` at flat index ``u[k]`` and ``cw[k]`` at
    flat index ``w[k]`` (row-major).
    """

    def __init__(self, d: int):
        self.d = d
        u, w, cu, cw = [], [], [], []
        r2 = 1 / np.sqrt(2)
        for p in range(d):
            u.append(p * d + p); w.append(p * d + p); cu.append(1.0); cw.append(0.0)
        for p in range(d):
            for q in range(p + 1, d):
                u.append(p * d + q); w.append(q * d + p); cu.append(r2); cw.append(r2)
                u.append(p * d + q); w.append(q * d + p); cu.append(1j * r2); cw.append(-1j * r2)
        self.u = np.array(u)
        self.w = np.array(w)
        self.cu = np.array(cu, dtype=complex)
        self.cw = np.array(cw, dtype=complex)
        self.size = d * d
        self._sparse = scipy.sparse.csc_matrix(
            (np.concatenate([self.cu, self.cw]),
             (np.concatenate([self.u, self.w]), np.tile(np.arange(self.size), 2))),
            shape=(self.size, self.size),
        )

    def to_matrix(self, y: np.ndarray) -> np.ndarray:
        flat = np.zeros(self.size, dtype=complex)
        np.add.at(flat, self.u, self.cu * y)
        np.add.at(flat, self.w, self.cw * y)
        return flat.reshape(self.d, self.d)

    def coefficients(self, X: np.ndarray) -> np.ndarray:
        """(Re Tr(F_k X))_k."""
        XT = X.T.reshape(-1)
        return np.real(self.cu * XT[self.u] + self.cw * XT[self.w])

    def schur_block(self, P: np.ndarray, Q: np.ndarray) -> np.ndarray:
        """M_kl = Re Tr(F_k P F_l Q)."""
        d = self.d
        # G[(i,j),(r,s)] = Q[s,i] P[j,r]
        G = np.multiply.outer(Q.T, P).transpose(0, 2, 3, 1).reshape(d * d, d * d)
        B = self._sparse
        GB = (B.T @ G.T).T
        return np.real(B.T @ GB)


def cb_norm_problem(choi: np.ndarray, in_dim: int, out_dim: int) -> SdpProblem:
    """Completely bounded trace norm of the map with Choi matrix ``choi``.

    minimize (t0 + t1)/2 subject to
        [[Y0, -J], [-J^*, Y1]] >= 0,  t0 I - Tr_out Y0 >= 0,  t1 I - Tr_out Y1 >= 0.
    The Choi matrix lives on C^out (x) C^in and Tr_out traces the left factor.
    """
    J = np.asarray(choi, dtype=complex)
    n, m = in_dim, out_dim
    d = n * m
    basis = HermitianBasis(d)
    N = basis.size
    # Tr_out of every basis element, shape (N, n, n)
    C = np.zeros((N, n, n), dtype=complex)
    for k in range(N):
        e = np.zeros(N)
        e[k] = 1.0
        C[k] = la.partial_trace(basis.to_matrix(e), m, n, "left")
    Cflat = C.reshape(N, n * n)
    eye_n = np.eye(n, dtype=complex)

    c = np.zeros(2 * N + 2)
    c[-2:] = 0.5
    Z = np.zeros((d, d), dtype=complex)
    F0 = [np.block([[Z, J], [la.dag(J), Z]]), np.zeros((n, n), complex), np.zeros((n, n), complex)]

    def apply(y):
        Y0 = basis.to_matrix(y[:N])
        Y1 = basis.to_matrix(y[N:2 * N])
        return [
            np.block([[Y0, Z], [Z, Y1]]),
            y[-2] * eye_n - la.partial_trace(Y0, m, n, "left"),
            y[-1] * eye_n - la.partial_trace(Y1, m, n, "left"),
        ]

    def ptr_adjoint_coeffs(X2):
        # Re Tr(C_k X2)
        return np.real(Cflat @ X2.T.reshape(-1))

    def adjoint(X):
        X1, X2, X3 = X
        g0 = basis.coefficients(X1[:d, :d]) - ptr_adjoint_coeffs(X2)
        g1 = basis.coefficients(X1[d:, d:]) - ptr_adjoint_coeffs(X3)
        return np.concatenate([g0, g1, [np.trace(X2).real, np.trace(X3).real]])

    def small_block(Xb, Sb):
        # contributions of (Y, t) through the n x n epigraph block
        T = np.einsum("jr,lrs,si->lij", Xb, C, Sb).reshape(N, n * n)
        MYY = np.real(Cflat @ T.T)
        MYt = -np.real(np.einsum("kij,ji->k", C, Xb @ Sb))
        Mtt = np.real(np.trace(Xb @ Sb))
        return MYY, MYt, Mtt

    def schur(X, Sinv):
        X1, X2, X3 = X
        S1, S2, S3 = Sinv
        M = np.zeros((2 * N + 2, 2 * N + 2))
        M00 = basis.schur_block(X1[:d, :d], S1[:d, :d])
        M01 = basis.schur_block(X1[:d, d:], S1[d:, :d])
        M11 = basis.schur_block(X1[d:, d:], S1[d:, d:])
        a, b = slice(0, N), slice(N, 2 * N)
        M[a, a] = M00
        M[a, b] = M01
        M[b, a] = M01.T
        M[b, b] = M11
        for sl, idx, Xb, Sb in ((a, -2, X2, S2), (b, -1, X3, S3)):
            MYY, MYt, Mtt = small_block(Xb, Sb)
            M[sl, sl] += MYY
            M[sl, idx] += MYt
            M[idx, sl] += MYt
            M[idx, idx] += Mtt
        return (M + M.T) / 2

    return SdpProblem(c=c, F0=F0, apply=apply, adjoint=adjoint, schur=schur)


def cb_norm_certified_upper_bound(result: SdpResult, choi: np.ndarray,
                                  in_dim: int, out_dim: int) -> float:
    """Objective of a repaired, exactly feasible point of the minimization.

    Shifts Y0, Y1 by the most negative eigenvalue of the block constraint so
    the point is feasible, then evaluates the operator norms exactly.
    """
    n, m = in_dim, out_dim
    d = n * m
    basis = HermitianBasis(d)
    N = basis.size
    Y0 = basis.to_matrix(result.y[:N])
    Y1 = basis.to_matrix(result.y[N:2 * N])
    J = np.asarray(choi, dtype=complex)
    block = np.block([[Y0, -J], [-la.dag(J), Y1]])
    lam = float(np.linalg.eigvalsh(la.hermitian_part(block))[0])
    shift = max(0.0, -lam) * (1 + 1e-12) + 1e-15
    Y0 = Y0 + shift * np.eye(d)
    Y1 = Y1 + shift * np.eye(d)

    def opnorm_ptr(Y):
        return float(np.max(np.abs(np.linalg.eigvalsh(
            la.hermitian_part(la.partial_trace(Y, m, n, "left"))))))

    return 0.5 * (opnorm_ptr(Y0) + opnorm_ptr(Y1))
