"""Trace-norm functionals of linear maps.

Lower bounds come from see-saw (alternating) maximization over rank-one
inputs; certified values come either from exact Choi-matrix quantities or
from the interior-point SDP in :mod:`cbnorm.sdp`.

See-saw for ||Phi||_1: the maximum of ||Phi(X)||_1 over the trace-norm ball is
attained at a rank-one X = x y^*. Given (x, y) put W = polar unitary of
Phi(x y^*); given W the best (x, y) is the top singular pair of Phi^*(W).
Each half-step cannot decrease the objective.
"""

from __future__ import annotations

import functools
import logging
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import channels as ch
from . import linalg as la
from . import sdp
from .channels import LinearMapRep

log = logging.getLogger(__name__)

DEFAULT_RESTARTS = 50
DEFAULT_MAX_ITER = 500
DEFAULT_TOL = 1e-10
DEFAULT_SDP_TOL = 1e-7


@dataclass
class NormEstimate:
    value: float
    witness: tuple[np.ndarray, np.ndarray] | None = None
    upper_bound: float | None = None
    iterations: int = 0
    restarts_used: int = 0
    history: list[float] = field(default_factory=list, repr=False)
    info: dict = field(default_factory=dict)


def _unit(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v)


def _random_unit(dim: int, rng: np.random.Generator) -> np.ndarray:
    return _unit(la.ginibre(dim, 1, rng)[:, 0])


def _restart_rngs(seed, restarts: int) -> list[np.random.Generator]:
    ss = np.random.SeedSequence(seed)
    return [np.random.default_rng(s) for s in ss.spawn(restarts)]


def _best(runs):
    # strict improvement only: ties keep the lowest restart index
    best = None
    for run in runs:
        if best is None or run[0] > best[0]:
            best = run
    return best


def seesaw_trace_norm(forward: Callable, adjoint: Callable, dim_in: int, restarts: int,
                      tol: float, max_iter: int, seed, starts=()) -> NormEstimate:
    """Maximize ||forward(x y^*)||_1 over unit x, y in C^dim_in.

    ``starts`` are extra deterministic (x, y) starting pairs tried before the
    random restarts.
    """

    def run(x, y):
        hist = []
        Y = forward(np.outer(x, np.conj(y)))
        val = la.trace_norm(Y)
        hist.append(val)
        it = 0
        for it in range(1, max_iter + 1):
            W = la.polar_unitary(Y)
            r = la.svd(adjoint(W))
            x, y = r.left[:, 0], r.right[:, 0]
            Y = forward(np.outer(x, np.conj(y)))
            new = la.trace_norm(Y)
            hist.append(new)
            improved = new - val
            val = max(val, new)
            if improved < tol:
                break
        return val, (x, y), it, hist

    rngs = _restart_rngs(seed, restarts)
    inits = list(starts) + [(_random_unit(dim_in, g), _random_unit(dim_in, g)) for g in rngs]
    runs = [run(x, y) for x, y in inits]
    val, wit, _, hist = _best(runs)
    return NormEstimate(
        value=float(val), witness=wit, iterations=sum(r[2] for r in runs),
        restarts_used=len(runs), history=hist,
    )


def seesaw_hermitian(forward: Callable, adjoint: Callable, dim_in: int, restarts: int,
                     tol: float, max_iter: int, seed, signed: bool = True,
                     starts=()) -> NormEstimate:
    """Maximize ||forward(x x^*)||_1 over unit x.

    Given x, W = polar unitary of forward(x x^*); the next x is the eigenvector
    of the Hermitian part of adjoint(W) with the largest |eigenvalue| when
    ``signed`` (the +-xx^* extreme points) or the largest eigenvalue otherwise.
    """

    def run(x):
        hist = []
        Y = forward(np.outer(x, np.conj(x)))
        val = la.trace_norm(Y)
        hist.append(val)
        it = 0
        for it in range(1, max_iter + 1):
            W = la.polar_unitary(Y)
            w, V = la.eigh(adjoint(W))
            j = int(np.argmax(np.abs(w))) if signed else int(np.argmax(w))
            x = V[:, j]
            Y = forward(np.outer(x, np.conj(x)))
            new = la.trace_norm(Y)
            hist.append(new)
            improved = new - val
            val = max(val, new)
            if improved < tol:
                break
        return val, (x, x), it, hist

    rngs = _restart_rngs(seed, restarts)
    inits = list(starts) + [_random_unit(dim_in, g) for g in rngs]
    runs = [run(x) for x in inits]
    val, wit, _, hist = _best(runs)
    return NormEstimate(
        value=float(val), witness=wit, iterations=sum(r[2] for r in runs),
        restarts_used=len(runs), history=hist,
    )


def induced_trace_norm(phi: LinearMapRep, restarts: int = DEFAULT_RESTARTS,
                       tol: float = DEFAULT_TOL, seed=0,
                       max_iter: int = DEFAULT_MAX_ITER) -> NormEstimate:
    """Lower bound on ||Phi||_1 = max ||Phi(X)||_1 over ||X||_1 <= 1."""
    return seesaw_trace_norm(
        lambda X: ch.apply(phi, X), lambda W: ch.apply_adjoint(phi, W),
        phi.in_dim, restarts, tol, max_iter, seed,
    )


def induced_operator_norm(phi: LinearMapRep, restarts: int = DEFAULT_RESTARTS,
                          tol: float = DEFAULT_TOL, seed=0,
                          max_iter: int = DEFAULT_MAX_ITER) -> NormEstimate:
    """Lower bound on ||Phi|| = max ||Phi(W)|| over ||W|| <= 1.

    Extreme points of the operator-norm ball are unitaries. Given W take the
    top singular pair (x, y) of Phi(W); given (x, y) take W = polar unitary of
    Phi^*(x y^*).
    """
    best = None
    total_it = 0
    for g in _restart_rngs(seed, restarts):
        W = la.random_unitary(phi.in_dim, g)
        Z = ch.apply(phi, W)
        val = la.operator_norm(Z)
        hist = [val]
        for it in range(1, max_iter + 1):
            r = la.svd(Z)
            x, y = r.left[:, 0], r.right[:, 0]
            W = la.polar_unitary(ch.apply_adjoint(phi, np.outer(x, np.conj(y))))
            Z = ch.apply(phi, W)
            new = la.operator_norm(Z)
            hist.append(new)
            improved = new - val
            val = max(val, new)
            if improved < tol:
                break
        total_it += it
        if best is None or val > best[0]:
            best = (val, W, hist)
    return NormEstimate(value=float(best[0]), iterations=total_it, restarts_used=restarts,
                        history=best[2], info={"unitary": best[1]})


def multiplicity_norm(phi: LinearMapRep, k: int, restarts: int = DEFAULT_RESTARTS,
                      tol: float = DEFAULT_TOL, seed=0, max_iter: int = DEFAULT_MAX_ITER,
                      base: NormEstimate | None = None) -> NormEstimate:
    """Lower bound on ||Phi (x) id_k||_1 with the bound k ||Phi||_1 reported.

    The witness vectors live on C^n (x) C^k. A maximally entangled start is
    tried first alongside the random restarts.
    """
    if k < 1:
        raise ValueError("k must be positive")
    n = phi.in_dim
    starts = []
    if k > 1:
        s = min(n, k)
        u = np.zeros((n, k), dtype=complex)
        u[np.arange(s), np.arange(s)] = 1 / np.sqrt(s)
        starts.append((u.reshape(-1), u.reshape(-1)))
    est = seesaw_trace_norm(
        lambda X: ch.apply_multiplicity(phi, X, k),
        lambda W: ch.apply_adjoint_multiplicity(phi, W, k),
        n * k, restarts, tol, max_iter, seed, starts=starts,
    )
    if base is None:
        base = induced_trace_norm(phi, restarts=restarts, tol=tol, seed=seed, max_iter=max_iter)
    bound = k * base.value
    est.info.update({
        "k": k,
        "induced_norm": base.value,
        "bound": bound,
        "saturated": bool(bound - est.value < 1e-5),
    })
    return est


def cp_cb_norm(phi: LinearMapRep) -> float:
    """|||Phi|||_1 for completely positive Phi: ||Tr_out J(Phi)||."""
    return la.operator_norm(ch.choi_partial_trace(phi, "output"))


def diamond_norm_seesaw(phi: LinearMapRep, restarts: int = DEFAULT_RESTARTS,
                        tol: float = DEFAULT_TOL, seed=0,
                        max_iter: int = DEFAULT_MAX_ITER) -> NormEstimate:
    """Lower bound on |||Phi|||_1 = ||Phi (x) id_n||_1.

    For completely positive maps the exact value is attached as ``upper_bound``.
    """
    est = multiplicity_norm(phi, phi.in_dim, restarts=restarts, tol=tol, seed=seed,
                            max_iter=max_iter)
    if ch.is_completely_positive(phi):
        est.upper_bound = cp_cb_norm(phi)
        est.info["certificate"] = "cp-choi"
    return est


@functools.lru_cache(maxsize=64)
def _solve_cb_sdp(choi_bytes: bytes, n: int, m: int, tol: float):
    J = np.frombuffer(choi_bytes, dtype=complex).reshape(n * m, n * m)
    result = sdp.solve_sdp(sdp.cb_norm_problem(J, n, m), tol=tol)
    upper = sdp.cb_norm_certified_upper_bound(result, J, n, m)
    return result, upper


def diamond_norm_sdp(phi: LinearMapRep, tol: float = DEFAULT_SDP_TOL) -> NormEstimate:
    """|||Phi|||_1 from the interior-point SDP.

    ``value`` is the maximization-side objective; ``upper_bound`` comes from an
    exactly feasible repair of the minimization-side iterate. Results are
    memoized on the Choi matrix bytes.
    """
    J = np.ascontiguousarray(phi.choi)
    result, upper = _solve_cb_sdp(J.tobytes(), phi.in_dim, phi.out_dim, float(tol))
    return NormEstimate(
        value=float(result.dual_objective),
        upper_bound=float(upper),
        iterations=result.iterations,
        info={
            "primal_objective": result.primal_objective,
            "dual_objective": result.dual_objective,
            "gap": result.gap,
            "primal_infeasibility": result.primal_infeasibility,
            "dual_infeasibility": result.dual_infeasibility,
            "converged": result.converged,
        },
    )


def hermitian_induced_norm(phi: LinearMapRep, restarts: int = DEFAULT_RESTARTS,
                           tol: float = DEFAULT_TOL, seed=0,
                           max_iter: int = DEFAULT_MAX_ITER) -> NormEstimate:
    """Lower bound on ||Phi||_{1,H}: max ||Phi(H)||_1 over Hermitian H with ||H||_1 = 1.

    Searches the extreme points +-xx^*. The density-matrix optimum (pure
    states xx^* only) is computed separately and stored as
    ``info["pure_state_value"]``.
    """
    if not ch.is_hermiticity_preserving(phi, 1e-9):
        warnings.warn("map is not Hermiticity preserving", RuntimeWarning, stacklevel=2)
    fwd = lambda X: ch.apply(phi, X)  # noqa: E731
    adj = lambda W: ch.apply_adjoint(phi, W)  # noqa: E731
    est = seesaw_hermitian(fwd, adj, phi.in_dim, restarts, tol, max_iter, seed, signed=True)
    pure = seesaw_hermitian(fwd, adj, phi.in_dim, restarts, tol, max_iter, seed, signed=False)
    est.info["pure_state_value"] = pure.value
    return est


def hermitian_multiplicity_norm(phi: LinearMapRep, k: int, restarts: int = DEFAULT_RESTARTS,
                                tol: float = DEFAULT_TOL, seed=0,
                                max_iter: int = DEFAULT_MAX_ITER) -> NormEstimate:
    """Lower bound on ||Phi (x) id_k||_{1,H}."""
    n = phi.in_dim
    starts = []
    if k > 1:
        s = min(n, k)
        u = np.zeros((n, k), dtype=complex)
        u[np.arange(s), np.arange(s)] = 1 / np.sqrt(s)
        starts.append(u.reshape(-1))
    return seesaw_hermitian(
        lambda X: ch.apply_multiplicity(phi, X, k),
        lambda W: ch.apply_adjoint_multiplicity(phi, W, k),
        n * k, restarts, tol, max_iter, seed, signed=True, starts=starts,
    )


def choi_isometry_invariants(phi: LinearMapRep) -> tuple[float, float]:
    """(||J(Phi)||_1, ||J(Phi T_n)||_1)."""
    return la.trace_norm(phi.choi), la.trace_norm(ch.compose_transpose(phi).choi)


def estimate_to_json(est: NormEstimate) -> dict:
    witness = None
    if est.witness is not None:
        u, v = est.witness
        witness = {"u": la.matrix_to_json(np.reshape(u, (-1, 1))),
                   "v": la.matrix_to_json(np.reshape(v, (-1, 1)))}
    return {
        "value": est.value,
        "upper_bound": est.upper_bound,
        "witness": witness,
        "restarts_used": est.restarts_used,
    }
