"""Linear maps M_n -> M_m stored through their Choi matrix.

Convention: J(Phi) = sum_{a,b} Phi(E_{a,b}) (x) E_{a,b}, output factor on the
left and input factor on the right. Reshaped as a 4-tensor,
``J.reshape(m, n, m, n)[i, a, j, b] == Phi(E_{a,b})[i, j]``.

Multiplicity maps Phi (x) id_k act on M_n (x) M_k with the input space ordered
C^n (x) C^k and the output space ordered C^m (x) C^k.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import linalg as la
from .errors import DomainError

log = logging.getLogger(__name__)

_ROLE = {"output": "left", "input": "right"}


@dataclass(frozen=True, eq=False)
class LinearMapRep:
    in_dim: int
    out_dim: int
    choi: np.ndarray = field(repr=False)

    def __post_init__(self):
        J = la.as_matrix(self.choi)
        d = self.in_dim * self.out_dim
        if J.shape != (d, d):
            raise DomainError(
                f"Choi matrix of shape {J.shape} does not fit M_{self.in_dim} -> M_{self.out_dim}"
            )
        J.setflags(write=False)
        object.__setattr__(self, "choi", J)

    @property
    def tensor(self) -> np.ndarray:
        """Choi matrix as the 4-tensor [i, a, j, b]."""
        m, n = self.out_dim, self.in_dim
        return self.choi.reshape(m, n, m, n)

    def __call__(self, X) -> np.ndarray:
        return apply(self, X)

    def __add__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return subtract(self, other)

    def __rmul__(self, c):
        return scale(self, c)

    def __neg__(self):
        return scale(self, -1.0)

    def __matmul__(self, other):
        return compose(self, other)


@dataclass(frozen=True, eq=False)
class KrausSet:
    left_ops: Sequence[np.ndarray]
    right_ops: Sequence[np.ndarray] | None = None

    def __post_init__(self):
        left = [la.as_matrix(K) for K in self.left_ops]
        if not left:
            raise DomainError("Kraus set is empty")
        right = None if self.right_ops is None else [la.as_matrix(K) for K in self.right_ops]
        shapes = {K.shape for K in left + (right or [])}
        if len(shapes) != 1:
            raise DomainError(f"Kraus operators have mixed shapes {sorted(shapes)}")
        if right is not None and len(right) != len(left):
            raise DomainError("left and right Kraus lists differ in length")
        object.__setattr__(self, "left_ops", left)
        object.__setattr__(self, "right_ops", right)


def from_kraus(kraus: KrausSet | Sequence[np.ndarray]) -> LinearMapRep:
    """Map X -> sum_i A_i X B_i^* (B = A when right operators are absent)."""
    if not isinstance(kraus, KrausSet):
        kraus = KrausSet(kraus)
    left = kraus.left_ops
    right = kraus.right_ops if kraus.right_ops is not None else left
    m, n = left[0].shape
    J = np.zeros((m * n, m * n), dtype=complex)
    for A, B in zip(left, right):
        # column (i, a) of the Choi "vector" is A[i, a]
        J += np.outer(A.reshape(-1), np.conj(B.reshape(-1)))
    return LinearMapRep(n, m, J)


def choi_from_apply(action: Callable[[np.ndarray], np.ndarray], n: int, m: int,
                    linearity_checks: int = 5, seed=0) -> LinearMapRep:
    """Assemble J(Phi) by evaluating ``action`` on every E_{a,b}."""
    J = np.zeros((m, n, m, n), dtype=complex)
    for a in range(n):
        for b in range(n):
            out = la.as_matrix(action(la.elementary(n, a, b)))
            if out.shape != (m, m):
                raise DomainError(f"action returned shape {out.shape}, expected {(m, m)}")
            J[:, a, :, b] = out
    phi = LinearMapRep(n, m, J.reshape(m * n, m * n))
    rng = np.random.default_rng(seed)
    for _ in range(linearity_checks):
        X, Y = la.ginibre(n, n, rng), la.ginibre(n, n, rng)
        c = complex(*rng.standard_normal(2))
        lhs = la.as_matrix(action(X + c * Y))
        rhs = apply(phi, X) + c * apply(phi, Y)
        if np.linalg.norm(lhs - rhs) > 1e-10 * max(1.0, np.linalg.norm(rhs)):
            warnings.warn("action failed a linearity spot check", RuntimeWarning, stacklevel=2)
            break
    return phi


def apply(phi: LinearMapRep, X) -> np.ndarray:
    X = la.as_matrix(X)
    if X.shape != (phi.in_dim, phi.in_dim):
        raise DomainError(f"input of shape {X.shape} for a map on M_{phi.in_dim}")
    return np.einsum("iajb,ab->ij", phi.tensor, X)


def apply_multiplicity(phi: LinearMapRep, X, k: int) -> np.ndarray:
    """(Phi (x) id_k)(X) without materializing the larger Choi matrix."""
    n, m = phi.in_dim, phi.out_dim
    X = la.as_matrix(X)
    if X.shape != (n * k, n * k):
        raise DomainError(f"input of shape {X.shape} for Phi (x) id_{k} on M_{n * k}")
    out = np.einsum("iajb,acbd->icjd", phi.tensor, X.reshape(n, k, n, k))
    return out.reshape(m * k, m * k)


def apply_adjoint(phi: LinearMapRep, Y) -> np.ndarray:
    """Phi^*(Y) for the Hilbert-Schmidt pairing."""
    Y = la.as_matrix(Y)
    if Y.shape != (phi.out_dim, phi.out_dim):
        raise DomainError(f"input of shape {Y.shape} for the adjoint of a map into M_{phi.out_dim}")
    return np.einsum("iajb,ij->ab", np.conj(phi.tensor), Y)


def apply_adjoint_multiplicity(phi: LinearMapRep, Y, k: int) -> np.ndarray:
    n, m = phi.in_dim, phi.out_dim
    Y = la.as_matrix(Y)
    if Y.shape != (m * k, m * k):
        raise DomainError(f"input of shape {Y.shape} for (Phi (x) id_{k})^*")
    out = np.einsum("iajb,icjd->acbd", np.conj(phi.tensor), Y.reshape(m, k, m, k))
    return out.reshape(n * k, n * k)


def _same_dims(phi: LinearMapRep, psi: LinearMapRep):
    if (phi.in_dim, phi.out_dim) != (psi.in_dim, psi.out_dim):
        raise DomainError(
            f"maps M_{phi.in_dim}->M_{phi.out_dim} and M_{psi.in_dim}->M_{psi.out_dim} differ"
        )


def compose(phi: LinearMapRep, psi: LinearMapRep) -> LinearMapRep:
    """phi o psi (psi acts first)."""
    if psi.out_dim != phi.in_dim:
        raise DomainError(f"cannot compose: inner dimensions {psi.out_dim} != {phi.in_dim}")
    J = np.einsum("ipjq,paqb->iajb", phi.tensor, psi.tensor)
    d = phi.out_dim * psi.in_dim
    return LinearMapRep(psi.in_dim, phi.out_dim, J.reshape(d, d))


def scale(phi: LinearMapRep, c) -> LinearMapRep:
    return LinearMapRep(phi.in_dim, phi.out_dim, c * phi.choi)


def add(phi: LinearMapRep, psi: LinearMapRep) -> LinearMapRep:
    _same_dims(phi, psi)
    return LinearMapRep(phi.in_dim, phi.out_dim, phi.choi + psi.choi)


def subtract(phi: LinearMapRep, psi: LinearMapRep) -> LinearMapRep:
    _same_dims(phi, psi)
    return LinearMapRep(phi.in_dim, phi.out_dim, phi.choi - psi.choi)


def tensor_with_identity(phi: LinearMapRep, k: int) -> LinearMapRep:
    """Phi (x) id_k : M_{nk} -> M_{mk}, spaces ordered C^n (x) C^k and C^m (x) C^k."""
    if k < 1:
        raise DomainError("k must be positive")
    n, m = phi.in_dim, phi.out_dim
    eye = np.eye(k)
    # J'[(i,c),(a,e)],[(j,d),(b,f)] = J[i,a,j,b] delta_ce delta_df
    J = np.einsum("iajb,ce,df->icaejdbf", phi.tensor, eye, eye)
    d = m * k * n * k
    return LinearMapRep(n * k, m * k, J.reshape(d, d))


def adjoint_map(phi: LinearMapRep) -> LinearMapRep:
    J = np.conj(phi.tensor).transpose(1, 0, 3, 2)
    d = phi.in_dim * phi.out_dim
    return LinearMapRep(phi.out_dim, phi.in_dim, J.reshape(d, d))


def transpose_map(n: int) -> LinearMapRep:
    """T_n; its Choi matrix is the swap operator on C^n (x) C^n."""
    if n < 1:
        raise DomainError("n must be positive")
    J = np.einsum("ib,ja->iajb", np.eye(n), np.eye(n)).astype(complex)
    return LinearMapRep(n, n, J.reshape(n * n, n * n))


def identity_map(n: int) -> LinearMapRep:
    if n < 1:
        raise DomainError("n must be positive")
    v = np.eye(n, dtype=complex).reshape(-1)
    return LinearMapRep(n, n, np.outer(v, v))


def trace_map(n: int, m: int = 1) -> LinearMapRep:
    """X -> Tr(X) I_m."""
    J = np.kron(np.eye(m), np.eye(n)).astype(complex)
    return LinearMapRep(n, m, J)


def depolarizing_channel(n: int) -> LinearMapRep:
    """Completely depolarizing channel X -> Tr(X) I_n / n."""
    return scale(trace_map(n, n), 1.0 / n)


def conjugation_map(W) -> LinearMapRep:
    """X -> W X W^*."""
    return from_kraus([la.as_matrix(W)])


def embedding_map(U, sigma, V=None) -> LinearMapRep:
    """X -> U (X (x) sigma) V^* for U, V : C^n (x) C^r -> C^m."""
    U = la.as_matrix(U)
    V = U if V is None else la.as_matrix(V)
    sigma = la.as_matrix(sigma)
    r = sigma.shape[0]
    m, nr = U.shape
    if nr % r or V.shape != U.shape:
        raise DomainError("isometry shapes do not match sigma")
    n = nr // r
    U4 = U.reshape(m, n, r)
    V4 = V.reshape(m, n, r)
    # Phi(E_ab)[i,j] = sum_{s,t} U[i,(a,s)] sigma[s,t] conj(V[j,(b,t)])
    J = np.einsum("ias,st,jbt->iajb", U4, sigma, np.conj(V4))
    return LinearMapRep(n, m, J.reshape(m * n, m * n))


def compose_transpose(phi: LinearMapRep) -> LinearMapRep:
    """phi o T_n, computed as the input-factor partial transpose of J(phi)."""
    J = la.partial_transpose(phi.choi, phi.out_dim, phi.in_dim, "right")
    return LinearMapRep(phi.in_dim, phi.out_dim, J)


def choi_partial_trace(phi: LinearMapRep, role: str) -> np.ndarray:
    return la.partial_trace(phi.choi, phi.out_dim, phi.in_dim, _ROLE[role])


def choi_partial_transpose(phi: LinearMapRep, role: str) -> np.ndarray:
    return la.partial_transpose(phi.choi, phi.out_dim, phi.in_dim, _ROLE[role])


def cp_residual(phi: LinearMapRep) -> float:
    """max(0, -lambda_min(J)) after symmetrization, plus the Hermiticity defect."""
    J = phi.choi
    w = np.linalg.eigvalsh(la.hermitian_part(J))
    return max(0.0, -float(w[0])) + la.hermiticity_residual(J)


def tp_residual(phi: LinearMapRep) -> float:
    return float(np.linalg.norm(choi_partial_trace(phi, "output") - np.eye(phi.in_dim)))


def hp_residual(phi: LinearMapRep) -> float:
    return la.hermiticity_residual(phi.choi)


def is_completely_positive(phi: LinearMapRep, tol: float = 1e-9) -> bool:
    return cp_residual(phi) <= tol


def is_trace_preserving(phi: LinearMapRep, tol: float = 1e-9) -> bool:
    return tp_residual(phi) <= tol


def is_hermiticity_preserving(phi: LinearMapRep, tol: float = 1e-9) -> bool:
    return hp_residual(phi) <= tol


def is_channel(phi: LinearMapRep, tol: float = 1e-9) -> bool:
    return is_completely_positive(phi, tol) and is_trace_preserving(phi, tol)


def range_projector(phi: LinearMapRep, cutoff: float = la.RANK_CUTOFF) -> np.ndarray:
    """Projector onto the support of phi(I_n); the output range of a CP map."""
    w, V = la.eigh(apply(phi, np.eye(phi.in_dim)))
    keep = np.abs(w) > cutoff * max(1.0, float(np.max(np.abs(w))))
    return V[:, keep] @ la.dag(V[:, keep])


def wh_channels(n: int) -> tuple[LinearMapRep, LinearMapRep, float]:
    """Werner-Holevo channels and lambda_n = (n+1)/(2n).

    Phi0(X) = (Tr(X) I + X^T)/(n+1),  Phi1(X) = (Tr(X) I - X^T)/(n-1).
    """
    if n < 2:
        raise DomainError("Werner-Holevo channels need n >= 2")
    tr, t = trace_map(n, n).choi, transpose_map(n).choi
    phi0 = LinearMapRep(n, n, (tr + t) / (n + 1))
    phi1 = LinearMapRep(n, n, (tr - t) / (n - 1))
    return phi0, phi1, (n + 1) / (2 * n)


def random_map(n: int, m: int, seed=None) -> LinearMapRep:
    """Map with a Ginibre Choi matrix, scaled to unit Frobenius norm."""
    G = la.ginibre(m * n, m * n, seed)
    return LinearMapRep(n, m, G / np.linalg.norm(G))


def random_hp_map(n: int, m: int, seed=None) -> LinearMapRep:
    """Hermiticity-preserving map with a random Hermitian Choi matrix."""
    G = la.ginibre(m * n, m * n, seed)
    H = la.hermitian_part(G)
    return LinearMapRep(n, m, H / np.linalg.norm(H))


def random_channel(n: int, m: int, seed=None, kraus_rank: int | None = None) -> LinearMapRep:
    """Channel from a random Stinespring isometry C^n -> C^m (x) C^r."""
    r = kraus_rank or n * m
    W = la.random_isometry(m * r, n, seed)
    ops = [W.reshape(m, r, n)[:, s, :] for s in range(r)]
    return from_kraus(ops)


def random_reversible_embedding(n: int, r: int, m: int, seed=None, positive=True):
    """Random (U, sigma, V) with U, V : C^n (x) C^r -> C^m isometric.

    Returns the tuple and the map X -> U (X (x) sigma) V^*. With ``positive``
    the map is a reversible channel (V = U); otherwise V is independent.
    """
    rng = la._rng(seed)
    U = la.random_isometry(m, n * r, rng)
    V = U if positive else la.random_isometry(m, n * r, rng)
    sigma = la.random_density(r, rng)
    return (U, sigma, V), embedding_map(U, sigma, V)


def map_to_json(phi: LinearMapRep) -> dict:
    return {"kind": "choi", "in_dim": phi.in_dim, "out_dim": phi.out_dim,
            "choi": la.matrix_to_json(phi.choi)}


def map_from_json(obj) -> LinearMapRep:
    """Parse {"kind": "choi" | "kraus", ...} into a map."""
    try:
        kind = obj["kind"]
        n, m = int(obj["in_dim"]), int(obj["out_dim"])
    except (KeyError, TypeError, ValueError) as exc:
        raise DomainError(f"malformed map object: {exc}") from exc
    if n < 1 or m < 1:
        raise DomainError("map dimensions must be positive")
    if kind == "choi":
        if "choi" not in obj:
            raise DomainError("choi map object lacks 'choi'")
        phi = LinearMapRep(n, m, la.matrix_from_json(obj["choi"]))
    elif kind == "kraus":
        if not obj.get("left"):
            raise DomainError("kraus map object lacks 'left'")
        left = [la.matrix_from_json(K) for K in obj["left"]]
        right = obj.get("right")
        right = None if right is None else [la.matrix_from_json(K) for K in right]
        phi = from_kraus(KrausSet(left, right))
        if (phi.in_dim, phi.out_dim) != (n, m):
            raise DomainError(f"Kraus operators give M_{phi.in_dim} -> M_{phi.out_dim}, "
                              f"declared M_{n} -> M_{m}")
    else:
        raise DomainError(f"unknown map kind {kind!r}")
    log.debug("parsed map %dx%d: cp %.2e tp %.2e hp %.2e", n, m, cp_residual(phi),
              tp_residual(phi), hp_residual(phi))
    return phi
