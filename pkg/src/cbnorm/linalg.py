"""Dense complex linear algebra used by every other module.

Matrices are plain ``numpy`` arrays of dtype ``complex128``. Bipartite
matrices on C^p (x) C^q are ordered with the left factor major, i.e. the
basis vector e_a (x) e_i sits at index ``a * q + i`` (the ``np.kron``
convention).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, FactorizationError

FACTORIZATION_TOL = 1e-12
RANK_CUTOFF = 1e-9


def as_matrix(A) -> np.ndarray:
    """Coerce to a finite 2-d complex array."""
    A = np.asarray(A, dtype=complex)
    if A.ndim == 0:
        A = A.reshape(1, 1)
    if A.ndim != 2:
        raise DomainError(f"expected a matrix, got array of shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise DomainError("matrix has non-finite entries")
    return A


def dag(A: np.ndarray) -> np.ndarray:
    return np.conj(A).T


def hermitian_part(A: np.ndarray) -> np.ndarray:
    return (A + dag(A)) / 2


def hermiticity_residual(A: np.ndarray) -> float:
    return float(np.linalg.norm(A - dag(A)))


def elementary(n: int, a: int, b: int) -> np.ndarray:
    """E_{a,b} in M_n, zero-based indices."""
    E = np.zeros((n, n), dtype=complex)
    E[a, b] = 1.0
    return E


@dataclass(frozen=True)
class SvdResult:
    left: np.ndarray
    singular_values: np.ndarray
    right: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.left * self.singular_values) @ dag(self.right)


def svd(A, full: bool = False) -> SvdResult:
    """Singular value decomposition A = left @ diag(s) @ right^*.

    Singular values are returned non-increasing. Thin by default.
    """
    A = as_matrix(A)
    try:
        W, s, Vh = np.linalg.svd(A, full_matrices=full)
    except np.linalg.LinAlgError as exc:
        raise FactorizationError(f"SVD did not converge: {exc}") from exc
    return SvdResult(W, s, dag(Vh))


def singular_values(A) -> np.ndarray:
    A = as_matrix(A)
    try:
        return np.linalg.svd(A, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise FactorizationError(f"SVD did not converge: {exc}") from exc


def trace_norm(A) -> float:
    """Sum of singular values."""
    return float(np.sum(singular_values(A)))


def operator_norm(A) -> float:
    """Largest singular value."""
    s = singular_values(A)
    return float(s[0]) if s.size else 0.0


def numerical_rank(s: np.ndarray, cutoff: float = RANK_CUTOFF) -> int:
    """Number of singular values above ``cutoff * s_max``."""
    s = np.asarray(s)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > cutoff * s[0]))


def polar_unitary(A) -> np.ndarray:
    """Unitary factor W of a polar decomposition A = W |A|.

    Satisfies Re Tr(W^* A) = ||A||_1. Rectangular input gives a partial
    isometry of the same shape.
    """
    r = svd(A)
    return r.left @ dag(r.right)


def eigh(H) -> tuple[np.ndarray, np.ndarray]:
    try:
        return np.linalg.eigh(hermitian_part(as_matrix(H)))
    except np.linalg.LinAlgError as exc:
        raise FactorizationError(f"eigendecomposition did not converge: {exc}") from exc


@dataclass(frozen=True)
class HahnDecomposition:
    positive_part: np.ndarray
    negative_part: np.ndarray


def hahn_decompose(H, tol: float = 1e-10) -> HahnDecomposition:
    """Split a Hermitian matrix as H = P - Q with P, Q >= 0 and PQ = 0.

    Eigenvalues in [-tol, tol] go to the positive part.
    """
    H = as_matrix(H)
    if H.shape[0] != H.shape[1]:
        raise DomainError("Hahn decomposition needs a square matrix")
    scale = max(1.0, float(np.linalg.norm(H)))
    if hermiticity_residual(H) > tol * scale:
        raise DomainError("Hahn decomposition needs a Hermitian matrix")
    w, V = eigh(H)
    pos = w >= -tol
    P = (V[:, pos] * w[pos]) @ dag(V[:, pos])
    Q = (V[:, ~pos] * -w[~pos]) @ dag(V[:, ~pos])
    return HahnDecomposition(P, Q)


def kron(A, B) -> np.ndarray:
    return np.kron(as_matrix(A), as_matrix(B))


def _bipartite(X, dim_left: int, dim_right: int) -> np.ndarray:
    X = as_matrix(X)
    d = dim_left * dim_right
    if X.shape != (d, d):
        raise DomainError(
            f"matrix of shape {X.shape} is not on C^{dim_left} (x) C^{dim_right}"
        )
    return X.reshape(dim_left, dim_right, dim_left, dim_right)


def _check_which(which: str) -> str:
    if which not in ("left", "right"):
        raise DomainError(f"factor selector must be 'left' or 'right', got {which!r}")
    return which


def partial_trace(X, dim_left: int, dim_right: int, which: str) -> np.ndarray:
    """Trace out the ``which`` tensor factor ('left' or 'right')."""
    T = _bipartite(X, dim_left, dim_right)
    if _check_which(which) == "left":
        return np.einsum("aiaj->ij", T)
    return np.einsum("aibi->ab", T)


def partial_transpose(X, dim_left: int, dim_right: int, which: str) -> np.ndarray:
    """Transpose the ``which`` tensor factor ('left' or 'right')."""
    T = _bipartite(X, dim_left, dim_right)
    d = dim_left * dim_right
    if _check_which(which) == "left":
        return T.transpose(2, 1, 0, 3).reshape(d, d)
    return T.transpose(0, 3, 2, 1).reshape(d, d)


def swap_factors(X, dim_left: int, dim_right: int) -> np.ndarray:
    """Reorder C^p (x) C^q -> C^q (x) C^p."""
    T = _bipartite(X, dim_left, dim_right)
    d = dim_left * dim_right
    return T.transpose(1, 0, 3, 2).reshape(d, d)


def max_entangled_vector(n: int) -> np.ndarray:
    """Unit vector (1/sqrt n) sum_a e_a (x) e_a."""
    return np.eye(n, dtype=complex).reshape(-1) / np.sqrt(n)


def max_entangled_state(n: int) -> np.ndarray:
    """tau_n = (1/n) sum_{a,b} E_{a,b} (x) E_{a,b}."""
    if n < 1:
        raise DomainError("n must be positive")
    u = max_entangled_vector(n)
    return np.outer(u, np.conj(u))


def schmidt_coefficients(u, dim_left: int, dim_right: int) -> np.ndarray:
    u = np.asarray(u, dtype=complex).reshape(dim_left, dim_right)
    return singular_values(u)


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def ginibre(rows: int, cols: int, seed=None) -> np.ndarray:
    rng = _rng(seed)
    return (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2)


def random_unitary(n: int, seed=None) -> np.ndarray:
    """Haar unitary from the QR decomposition of a Ginibre matrix."""
    if n < 1:
        raise DomainError("n must be positive")
    Q, R = np.linalg.qr(ginibre(n, n, seed))
    d = np.diag(R)
    return Q * (d / np.abs(d))


def random_isometry(rows: int, cols: int, seed=None) -> np.ndarray:
    if cols < 1 or rows < cols:
        raise DomainError(f"no isometry C^{cols} -> C^{rows}")
    return random_unitary(rows, seed)[:, :cols]


def random_density(n: int, seed=None, rank: int | None = None) -> np.ndarray:
    if n < 1:
        raise DomainError("n must be positive")
    G = ginibre(n, rank or n, seed)
    rho = G @ dag(G)
    return rho / np.trace(rho).real


def matrix_to_json(A) -> dict:
    A = as_matrix(A)
    flat = A.reshape(-1)
    return {
        "rows": int(A.shape[0]),
        "cols": int(A.shape[1]),
        "data": [[float(z.real), float(z.imag)] for z in flat],
    }


def matrix_from_json(obj) -> np.ndarray:
    try:
        rows, cols, data = int(obj["rows"]), int(obj["cols"]), obj["data"]
    except (KeyError, TypeError) as exc:
        raise DomainError(f"malformed matrix object: {exc}") from exc
    if rows < 1 or cols < 1 or len(data) != rows * cols:
        raise DomainError(f"matrix data has {len(data)} entries, expected {rows}x{cols}")
    try:
        arr = np.array([complex(float(re), float(im)) for re, im in data], dtype=complex)
    except (TypeError, ValueError) as exc:
        raise DomainError(f"matrix entries must be [re, im] pairs: {exc}") from exc
    return as_matrix(arr.reshape(rows, cols))
