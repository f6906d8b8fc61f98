"""Complete trace-norm isometries: certification, structure, left inverses.

A map Phi : M_n -> M_m is a complete trace-norm isometry exactly when
||J(Phi)||_1 = n and ||J(Phi T_n)||_1 = n^2, and then
Phi(X) = U (X (x) sigma) V^* for isometries U, V : C^n (x) C^r -> C^m and a
density matrix sigma. The two Choi trace norms are the certificate used
throughout; multiplication relations are only ever sampled or swept.

Structure matrices U, V, sigma are unique only up to a simultaneous change of
basis on C^r, so everything here is checked through reconstruction.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field

import numpy as np

from . import channels as ch
from . import linalg as la
from .channels import LinearMapRep
from .errors import CertificationRefused, DomainError, ExtractionError
from .reports import CertificationReport

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-8
VARIANTS = ("general", "hermitian", "positive")


@dataclass
class StructureDecomposition:
    """Phi(X) = U (X (x) sigma) V^*, U and V mapping C^n (x) C^r into C^m."""

    r: int
    sigma: np.ndarray
    U: np.ndarray
    V: np.ndarray
    variant: str = "general"
    residuals: dict = field(default_factory=dict)

    @property
    def in_dim(self) -> int:
        return self.U.shape[1] // self.r

    @property
    def out_dim(self) -> int:
        return self.U.shape[0]

    def to_map(self) -> LinearMapRep:
        return ch.embedding_map(self.U, self.sigma, self.V)

    def as_general(self) -> "StructureDecomposition":
        """Rewrite with a diagonal density sigma by moving phases into V.

        For Hermitian sigma = W diag(h) W^*, take sigma' = diag(|h|),
        U' = U (I (x) W) and V' = U (I (x) W sign(h)).
        """
        w, W = la.eigh(self.sigma)
        if self.variant != "hermitian" and np.all(w >= -1e-12):
            return self
        n = self.in_dim
        Ut = self.U @ np.kron(np.eye(n), W)
        Vt = self.V @ np.kron(np.eye(n), W * np.where(w < 0, -1.0, 1.0))
        return StructureDecomposition(self.r, np.diag(np.abs(w)).astype(complex), Ut, Vt,
                                      "general", dict(self.residuals))

    def to_json(self) -> dict:
        return {
            "r": self.r,
            "variant": self.variant,
            "sigma": la.matrix_to_json(self.sigma),
            "U": la.matrix_to_json(self.U),
            "V": la.matrix_to_json(self.V),
            "residuals": {k: float(v) for k, v in self.residuals.items()},
        }


@dataclass
class SignedReversibleDecomposition:
    """Phi = r psi0 - (1 - r) psi1 with psi0, psi1 reversible channels.

    A part is ``None`` when its weight vanishes.
    """

    r_weight: float
    psi0: LinearMapRep | None
    psi1: LinearMapRep | None
    ranges_orthogonal: float
    reconstruction_residual: float
    structure: StructureDecomposition | None = None
    range_projectors: tuple[np.ndarray, np.ndarray] | None = field(default=None, repr=False)


def certify_complete_isometry(phi: LinearMapRep, tol: float = DEFAULT_TOL) -> CertificationReport:
    """Pass iff ||J(Phi)||_1 = n and ||J(Phi T_n)||_1 = n^2 within ``tol``."""
    n = phi.in_dim
    j = la.trace_norm(phi.choi)
    jt = la.trace_norm(ch.compose_transpose(phi).choi)
    rep = CertificationReport("complete trace-norm isometry")
    rep.add("choi_trace_norm", abs(j - n), tol, f"||J(Phi)||_1 = {j!r}, target {n}")
    rep.add("choi_transpose_trace_norm", abs(jt - n * n), tol,
            f"||J(Phi T_n)||_1 = {jt!r}, target {n * n}")
    rep.info.update({"j_norm": j, "jt_norm": jt, "n": n, "m": phi.out_dim})
    return rep


def _require_certified(phi: LinearMapRep, tol: float) -> CertificationReport:
    rep = certify_complete_isometry(phi, tol)
    if not rep.verdict:
        raise CertificationRefused("map is not certified as a complete trace-norm isometry", rep)
    return rep


def _structure_residuals(phi: LinearMapRep, dec: StructureDecomposition) -> dict:
    k = dec.U.shape[1]
    return {
        "U_isometry": float(np.linalg.norm(la.dag(dec.U) @ dec.U - np.eye(k))),
        "V_isometry": float(np.linalg.norm(la.dag(dec.V) @ dec.V - np.eye(k))),
        # the Choi difference collects the error on all n^2 elementary inputs
        "reconstruction": float(np.linalg.norm(dec.to_map().choi - phi.choi)),
    }


def _extract_hermitian(phi: LinearMapRep, cutoff: float) -> StructureDecomposition:
    n, m = phi.in_dim, phi.out_dim
    T = phi.tensor
    h, X = la.eigh(T[:, 0, :, 0])
    order = np.argsort(-np.abs(h), kind="stable")
    h, X = h[order], X[:, order]
    r = la.numerical_rank(np.abs(h), cutoff)
    h, X = h[:r], X[:, :r]
    # U(e_a (x) e_i) = Phi(E_{a,1}) x_i / h_i
    U = np.einsum("iaj,jr->iar", T[:, :, :, 0], X) / h
    U = U.reshape(m, n * r)
    variant = "positive" if np.all(h > 0) else "hermitian"
    return StructureDecomposition(r, np.diag(h).astype(complex), U, U, variant)


def _extract_general(phi: LinearMapRep, cutoff: float) -> StructureDecomposition:
    n, m = phi.in_dim, phi.out_dim
    T = phi.tensor
    res = la.svd(T[:, 0, :, 0])
    r = la.numerical_rank(res.singular_values, cutoff)
    s, x, y = res.singular_values[:r], res.left[:, :r], res.right[:, :r]
    # U(e_a (x) e_i) = Phi(E_{a,1}) y_i / s_i,  V(e_b (x) e_j) = Phi(E_{1,b})^* x_j / s_j
    U = np.einsum("iaj,jr->iar", T[:, :, :, 0], y) / s
    V = np.einsum("jib,jr->ibr", np.conj(T[:, 0, :, :]), x) / s
    return StructureDecomposition(r, np.diag(s).astype(complex), U.reshape(m, n * r),
                                  V.reshape(m, n * r), "general")


def extract_isometry_structure(phi: LinearMapRep, tol: float = DEFAULT_TOL,
                               cutoff: float = la.RANK_CUTOFF) -> StructureDecomposition:
    """Recover (r, sigma, U, V) from a certified complete trace-norm isometry.

    Uses the SVD of Phi(E_{1,1}); Hermiticity-preserving maps go through the
    spectral decomposition instead, giving V = U and Hermitian sigma (a
    density matrix when Phi is completely positive).
    """
    _require_certified(phi, tol)
    if ch.is_hermiticity_preserving(phi, tol):
        dec = _extract_hermitian(phi, cutoff)
    else:
        dec = _extract_general(phi, cutoff)
    dec.residuals = _structure_residuals(phi, dec)
    dec.residuals["sigma_trace_norm"] = abs(la.trace_norm(dec.sigma) - 1.0)
    if dec.r * phi.in_dim > phi.out_dim:
        raise ExtractionError(f"extracted r={dec.r} exceeds m/n", dec.residuals)
    bad = {k: v for k, v in dec.residuals.items() if v > tol}
    if bad:
        raise ExtractionError(f"structure extraction inconsistent: {bad}", dec.residuals)
    return dec


def left_inverse(decomp: StructureDecomposition) -> LinearMapRep:
    """A left inverse Psi with Psi o Phi = id_n.

    Positive variant: the channel Psi(Y) = Tr_r(U^* Y U) + Tr((I - U U^*) Y) I_n/n.
    Otherwise: Psi(Y) = Tr_r(U^* Y V) for the density-sigma form of the
    decomposition.
    """
    n, r, m = decomp.in_dim, decomp.r, decomp.out_dim
    if decomp.variant == "positive":
        U = decomp.U.reshape(m, n, r)
        ops = [la.dag(U[:, :, s]) for s in range(r)]
        P = np.eye(m) - decomp.U @ la.dag(decomp.U)
        w, F = la.eigh(P)
        F = F[:, w > 0.5]
        for j in range(F.shape[1]):
            for a in range(n):
                K = np.zeros((n, m), dtype=complex)
                K[a] = np.conj(F[:, j]) / np.sqrt(n)
                ops.append(K)
        return ch.from_kraus(ops)
    gen = decomp.as_general()
    U = gen.U.reshape(m, n, r)
    V = gen.V.reshape(m, n, r)
    left = [la.dag(U[:, :, s]) for s in range(r)]
    right = [la.dag(V[:, :, s]) for s in range(r)]
    return ch.from_kraus(ch.KrausSet(left, right))


def herm_signed_decompose(phi: LinearMapRep, tol: float = DEFAULT_TOL) -> SignedReversibleDecomposition:
    """Write a Hermiticity-preserving complete isometry as r psi0 - (1-r) psi1.

    From Phi(X) = U (X (x) H) U^* with H = P - Q (Hahn), r = Tr P,
    psi0(X) = U (X (x) P/Tr P) U^* and psi1(X) = U (X (x) Q/Tr Q) U^*.
    The two channels have orthogonal output ranges U (I (x) supp P) U^* and
    U (I (x) supp Q) U^*.
    """
    if not ch.is_hermiticity_preserving(phi, tol):
        raise DomainError("map is not Hermiticity preserving")
    dec = extract_isometry_structure(phi, tol)
    n, m = phi.in_dim, phi.out_dim
    hahn = la.hahn_decompose(dec.sigma, tol)
    P, Q = hahn.positive_part, hahn.negative_part
    tp, tq = float(np.trace(P).real), float(np.trace(Q).real)
    r_weight = tp / (tp + tq)

    def part(M, t):
        if t <= tol:
            return None, np.zeros((m, m), dtype=complex)
        w, W = la.eigh(M)
        Wp = W[:, w > tol * max(1.0, t)]
        proj = dec.U @ np.kron(np.eye(n), Wp @ la.dag(Wp)) @ la.dag(dec.U)
        return ch.embedding_map(dec.U, M / t), proj

    psi0, pi0 = part(P, tp)
    psi1, pi1 = part(Q, tq)
    recon = np.zeros_like(phi.choi)
    if psi0 is not None:
        recon = recon + r_weight * psi0.choi
    if psi1 is not None:
        recon = recon - (1 - r_weight) * psi1.choi
    return SignedReversibleDecomposition(
        r_weight=r_weight, psi0=psi0, psi1=psi1,
        ranges_orthogonal=float(np.linalg.norm(pi0 @ pi1)),
        reconstruction_residual=float(np.linalg.norm(recon - phi.choi)),
        structure=dec, range_projectors=(pi0, pi1),
    )


def _block_map(X: np.ndarray, n: int, m: int) -> LinearMapRep:
    # G(E_{a,b}) = n * (block (a, b) of X) on C^n (x) C^m
    T = X.reshape(n, m, n, m)
    J = n * T.transpose(1, 0, 3, 2).reshape(n * m, n * m)
    return LinearMapRep(n, m, J)


def reconstruct_max_entangled(decomp: StructureDecomposition) -> np.ndarray:
    """(I_n (x) U)(tau_n (x) sigma)(I_n (x) V^*) on C^n (x) C^m."""
    n = decomp.in_dim
    core = np.kron(la.max_entangled_state(n), decomp.sigma)
    return np.kron(np.eye(n), decomp.U) @ core @ la.dag(np.kron(np.eye(n), decomp.V))


def max_entangled_preconditions(X, n: int, m: int, tol: float = DEFAULT_TOL) -> CertificationReport:
    X = la.as_matrix(X)
    if X.shape != (n * m, n * m):
        raise DomainError(f"matrix of shape {X.shape} is not on C^{n} (x) C^{m}")
    rep = CertificationReport("maximal negativity")
    tn = la.trace_norm(X)
    neg = la.trace_norm(la.partial_transpose(X, n, m, "left"))
    rep.add("trace_norm_at_most_one", max(0.0, tn - 1.0), tol)
    rep.add("partial_transpose_norm", abs(neg - n), tol)
    rep.info.update({"trace_norm": tn, "partial_transpose_norm": neg})
    return rep


def extract_max_entangled_structure(X, n: int, m: int, tol: float = DEFAULT_TOL) -> StructureDecomposition:
    """Write X = (I_n (x) U)(tau_n (x) sigma)(I_n (x) V^*).

    Requires ||X||_1 <= 1 and ||(T_n (x) id_m)(X)||_1 = n. The blocks of X
    define a map G with G(E_{a,b}) = n X_{(a,b)}; G is then a complete
    isometry whose structure is exactly the one sought. Hermitian X gives
    V = U, density matrices give the positive variant.
    """
    rep = max_entangled_preconditions(X, n, m, tol)
    if not rep.verdict:
        raise CertificationRefused("matrix does not have maximal negativity", rep)
    X = la.as_matrix(X)
    G = _block_map(X, n, m)
    try:
        dec = extract_isometry_structure(G, tol)
    except CertificationRefused as exc:
        raise CertificationRefused("block map failed certification", exc.report) from exc
    dec.residuals["matrix_reconstruction"] = float(np.linalg.norm(reconstruct_max_entangled(dec) - X))
    if dec.residuals["matrix_reconstruction"] > tol:
        raise ExtractionError("reconstruction of X failed", dec.residuals)
    return dec


# -- multiplication relations -------------------------------------------------


def _rel(lhs: np.ndarray, rhs: np.ndarray, scale: float) -> float:
    return float(np.linalg.norm(lhs - rhs) / max(scale, 1e-300))


def fourier_basis(n: int) -> np.ndarray:
    k = np.arange(n)
    return np.exp(2j * np.pi * np.outer(k, k) / n) / np.sqrt(n)


def restricted_pair_violation(phi: LinearMapRep, x1, x2, y) -> tuple[float, float]:
    """Residuals of both rank-one orthogonality implications for x1 ⟂ x2.

    Left class: A = x1 y^*, B = x2 y^* (A^*B = 0, A^*A = B^*B), residual
    ||Phi(A)^* Phi(B)||. Right class: A = y x1^*, B = y x2^*, residual
    ||Phi(A) Phi(B)^*||.
    """
    A, B = np.outer(x1, np.conj(y)), np.outer(x2, np.conj(y))
    left = np.linalg.norm(la.dag(phi(A)) @ phi(B))
    right = np.linalg.norm(phi(la.dag(A)) @ la.dag(phi(la.dag(B))))
    return float(left), float(right)


def restricted_sweep(phi: LinearMapRep, vectors: np.ndarray) -> dict:
    """Sweep the rank-one class over all (x1, x2, y) drawn from ``vectors``.

    ``vectors`` holds unit column vectors; x1, x2 range over orthogonal pairs.
    """
    cols = [vectors[:, i] for i in range(vectors.shape[1])]
    worst, witness, count = 0.0, None, 0
    for i, j in itertools.permutations(range(len(cols)), 2):
        x1, x2 = cols[i], cols[j]
        if abs(np.vdot(x1, x2)) > 1e-12:
            continue
        for k, y in enumerate(cols):
            count += 1
            left, right = restricted_pair_violation(phi, x1, x2, y)
            if max(left, right) > worst:
                worst, witness = max(left, right), (i, j, k)
    return {"max_residual": worst, "witness": witness, "triples": count}


def verify_multiplication_relations(phi: LinearMapRep, samples: int = 20, tol: float = DEFAULT_TOL,
                                    seed=0, sweep: bool = True) -> CertificationReport:
    """Sampled and swept falsification suite for the multiplication relations.

    These checks can refute but never prove the isometry property. Classes:

    * ``full``: A^*B = C^*D via the shared factor A = W1 K, B = W1 L,
      C = W2 K, D = W2 L with unitaries W1, W2; mirror AB^* = CD^*.
    * ``orthogonal``: A^*B = 0 with A, B supported on complementary row
      spaces; mirror AB^* = 0.
    * ``restricted``: rank-one A = x1 y^*, B = x2 y^* with x1 ⟂ x2; mirror.
    * ``restricted_sweep_standard`` / ``restricted_sweep_fourier``:
      exhaustive sweeps of the rank-one class with vectors from the standard
      basis, then from the standard and Fourier bases together.
    """
    n = phi.in_dim
    rng = np.random.default_rng(seed)
    rep = CertificationReport("multiplication relations (sampled/swept)")
    worst = {k: 0.0 for k in ("full", "full_mirror", "orthogonal", "orthogonal_mirror",
                              "restricted", "restricted_mirror")}

    for _ in range(samples):
        W1, W2 = la.random_unitary(n, rng), la.random_unitary(n, rng)
        K, L = la.ginibre(n, n, rng), la.ginibre(n, n, rng)
        A, B, C, D = W1 @ K, W1 @ L, W2 @ K, W2 @ L
        scale = np.linalg.norm(K) * np.linalg.norm(L)
        worst["full"] = max(worst["full"], _rel(
            la.dag(phi(A)) @ phi(B), la.dag(phi(C)) @ phi(D), scale))
        A, B, C, D = K @ W1, L @ W1, K @ W2, L @ W2
        worst["full_mirror"] = max(worst["full_mirror"], _rel(
            phi(A) @ la.dag(phi(B)), phi(C) @ la.dag(phi(D)), scale))

        if n >= 2:
            Wq = la.random_unitary(n, rng)
            cut = int(rng.integers(1, n))
            P1 = Wq[:, :cut] @ la.dag(Wq[:, :cut])
            P2 = np.eye(n) - P1
            G1, G2 = la.ginibre(n, n, rng), la.ginibre(n, n, rng)
            scale = np.linalg.norm(G1) * np.linalg.norm(G2)
            A, B = P1 @ G1, P2 @ G2
            worst["orthogonal"] = max(worst["orthogonal"], _rel(
                la.dag(phi(A)) @ phi(B), 0, scale))
            A, B = G1 @ P1, G2 @ P2
            worst["orthogonal_mirror"] = max(worst["orthogonal_mirror"], _rel(
                phi(A) @ la.dag(phi(B)), 0, scale))

            Wr = la.random_unitary(n, rng)
            y = la.random_unitary(n, rng)[:, 0]
            left, right = restricted_pair_violation(phi, Wr[:, 0], Wr[:, 1], y)
            worst["restricted"] = max(worst["restricted"], left)
            worst["restricted_mirror"] = max(worst["restricted_mirror"], right)

    for name, val in worst.items():
        rep.add(name, val, tol, "sampled")

    if sweep and n >= 2:
        std = restricted_sweep(phi, np.eye(n, dtype=complex))
        both = restricted_sweep(phi, np.hstack([np.eye(n), fourier_basis(n)]))
        rep.add("restricted_sweep_standard", std["max_residual"], tol, "exhaustive, standard basis")
        rep.add("restricted_sweep_fourier", both["max_residual"], tol,
                "exhaustive, standard and Fourier bases")
        rep.witnesses["restricted_sweep_standard"] = std["witness"]
        rep.witnesses["restricted_sweep_fourier"] = both["witness"]
        rep.info["sweep_triples"] = both["triples"]

    X = la.ginibre(n, n, rng)
    rep.add("normalization", abs(la.trace_norm(phi(X)) - la.trace_norm(X)) / la.trace_norm(X), tol,
            "||Phi(X)||_1 = ||X||_1 at one random X")
    return rep


def block_2x2_norm_test(A, B, C, D, tol: float = 1e-10) -> CertificationReport:
    """Check the iff between ||[[A, B], [C, D]]||_1 = sum of norms and
    A^*B = AC^* = D^*C = DB^* = 0 on one instance.

    The voting check is that both sides of the equivalence agree.
    """
    A, B, C, D = (la.as_matrix(M) for M in (A, B, C, D))
    if not (A.shape == B.shape == C.shape == D.shape):
        raise DomainError("blocks must share a shape")
    block = np.block([[A, B], [C, D]])
    lhs = la.trace_norm(block)
    rhs = sum(la.trace_norm(M) for M in (A, B, C, D))
    prods = {
        "AstarB": la.dag(A) @ B,
        "ACstar": A @ la.dag(C),
        "DstarC": la.dag(D) @ C,
        "DBstar": D @ la.dag(B),
    }
    scale = max(1.0, rhs * rhs)
    prod_res = max(float(np.linalg.norm(P)) for P in prods.values()) / scale
    equal = abs(lhs - rhs) <= tol * max(1.0, rhs)
    vanish = prod_res <= tol
    rep = CertificationReport("2x2 block trace norm")
    rep.add("iff_consistent", 0.0 if equal == vanish else 1.0, 0.5,
            "norm additivity holds exactly when the four products vanish")
    rep.info.update({
        "block_norm": lhs, "sum_of_norms": rhs, "norm_equal": bool(equal),
        "products_vanish": bool(vanish), "product_residual": prod_res,
    })
    for k, P in prods.items():
        rep.info[f"residual_{k}"] = float(np.linalg.norm(P))
    return rep
