"""Saturation of ||Phi (x) id_k||_1 <= k ||Phi||_1 and the maximal cb-norm gap.

For ||Phi||_1 = 1, a pair of unit vectors u, v in C^n (x) C^k with
||(Phi (x) id_k)(u v^*)||_1 = k must be maximally entangled. Writing
u = k^{-1/2} sum_a u_a (x) e_a defines an isometry U = sum_a u_a e_a^* (and V
likewise), and the map X -> Phi(U X^T V^*) on M_k is then a complete
trace-norm isometry.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from . import channels as ch
from . import isometry as iso
from . import linalg as la
from . import norms
from .channels import LinearMapRep
from .errors import CertificationRefused, ExtractionError
from .reports import CertificationReport

log = logging.getLogger(__name__)

SATURATION_TOL = 1e-5
SCHMIDT_TOL = 1e-6


@dataclass
class SaturationWitness:
    k: int
    u: np.ndarray
    v: np.ndarray
    schmidt_u: np.ndarray
    schmidt_v: np.ndarray
    U_embed: np.ndarray
    V_embed: np.ndarray
    value: float
    norm_scale: float = 1.0

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "value": self.value,
            "norm_scale": self.norm_scale,
            "u": la.matrix_to_json(self.u.reshape(-1, 1)),
            "v": la.matrix_to_json(self.v.reshape(-1, 1)),
            "schmidt_u": [float(s) for s in self.schmidt_u],
            "schmidt_v": [float(s) for s in self.schmidt_v],
            "U_embed": la.matrix_to_json(self.U_embed),
            "V_embed": la.matrix_to_json(self.V_embed),
        }


def matricize(w: np.ndarray, n: int, k: int) -> np.ndarray:
    """n x k matrix M with w = sum_{a,c} M[a, c] e_a (x) e_c."""
    return np.asarray(w, dtype=complex).reshape(n, k)


def make_witness(u, v, n: int, k: int, value: float, norm_scale: float = 1.0) -> SaturationWitness:
    Mu, Mv = matricize(u, n, k), matricize(v, n, k)
    return SaturationWitness(
        k=k, u=np.asarray(u), v=np.asarray(v),
        schmidt_u=la.singular_values(Mu), schmidt_v=la.singular_values(Mv),
        U_embed=la.polar_unitary(Mu), V_embed=la.polar_unitary(Mv),
        value=float(value), norm_scale=float(norm_scale),
    )


def proof_chain_audit(phi: LinearMapRep, u, v, k: int) -> dict:
    """Evaluate the bound ||(Phi (x) id_k)(u v^*)||_1 <= k link by link.

    With Schmidt forms u = sum alpha_a u_a (x) w_a and v = sum beta_b v_b (x) z_b:
    value <= sum alpha_a beta_b ||Phi(u_a v_b^*)||_1 <= sum alpha_a beta_b
    <= r <= k. Returns the terms and the slack of each inequality; the second
    slack is nonnegative only when ||Phi||_1 <= 1.
    """
    n = phi.in_dim
    value = la.trace_norm(ch.apply_multiplicity(phi, np.outer(u, np.conj(v)), k))
    su, sv = la.svd(matricize(u, n, k)), la.svd(matricize(v, n, k))
    r = max(la.numerical_rank(su.singular_values), la.numerical_rank(sv.singular_values))
    alpha, beta = su.singular_values[:r], sv.singular_values[:r]
    termwise = np.array([[la.trace_norm(phi(np.outer(su.left[:, a], np.conj(sv.left[:, b]))))
                          for b in range(r)] for a in range(r)])
    s1 = float(alpha @ termwise @ beta)
    s2 = float(alpha.sum() * beta.sum())
    return {
        "value": value,
        "triangle_sum": s1,
        "termwise_sum": s2,
        "schmidt_rank": r,
        "k": k,
        "slack_triangle": s1 - value,
        "slack_termwise": s2 - s1,
        "slack_cauchy_schwarz": r - s2,
        "slack_rank": k - r,
    }


def verify_saturation(phi: LinearMapRep, k: int, restarts: int = norms.DEFAULT_RESTARTS,
                      tol: float = SATURATION_TOL, seed=0, seesaw_tol: float = 1e-14,
                      max_iter: int = 2000) -> tuple[CertificationReport, SaturationWitness | None]:
    """Decide whether ||Phi (x) id_k||_1 = k ||Phi||_1.

    Phi is first rescaled to ||Phi||_1 = 1 (the scale is reported). The bound
    k is certified, so the verdict is a saturation claim when k - value < tol
    and otherwise "not found saturated", or "not saturated" when k > min(n, m)
    makes saturation impossible.
    """
    n, m = phi.in_dim, phi.out_dim
    base = norms.induced_trace_norm(phi, restarts=restarts, tol=seesaw_tol, seed=seed,
                                    max_iter=max_iter)
    scale = base.value
    rep = CertificationReport(f"multiplicity-norm saturation, k={k}")
    rep.info.update({"k": k, "n": n, "m": m, "norm_scale": scale, "seed": seed,
                     "restarts": restarts, "tol": tol})
    if scale <= 0:
        rep.add("saturation", float(k), tol, "zero map")
        rep.info["status"] = "not saturated"
        return rep, None
    phin = (1.0 / scale) * phi
    est = norms.multiplicity_norm(phin, k, restarts=restarts, tol=seesaw_tol, seed=seed,
                                  max_iter=max_iter, base=norms.NormEstimate(1.0))
    gap = k - est.value
    rep.info.update({"value": est.value, "bound": float(k), "gap": gap})
    rep.add("saturation", max(gap, 0.0), tol, "k - ||Phi (x) id_k||_1 lower bound")
    if not rep.verdict:
        rep.info["status"] = "not saturated" if k > min(n, m) else "not found saturated"
        return rep, None
    rep.info["status"] = "saturated"
    u, v = est.witness
    wit = make_witness(u, v, n, k, est.value, scale)
    rep.add("dimensions", float(k > n) + float(k > m), 0.5, "k <= n and k <= m")
    target = 1 / np.sqrt(k)
    rep.add("schmidt_uniform_u", float(np.max(np.abs(wit.schmidt_u - target))), SCHMIDT_TOL)
    rep.add("schmidt_uniform_v", float(np.max(np.abs(wit.schmidt_v - target))), SCHMIDT_TOL)
    for name, E in (("U_embed_isometry", wit.U_embed), ("V_embed_isometry", wit.V_embed)):
        rep.add(name, float(np.linalg.norm(la.dag(E) @ E - np.eye(k))), 1e-10)
    rep.info["proof_chain"] = proof_chain_audit(phin, u, v, k)
    rep.witnesses["saturation"] = wit
    return rep, wit


def embedded_map(phi: LinearMapRep, witness: SaturationWitness) -> LinearMapRep:
    """The map X -> Phi(U X^T V^*) on M_k (Phi rescaled by the witness scale).

    Equivalently X -> Psi(conj(V) X U^T) with Psi = Phi T_n, the form that
    makes the domain conj(V) M_k U^T of Psi explicit.
    """
    phin = (1.0 / witness.norm_scale) * phi
    embed = ch.from_kraus(ch.KrausSet([witness.U_embed], [witness.V_embed]))
    return ch.compose(phin, ch.compose(embed, ch.transpose_map(witness.k)))


def transpose_factorization(phi: LinearMapRep, witness: SaturationWitness | None,
                            tol: float = 1e-6) -> CertificationReport:
    """Certify the embedded map of a saturating witness as a complete isometry on M_k."""
    if witness is None:
        raise CertificationRefused("no saturating witness supplied")
    k = witness.k
    phin = (1.0 / witness.norm_scale) * phi
    value = la.trace_norm(ch.apply_multiplicity(phin, np.outer(witness.u, np.conj(witness.v)), k))
    if k - value > SATURATION_TOL:
        pre = CertificationReport("saturating witness")
        pre.add("saturation", k - value, SATURATION_TOL)
        raise CertificationRefused("witness does not saturate the bound", pre)
    G = embedded_map(phi, witness)
    rep = iso.certify_complete_isometry(G, tol)
    rep.title = f"transpose factorization on M_{k}"
    rep.info["witness_value"] = value
    try:
        dec = iso.extract_isometry_structure(G, tol)
        rep.info["structure_r"] = dec.r
        rep.info["structure_reconstruction"] = dec.residuals["reconstruction"]
    except (CertificationRefused, ExtractionError) as exc:
        rep.info["structure_error"] = str(exc)
    rep.witnesses["embedded_map_choi"] = G.choi
    return rep


def corollary_check(phi: LinearMapRep, tol: float = 1e-6, restarts: int = norms.DEFAULT_RESTARTS,
                    seed=0, sdp_tol: float = norms.DEFAULT_SDP_TOL) -> CertificationReport:
    """Evaluate the three equivalent maximal-gap conditions for Phi.

    1. ||Phi||_1 = 1 and |||Phi|||_1 = n;
    2. ||J(Phi)||_1 = n^2 and ||J(Phi T_n)||_1 = n;
    3. Phi T_n is a complete trace-norm isometry.

    The verdict is their conjunction; ``info["coherent"]`` records whether
    all three agree, which must always hold.
    """
    n = phi.in_dim
    rep = CertificationReport("maximal cb-norm gap")
    induced = norms.induced_trace_norm(phi, restarts=restarts, seed=seed).value
    diamond = norms.diamond_norm_sdp(phi, tol=sdp_tol).value
    s1 = max(abs(induced - 1.0), abs(diamond - n))
    j, jt = norms.choi_isometry_invariants(phi)
    s2 = max(abs(j - n * n), abs(jt - n))
    psi = ch.compose_transpose(phi)
    cert = iso.certify_complete_isometry(psi, tol)
    s3 = max(c.residual for c in cert.checks)
    rep.add("statement_1_norms", s1, tol, "||Phi||_1 = 1 and |||Phi|||_1 = n")
    rep.add("statement_2_choi", s2, tol, "||J(Phi)||_1 = n^2 and ||J(Phi T_n)||_1 = n")
    rep.add("statement_3_factorization", s3, tol, "Phi T_n is a complete trace-norm isometry")
    verdicts = [c.passed for c in rep.checks]
    rep.info.update({
        "induced_norm": induced, "diamond_norm": diamond, "j_norm": j, "jt_norm": jt,
        "coherent": len(set(verdicts)) == 1, "tol": tol, "seed": seed,
        "phi_hermiticity_preserving": ch.is_hermiticity_preserving(phi, tol),
        "psi_hermiticity_preserving": ch.is_hermiticity_preserving(psi, tol),
        "psi_completely_positive": ch.is_completely_positive(psi, tol),
    })
    if rep.verdict:
        rep.info["psi_reversible_channel"] = bool(ch.is_channel(psi, tol))
    return rep
