"""Single-shot discrimination games between two channels.

A game (lambda, Gamma0, Gamma1) is won by guessing which channel acted. With
delta = lambda Gamma0 - (1 - lambda) Gamma1, an input state rho on
C^n (x) C^k succeeds with probability 1/2 + ||(delta (x) id_k)(rho)||_1 / 2.
Optimizing over rho gives 1/2 + |||delta|||_1 / 2 with entanglement. Without
an ancilla the objective is convex in rho, so pure states suffice and the
unentangled value is a see-saw over unit vectors.

The Werner-Holevo game (lambda_n, Phi0, Phi1) has delta = T_n / n. Up to
reversible channels and relabelling it is the only game with
|||delta|||_1 = 1 = n ||delta||_1.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from . import channels as ch
from . import isometry as iso
from . import linalg as la
from . import norms
from .channels import LinearMapRep
from .errors import CertificationRefused, DomainError, ExtractionError
from .reports import CertificationReport

log = logging.getLogger(__name__)

CHANNEL_TOL = 1e-8
GAP_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class GameTriple:
    lam: float
    gamma0: LinearMapRep
    gamma1: LinearMapRep

    def __post_init__(self):
        if not 0.0 <= self.lam <= 1.0:
            raise DomainError(f"lambda={self.lam} is not a probability")
        g0, g1 = self.gamma0, self.gamma1
        if (g0.in_dim, g0.out_dim) != (g1.in_dim, g1.out_dim):
            raise DomainError("game channels have different dimensions")
        for name, g in (("gamma0", g0), ("gamma1", g1)):
            if not ch.is_channel(g, CHANNEL_TOL):
                raise DomainError(
                    f"{name} is not a channel (cp residual {ch.cp_residual(g):.2e}, "
                    f"tp residual {ch.tp_residual(g):.2e})"
                )

    @property
    def n(self) -> int:
        return self.gamma0.in_dim

    @property
    def m(self) -> int:
        return self.gamma0.out_dim

    @property
    def delta(self) -> LinearMapRep:
        return ch.subtract(ch.scale(self.gamma0, self.lam), ch.scale(self.gamma1, 1 - self.lam))

    def to_json(self) -> dict:
        return {"lambda": self.lam, "gamma0": ch.map_to_json(self.gamma0),
                "gamma1": ch.map_to_json(self.gamma1)}


def game_from_json(obj) -> GameTriple:
    try:
        return GameTriple(float(obj["lambda"]), ch.map_from_json(obj["gamma0"]),
                          ch.map_from_json(obj["gamma1"]))
    except (KeyError, TypeError) as exc:
        raise DomainError(f"malformed game object: {exc}") from exc


@dataclass
class UnentangledValue:
    value: float
    hermitian_value: float
    witness: np.ndarray | None = None


@dataclass
class GameAnalysis:
    entangled_value: float
    unentangled_value: float
    unentangled_hermitian_value: float
    delta: LinearMapRep
    gap_certificate: CertificationReport

    def to_json(self) -> dict:
        return {
            "entangled_value": self.entangled_value,
            "unentangled_value": self.unentangled_value,
            "unentangled_hermitian_value": self.unentangled_hermitian_value,
            "gap_certificate": self.gap_certificate.to_json(),
        }


@dataclass
class WHDecomposition:
    r_weight: float
    psi0: LinearMapRep | None
    psi1: LinearMapRep | None
    lambda_check: float
    residual_gamma0: float
    residual_gamma1: float
    branch: str = "mixed"
    report: CertificationReport = field(default_factory=CertificationReport)


def wh_game(n: int) -> GameTriple:
    phi0, phi1, lam = ch.wh_channels(n)
    return GameTriple(lam, phi0, phi1)


def _check_density(rho, d: int, tol: float = 1e-9) -> np.ndarray:
    rho = la.as_matrix(rho)
    if rho.shape != (d, d):
        raise DomainError(f"state of shape {rho.shape}, expected {(d, d)}")
    if la.hermiticity_residual(rho) > tol:
        raise DomainError("state is not Hermitian")
    if np.linalg.eigvalsh(la.hermitian_part(rho))[0] < -tol:
        raise DomainError("state is not positive semidefinite")
    if abs(np.trace(rho) - 1) > tol:
        raise DomainError("state does not have unit trace")
    return rho


def success_given_strategy(g: GameTriple, rho, k: int = 1) -> float:
    """Holevo-Helstrom success probability for input state rho on C^n (x) C^k."""
    rho = _check_density(rho, g.n * k)
    return 0.5 + 0.5 * la.trace_norm(ch.apply_multiplicity(g.delta, rho, k))


def _norm_of_delta_sdp(delta: LinearMapRep, tol: float) -> float:
    if np.linalg.norm(delta.choi) < 1e-14:
        return 0.0
    return norms.diamond_norm_sdp(delta, tol=tol).value


def optimal_entangled(g: GameTriple, tol: float = norms.DEFAULT_SDP_TOL) -> float:
    """1/2 + |||delta|||_1 / 2 from the SDP."""
    return 0.5 + 0.5 * _norm_of_delta_sdp(g.delta, tol)


def optimal_unentangled(g: GameTriple, restarts: int = norms.DEFAULT_RESTARTS,
                        tol: float = norms.DEFAULT_TOL, seed=0) -> UnentangledValue:
    """Best success probability with no ancilla (see-saw lower bound).

    ``value`` uses pure input states; ``hermitian_value`` uses the signed
    extreme points +-xx^* of the Hermitian trace-norm ball.
    """
    est = norms.hermitian_induced_norm(g.delta, restarts=restarts, tol=tol, seed=seed)
    return UnentangledValue(
        value=0.5 + 0.5 * est.info["pure_state_value"],
        hermitian_value=0.5 + 0.5 * est.value,
        witness=est.witness[0] if est.witness else None,
    )


def check_max_gap(g: GameTriple, tol: float = GAP_TOL, restarts: int = norms.DEFAULT_RESTARTS,
                  seed=0, sdp_tol: float = norms.DEFAULT_SDP_TOL) -> CertificationReport:
    """Certify 1 = |||delta|||_1 = n ||delta||_1."""
    n, delta = g.n, g.delta
    rep = CertificationReport("maximal entanglement gap")
    diamond = _norm_of_delta_sdp(delta, sdp_tol)
    induced = norms.induced_trace_norm(delta, restarts=restarts, seed=seed).value
    j, jt = norms.choi_isometry_invariants(ch.scale(delta, n))
    rep.add("cb_norm_one", abs(diamond - 1.0), tol, "|||delta|||_1 = 1 (SDP)")
    rep.add("induced_norm_gap", abs(n * induced - 1.0), tol, "n ||delta||_1 = 1 (see-saw)")
    rep.add("choi_certificate", max(abs(j - n * n), abs(jt - n)), tol,
            "||J(n delta)||_1 = n^2 and ||J(n delta T_n)||_1 = n")
    rep.info.update({"diamond_norm": diamond, "induced_norm": induced, "n": n,
                     "lambda": g.lam, "tol": tol, "seed": seed})
    return rep


def analyze_game(g: GameTriple, tol: float = GAP_TOL, restarts: int = norms.DEFAULT_RESTARTS,
                 seed=0, sdp_tol: float = norms.DEFAULT_SDP_TOL) -> GameAnalysis:
    un = optimal_unentangled(g, restarts=restarts, seed=seed)
    return GameAnalysis(
        entangled_value=optimal_entangled(g, sdp_tol),
        unentangled_value=un.value,
        unentangled_hermitian_value=un.hermitian_value,
        delta=g.delta,
        gap_certificate=check_max_gap(g, tol, restarts, seed, sdp_tol),
    )


def _check_reversible(psi: LinearMapRep, tol: float, name: str):
    if not ch.is_channel(psi, tol):
        raise DomainError(f"{name} is not a channel")
    if not iso.certify_complete_isometry(psi, tol).verdict:
        raise DomainError(f"{name} is not reversible")


def _wh_parts(r: float, psi0, psi1, n: int):
    phi0, phi1, lam_n = ch.wh_channels(n)
    m = (psi0 or psi1).out_dim
    zero = LinearMapRep(n, m, np.zeros((n * m, n * m)))
    a0 = a1 = zero
    if psi0 is not None and r > 0:
        a0 = a0 + (r * lam_n) * ch.compose(psi0, phi0)
        a1 = a1 + (r * (1 - lam_n)) * ch.compose(psi0, phi1)
    if psi1 is not None and r < 1:
        a0 = a0 + ((1 - r) * (1 - lam_n)) * ch.compose(psi1, phi1)
        a1 = a1 + ((1 - r) * lam_n) * ch.compose(psi1, phi0)
    return r * lam_n + (1 - r) * (1 - lam_n), a0, a1


def construct_game(r: float, psi0: LinearMapRep | None, psi1: LinearMapRep | None,
                   n: int | None = None, tol: float = CHANNEL_TOL) -> GameTriple:
    """Build the game with weight r from reversible channels psi0, psi1.

    lambda = r lambda_n + (1-r)(1-lambda_n),
    lambda Gamma0 = r lambda_n psi0 Phi0 + (1-r)(1-lambda_n) psi1 Phi1,
    (1-lambda) Gamma1 = r (1-lambda_n) psi0 Phi1 + (1-r) lambda_n psi1 Phi0.
    For 0 < r < 1 the two channels must have orthogonal output ranges.
    """
    if not 0.0 <= r <= 1.0:
        raise DomainError(f"r={r} is not in [0, 1]")
    if (r > 0 and psi0 is None) or (r < 1 and psi1 is None):
        raise DomainError("a channel with nonzero weight is missing")
    used = [(nm, p) for nm, p in (("psi0", psi0), ("psi1", psi1)) if p is not None]
    n = n or used[0][1].in_dim
    for nm, p in used:
        if p.in_dim != n:
            raise DomainError(f"{nm} has input dimension {p.in_dim}, expected {n}")
        _check_reversible(p, tol, nm)
    if 0 < r < 1:
        if psi0.out_dim != psi1.out_dim:
            raise DomainError("psi0 and psi1 have different output dimensions")
        if psi0.out_dim < 2 * n:
            raise DomainError("orthogonal ranges need m >= 2n")
        overlap = np.linalg.norm(ch.range_projector(psi0) @ ch.range_projector(psi1))
        if overlap > tol:
            raise DomainError(f"ranges of psi0 and psi1 overlap (residual {overlap:.2e})")
    lam, a0, a1 = _wh_parts(r, psi0, psi1, n)
    return GameTriple(lam, ch.scale(a0, 1 / lam), ch.scale(a1, 1 / (1 - lam)))


def _schmidt_matrix(u, n: int) -> np.ndarray:
    # u = sum A[a, c] e_a (x) e_c; (Gamma (x) id)(uu^*) = (I (x) A^T) J(Gamma) (I (x) A^T)^*
    return np.asarray(u, dtype=complex).reshape(n, n).T


def choi_from_pure_image(M: np.ndarray, u, n: int, m: int) -> np.ndarray:
    """Invert M = (Gamma (x) id_n)(uu^*) for J(Gamma) when u has full Schmidt rank."""
    B = np.kron(np.eye(m), _schmidt_matrix(u, n))
    Binv = np.linalg.inv(B)
    return Binv @ M @ la.dag(Binv)


def cp_difference_uniqueness(phi: LinearMapRep, psi0: LinearMapRep, psi1: LinearMapRep,
                             tol: float = 1e-7, restarts: int = norms.DEFAULT_RESTARTS,
                             seed=0) -> CertificationReport:
    """Check that Phi = psi0 - psi1 is the only additive CP split at a maximizer.

    Needs |||Phi|||_1 = |||psi0|||_1 + |||psi1|||_1. The triangle inequality
    gives <=, so any u with ||(Phi (x) id_n)(uu^*)||_1 >= the sum certifies it.
    u = vec(tau_n) is tried first, then a see-saw maximizer. At u the two
    images must form the Hahn decomposition of (Phi (x) id_n)(uu^*), and when
    u has full Schmidt rank that decomposition determines psi0 and psi1.
    """
    n, m = phi.in_dim, phi.out_dim
    pre = CertificationReport("cp difference preconditions")
    pre.add("hermiticity_preserving", ch.hp_residual(phi), tol)
    pre.add("psi0_cp", ch.cp_residual(psi0), tol)
    pre.add("psi1_cp", ch.cp_residual(psi1), tol)
    pre.add("difference", float(np.linalg.norm(phi.choi - psi0.choi + psi1.choi)), tol)
    if not pre.verdict:
        raise CertificationRefused("preconditions failed", pre)
    cb0, cb1 = norms.cp_cb_norm(psi0), norms.cp_cb_norm(psi1)

    def value(u):
        return la.trace_norm(ch.apply_multiplicity(phi, np.outer(u, np.conj(u)), n))

    u = la.max_entangled_vector(n)
    best, source = value(u), "tau"
    if cb0 + cb1 - best > tol:
        est = norms.hermitian_multiplicity_norm(phi, n, restarts=restarts, seed=seed)
        if est.value > best:
            u, best, source = est.witness[0], est.value, "seesaw"
    pre.add("norm_additivity", max(0.0, cb0 + cb1 - best), tol,
            "|||psi0|||_1 + |||psi1|||_1 - ||(Phi (x) id_n)(uu^*)||_1")
    if not pre.verdict:
        raise CertificationRefused("norm additivity could not be certified", pre)

    rep = CertificationReport("cp difference uniqueness")
    rho = np.outer(u, np.conj(u))
    M = ch.apply_multiplicity(phi, rho, n)
    M0 = ch.apply_multiplicity(psi0, rho, n)
    M1 = ch.apply_multiplicity(psi1, rho, n)
    rep.add("psi0_attains", abs(cb0 - la.trace_norm(M0)), tol)
    rep.add("psi1_attains", abs(cb1 - la.trace_norm(M1)), tol)
    hahn = la.hahn_decompose(M, tol=1e-10)
    rep.add("hahn_match", float(np.linalg.norm(hahn.positive_part - M0)
                                + np.linalg.norm(hahn.negative_part - M1)), tol)
    schmidt = la.schmidt_coefficients(u, n, n)
    full = bool(schmidt[-1] > 1e-6)
    rep.info.update({"maximizer": source, "value": best, "cb_psi0": cb0, "cb_psi1": cb1,
                     "schmidt_min": float(schmidt[-1]), "full_schmidt_rank": full})
    if full:
        J0 = choi_from_pure_image(hahn.positive_part, u, n, m)
        J1 = choi_from_pure_image(hahn.negative_part, u, n, m)
        rep.add("uniqueness", max(float(np.linalg.norm(J0 - psi0.choi)),
                                  float(np.linalg.norm(J1 - psi1.choi))), tol,
                "Choi matrices rebuilt from the Hahn parts")
    rep.witnesses["u"] = u
    return rep


def decompose_wh_equivalent(g: GameTriple, tol: float = GAP_TOL,
                            restarts: int = norms.DEFAULT_RESTARTS, seed=0,
                            sdp_tol: float = norms.DEFAULT_SDP_TOL) -> WHDecomposition:
    """Recover (r, psi0, psi1) for a game with the maximal entanglement gap.

    Psi = n delta T_n is a Hermiticity-preserving complete isometry; its
    signed decomposition r psi0 - (1-r) psi1 gives the reversible channels.
    A single extracted block (rank 1) is the relabelled single-channel form.
    """
    gap = check_max_gap(g, tol, restarts, seed, sdp_tol)
    if not gap.verdict:
        raise CertificationRefused("game does not have the maximal gap", gap)
    n = g.n
    delta = g.delta
    psi = ch.compose_transpose(ch.scale(delta, n))
    sd = iso.herm_signed_decompose(psi, tol)
    r = sd.r_weight
    lam_check, a0, a1 = _wh_parts(r, sd.psi0, sd.psi1, n)
    res0 = float(np.linalg.norm(ch.scale(g.gamma0, g.lam).choi - a0.choi))
    res1 = float(np.linalg.norm(ch.scale(g.gamma1, 1 - g.lam).choi - a1.choi))
    rep = CertificationReport("Werner-Holevo decomposition")
    rep.extend(gap, "gap.")
    rep.add("lambda", abs(lam_check - g.lam), tol)
    rep.add("gamma0", res0, tol)
    rep.add("gamma1", res1, tol)
    rep.add("signed_reconstruction", sd.reconstruction_residual, tol)
    rep.add("ranges_orthogonal", sd.ranges_orthogonal, tol)
    uniq = cp_difference_uniqueness(delta, ch.scale(g.gamma0, g.lam),
                                    ch.scale(g.gamma1, 1 - g.lam), tol, restarts, seed)
    rep.extend(uniq, "uniqueness.")
    branch = "single" if sd.structure.r == 1 else "mixed"
    rep.info.update({"r": r, "lambda": g.lam, "lambda_check": lam_check, "branch": branch,
                     "structure_rank": sd.structure.r, "maximizer": uniq.info["maximizer"],
                     "lambda_at_endpoint": g.lam in (0.0, 1.0)})
    if not rep.verdict:
        raise ExtractionError(f"decomposition residuals above tolerance: "
                              f"{[c.name for c in rep.failures()]}",
                              {c.name: c.residual for c in rep.checks})
    return WHDecomposition(r, sd.psi0, sd.psi1, lam_check, res0, res1, branch, rep)


def equal_probability_check(g: GameTriple, k: int = 2, samples: int = 100, tol: float = 1e-7,
                            seed=0) -> CertificationReport:
    """Compare ||(delta (x) id_k)(X)||_1 with the Werner-Holevo value on random X.

    X is Ginibre, scaled to unit trace norm. Meaningful for games already
    decomposed as Werner-Holevo equivalents.
    """
    n = g.n
    phi0, phi1, lam_n = ch.wh_channels(n)
    wh = ch.subtract(ch.scale(phi0, lam_n), ch.scale(phi1, 1 - lam_n))
    delta = g.delta
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        X = la.ginibre(n * k, n * k, rng)
        X /= la.trace_norm(X)
        a = la.trace_norm(ch.apply_multiplicity(delta, X, k))
        b = la.trace_norm(ch.apply_multiplicity(wh, X, k))
        worst = max(worst, abs(a - b))
    rep = CertificationReport("equal success probabilities")
    rep.add("max_deviation", worst, tol, f"{samples} random X in M_n (x) M_{k}")
    rep.info.update({"k": k, "samples": samples, "seed": seed})
    return rep


def explore_hermitian_inflation(phi: LinearMapRep, k: int, restarts: int = norms.DEFAULT_RESTARTS,
                                seed=0, margin: float = 1e-4) -> CertificationReport:
    """Probe ||Phi (x) id_k||_{1,H} <= k ||Phi||_{1,H} (open in general).

    Both sides are see-saw lower bounds, so the ratio is only indicative. An
    instance with ratio above k + margin is flagged as a candidate
    counterexample. The report carries no checks.
    """
    if not ch.is_hermiticity_preserving(phi, 1e-9):
        raise DomainError("map is not Hermiticity preserving")
    fwd = lambda X: ch.apply(phi, X)  # noqa: E731
    adj = lambda W: ch.apply_adjoint(phi, W)  # noqa: E731
    base = norms.seesaw_hermitian(fwd, adj, phi.in_dim, restarts, norms.DEFAULT_TOL,
                                  norms.DEFAULT_MAX_ITER, seed, signed=True)
    lifted = norms.hermitian_multiplicity_norm(phi, k, restarts=restarts, seed=seed)
    ratio = lifted.value / base.value if base.value > 0 else float("nan")
    rep = CertificationReport(f"hermitian inflation probe, k={k}")
    rep.info.update({
        "k": k, "hermitian_norm": base.value, "lifted_hermitian_norm": lifted.value,
        "ratio": ratio, "candidate_counterexample": bool(ratio > k + margin),
        "restarts": restarts, "seed": seed,
    })
    return rep
