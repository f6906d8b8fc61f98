"""The eleven acceptance criteria, shared by the test suite and ``cbnorm selftest``."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import channels as ch
from . import games as gm
from . import inflation as inf
from . import isometry as iso
from . import linalg as la
from . import norms


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str = ""
    seconds: float = 0.0
    data: dict = field(default_factory=dict, repr=False)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] criterion {self.number:2d} {self.name}: {self.detail} ({self.seconds:.1f}s)"


def _timed(number: int, name: str):
    def wrap(fn):
        def run(seed: int = 0) -> CriterionResult:
            t0 = time.perf_counter()
            passed, detail, data = fn(seed)
            return CriterionResult(number, name, bool(passed), detail,
                                   time.perf_counter() - t0, data)
        run.__name__ = fn.__name__
        run.__doc__ = fn.__doc__
        return run
    return wrap


@_timed(1, "choi norm anchors")
def criterion_1(seed):
    errs = []
    for n in range(2, 6):
        errs.append(abs(la.trace_norm(ch.identity_map(n).choi) - n))
        errs.append(abs(la.trace_norm(ch.transpose_map(n).choi) - n * n))
    worst = max(errs)
    return worst < 1e-10, f"max error {worst:.2e} (tol 1e-10)", {"max_error": worst}


@_timed(2, "transpose decomposition")
def criterion_2(seed):
    worst = 0.0
    for n in range(2, 6):
        phi0, phi1, lam = ch.wh_channels(n)
        diff = lam * phi0.choi - (1 - lam) * phi1.choi - ch.transpose_map(n).choi / n
        worst = max(worst, float(np.max(np.abs(diff))))
    return worst < 1e-13, f"max entrywise residual {worst:.2e} (tol 1e-13)", {"max_residual": worst}


@_timed(3, "maximal inflation of the transpose")
def criterion_3(seed):
    worst_gap, worst_over = 0.0, -np.inf
    for n in range(1, 5):
        T = ch.transpose_map(n)
        base = norms.induced_trace_norm(T, seed=seed)
        for k in range(1, n + 1):
            est = norms.multiplicity_norm(T, k, seed=seed, base=base)
            worst_gap = max(worst_gap, est.info["bound"] - est.value)
        est = norms.multiplicity_norm(T, n + 1, seed=seed, base=base)
        worst_over = max(worst_over, est.value - n)
    ok = worst_gap < 1e-5 and worst_over <= 1e-5
    return ok, (f"max bound gap (k<=n) {worst_gap:.2e} (tol 1e-5); "
                f"max excess over n at k=n+1 {worst_over:.2e} (tol 1e-5)"), \
        {"gap": worst_gap, "excess": worst_over}


@_timed(4, "isometry pipeline")
def criterion_4(seed):
    rng = np.random.default_rng(seed)
    worst = {"certify": 0.0, "reconstruct": 0.0, "left_inverse": 0.0, "signed_r": 0.0}
    ok = True
    for i in range(20):
        n, r = (2, 3)[i % 2], (1, 2)[(i // 2) % 2]
        m = n * r + int(rng.integers(0, 3))
        _, phi = ch.random_reversible_embedding(n, r, m, rng, positive=bool(i % 4 < 2))
        cert = iso.certify_complete_isometry(phi, 1e-8)
        ok &= cert.verdict
        worst["certify"] = max(worst["certify"], max(c.residual for c in cert.checks))
        dec = iso.extract_isometry_structure(phi, 1e-8)
        worst["reconstruct"] = max(worst["reconstruct"], dec.residuals["reconstruction"])
        psi = iso.left_inverse(dec)
        err = float(np.linalg.norm((psi @ phi).choi - ch.identity_map(n).choi))
        worst["left_inverse"] = max(worst["left_inverse"], err)
    for i in range(10):
        n, r = (2, 3)[i % 2], 2 + i % 2
        m = n * r + int(rng.integers(0, 2))
        U = la.random_isometry(m, n * r, rng)
        h = rng.uniform(0.1, 1.0, r) * rng.choice([-1.0, 1.0], r)
        h[0], h[-1] = abs(h[0]), -abs(h[-1])
        h /= np.abs(h).sum()
        W = la.random_unitary(r, rng)
        phi = ch.embedding_map(U, W @ np.diag(h) @ la.dag(W))
        sd = iso.herm_signed_decompose(phi, 1e-8)
        worst["signed_r"] = max(worst["signed_r"], abs(sd.r_weight - h[h > 0].sum()))
    ok &= worst["certify"] < 1e-8 and worst["reconstruct"] < 1e-8
    ok &= worst["left_inverse"] < 1e-8 and worst["signed_r"] < 1e-8
    detail = ", ".join(f"{k} {v:.1e}" for k, v in worst.items()) + " (tol 1e-8)"
    return ok, detail, worst


@_timed(5, "corollary coherence")
def criterion_5(seed):
    rng = np.random.default_rng(seed)
    maps = []
    for i in range(10):
        n, r = (2, 3)[i % 2], 1 + (i // 2) % 2
        m = n * r + int(i % 3 == 0)
        _, psi = ch.random_reversible_embedding(n, r, m, rng, positive=bool(i % 3))
        maps.append(ch.compose_transpose(psi))
    for i in range(10):
        n = (2, 3)[i % 2]
        maps.append(ch.random_channel(n, n + i % 2, rng))
    incoherent, worst_diff, holds = 0, 0.0, []
    for phi in maps:
        rep = inf.corollary_check(phi, tol=1e-6, seed=seed)
        incoherent += not rep.info["coherent"]
        holds.append(rep.verdict)
        sdp = norms.diamond_norm_sdp(phi).value
        see = norms.diamond_norm_seesaw(phi, seed=seed).value
        worst_diff = max(worst_diff, abs(sdp - see))
    ok = incoherent == 0 and worst_diff < 1e-4 and holds == [True] * 10 + [False] * 10
    return ok, (f"{incoherent} incoherent of 20, verdicts {sum(holds)} true / "
                f"{20 - sum(holds)} false; max |SDP - see-saw| {worst_diff:.2e} (tol 1e-4)"), \
        {"incoherent": incoherent, "diff": worst_diff}


@_timed(6, "Werner-Holevo game values")
def criterion_6(seed):
    worst_e, worst_u = 0.0, 0.0
    for n in range(2, 5):
        g = gm.wh_game(n)
        worst_e = max(worst_e, abs(gm.optimal_entangled(g) - 1.0))
        worst_u = max(worst_u, abs(gm.optimal_unentangled(g, seed=seed).value - (0.5 + 0.5 / n)))
    ok = worst_e < 1e-5 and worst_u < 1e-5
    return ok, f"entangled error {worst_e:.2e}, unentangled error {worst_u:.2e} (tol 1e-5)", \
        {"entangled": worst_e, "unentangled": worst_u}


def block_channels(n: int, m: int, seed=None):
    """Two reversible channels M_n -> M_m with orthogonal ranges (m >= 2n)."""
    U = la.random_isometry(m, 2 * n, seed)
    return ch.conjugation_map(U[:, :n]), ch.conjugation_map(U[:, n:])


@_timed(7, "uniqueness round trip")
def criterion_7(seed):
    rng = np.random.default_rng(seed)
    worst = {"r": 0.0, "lambda": 0.0, "equal_probability": 0.0}
    gap_ok = True
    for n in (2, 3):
        for r in (0.0, 0.3, 1.0):
            psi0, psi1 = block_channels(n, 4 * n, rng)
            g = gm.construct_game(r, psi0, psi1)
            gap_ok &= gm.check_max_gap(g, seed=seed).verdict
            dec = gm.decompose_wh_equivalent(g, seed=seed)
            worst["r"] = max(worst["r"], abs(dec.r_weight - r))
            worst["lambda"] = max(worst["lambda"], abs(dec.lambda_check - g.lam))
            ep = gm.equal_probability_check(g, k=2, samples=100, seed=seed)
            worst["equal_probability"] = max(worst["equal_probability"],
                                             ep.check("max_deviation").residual)
    ok = gap_ok and worst["r"] < 1e-7 and worst["lambda"] < 1e-8
    ok &= worst["equal_probability"] < 1e-7
    return ok, (f"gap certified {gap_ok}; r error {worst['r']:.1e} (tol 1e-7), lambda error "
                f"{worst['lambda']:.1e} (tol 1e-8), equal-probability deviation "
                f"{worst['equal_probability']:.1e} (tol 1e-7)"), worst


@_timed(8, "CP difference uniqueness")
def criterion_8(seed):
    worst, ok = 0.0, True
    for n in (2, 3):
        phi0, phi1, lam = ch.wh_channels(n)
        rep = gm.cp_difference_uniqueness((1 / n) * ch.transpose_map(n), lam * phi0,
                                          (1 - lam) * phi1, tol=1e-7, seed=seed)
        ok &= rep.verdict
        worst = max(worst, rep.check("uniqueness").residual)
    return ok and worst < 1e-7, f"max uniqueness residual {worst:.2e} (tol 1e-7)", {"residual": worst}


@_timed(9, "trace/operator norm duality")
def criterion_9(seed):
    ss = np.random.SeedSequence(seed).spawn(20)
    worst = 0.0
    for s in ss:
        phi = ch.random_map(3, 3, np.random.default_rng(s))
        a = norms.induced_trace_norm(phi, seed=seed).value
        b = norms.induced_operator_norm(ch.adjoint_map(phi), seed=seed).value
        worst = max(worst, abs(a - b))
    return worst < 1e-5, f"max |‖Φ‖₁ - ‖Φ*‖| {worst:.2e} (tol 1e-5)", {"max_diff": worst}


@_timed(10, "falsification suite")
def criterion_10(seed):
    tol = 1e-8
    dep = ch.depolarizing_channel(3)
    certs = {name: iso.certify_complete_isometry(phi, tol).verdict
             for name, phi in (("depolarizing_3", dep), ("transpose_2", ch.transpose_map(2)),
                               ("transpose_3", ch.transpose_map(3)))}
    rep = iso.verify_multiplication_relations(dep, samples=5, tol=tol, seed=seed)
    std = rep.check("restricted_sweep_standard").residual
    four = rep.check("restricted_sweep_fourier").residual
    ok = not any(certs.values()) and four > tol
    return ok, (f"certifications {certs}; rank-one sweep residual: standard basis "
                f"{std:.1e}, standard+Fourier {four:.1e} (violation if > {tol:.0e})"), \
        {"certs": certs, "standard": std, "fourier": four}


@_timed(11, "hermitian inflation survey")
def criterion_11(seed):
    ss = np.random.SeedSequence(seed).spawn(50)
    ratios = []
    for s in ss:
        phi = ch.random_hp_map(3, 3, np.random.default_rng(s))
        rep = gm.explore_hermitian_inflation(phi, 2, seed=seed)
        ratios.append(rep.info["ratio"])
    top = max(ratios)
    return top <= 2 + 1e-4, f"max ratio {top:.6f} over 50 maps (limit 2 + 1e-4)", {"ratios": ratios}


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6,
            criterion_7, criterion_8, criterion_9, criterion_10, criterion_11]


def run_all(seed: int = 0, echo=None) -> list[CriterionResult]:
    results = []
    for crit in CRITERIA:
        res = crit(seed)
        if echo is not None:
            echo(res.line())
        results.append(res)
    return results
