"""Command-line front end.

Exit status: 0 on success, 2 when a certification comes back negative,
1 on bad input or solver failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import acceptance
from . import channels as ch
from . import games as gm
from . import inflation as inf
from . import isometry as iso
from . import linalg as la
from . import norms
from .errors import CertificationRefused, DomainError, ExtractionError, FactorizationError, SolverError
from .reports import CertificationReport, to_jsonable

log = logging.getLogger("cbnorm")

EXIT_OK, EXIT_ERROR, EXIT_CERTIFIED_FAIL = 0, 1, 2
COMMANDS = ("choi", "norms", "certify-isometry", "extract-structure", "saturation", "corollary",
            "game-analyze", "game-construct", "game-decompose", "explore-hermitian", "selftest")


class InputError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    map: str | None = None
    game: str | None = None
    psi0: str | None = None
    psi1: str | None = None
    r: float | None = None
    k: int | None = None
    tol: float = 1e-7
    restarts: int = norms.DEFAULT_RESTARTS
    seed: int = 0
    sdp_tol: float = norms.DEFAULT_SDP_TOL
    output: str | None = None
    format: str = "json"
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise InputError(f"unknown command {self.command!r}")
        if self.tol <= 0 or self.sdp_tol <= 0:
            raise InputError("tolerances must be positive")
        if self.restarts < 1:
            raise InputError("--restarts must be at least 1")

    def audit(self) -> dict:
        return {"command": self.command, "tol": self.tol, "restarts": self.restarts,
                "seed": self.seed, "sdp_tol": self.sdp_tol}


def _dims(parts: list[str], count: int, spec: str, minima=None) -> list[int]:
    if len(parts) != count:
        raise InputError(f"constructor {spec!r} expects {count} integer argument(s)")
    try:
        vals = [int(p) for p in parts]
    except ValueError as exc:
        raise InputError(f"bad integer in {spec!r}") from exc
    if any(v < lo for v, lo in zip(vals, minima or [1] * count)):
        raise InputError(f"arguments of {spec!r} out of range")
    return vals


def _load_json(path: str):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: malformed JSON at line {exc.lineno}, column {exc.colno}: "
                         f"{exc.msg}") from exc


def parse_map(spec: str) -> ch.LinearMapRep:
    """Named constructor or JSON file.

    Names: transpose:n, identity:n, wh0:n, wh1:n, depolarizing:n, and
    block:n:m:j (conjugation by the isometry onto basis vectors jn..jn+n-1 of C^m).
    """
    if spec is None:
        raise InputError("a map is required (--map)")
    name, _, rest = spec.partition(":")
    parts = rest.split(":") if rest else []
    if name in ("transpose", "identity", "wh0", "wh1", "depolarizing") and not os.path.exists(spec):
        (n,) = _dims(parts, 1, spec)
        if name == "transpose":
            return ch.transpose_map(n)
        if name == "identity":
            return ch.identity_map(n)
        if name == "depolarizing":
            return ch.depolarizing_channel(n)
        phi0, phi1, _ = ch.wh_channels(n)
        return phi0 if name == "wh0" else phi1
    if name == "block" and not os.path.exists(spec):
        n, m, j = _dims(parts, 3, spec, minima=(1, 1, 0))
        if (j + 1) * n > m:
            raise InputError(f"block {j} of size {n} does not fit in C^{m}")
        E = np.zeros((m, n), dtype=complex)
        E[j * n:(j + 1) * n] = np.eye(n)
        return ch.conjugation_map(E)
    return ch.map_from_json(_load_json(spec))


def parse_game(spec: str) -> gm.GameTriple:
    """``wh:n`` or a JSON file {"lambda": x, "gamma0": <map>, "gamma1": <map>}."""
    if spec is None:
        raise InputError("a game is required (--game)")
    name, _, rest = spec.partition(":")
    if name == "wh" and not os.path.exists(spec):
        (n,) = _dims(rest.split(":") if rest else [], 1, spec)
        return gm.wh_game(n)
    return gm.game_from_json(_load_json(spec))


def _estimate(est: norms.NormEstimate) -> dict:
    out = norms.estimate_to_json(est)
    for key in ("bound", "saturated", "pure_state_value", "certificate", "gap"):
        if key in est.info:
            out[key] = est.info[key]
    return out


def _cmd_choi(cfg: RunConfig):
    phi = parse_map(cfg.map)
    out = ch.map_to_json(phi)
    out["predicates"] = {
        "cp_residual": ch.cp_residual(phi), "tp_residual": ch.tp_residual(phi),
        "hp_residual": ch.hp_residual(phi),
        "completely_positive": ch.is_completely_positive(phi, cfg.tol),
        "trace_preserving": ch.is_trace_preserving(phi, cfg.tol),
        "hermiticity_preserving": ch.is_hermiticity_preserving(phi, cfg.tol),
    }
    return out, EXIT_OK


def _cmd_norms(cfg: RunConfig):
    phi = parse_map(cfg.map)
    kw = {"restarts": cfg.restarts, "seed": cfg.seed}
    base = norms.induced_trace_norm(phi, **kw)
    k = cfg.k or phi.in_dim
    j, jt = norms.choi_isometry_invariants(phi)
    out = {
        "induced_trace_norm": _estimate(base),
        "multiplicity_norm": dict(k=k, **_estimate(norms.multiplicity_norm(phi, k, base=base, **kw))),
        "diamond_norm_seesaw": _estimate(norms.diamond_norm_seesaw(phi, **kw)),
        "diamond_norm_sdp": _estimate(norms.diamond_norm_sdp(phi, cfg.sdp_tol)),
        "choi_trace_norm": j,
        "choi_transpose_trace_norm": jt,
    }
    if ch.is_hermiticity_preserving(phi, cfg.tol):
        out["hermitian_induced_norm"] = _estimate(norms.hermitian_induced_norm(phi, **kw))
    return out, EXIT_OK


def _report(rep: CertificationReport):
    return rep, EXIT_OK if rep.verdict else EXIT_CERTIFIED_FAIL


def _cmd_certify(cfg: RunConfig):
    return _report(iso.certify_complete_isometry(parse_map(cfg.map), cfg.tol))


def _cmd_extract(cfg: RunConfig):
    phi = parse_map(cfg.map)
    try:
        dec = iso.extract_isometry_structure(phi, cfg.tol)
    except CertificationRefused as exc:
        return exc.report, EXIT_CERTIFIED_FAIL
    out = dec.to_json()
    if dec.variant == "positive" or ch.is_channel(phi, cfg.tol):
        out["left_inverse"] = ch.map_to_json(iso.left_inverse(dec))
    return out, EXIT_OK


def _cmd_saturation(cfg: RunConfig):
    phi = parse_map(cfg.map)
    k = cfg.k or phi.in_dim
    rep, wit = inf.verify_saturation(phi, k, restarts=cfg.restarts, seed=cfg.seed)
    out = {"saturation": rep.to_json()}
    if wit is not None:
        out["witness"] = wit.to_json()
        fact = inf.transpose_factorization(phi, wit, max(cfg.tol, 1e-6))
        fact.witnesses.pop("embedded_map_choi", None)
        out["transpose_factorization"] = fact.to_json()
        return out, EXIT_OK if fact.verdict else EXIT_CERTIFIED_FAIL
    return out, EXIT_CERTIFIED_FAIL


def _cmd_corollary(cfg: RunConfig):
    phi = parse_map(cfg.map)
    return _report(inf.corollary_check(phi, max(cfg.tol, 1e-6), cfg.restarts, cfg.seed,
                                       cfg.sdp_tol))


def _cmd_game_analyze(cfg: RunConfig):
    g = parse_game(cfg.game)
    a = gm.analyze_game(g, max(cfg.tol, gm.GAP_TOL), cfg.restarts, cfg.seed, cfg.sdp_tol)
    return a.to_json(), EXIT_OK


def _cmd_game_construct(cfg: RunConfig):
    if cfg.r is None:
        raise InputError("--r is required")
    psi0 = parse_map(cfg.psi0) if cfg.psi0 else None
    psi1 = parse_map(cfg.psi1) if cfg.psi1 else None
    return gm.construct_game(cfg.r, psi0, psi1).to_json(), EXIT_OK


def _cmd_game_decompose(cfg: RunConfig):
    g = parse_game(cfg.game)
    try:
        d = gm.decompose_wh_equivalent(g, max(cfg.tol, gm.GAP_TOL), cfg.restarts, cfg.seed,
                                       cfg.sdp_tol)
    except CertificationRefused as exc:
        return exc.report, EXIT_CERTIFIED_FAIL
    out = {
        "r": d.r_weight, "lambda_check": d.lambda_check, "branch": d.branch,
        "residual_gamma0": d.residual_gamma0, "residual_gamma1": d.residual_gamma1,
        "psi0": None if d.psi0 is None else ch.map_to_json(d.psi0),
        "psi1": None if d.psi1 is None else ch.map_to_json(d.psi1),
        "report": d.report.to_json(),
    }
    return out, EXIT_OK


def _cmd_explore(cfg: RunConfig):
    phi = parse_map(cfg.map)
    rep = gm.explore_hermitian_inflation(phi, cfg.k or 2, cfg.restarts, cfg.seed)
    return rep, EXIT_OK


def _cmd_selftest(cfg: RunConfig):
    results = acceptance.run_all(seed=cfg.seed, echo=lambda s: print(s, file=sys.stderr))
    out = {"criteria": [{"number": r.number, "name": r.name, "pass": r.passed,
                         "detail": r.detail} for r in results],
           "all_pass": all(r.passed for r in results)}
    return out, EXIT_OK if out["all_pass"] else EXIT_CERTIFIED_FAIL


HANDLERS = {
    "choi": _cmd_choi, "norms": _cmd_norms, "certify-isometry": _cmd_certify,
    "extract-structure": _cmd_extract, "saturation": _cmd_saturation,
    "corollary": _cmd_corollary, "game-analyze": _cmd_game_analyze,
    "game-construct": _cmd_game_construct, "game-decompose": _cmd_game_decompose,
    "explore-hermitian": _cmd_explore, "selftest": _cmd_selftest,
}


def _text(obj, indent: int = 0) -> str:
    pad = "  " * indent
    if isinstance(obj, dict):
        if set(obj) >= {"rows", "cols", "data"}:
            return f"{pad}<{obj['rows']}x{obj['cols']} matrix>"
        lines = []
        for k, v in obj.items():
            if isinstance(v, (dict, list)) and v and not (isinstance(v, dict) and "rows" in v):
                lines.append(f"{pad}{k}:")
                lines.append(_text(v, indent + 1))
            else:
                lines.append(f"{pad}{k}: {_text(v).strip()}")
        return "\n".join(lines)
    if isinstance(obj, list):
        return "\n".join(_text(v, indent) if isinstance(v, dict) else f"{pad}- {v}" for v in obj)
    return f"{pad}{obj}"


def run(cfg: RunConfig) -> tuple[dict, int]:
    """Dispatch ``cfg.command``; returns the JSON-ready payload and the exit status."""
    try:
        result, status = HANDLERS[cfg.command](cfg)
    except (InputError, DomainError) as exc:
        return {"error": str(exc), "config": cfg.audit()}, EXIT_ERROR
    except (SolverError, FactorizationError, ExtractionError) as exc:
        return {"error": f"{type(exc).__name__}: {exc}", "config": cfg.audit()}, EXIT_ERROR
    except CertificationRefused as exc:
        payload = {"error": str(exc), "config": cfg.audit()}
        if exc.report is not None:
            payload["report"] = exc.report.to_json()
        return payload, EXIT_CERTIFIED_FAIL
    payload = to_jsonable(result)
    if isinstance(result, CertificationReport):
        payload = result.to_json()
    payload["config"] = cfg.audit()
    return payload, status


def emit(payload: dict, fmt: str, output: str | None):
    text = json.dumps(payload, indent=2) if fmt == "json" else _text(payload)
    if output:
        with open(output, "w") as fh:
            fh.write(text + "\n")
    else:
        sys.stdout.write(text + "\n")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cbnorm", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--map", help="map spec: transpose:n, identity:n, wh0:n, wh1:n, "
                                 "depolarizing:n, block:n:m:j, or a JSON file")
    p.add_argument("--game", help="game spec: wh:n or a JSON file")
    p.add_argument("--psi0", help="first reversible channel for game-construct")
    p.add_argument("--psi1", help="second reversible channel for game-construct")
    p.add_argument("--r", type=float, help="weight r for game-construct")
    p.add_argument("--k", type=int, help="multiplicity / ancilla dimension")
    p.add_argument("--tol", type=float, default=1e-7)
    p.add_argument("--restarts", type=int, default=norms.DEFAULT_RESTARTS)
    p.add_argument("--seed", type=int, default=None,
                   help="RNG seed (default: $CBNORM_SEED, else 0)")
    p.add_argument("--sdp-tol", type=float, default=norms.DEFAULT_SDP_TOL)
    p.add_argument("--format", choices=("json", "text"), default="json")
    p.add_argument("--output", help="write the report here instead of stdout")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    seed = args.seed
    if seed is None:
        env = os.environ.get("CBNORM_SEED")
        try:
            seed = int(env) if env else 0
        except ValueError:
            print(f"error: CBNORM_SEED={env!r} is not an integer", file=sys.stderr)
            return EXIT_ERROR
    try:
        cfg = RunConfig(command=args.command, map=args.map, game=args.game, psi0=args.psi0,
                        psi1=args.psi1, r=args.r, k=args.k, tol=args.tol,
                        restarts=args.restarts, seed=seed, sdp_tol=args.sdp_tol,
                        output=args.output, format=args.format)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    payload, status = run(cfg)
    if "error" in payload:
        print(f"error: {payload['error']}", file=sys.stderr)
    emit(payload, cfg.format, cfg.output)
    return status


if __name__ == "__main__":
    sys.exit(main())
