"""Command-line front end.

Subcommands: verify-r, derive-r, simulate, twist, noise-sweep, gauge-check.
Exit codes: 0 success, 1 domain failure (a check failed or the game was
lost), 2 usage or parse error.  Every JSON artifact embeds a run manifest
(command, resolved arguments, seed, version, timestamp, input digests);
apart from the timestamp, reruns with the same arguments are byte-identical.
All randomness flows from the --seed value through Philox counter-based
generators, so trial sweeps are reproducible and parallel runs match serial
ones.  PARASTAT_THREADS caps sweep workers (default 1).
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import sys
import time
from dataclasses import replace

import numpy as np

from . import __version__, game, gauge_sim, group_engine, parafock, rmatrix

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class CliError(Exception):
    def __init__(self, message, code=EXIT_USAGE):
        super().__init__(message)
        self.code = code


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("PARASTAT_THREADS", "1")))
    except ValueError:
        return 1


def _digest(path) -> str:
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


def _manifest(args, inputs=()) -> dict:
    return {
        "command": args.command,
        "config": {
            k: v for k, v in sorted(vars(args).items())
            if k not in ("command", "func") and v is not None
        },
        "seed": args.seed,
        "version": __version__,
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
        "input_digests": {str(p): _digest(p) for p in inputs},
    }


def _load_r(args) -> tuple[rmatrix.RMatrix, list]:
    if getattr(args, "builtin", None):
        try:
            return rmatrix.builtin_r(args.builtin), []
        except KeyError as exc:
            raise CliError(str(exc)) from exc
    if getattr(args, "input", None):
        try:
            return rmatrix.load_rmatrix(args.input), [args.input]
        except (OSError, ValueError, json.JSONDecodeError) as exc:
            raise CliError(f"cannot read R-matrix: {exc}") from exc
    raise CliError("provide --builtin or --input")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    return obj


def _emit(args, payload: dict, rows=None) -> None:
    """Write the report as JSON (default) or CSV rows."""
    fmt = getattr(args, "format", "json") or "json"
    out = getattr(args, "out", None)
    if fmt == "csv" and rows:
        target = open(out, "w", newline="") if out else sys.stdout
        try:
            writer = csv.DictWriter(target, fieldnames=list(rows[0].keys()))
            writer.writeheader()
            writer.writerows(rows)
        finally:
            if out:
                target.close()
    else:
        text = json.dumps(_jsonable(payload), indent=1, sort_keys=True)
        if out:
            with open(out, "w") as fh:
                fh.write(text + "\n")
        else:
            print(text)


# ---------------------------------------------------------------------------
# subcommands


def cmd_verify_r(args) -> int:
    r, inputs = _load_r(args)
    tol = args.tol
    reports = [
        rmatrix.check_yang_baxter(r, tol),
        rmatrix.check_unitary(r, tol),
        rmatrix.check_perfect_tensor(r, tol),
    ]
    factors = rmatrix.is_trivial_product(r, max(tol, 1e-10))
    nontrivial = factors is None
    payload = {
        "manifest": _manifest(args, inputs),
        "m": r.m,
        "checks": [rep.as_dict() for rep in reports],
        "nontrivial": nontrivial,
        "spectral_invariants": {
            "trace": rmatrix.spectral_invariants(r)["trace"],
            "eigenvalues": rmatrix.spectral_invariants(r)["eigenvalues"],
        },
    }
    _emit(args, payload)
    ok = all(rep.passed for rep in reports) and nontrivial
    return EXIT_OK if ok else EXIT_FAIL


def cmd_derive_r(args) -> int:
    inputs = []
    if args.presentation:
        pres = group_engine.load_presentation(args.presentation)
        inputs.append(args.presentation)
    else:
        pres = group_engine.gamma_presentation()
    G = group_engine.enumerate_group(pres, args.order_bound)
    payload = {"manifest": _manifest(args, inputs), "group_order": G.order}
    try:
        sigma, psi = group_engine.find_para_pair(G)
        inter = group_engine.solve_intertwiner(sigma, psi, seed=args.seed)
        derived = group_engine.derive_r(sigma, psi, inter)
    except group_engine.GroupError as exc:
        payload["error"] = str(exc)
        _emit(args, payload)
        return EXIT_FAIL
    ref = rmatrix.paper_r(+1)
    inv_d = rmatrix.spectral_invariants(derived)
    same_m = derived.m == ref.m
    inv_match = same_m and rmatrix.invariants_close(inv_d, rmatrix.spectral_invariants(ref))
    q = group_engine.gauge_match(derived, ref) if same_m else None
    payload.update({
        "d_sigma": sigma.dim,
        "d_psi": psi.dim,
        "derived_supplementary": pres.derived_supplementary,
        "checks": [
            rmatrix.check_yang_baxter(derived, args.tol).as_dict(),
            rmatrix.check_unitary(derived, args.tol).as_dict(),
            rmatrix.check_perfect_tensor(derived, args.tol).as_dict(),
        ],
        "invariants": {"trace": inv_d["trace"], "eigenvalues": inv_d["eigenvalues"]},
        "invariants_match_builtin": bool(inv_match),
        "gauge_match_found": q is not None,
    })
    if args.out_r:
        rmatrix.save_rmatrix(derived, args.out_r)
    _emit(args, payload)
    return EXIT_OK if inv_match else EXIT_FAIL


def cmd_simulate(args) -> int:
    r, inputs = _load_r(args)
    base = game.GameConfig(L=args.L, r=r, a=1, b=1, seed=args.seed, r0=args.r0)
    payload = {"manifest": _manifest(args, inputs)}
    if args.all_pairs:
        table, _ = game.run_all_pairs(base)
        wins = sum(table.values())
        payload.update({
            "mode": "all-pairs",
            "wins": wins,
            "pairs": len(table),
            "table": {f"{a},{b}": v for (a, b), v in table.items()},
        })
        _emit(args, payload)
        return EXIT_OK if wins == len(table) else EXIT_FAIL
    cfg = replace(base, a=args.a, b=args.b)
    transcript, report = game.run_protocol(cfg)
    payload.update({
        "transcript": transcript.as_dict(),
        "report": report.as_dict(),
    })
    _emit(args, payload)
    return EXIT_OK if report.success else EXIT_FAIL


def cmd_twist(args) -> int:
    r, inputs = _load_r(args)
    result = game.twist_experiment(
        r, range(args.n_max + 1), args.trials, args.seed, workers=_workers()
    )
    payload = {
        "manifest": _manifest(args, inputs),
        "success_rate": result["success_rate"],
        "rho_b_n_deviation": result["rho_b_n_deviation"],
        "n_support": result["n_support"],
    }
    _emit(args, payload)
    return EXIT_OK


def cmd_noise_sweep(args) -> int:
    r, inputs = _load_r(args)
    cfg = game.GameConfig(
        L=args.L, r=r, a=1, b=1, seed=args.seed,
        noise_p=args.p, noise_d=args.noise_d, noise_l=args.noise_l,
    )
    curve = game.noise_experiment(cfg, args.trials, args.seed, workers=_workers())
    payload = {"manifest": _manifest(args, inputs), "curve": curve}
    rows = [{"distance": pt["distance"], "success_rate": pt["success_rate"]}
            for pt in curve]
    _emit(args, payload, rows=rows)
    return EXIT_OK


def cmd_gauge_check(args) -> int:
    if args.group not in group_engine.NAMED_PRESENTATIONS:
        raise CliError(f"unknown group {args.group!r}")
    if args.patch != "2x2":
        raise CliError("only the 2x2 patch is shipped")
    G = group_engine.enumerate_group(group_engine.NAMED_PRESENTATIONS[args.group]())
    lat = gauge_sim.patch_2x2()
    residuals = gauge_sim.commutator_residuals(G, lat, seed=args.seed)
    g0 = gauge_sim.ground_state(G, lat)
    va = gauge_sim.vertex_expectations(g0)
    pa = gauge_sim.plaquette_expectations(g0)
    reps = group_engine.irreps(G)
    # most structured nontrivial irrep: largest dimension, then least trivial
    psi = max(reps, key=lambda rep: (rep.dim, float(np.sum(np.abs(rep.character - 1)))))
    line = gauge_sim.WilsonLine(psi, ((0, +1), (3, +1)))  # v0 -> v1 -> v3
    excited = gauge_sim.apply_wilson_line(g0, line, 0, 0)
    vexc = gauge_sim.vertex_expectations(excited)
    deform = gauge_sim.verify_deformation(
        g0, line, gauge_sim.WilsonLine(psi, ((2, +1), (1, +1))), 0, 0
    )
    ground_ok = (max(abs(x - 1.0) for x in va + pa) <= 1e-10)
    endpoints_ok = (
        vexc[0] < 1 - 1e-6 and vexc[3] < 1 - 1e-6
        and abs(vexc[1] - 1.0) <= 1e-10 and abs(vexc[2] - 1.0) <= 1e-10
    )
    ok = (
        residuals["idempotence"] <= 1e-10
        and residuals["commutation"] <= 1e-10
        and ground_ok
        and endpoints_ok
        and deform <= 1e-10
    )
    payload = {
        "manifest": _manifest(args),
        "group": args.group,
        "group_order": G.order,
        "projector_residuals": residuals,
        "ground_state_expectations": {"vertices": va, "plaquettes": pa},
        "wilson_endpoint_expectations": vexc,
        "deformation_deviation": deform,
        "passed": bool(ok),
    }
    _emit(args, payload)
    return EXIT_OK if ok else EXIT_FAIL


# ---------------------------------------------------------------------------
# argument parsing


def _add_r_source(p):
    p.add_argument("--builtin", help="paper2d, paper3d, trivial{m}, or braid-fixture")
    p.add_argument("--input", help="R-matrix JSON file")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="parastat")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--tol", type=float, default=rmatrix.DEFAULT_TOL)
    ap.add_argument("--out", help="write the report here instead of stdout")
    ap.add_argument("--format", choices=("json", "csv"), default="json")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify-r", help="run all algebraic checks on an R-matrix")
    _add_r_source(p)
    p.set_defaults(func=cmd_verify_r)

    p = sub.add_parser("derive-r", help="derive an R-matrix from a group presentation")
    p.add_argument("--presentation", help="presentation JSON (default: bundled order-128 group)")
    p.add_argument("--order-bound", type=int, default=2048)
    p.add_argument("--out-r", help="write the derived R-matrix here")
    p.set_defaults(func=cmd_derive_r)

    p = sub.add_parser("simulate", help="run the challenge game")
    _add_r_source(p)
    p.add_argument("--a", type=int, default=1)
    p.add_argument("--b", type=int, default=1)
    p.add_argument("--L", type=int, default=20)
    p.add_argument("--r0", type=int, default=3)
    p.add_argument("--all-pairs", action="store_true")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("twist", help="repeated-exchange experiment")
    _add_r_source(p)
    p.add_argument("--n-max", type=int, default=7)
    p.add_argument("--trials", type=int, default=10000)
    p.set_defaults(func=cmd_twist)

    p = sub.add_parser("noise-sweep", help="decode success vs corner standoff")
    _add_r_source(p)
    p.add_argument("--p", type=float, default=0.2)
    p.add_argument("--trials", type=int, default=2000)
    p.add_argument("--L", type=int, default=20)
    p.add_argument("--noise-d", type=int, default=1)
    p.add_argument("--noise-l", type=int, default=2)
    p.set_defaults(func=cmd_noise_sweep)

    p = sub.add_parser("gauge-check", help="lattice-gauge validation suite")
    p.add_argument("--group", default="S3", help="Z2, S3, or D4")
    p.add_argument("--patch", default="2x2")
    p.set_defaults(func=cmd_gauge_check)

    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (game.GameError, group_engine.GroupError, gauge_sim.GaugeError,
            parafock.FockError, rmatrix.RMatrixError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
