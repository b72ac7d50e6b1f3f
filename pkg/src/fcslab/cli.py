"""Command-line entry point: ``fcslab <command> [options]``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import models, su2, symmetry
from .errors import FCSError
from .io import dumps, load_system
from .modular import algebra_closure, dual_system, modular_data
from .popescu import chain_state, normalization_residual
from .report import DEFAULT_WINDOW, GROUND_WINDOW, DiagnoseOptions, diagnose


def _add_common(p: argparse.ArgumentParser, suppress: bool) -> None:
    # registered on the main parser and on every subcommand, so the flags work on either side
    def default(value):
        return argparse.SUPPRESS if suppress else value

    p.add_argument("--tol", type=float, default=default(1e-10), help="verdict tolerance (default 1e-10)")
    p.add_argument("--window", type=int, default=default(None), help="window length L (default 5; gscheck: 2)")
    p.add_argument("--seed", type=int, default=default(0), help="seed for sampled group elements")
    p.add_argument("--report", type=Path, default=default(None), help="write the JSON report here")
    p.add_argument("--cap", type=int, default=default(100_000), help="resource cap on window and word sizes")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fcslab", description="Diagnostics for finitely correlated chain states.")
    _add_common(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    def command(name: str, help_text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text)
        _add_common(p, suppress=True)
        return p

    p = command("validate", "parse a system file and check normalization")
    p.add_argument("file", type=Path)

    p = command("diagnose", "run the full diagnostic pipeline")
    p.add_argument("file", type=Path)
    p.add_argument("--group", choices=["su2", "u1"], help="override the file's symmetry group")
    p.add_argument("--spin", help="spin of the SU(2) representation, e.g. 1 or 3/2")
    p.add_argument("--model", action="append", help="model for energy checks (repeatable), e.g. aklt:1")

    p = command("dual", "modular data and the dual Kraus family")
    p.add_argument("file", type=Path)

    p = command("symmetry", "reflection, reality and detailed balance")
    p.add_argument("file", type=Path)

    p = command("covariance", "gauge covariance under SU(2) or U(1)")
    p.add_argument("file", type=Path)
    p.add_argument("--group", choices=["su2", "u1"], required=True)
    p.add_argument("--spin")
    p.add_argument("--charges", type=float, nargs="+", help="U(1) charges, one per site state")
    p.add_argument("--samples", type=int, default=4, help="random group elements beyond the fixed panel")

    p = command("su2", "SU(2) representation tools")
    p.add_argument("action", choices=["fs", "realform", "cg"])
    p.add_argument("spins", nargs="+", help="one spin (fs, realform) or two (cg)")
    p.add_argument("--order", type=int, default=su2.FS_DEFAULT_ORDER, help="quadrature order for fs")

    p = command("ed", "exact diagonalization of a finite chain")
    p.add_argument("--model", required=True)
    p.add_argument("--sites", type=int, required=True)
    p.add_argument("--boundary", choices=["periodic", "open"], default="periodic")

    p = command("gscheck", "energy density and the ground-state inequality")
    p.add_argument("file", type=Path)
    p.add_argument("--model", required=True)
    return parser


def _group_choice(args) -> dict | None:
    if getattr(args, "group", None) is None:
        return None
    choice: dict = {"group": args.group}
    if args.spin is not None:
        choice["spin"] = args.spin
    if getattr(args, "charges", None):
        choice["charges"] = args.charges
    return choice


def _cmd_validate(args) -> dict:
    sf = load_system(args.file, args.tol)
    st = chain_state(sf.system, args.tol)
    return {
        "d": sf.system.d, "k": sf.system.k, "hash": sf.digest(),
        "normalization_residual": normalization_residual(sf.system.kraus),
        "stationary": {"rho": st.rho, "residual": st.stationary.residual, "faithful": st.stationary.faithful,
                       "unique": st.stationary.unique, "compressed": st.compressed},
        "tol": args.tol,
    }


def _cmd_diagnose(args) -> dict:
    sf = load_system(args.file, args.tol)
    opt = DiagnoseOptions(tol=args.tol, window=args.window or DEFAULT_WINDOW, seed=args.seed, cap=args.cap,
                          group=_group_choice(args), models=args.model)
    return diagnose(sf, opt)


def _cmd_dual(args) -> dict:
    sf = load_system(args.file, args.tol)
    st = chain_state(sf.system, args.tol)
    alg = algebra_closure(st.system)
    md = modular_data(st, alg)
    ds = dual_system(md, st.system, cap=args.cap, algebra=alg)
    return {"gns_dim": md.gns_dim, "algebra_dim": alg.dim, "tomita_residual": md.tomita_residual(alg),
            "j_residuals": md.j_residuals(), "dual_kraus": ds.dual_kraus, "residuals": ds.residuals, "tol": args.tol}


def _cmd_symmetry(args) -> dict:
    sf = load_system(args.file, args.tol)
    st = chain_state(sf.system, args.tol)
    L = args.window or DEFAULT_WINDOW
    refl = symmetry.reflection_check(st, L, args.tol, args.cap)
    real = symmetry.reality_check(st, L, args.tol, args.cap)
    out = {"lattice_symmetric": {"holds": refl.holds, "residual": refl.residual},
           "real": {"holds": real.holds, "residual": real.residual}, "window": L, "tol": args.tol}
    if refl.holds and real.holds:
        cert = symmetry.detailed_balance_certificate(st, L=L, tol=args.tol, reflection=refl, reality=real, cap=args.cap)
        out["detailed_balance"] = {"holds": cert.detailed_balance, "u_twist": cert.u_twist,
                                   "w_twist": cert.w_twist, "residuals": cert.residuals, "note": cert.note}
    else:
        out["detailed_balance"] = {"holds": False, "note": "state is not lattice-symmetric and real"}
    return out


def _cmd_covariance(args) -> dict:
    sf = load_system(args.file, args.tol)
    st = chain_state(sf.system, args.tol)
    choice = _group_choice(args)
    if choice["group"] == "su2":
        rep = symmetry.su2_rep(choice.get("spin", su2.parse_spin(f"{st.d - 1}/2")))
    else:
        rep = symmetry.u1_rep(st.d, choice.get("charges"))
    cov = symmetry.gauge_covariance(st, rep, args.samples, args.tol, np.random.default_rng(args.seed), args.cap)
    return {"rep": cov.rep_label, "invariant": cov.invariant, "invariance_residual": cov.invariance_residual,
            "covariant": cov.covariant, "zeta_trivial": cov.zeta_trivial, "max_residual": cov.max_residual,
            "multiplicativity_residual": cov.multiplicativity_residual,
            "samples": [{"theta": r.theta, "zeta": r.zeta, "residual": r.residual} for r in cov.results],
            "failures": cov.failures, "tol": cov.tol}


def _cmd_su2(args) -> dict:
    if args.action == "cg":
        if len(args.spins) != 2:
            raise SystemExit("su2 cg needs two spins")
        res = su2.clebsch_gordan(args.spins[0], args.spins[1])
        return {"spins": [str(s) for s in res.spins], "residual": res.residual}
    s = su2.parse_spin(args.spins[0])
    if args.action == "fs":
        res = su2.frobenius_schur(s, args.order)
        return {"spin": str(s), "indicator": res.indicator, "value": res.value, "deviation": res.deviation,
                "order": res.order}
    rep = su2.rep_build(s)
    res = su2.real_form_search(rep.generators)
    return {"spin": str(s), "exists": res.exists, "c_symmetry": res.c_symmetry, "max_imag": res.max_imag,
            "cc_residual": res.cc_residual}


def _cmd_ed(args) -> dict:
    h = models.model_from_label(args.model)
    res = models.ed_ground(h, args.sites, args.boundary, seed=args.seed)
    return {"model": args.model, "sites": res.N, "boundary": res.boundary, "ground_energy": res.ground_energy,
            "energy_density": res.energy_density, "degeneracy": res.degeneracy,
            "lowest": res.eigenvalues, "method": res.method}


def _cmd_gscheck(args) -> dict:
    sf = load_system(args.file, args.tol)
    st = chain_state(sf.system, args.tol)
    h = models.model_from_label(args.model)
    m = args.window or GROUND_WINDOW
    g = models.ground_inequality(st, h, m, models.GROUND_TOL, args.cap)
    e = models.energy_density(st, h, args.cap)
    return {"model": args.model, "energy_density": e, "h0_min_eig": float(np.linalg.eigvalsh(h.h0)[0]),
            "passes": g.passes, "min_eig": g.min_eig, "antihermitian_residual": g.antihermitian_residual,
            "window": m, "tol": g.tol}


COMMANDS = {
    "validate": _cmd_validate, "diagnose": _cmd_diagnose, "dual": _cmd_dual, "symmetry": _cmd_symmetry,
    "covariance": _cmd_covariance, "su2": _cmd_su2, "ed": _cmd_ed, "gscheck": _cmd_gscheck,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        out = COMMANDS[args.command](args)
    except FCSError as exc:
        print(f"fcslab {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    code = int(out.get("exit_code", 0)) if args.command == "diagnose" else 0
    text = dumps(out)
    if args.report is not None:
        args.report.write_text(text + "\n")
        if args.command == "diagnose":
            print(dumps(out["summary"]))
        else:
            print(f"report written to {args.report}")
    else:
        print(text)
    for err in out.get("errors", []):
        print(f"stage {err['stage']}: {err['type']}: {err['message']}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
