"""The diagnostic pipeline and the report it produces.

Each stage runs in isolation: a failure marks that stage unavailable, records
the error class and exit code, and later stages that need its output are
marked unavailable in turn. Timings and the source path live under "run" so
that two reports of the same system and seed compare equal once "run" is
dropped.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from . import models, spectra, su2, symmetry
from .errors import FCSError, PreconditionError
from .io import SCHEMA_VERSION, SystemFile
from .modular import algebra_closure, dual_system, fast_path_crosscheck, modular_data
from .popescu import chain_state, normalization_residual

DUAL_TOL = 1e-9
DEFAULT_WINDOW = 5
GROUND_WINDOW = 2


@dataclass
class DiagnoseOptions:
    tol: float = 1e-10
    window: int = DEFAULT_WINDOW
    seed: int = 0
    cap: int | None = 100_000
    group: dict | None = None  # overrides the file's "symmetry" entry
    models: list[str] | None = None  # overrides the file's "models" entry
    ground_window: int = GROUND_WINDOW
    samples: int = 4


class _Unavailable(Exception):
    """A prerequisite stage failed."""


@dataclass
class _Pipeline:
    stages: dict[str, dict] = field(default_factory=dict)
    timings: dict[str, float] = field(default_factory=dict)
    errors: list[dict] = field(default_factory=list)
    values: dict[str, Any] = field(default_factory=dict)

    def run(self, name: str, fn: Callable[[], dict], needs: tuple[str, ...] = ()) -> None:
        start = time.perf_counter()
        try:
            missing = [n for n in needs if n not in self.values]
            if missing:
                raise _Unavailable(f"needs {', '.join(missing)}")
            self.stages[name] = {"status": "ok", **fn()}
        except _Unavailable as exc:
            self.stages[name] = {"status": "unavailable", "reason": str(exc)}
        except FCSError as exc:
            err = {"stage": name, "type": type(exc).__name__, "message": str(exc), "exit_code": exc.exit_code}
            self.errors.append(err)
            self.stages[name] = {"status": "error", "error": err}
        self.timings[name] = time.perf_counter() - start

    def get(self, key: str) -> Any:
        if key not in self.values:
            raise _Unavailable(f"needs {key}")
        return self.values[key]


def _group_rep(group: dict, d: int) -> symmetry.GroupRep:
    if group.get("group") == "su2":
        spin = group.get("spin", su2.parse_spin(f"{d - 1}/2"))
        rep = symmetry.su2_rep(spin, group.get("basis"))
    else:
        rep = symmetry.u1_rep(d, group.get("charges"))
    if rep.d != d:
        raise PreconditionError(f"{rep.label} acts on dimension {rep.d}, system has d = {d}")
    return rep


def diagnose(sf: SystemFile, options: DiagnoseOptions | None = None) -> dict:
    """Run every stage on a parsed system file; returns the report as a dict."""
    opt = options or DiagnoseOptions()
    p = _Pipeline()
    system = sf.system
    group = opt.group if opt.group is not None else sf.symmetry
    model_labels = opt.models if opt.models is not None else sf.models
    norm = normalization_residual(system.kraus)

    def stationary():
        st = chain_state(system, opt.tol)
        p.values["state"] = st
        sd = st.stationary
        k = st.system.k
        return {
            "rho": sd.rho,
            "residual": sd.residual,
            "maximally_mixed_residual": float(np.abs(sd.rho - np.eye(k) / k).max()),
            "faithful": sd.faithful,
            "unique": sd.unique,
            "min_eigenvalue": sd.min_eigenvalue,
            "fixed_dim": sd.fixed_dim,
            "compressed": st.compressed,
            "k_effective": k,
            "tol": opt.tol,
        }

    def ergodicity():
        erg = spectra.ergodicity_check(p.get("state").system)
        p.values["ergodic"] = erg.ergodic
        return {"ergodic": erg.ergodic, "fixed_dim": erg.fixed_dim, "algebra_factor": erg.algebra_factor,
                "tol": spectra.KERNEL_TOL}

    def peripheral():
        per = spectra.peripheral_phases(p.get("state").system)
        p.values["factor_state"] = per.trivial
        return {"eigenvalues": per.eigenvalues, "phases": per.phases, "multiplicities": list(per.multiplicities),
                "trivial": per.trivial, "tol": spectra.PERIPHERAL_TOL}

    def gauge():
        h = spectra.detect_gauge_group(p.get("state"), opt.window, opt.tol, opt.cap)
        p.values["gauge"] = h
        return {"label": h.label(), "kind": h.kind, "order": h.order, "window": h.window,
                "witnesses": [list(w) for w in h.witnesses], "product_state": system.k == 1, "tol": opt.tol}

    def modular():
        st = p.get("state")
        alg = algebra_closure(st.system)
        md = modular_data(st, alg)
        p.values["algebra"], p.values["md"] = alg, md
        return {"algebra_dim": alg.dim, "algebra_full": alg.is_full, "gns_dim": md.gns_dim,
                "tomita_residual": md.tomita_residual(alg), "j_residuals": md.j_residuals(),
                "fast_path_crosscheck": fast_path_crosscheck(st, alg), "tol": opt.tol}

    def dual():
        st = p.get("state")
        ds = dual_system(p.get("md"), st.system, cap=opt.cap, algebra=p.get("algebra"))
        p.values["dual"] = ds
        return {"residuals": ds.residuals, "max_residual": ds.max_residual,
                "passes": ds.max_residual < DUAL_TOL, "tol": DUAL_TOL}

    def windows():
        st = p.get("state")
        refl = symmetry.reflection_check(st, opt.window, opt.tol, opt.cap)
        real = symmetry.reality_check(st, opt.window, opt.tol, opt.cap)
        p.values["reflection"], p.values["reality"] = refl, real
        return {
            "lattice_symmetric": {"holds": refl.holds, "residual": refl.residual, "window": refl.window, "tol": refl.tol},
            "real": {"holds": real.holds, "residual": real.residual, "window": real.window, "tol": real.tol},
        }

    def purity():
        refl = p.values.get("reflection")
        v = spectra.purity_check(p.get("state"), bool(refl and refl.holds), p.get("md"), p.get("dual"), p.get("algebra"))
        p.values["pure"] = v.pure
        return {"pure": v.pure, "fixed_space_dim": v.fixed_space_dim, "expected_dim": v.expected_dim,
                "kernel_matches": v.kernel_matches, "factor_state": v.factor_state,
                "containment_residual": v.containment_residual,
                "caveat_lattice_symmetry": v.caveat_lattice_symmetry, "tol": spectra.KERNEL_TOL}

    def commutant():
        c = spectra.fixed_point_commutant(p.get("state"), p.get("md"), p.get("algebra"))
        return {"holds": c.holds, "fixed_dim": c.fixed_dim, "commutant_dim": c.commutant_dim,
                "containment_residual": c.containment_residual, "tol": spectra.KERNEL_TOL}

    def detailed_balance():
        cert = symmetry.detailed_balance_certificate(
            p.get("state"), p.get("md"), p.get("dual"), opt.window, opt.tol,
            p.get("reflection"), p.get("reality"), p.get("algebra"), opt.cap,
        )
        return {"detailed_balance": cert.detailed_balance, "u_twist": cert.u_twist, "w_twist": cert.w_twist,
                "residuals": cert.residuals, "note": cert.note, "tol": max(opt.tol, 1e-9)}

    def covariance():
        st = p.get("state")
        rep = _group_rep(group, st.d)
        rng = np.random.default_rng(opt.seed)
        cov = symmetry.gauge_covariance(st, rep, opt.samples, opt.tol, rng, opt.cap)
        p.values["covariance"] = (rep, cov)
        return {
            "group": rep.group, "rep": cov.rep_label, "invariant": cov.invariant,
            "invariance_residual": cov.invariance_residual, "covariant": cov.covariant,
            "zeta_trivial": cov.zeta_trivial, "max_residual": cov.max_residual,
            "multiplicativity_residual": cov.multiplicativity_residual,
            "samples": [{"theta": r.theta, "zeta": r.zeta, "residual": r.residual} for r in cov.results],
            "failures": cov.failures, "tol": cov.tol,
        }

    def audit():
        st = p.get("state")
        if group is not None and group.get("group") == "su2":
            rep, cov = p.get("covariance")
            su2_cov = bool(cov.covariant and cov.invariant)
        else:
            rep, su2_cov = None, False
        refl, real = p.get("reflection"), p.get("reality")
        eff = None
        engaged = refl.holds and real.holds and p.get("pure") and su2_cov
        if engaged and st.d % 2 == 0:
            eff = symmetry.effective_generators(st, rep)
        res = models.obstruction_audit(models.AuditBundle(st.d, refl.holds, real.holds, p.get("pure"), su2_cov, eff))
        out = {"consistent": res.consistent, "violated_clause": res.violated_clause, "engaged": res.engaged,
               "claims": {"d": st.d, "lattice_symmetric": refl.holds, "real": real.holds,
                          "pure": p.get("pure"), "su2_irrep_covariant": su2_cov}}
        if res.localization is not None:
            out["localization"] = {"real_form_exists": res.localization.exists,
                                   "c_symmetry": res.localization.c_symmetry}
        return out

    def energies():
        st = p.get("state")
        out = []
        for label in model_labels:
            h = models.model_from_label(label)
            e = models.energy_density(st, h, opt.cap)
            hmin = float(np.linalg.eigvalsh(h.h0)[0])
            g = models.ground_inequality(st, h, opt.ground_window, models.GROUND_TOL, opt.cap)
            out.append({"model": label, "energy_density": e, "h0_min_eig": hmin, "variational_ok": e >= hmin - 1e-9,
                        "ground_inequality": {"passes": g.passes, "min_eig": g.min_eig, "window": g.window,
                                              "antihermitian_residual": g.antihermitian_residual, "tol": g.tol}})
        return {"models": out}

    p.run("stationary", stationary)
    p.run("ergodicity", ergodicity, ("state",))
    p.run("peripheral", peripheral, ("state",))
    p.run("gauge_group", gauge, ("state",))
    p.run("modular", modular, ("state",))
    p.run("dual", dual, ("md",))
    p.run("commutant", commutant, ("md",))
    p.run("symmetry_windows", windows, ("state",))
    p.run("purity", purity, ("dual",))
    p.run("detailed_balance", detailed_balance, ("dual", "reflection"))
    if group is not None:
        p.run("covariance", covariance, ("state",))
    p.run("audit", audit, ("pure", "reflection"))
    if model_labels:
        p.run("energies", energies, ("state",))

    st = p.stages
    summary = {
        "ergodic": st.get("ergodicity", {}).get("ergodic"),
        "factor_state": st.get("peripheral", {}).get("trivial"),
        "gauge_group": st.get("gauge_group", {}).get("label"),
        "pure": st.get("purity", {}).get("pure"),
        "lattice_symmetric": st.get("symmetry_windows", {}).get("lattice_symmetric", {}).get("holds"),
        "real": st.get("symmetry_windows", {}).get("real", {}).get("holds"),
        "detailed_balance": st.get("detailed_balance", {}).get("detailed_balance"),
        "covariant": st.get("covariance", {}).get("covariant"),
        "zeta_trivial": st.get("covariance", {}).get("zeta_trivial"),
        "audit_consistent": st.get("audit", {}).get("consistent"),
    }
    return {
        "schema_version": SCHEMA_VERSION,
        "system": {"d": system.d, "k": system.k, "hash": sf.digest(),
                   "normalization_residual": norm, "tol": opt.tol},
        "options": {"tol": opt.tol, "window": opt.window, "seed": opt.seed, "cap": opt.cap,
                    "group": group, "models": list(model_labels), "ground_window": opt.ground_window},
        "summary": summary,
        "stages": st,
        "errors": p.errors,
        "exit_code": p.errors[0]["exit_code"] if p.errors else 0,
        "echo": sf.echo(),
        "run": {"source": sf.source, "timings": p.timings},
    }
