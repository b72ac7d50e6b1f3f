"""Lattice reflection, reality, detailed balance and gauge covariance of chain states."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Literal, Sequence

import numpy as np
from scipy.linalg import expm, logm, polar

from . import opcore, su2
from .errors import NoIntertwiner, NotCovariant, PreconditionError
from .modular import AlgebraBasis, DualSystem, ModularData, algebra_closure, dual_system, modular_data
from .popescu import ChainState, chain_state, validate_system, window_density
from .zoo import random_system

SYM_TOL = 1e-10
COV_TOL = 1e-10
COUNTEREXAMPLE_THRESHOLD = 1e-3
MAX_RETRIES = 100


@dataclass(frozen=True)
class WindowCheck:
    holds: bool
    residual: float
    window: int
    tol: float


def reflection_check(state: ChainState, L: int, tol: float = SYM_TOL, cap: int | None = None) -> WindowCheck:
    """ω(Q) against ω(Q̃) for every window matrix unit, Q̃ the site-reversed unit."""
    worst = 0.0
    for n in range(1, L + 1):
        rho = window_density(state, n, cap)
        perm = opcore.site_reversal_permutation(state.d, n)
        worst = max(worst, float(np.abs(rho - perm @ rho @ perm.T).max()))
    return WindowCheck(worst < tol, worst, L, tol)


def reality_check(state: ChainState, L: int, tol: float = SYM_TOL, cap: int | None = None) -> WindowCheck:
    """ω(e^I_J) against ω(e^J_I), i.e. every window density against its transpose."""
    worst = 0.0
    for n in range(1, L + 1):
        rho = window_density(state, n, cap)
        worst = max(worst, float(np.abs(rho - rho.T).max()))
    return WindowCheck(worst < tol, worst, L, tol)


def asymmetric_counterexample(
    rng: np.random.Generator,
    k: int = 3,
    d: int = 2,
    L: int = 3,
    threshold: float = COUNTEREXAMPLE_THRESHOLD,
) -> tuple[ChainState, WindowCheck]:
    """Random stationary system whose reflection residual exceeds threshold.

    The first letter gets an extra nilpotent a·e_12 before renormalization;
    draws are retried at most 100 times. (Random k = 2, d = 2 systems turn
    out reflection symmetric, hence the default k = 3.)
    """
    nil = np.zeros((k, k), dtype=complex)
    nil[0, 1] = 1.0
    for _ in range(MAX_RETRIES):
        base = random_system(rng, k, d).kraus.copy()
        base[0] = base[0] + 0.8 * nil
        # renormalize on the left: A^{-1/2} v_i with A = Σ v v^*
        a = np.einsum("iab,icb->ac", base, base.conj())
        inv_sqrt = opcore.psd_power(a, -0.5)
        kraus = np.array([inv_sqrt @ v for v in base])
        state = chain_state(validate_system(kraus))
        check = reflection_check(state, L)
        if check.residual > threshold:
            return state, check
    raise RuntimeError(f"no asymmetric system found in {MAX_RETRIES} draws")


# ---------------------------------------------------------------------------
# detailed balance


@dataclass(frozen=True)
class Intertwiner:
    unitary: np.ndarray
    twist: complex  # z with U A_k U^* = z B_k
    residuals: dict[str, float]


def _intertwiner(
    md: ModularData,
    source: np.ndarray,
    target: np.ndarray,
    tol: float,
) -> Intertwiner:
    """Unitary U with U A_k U^* = z B_k for a unimodular z and UΩ = Ω.

    From U A_k = z B_k U and Σ A_k A_k^* = 1, U is an eigenvector of
    E(X) = Σ B_k X A_k^* with eigenvalue z̄, so only the peripheral eigenvalues
    of E need to be tried.
    """
    n = md.gns_dim
    emap = opcore.kraus_map_matrix(target, source)
    ev = np.linalg.eigvals(emap)
    candidates = []
    for mu in ev[np.abs(np.abs(ev) - 1) < 1e-8]:
        z = np.conj(mu) / abs(mu)
        if not any(abs(z - c) < 1e-6 for c in candidates):
            candidates.append(z)
    # prefer z = 1, then by angle
    candidates.sort(key=lambda z: abs(np.angle(z)))
    eye = np.eye(n)
    best: Intertwiner | None = None
    for z in candidates:
        rows = [opcore.sandwich_matrix(eye, a) - z * opcore.sandwich_matrix(b, eye) for a, b in zip(source, target)]
        sol = opcore.kernel(np.vstack(rows), 1e-8)
        if sol.shape[1] == 0:
            continue
        # impose UΩ = Ω inside the solution space
        images = np.array([opcore.unvectorize(col, n) @ md.Omega for col in sol.T]).T
        coeff, *_ = np.linalg.lstsq(images, md.Omega, rcond=None)
        u = opcore.unvectorize(sol @ coeff, n)
        res = {
            "unitarity": float(np.linalg.norm(u @ u.conj().T - eye, 2)),
            "vacuum": float(np.linalg.norm(u @ md.Omega - md.Omega)),
            "intertwining": float(max(np.linalg.norm(u @ a @ u.conj().T - z * b, 2) for a, b in zip(source, target))),
        }
        cand = Intertwiner(u, complex(z), res)
        if best is None or max(res.values()) < max(best.residuals.values()):
            best = cand
        if max(res.values()) < tol:
            break
    if best is None or best.residuals["unitarity"] > 1e-6:
        raise NoIntertwiner("the intertwiner equations admit no unitary solution")
    return best


def _modular_relations(md: ModularData, u: np.ndarray) -> dict[str, float]:
    n = md.gns_dim
    half = md.delta_power(0.5)
    return {
        "self_adjoint": float(np.linalg.norm(u - u.conj().T, 2)),
        # U J = J U with J antilinear: U J_lin = J_lin conj(U)
        "commutes_J": float(np.linalg.norm(u @ md.J - md.J @ np.conj(u), 2)),
        "inverts_Delta": float(np.linalg.norm(u @ half @ u.conj().T - md.delta_power(-0.5), 2)),
        "square": float(np.linalg.norm(u @ u - np.eye(n), 2)),
    }


@dataclass(frozen=True)
class SymmetryCertificate:
    lattice_symmetric: WindowCheck
    real: WindowCheck
    detailed_balance: bool
    u: np.ndarray | None
    w: np.ndarray | None
    u_twist: complex | None
    w_twist: complex | None
    residuals: dict[str, float]
    note: str = ""

    @property
    def window(self) -> int:
        return self.lattice_symmetric.window


def detailed_balance_certificate(
    state: ChainState,
    md: ModularData | None = None,
    dual: DualSystem | None = None,
    L: int = 5,
    tol: float = SYM_TOL,
    reflection: WindowCheck | None = None,
    reality: WindowCheck | None = None,
    algebra: AlgebraBasis | None = None,
    cap: int | None = None,
) -> SymmetryCertificate:
    """Unitaries u, w on the GNS space relating π(v_k) to ṽ_k and to J π(v_k) J.

    In the finite GNS picture the relations close only up to a unimodular twist
    z (u π(v_k) u^* = z ṽ_k, z = -1 for the spin-1 valence-bond state), so z is
    solved for and reported. u and w are normalized by uΩ = wΩ = Ω and checked for u^* = u,
    uJ = Ju, uΔ^{1/2}u^* = Δ^{-1/2}, together with ||π(v_k) - J ṽ_k J||.
    """
    reflection = reflection if reflection is not None else reflection_check(state, L, tol, cap)
    reality = reality if reality is not None else reality_check(state, L, tol, cap)
    if not (reflection.holds and reality.holds):
        raise PreconditionError(
            f"detailed balance needs a lattice-symmetric real state "
            f"(reflection residual {reflection.residual:.2e}, reality residual {reality.residual:.2e})"
        )
    algebra = algebra if algebra is not None else algebra_closure(state.system)
    md = md if md is not None else modular_data(state, algebra)
    dual = dual if dual is not None else dual_system(md, state.system, algebra=algebra)
    pis = dual.pi_kraus
    residuals: dict[str, float] = {}
    try:
        iu = _intertwiner(md, pis, dual.dual_kraus, tol)
        jpis = np.array([md.apply_J(p) for p in pis])
        iw = _intertwiner(md, pis, jpis, tol)
    except NoIntertwiner as exc:
        return SymmetryCertificate(reflection, reality, False, None, None, None, None, residuals, str(exc))
    for tag, it in (("u", iu), ("w", iw)):
        for key, val in it.residuals.items():
            residuals[f"{tag}_{key}"] = val
        for key, val in _modular_relations(md, it.unitary).items():
            residuals[f"{tag}_{key}"] = val
    residuals["pi_vs_J_dual_J"] = float(
        max(np.linalg.norm(p - md.apply_J(t), 2) for p, t in zip(pis, dual.dual_kraus))
    )
    ok = all(v < max(tol, 1e-9) for v in residuals.values())
    return SymmetryCertificate(reflection, reality, ok, iu.unitary, iw.unitary, iu.twist, iw.twist, residuals)


# ---------------------------------------------------------------------------
# gauge covariance


@dataclass(frozen=True)
class GroupRep:
    """Unitary representation θ -> exp(-i θ·S) with a faithful small model for composition."""

    group: Literal["su2", "u1"]
    generators: np.ndarray  # (m, d, d)
    fundamental: np.ndarray  # (m, f, f)
    label: str = ""

    @property
    def d(self) -> int:
        return self.generators.shape[1]

    @property
    def n_params(self) -> int:
        return self.generators.shape[0]

    def element(self, theta: Sequence[float]) -> np.ndarray:
        return expm(-1j * np.einsum("a,aij->ij", np.asarray(theta, dtype=float), self.generators))

    def compose(self, theta1: Sequence[float], theta2: Sequence[float]) -> np.ndarray:
        """θ with g(θ) = g(θ1) g(θ2), computed in the fundamental model."""
        f = self.fundamental
        g = expm(-1j * np.einsum("a,aij->ij", np.asarray(theta1, float), f)) @ expm(
            -1j * np.einsum("a,aij->ij", np.asarray(theta2, float), f)
        )
        log = logm(g)  # = -i θ·F
        # generators are trace-orthogonal: Tr(F_a F_b) = c δ_ab
        norms = np.einsum("aij,aji->a", f, f).real
        return np.real(1j * np.einsum("aij,ji->a", f, log) / norms)


def su2_rep(s: float | Fraction | str, basis: su2.Basis | None = None) -> GroupRep:
    basis = basis if basis is not None else su2.default_basis(s)
    rep = su2.rep_build(s, basis)
    return GroupRep("su2", rep.generators, su2.spin_operators(Fraction(1, 2)), f"su2 spin {rep.s} ({basis})")


def u1_rep(d: int, charges: Sequence[float] | None = None) -> GroupRep:
    """diag(e^{-iθ q_i}); default charges d-1-2i, i.e. diag(z^{d-1}, ..., z^{1-d}) with z = e^{-iθ}."""
    q = np.asarray(charges if charges is not None else [d - 1 - 2 * i for i in range(d)], dtype=float)
    return GroupRep("u1", np.diag(q).astype(complex)[None], np.ones((1, 1, 1), dtype=complex), f"u1 charges {q.tolist()}")


def group_samples(rep: GroupRep, rng: np.random.Generator, n_random: int) -> np.ndarray:
    """Deterministic panel (each generator at π/2 and π) followed by random draws."""
    m = rep.n_params
    panel = [angle * np.eye(m)[a] for a in range(m) for angle in (np.pi / 2, np.pi)]
    panel.append(np.zeros(m))
    out = np.array(panel)
    if n_random:
        out = np.vstack([out, rng.normal(scale=1.5, size=(n_random, m))])
    return out


@dataclass(frozen=True)
class CovarianceResult:
    theta: np.ndarray
    u: np.ndarray  # unitary on the bond space
    zeta: complex
    residual: float


def covariance_at(state: ChainState, V: np.ndarray, tol: float = COV_TOL) -> CovarianceResult:
    """Solve u v_j u^* = ζ Σ_i v_i V_ij.

    With v'_j = Σ_i v_i V_ij the twisted map T(x) = Σ_j v'_j x v_j^* has
    T(u) = ζ̄ u, so ζ is the conjugate of a unimodular eigenvalue whose
    eigenvector is invertible; u is its unitary polar factor, phase fixed by
    Tr(ρ u) > 0 (equivalently <Ω, uΩ> > 0).
    """
    v = state.system.kraus
    k = state.system.k
    vprime = np.einsum("iab,ij->jab", v, V)
    tmat = opcore.kraus_map_matrix(vprime, v)
    ev, vecs = np.linalg.eig(tmat)
    order = np.argsort(np.abs(np.angle(ev)))
    best = None
    for idx in order:
        lam = ev[idx]
        if abs(abs(lam) - 1) > 1e-8:
            continue
        x = opcore.unvectorize(vecs[:, idx], k)
        sv = np.linalg.svd(x, compute_uv=False)
        if sv[-1] < 1e-8 * sv[0]:
            continue
        u, _ = polar(x)
        tr = np.trace(state.rho @ u)
        if abs(tr) > 1e-12:
            u = u * (abs(tr) / tr)
        zeta = complex(np.conj(lam) / abs(lam))
        resid = float(max(np.linalg.norm(u @ v[j] @ u.conj().T - zeta * vprime[j], 2) for j in range(len(v))))
        cand = CovarianceResult(np.zeros(0), u, zeta, resid)
        if best is None or resid < best.residual:
            best = cand
        if resid < tol:
            break
    if best is None:
        raise NotCovariant("no unimodular eigenvalue of the twisted transfer map has an invertible eigenvector")
    return best


@dataclass(frozen=True)
class CovarianceReport:
    rep_label: str
    results: list[CovarianceResult]
    invariance_residual: float
    invariant: bool
    covariant: bool
    multiplicativity_residual: float
    zeta_trivial: bool
    tol: float
    failures: list[str] = field(default_factory=list)

    @property
    def max_residual(self) -> float:
        return max((r.residual for r in self.results), default=float("nan"))


def invariance_residual(state: ChainState, rep: GroupRep, samples: np.ndarray, n_max: int = 3, cap: int | None = None) -> float:
    """max ||V^{⊗n*} ρ_n V^{⊗n} - ρ_n|| over samples and windows n ≤ n_max."""
    worst = 0.0
    dens = [window_density(state, n, cap) for n in range(1, n_max + 1)]
    for theta in samples:
        V = rep.element(theta)
        for n, rho in enumerate(dens, start=1):
            big = opcore.nkron([V] * n)
            worst = max(worst, float(np.abs(big.conj().T @ rho @ big - rho).max()))
    return worst


def gauge_covariance(
    state: ChainState,
    rep: GroupRep,
    samples: int = 4,
    tol: float = COV_TOL,
    rng: np.random.Generator | None = None,
    cap: int | None = None,
) -> CovarianceReport:
    """Invariance ω∘γ_g = ω and covariance u_g v_j u_g^* = ζ_g Σ_i v_i v(g)_ij on a panel of g."""
    if rep.d != state.d:
        raise ValueError(f"representation dimension {rep.d} differs from d = {state.d}")
    rng = rng if rng is not None else np.random.default_rng(0)
    thetas = group_samples(rep, rng, samples)
    inv = invariance_residual(state, rep, thetas, cap=cap)
    results: list[CovarianceResult] = []
    failures: list[str] = []
    for theta in thetas:
        try:
            r = covariance_at(state, rep.element(theta), tol)
            results.append(CovarianceResult(np.asarray(theta), r.u, r.zeta, r.residual))
        except NotCovariant as exc:
            failures.append(f"theta={np.round(theta, 6).tolist()}: {exc}")
    mult = 0.0
    if not failures:
        # ζ(g1 g2) = ζ(g1) ζ(g2) on consecutive sample pairs
        for r1, r2 in zip(results, results[1:]):
            theta12 = rep.compose(r1.theta, r2.theta)
            z12 = covariance_at(state, rep.element(theta12), tol).zeta
            mult = max(mult, abs(z12 - r1.zeta * r2.zeta))
    covariant = not failures and all(r.residual < tol for r in results)
    trivial = covariant and all(abs(r.zeta - 1) < 1e-8 for r in results)
    return CovarianceReport(rep.label, results, inv, inv < max(tol, 1e-10), covariant, mult, trivial, tol, failures)


def effective_generators(state: ChainState, rep: GroupRep, step: float = 1e-4) -> np.ndarray:
    """Generators of g -> ζ(g) v(g): S_a + c_a·1 with c_a = i d/dt log ζ(t e_a) at t = 0."""
    gens = []
    for a in range(rep.n_params):
        e = np.eye(rep.n_params)[a]
        zp = covariance_at(state, rep.element(step * e)).zeta
        zm = covariance_at(state, rep.element(-step * e)).zeta
        c = -np.angle(zp / zm) / (2 * step)
        gens.append(rep.generators[a] + c * np.eye(rep.d))
    return np.array(gens)


def kraus_gram(state: ChainState) -> np.ndarray:
    """G_ij = φ0(v_i^* v_j); full rank d means the v_k are linearly independent."""
    v = state.system.kraus
    # Tr(ρ v_i^* v_j) = Σ ρ_ab conj(v_i)_cb (v_j)_ca
    return np.einsum("ab,icb,jca->ij", state.rho, v.conj(), v)


def linearly_independent(state: ChainState, tol: float = 1e-10) -> bool:
    w = np.linalg.eigvalsh(opcore.hermitian_part(kraus_gram(state)))
    return bool(w[0] > tol * max(1.0, w[-1]))


def effective_real_form(state: ChainState, rep: GroupRep, tol: float = 1e-8) -> su2.RealFormResult:
    """Delegate the real-form question for ζ(g) v(g) to the generator-level search."""
    return su2.real_form_search(effective_generators(state, rep), tol)
