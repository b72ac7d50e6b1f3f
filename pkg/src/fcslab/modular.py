"""GNS construction and Tomita-Takesaki data for (M, φ0), and the dual Popescu system.

Antilinear maps are stored as a linear matrix L acting after entrywise
conjugation, x -> L @ conj(x), in a fixed orthonormal GNS basis.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import opcore
from .errors import NotFaithful
from .popescu import ChainState, PopescuSystem

ALG_TOL = 1e-10
EIG_FLOOR = 1e-14


@dataclass(frozen=True)
class AlgebraBasis:
    basis: np.ndarray  # (dim, k, k), orthonormal in Hilbert-Schmidt inner product
    closure_residual: float

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    @property
    def k(self) -> int:
        return self.basis.shape[1]

    @property
    def is_full(self) -> bool:
        return self.dim == self.k * self.k

    def contains(self, x: np.ndarray) -> float:
        """Distance from x to the span (Hilbert-Schmidt norm)."""
        flat = self.basis.reshape(self.dim, -1)
        v = x.reshape(-1)
        coeffs = flat.conj() @ v
        return float(np.linalg.norm(v - coeffs @ flat))


def algebra_closure(system: PopescuSystem, tol: float = ALG_TOL) -> AlgebraBasis:
    """Span saturation of {1, v_k, v_k^*} under multiplication."""
    k = system.k
    gens = [np.eye(k, dtype=complex)]
    for v in system.kraus:
        gens.extend([v, v.conj().T])
    cols = opcore.orthonormalize(np.array([g.reshape(-1) for g in gens]).T, tol)
    while True:
        mats = [c.reshape(k, k) for c in cols.T]
        prods = [a @ b for a in mats for b in mats]
        stacked = np.hstack([cols, np.array([p.reshape(-1) for p in prods]).T])
        new = opcore.orthonormalize(stacked, tol)
        if new.shape[1] == cols.shape[1]:
            break
        cols = new
    basis = np.array([c.reshape(k, k) for c in cols.T])
    alg = AlgebraBasis(basis, 0.0)
    worst = max(alg.contains(a @ b) for a in basis for b in basis)
    worst = max(worst, max(alg.contains(a.conj().T) for a in basis))
    return AlgebraBasis(basis, worst)


@dataclass(frozen=True)
class ModularData:
    rho: np.ndarray
    gns_basis: np.ndarray  # (n, k, k): operators c_a with <c_a, c_b> = Tr(ρ c_a^* c_b) = δ_ab
    Omega: np.ndarray
    J: np.ndarray  # antilinear: x -> J @ conj(x)
    Delta: np.ndarray
    full_path: bool
    _powers: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def gns_dim(self) -> int:
        return self.gns_basis.shape[0]

    def pi(self, x: np.ndarray) -> np.ndarray:
        if self.full_path:
            k = x.shape[0]
            return np.kron(x, np.eye(k))
        return _gns_matrix(self.gns_basis, x, self.rho)

    def delta_power(self, p: float) -> np.ndarray:
        if p not in self._powers:
            self._powers[p] = opcore.psd_power(self.Delta, p, EIG_FLOOR)
        return self._powers[p]

    def apply_J(self, x: np.ndarray) -> np.ndarray:
        """J X J for a linear operator X (result is linear)."""
        return self.J @ np.conj(x) @ np.conj(self.J)

    def tomita_residual(self, algebra: AlgebraBasis) -> float:
        """max over basis x of ||S π(x)Ω - π(x^*)Ω|| with S = J Δ^{1/2}."""
        half = self.delta_power(0.5)
        worst = 0.0
        for x in algebra.basis:
            lhs = self.J @ np.conj(half @ self.pi(x) @ self.Omega)
            rhs = self.pi(x.conj().T) @ self.Omega
            worst = max(worst, float(np.linalg.norm(lhs - rhs)))
        return worst

    def j_residuals(self) -> dict[str, float]:
        n = self.gns_dim
        jj = self.J @ np.conj(self.J)
        jdj = self.apply_J(self.Delta)
        return {
            "J_squared": float(np.linalg.norm(jj - np.eye(n))),
            "J_Delta_J": float(np.linalg.norm(jdj - self.delta_power(-1.0))),
        }


def _gns_matrix(c: np.ndarray, x: np.ndarray, rho: np.ndarray) -> np.ndarray:
    # π(x)_{ab} = Tr(ρ c_a^* x c_b)
    left = np.einsum("aji,jk->aik", c.conj(), x)  # c_a^* x
    right = np.einsum("bkl,lm->bkm", c, rho)  # c_b ρ
    return np.einsum("aik,bki->ab", left, right)


def _check_faithful(gram: np.ndarray) -> None:
    w = np.linalg.eigvalsh(opcore.hermitian_part(gram))
    if w[0] <= 1e-12 * max(1.0, w[-1]):
        raise NotFaithful(f"φ0 is singular on the algebra (min Gram eigenvalue {w[0]:.3e})")


def gns_modular(algebra: AlgebraBasis, rho: np.ndarray, fast: bool | None = None) -> ModularData:
    """Modular data of (M, Tr(ρ ·)).

    With fast=None the closed form is used when M is the full matrix algebra:
    GNS space = k x k matrices with Ω = ρ^{1/2}, Δ(ξ) = ρ ξ ρ^{-1}, J(ξ) = ξ^*.
    """
    k = algebra.k
    if fast is None:
        fast = algebra.is_full
    if fast:
        if not algebra.is_full:
            raise ValueError("closed-form modular data requires the full matrix algebra")
        w = np.linalg.eigvalsh(opcore.hermitian_part(rho))
        if w[0] <= 1e-12:
            raise NotFaithful(f"ρ is singular (min eigenvalue {w[0]:.3e})")
        sq = opcore.psd_sqrt(rho)
        rho_inv = opcore.psd_power(rho, -1.0, EIG_FLOOR)
        delta = np.kron(rho, rho_inv.T)
        swap = opcore.site_reversal_permutation(k, 2).astype(complex)
        units = np.zeros((k * k, k, k), dtype=complex)
        units[np.arange(k * k), np.repeat(np.arange(k), k), np.tile(np.arange(k), k)] = 1.0
        # c_ab such that c ρ^{1/2} = e_ab
        isq = opcore.psd_power(rho, -0.5, EIG_FLOOR)
        basis = units @ isq
        return ModularData(rho, basis, opcore.vectorize(sq), swap, delta, True)

    b = algebra.basis
    # gram[a, b] = Tr(ρ b_a^* b_b)
    gram = np.einsum("aji,bjl,li->ab", b.conj(), b, rho)
    _check_faithful(gram)
    # orthonormal GNS basis c = b G^{-1/2}
    g_isq = opcore.psd_power(gram, -0.5, EIG_FLOOR)
    c = np.einsum("akl,ab->bkl", b, g_isq)
    omega = np.array([np.trace(rho @ ci.conj().T) for ci in c])
    # S_lin[a, b] = <c_a, c_b^*>
    s_lin = np.array([[np.trace(rho @ ca.conj().T @ cb.conj().T) for cb in c] for ca in c])
    delta = opcore.hermitian_part(np.conj(s_lin.conj().T @ s_lin))
    j_lin = s_lin @ np.conj(opcore.psd_power(delta, -0.5, EIG_FLOOR))
    return ModularData(rho, c, omega, j_lin, delta, False)


def modular_data(state: ChainState, algebra: AlgebraBasis | None = None, fast: bool | None = None) -> ModularData:
    if algebra is None:
        algebra = algebra_closure(state.system)
    return gns_modular(algebra, state.rho, fast)


def fast_path_crosscheck(state: ChainState, algebra: AlgebraBasis | None = None) -> float:
    """Compare closed-form and general modular data through the isometry c -> vec(c ρ^{1/2})."""
    if algebra is None:
        algebra = algebra_closure(state.system)
    if not algebra.is_full:
        return 0.0
    fast = gns_modular(algebra, state.rho, fast=True)
    gen = gns_modular(algebra, state.rho, fast=False)
    sq = state.sqrt_rho
    iso = np.array([(c @ sq).reshape(-1) for c in gen.gns_basis]).T  # general coords -> HS coords
    worst = float(np.linalg.norm(iso.conj().T @ iso - np.eye(gen.gns_dim)))
    worst = max(worst, float(np.linalg.norm(iso @ gen.Omega - fast.Omega)))
    worst = max(worst, float(np.linalg.norm(iso @ gen.Delta @ iso.conj().T - fast.Delta)))
    # J is antilinear: iso J_gen conj(iso^*) vs J_fast
    worst = max(worst, float(np.linalg.norm(iso @ gen.J @ np.conj(iso.conj().T) - fast.J)))
    for v in state.system.kraus:
        worst = max(worst, float(np.linalg.norm(iso @ gen.pi(v) @ iso.conj().T - fast.pi(v))))
    return worst


def dual_family(ops: Sequence[np.ndarray], J: np.ndarray, Delta: np.ndarray) -> np.ndarray:
    """J Δ^{-1/2} A^* Δ^{1/2} J for each A: the modular dual of a Kraus family."""
    dm = opcore.psd_power(Delta, -0.5, EIG_FLOOR)
    dp = opcore.psd_power(Delta, 0.5, EIG_FLOOR)
    out = []
    for a in ops:
        x = dm @ a.conj().T @ dp
        out.append(J @ np.conj(x) @ np.conj(J))
    return np.array(out)


@dataclass(frozen=True)
class DualSystem:
    pi_kraus: np.ndarray  # π(v_k) on the GNS space
    dual_kraus: np.ndarray  # ṽ_k
    residuals: dict[str, float]

    @property
    def max_residual(self) -> float:
        return max(self.residuals.values())


def dual_system(
    md: ModularData,
    system: PopescuSystem,
    max_len: int = 3,
    cap: int | None = None,
    algebra: AlgebraBasis | None = None,
) -> DualSystem:
    """Dual Kraus family ṽ_k = J σ_{i/2}(π(v_k)^*) J with its verification record."""
    pis = np.array([md.pi(v) for v in system.kraus])
    duals = dual_family(pis, md.J, md.Delta)
    n = md.gns_dim
    res: dict[str, float] = {}
    res["normalization"] = float(np.linalg.norm(sum(t @ t.conj().T for t in duals) - np.eye(n), 2))
    # ṽ_k lies in π(M)'
    comm = 0.0
    alg = algebra if algebra is not None else algebra_closure(system)
    pis_alg = [md.pi(b) for b in alg.basis]
    for t in duals:
        for p in pis_alg:
            comm = max(comm, float(np.linalg.norm(t @ p - p @ t, 2)))
    res["commutation"] = comm
    res["vacuum_reversal"], res["duality"] = _word_identities(md, system, pis, duals, max_len, cap)
    return DualSystem(pis, duals, res)


def _word_identities(md, system, pis, duals, max_len, cap):
    """Residuals of ṽ_I^* Ω = π(v_Ĩ)^* Ω and Tr(ρ v_I v_J^*) = <Ω, ṽ_Ĩ ṽ_J̃^* Ω>."""
    words = opcore.all_words(system.d, max_len)
    opcore.check_cap(len(words), cap, "dual word table")
    omega = md.Omega
    pis_h = [p.conj().T for p in pis]
    duals_h = [t.conj().T for t in duals]
    # z[I] = π(v_I)^* Ω = π(v_in)^* ... π(v_i1)^* Ω
    z = np.array([_apply_seq(pis_h, opcore.reverse_word(w), omega) for w in words])
    # y[I] = (ṽ_Ĩ)^* Ω = ṽ_i1^* ... ṽ_in^* Ω; y == z over all words is the vacuum identity
    y = np.array([_apply_seq(duals_h, w, omega) for w in words])
    vacuum = float(np.linalg.norm(y - z, axis=1).max())
    # direct Tr(ρ v_I v_J^*) on the bond space, independent of the GNS data
    table = opcore.word_products(system.kraus, max_len, cap)
    weighted = np.array([(md.rho @ table[w]).reshape(-1) for w in words])
    plain = np.array([table[w].reshape(-1) for w in words])
    moments = weighted.reshape(len(words), *md.rho.shape)
    moments = np.einsum("iab,jab->ij", moments, plain.conj().reshape(moments.shape))
    dual_moments = y.conj() @ y.T
    return vacuum, float(np.abs(moments - dual_moments).max())


def _apply_seq(ops, letters, vec):
    """ops[letters[0]] @ ops[letters[1]] @ ... @ vec."""
    out = vec
    for letter in reversed(tuple(letters)):
        out = ops[letter] @ out
    return out


def double_dual(md: ModularData, dual: DualSystem) -> float:
    """Dual of the dual family w.r.t. (J, Δ^{-1}) returns π(v_k); max deviation."""
    again = dual_family(dual.dual_kraus, md.J, md.delta_power(-1.0))
    return float(max(np.linalg.norm(a - p, 2) for a, p in zip(again, dual.pi_kraus)))
