"""Ergodicity, peripheral spectrum, gauge group detection and the purity criterion."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from . import opcore
from .errors import NotErgodic
from .modular import AlgebraBasis, DualSystem, ModularData, algebra_closure, dual_system, modular_data
from .popescu import ChainState, PopescuSystem, moment_block, transfer_superoperator

PERIPHERAL_TOL = 1e-8
KERNEL_TOL = 1e-8
MOMENT_TOL = 1e-10


def _fixed_dim(matrix: np.ndarray, tol: float) -> tuple[int, np.ndarray]:
    n = matrix.shape[0]
    ker = opcore.kernel(matrix - np.eye(n), tol=tol * max(1.0, np.linalg.norm(matrix, 2)))
    return ker.shape[1], ker


@dataclass(frozen=True)
class Ergodicity:
    ergodic: bool
    fixed_dim: int

    @property
    def algebra_factor(self) -> bool:
        """M is a factor exactly when (M, τ, φ0) is ergodic."""
        return self.ergodic


def ergodicity_check(system: PopescuSystem, tol: float = KERNEL_TOL) -> Ergodicity:
    """fixed_dim = dim ker(τ - id) on B(K); ergodic iff it equals 1."""
    dim, _ = _fixed_dim(transfer_superoperator(system).matrix, tol)
    return Ergodicity(dim == 1, dim)


@dataclass(frozen=True)
class PeripheralSpectrum:
    eigenvalues: np.ndarray  # distinct unimodular eigenvalues of τ, sorted by angle
    multiplicities: tuple[int, ...]

    @property
    def phases(self) -> np.ndarray:
        """Angles in [0, 2π)."""
        return np.mod(np.angle(self.eigenvalues), 2 * np.pi)

    @property
    def trivial(self) -> bool:
        return len(self.eigenvalues) == 1 and abs(self.eigenvalues[0] - 1) < 1e-6


def peripheral_phases(system: PopescuSystem, tol: float = PERIPHERAL_TOL) -> PeripheralSpectrum:
    """Eigenvalues λ of τ with ||λ| - 1| < tol, merged within 1e-6."""
    ev = transfer_superoperator(system).eigenvalues()
    per = ev[np.abs(np.abs(ev) - 1.0) < tol]
    per = per / np.abs(per)
    per = per[np.argsort(np.mod(np.angle(per) + 1e-9, 2 * np.pi))]
    distinct: list[complex] = []
    counts: list[int] = []
    for z in per:
        for i, w in enumerate(distinct):
            if abs(z - w) < 1e-6:
                counts[i] += 1
                break
        else:
            distinct.append(complex(z))
            counts.append(1)
    return PeripheralSpectrum(np.array(distinct, dtype=complex), tuple(counts))


@dataclass(frozen=True)
class GaugeGroup:
    kind: Literal["cyclic", "circle"]
    order: int  # n for the cyclic group {z : z^n = 1}; 0 for the full circle
    window: int
    witnesses: tuple[tuple[int, int], ...]  # (|I|, |J|) pairs with a nonzero moment and |I| != |J|

    def elements(self) -> np.ndarray:
        if self.kind == "circle":
            raise ValueError("the full circle has no finite element list")
        return np.exp(2j * np.pi * np.arange(self.order) / self.order)

    def label(self) -> str:
        if self.kind == "circle":
            return "U(1)"
        if self.order == 1:
            return "{1}"
        if self.order == 2:
            return "{1,-1}"
        return f"Z_{self.order}"


def detect_gauge_group(state: ChainState, L: int, tol: float = MOMENT_TOL, cap: int | None = None) -> GaugeGroup:
    """H = {z : ψ∘β_z = ψ} from the support of the Cuntz moments up to length L.

    β_z multiplies ψ(s_I s_J^*) by z^{|I|-|J|}, so z fixes ψ exactly when z^n = 1
    with n the gcd of all length differences carrying a nonzero moment.
    """
    if L < 1:
        raise ValueError("window must be >= 1")
    opcore.check_cap(state.d**L, cap, f"gauge scan d^{L}")
    order = 0
    witnesses = []
    for nl in range(L + 1):
        for nr in range(nl):
            block = moment_block(state, nl, nr, cap)
            if np.abs(block).max() > tol:
                witnesses.append((nl, nr))
                order = math.gcd(order, nl - nr)
    if order == 0:
        return GaugeGroup("circle", 0, L, ())
    return GaugeGroup("cyclic", order, L, tuple(witnesses))


@dataclass(frozen=True)
class CommutantCheck:
    holds: bool
    fixed_dim: int
    commutant_dim: int
    containment_residual: float


def gns_transfer(ops: np.ndarray) -> np.ndarray:
    """Matrix of X -> Σ A X A^* on operators over the GNS space."""
    return opcore.kraus_map_matrix(ops, ops)


def fixed_point_commutant(
    state: ChainState,
    md: ModularData | None = None,
    algebra: AlgebraBasis | None = None,
    tol: float = KERNEL_TOL,
) -> CommutantCheck:
    """Fixed points of X -> Σ π(v_k) X π(v_k)^* against the commutant π(M)'."""
    algebra = algebra if algebra is not None else algebra_closure(state.system)
    md = md if md is not None else modular_data(state, algebra)
    pis = np.array([md.pi(v) for v in state.system.kraus])
    t = gns_transfer(pis)
    fixed_dim, _ = _fixed_dim(t, tol)
    # the commutant of the generators is the commutant of the algebra
    gens = list(pis) + [p.conj().T for p in pis]
    comm = opcore.commutant_basis(gens, tol)
    resid = 0.0
    for x in comm.T:
        resid = max(resid, float(np.linalg.norm(t @ x - x)))
    holds = fixed_dim == comm.shape[1] and resid < tol
    return CommutantCheck(holds, fixed_dim, comm.shape[1], resid)


@dataclass(frozen=True)
class PurityVerdict:
    pure: bool
    fixed_space_dim: int
    expected_dim: int
    caveat_lattice_symmetry: bool
    containment_residual: float
    factor_state: bool  # ω clusters: peripheral spectrum of τ is {1}

    @property
    def kernel_matches(self) -> bool:
        return self.fixed_space_dim == self.expected_dim


def purity_check(
    state: ChainState,
    reflection_flag: bool,
    md: ModularData | None = None,
    dual: DualSystem | None = None,
    algebra: AlgebraBasis | None = None,
    tol: float = KERNEL_TOL,
) -> PurityVerdict:
    """Pure iff ω is a factor state and the fixed points of X -> Σ ṽ_k X ṽ_k^*
    are exactly π(M).

    The kernel criterion is established for lattice-symmetric factor states;
    when reflection_flag is false the verdict carries the caveat. An ergodic
    system with periodic peripheral spectrum gives a non-factor ω (a mixture of
    shifted periodic states), which is never pure, whatever the kernel says.
    """
    erg = ergodicity_check(state.system)
    if not erg.ergodic:
        raise NotErgodic(f"purity criterion needs an ergodic system (fixed_dim = {erg.fixed_dim})")
    factor_state = peripheral_phases(state.system).trivial
    algebra = algebra if algebra is not None else algebra_closure(state.system)
    md = md if md is not None else modular_data(state, algebra)
    dual = dual if dual is not None else dual_system(md, state.system, algebra=algebra)
    t = gns_transfer(dual.dual_kraus)
    fixed_dim, _ = _fixed_dim(t, tol)
    resid = 0.0
    for b in algebra.basis:
        x = opcore.vectorize(md.pi(b))
        resid = max(resid, float(np.linalg.norm(t @ x - x)))
    pure = factor_state and fixed_dim == algebra.dim and resid < tol
    return PurityVerdict(pure, fixed_dim, algebra.dim, not reflection_flag, resid, factor_state)


@dataclass(frozen=True)
class PrimitivityVerdict:
    primitive: bool
    trivial_peripheral: bool
    faithful_unique: bool
    full_algebra: bool


def primitivity_oracle(state: ChainState) -> PrimitivityVerdict:
    """Peripheral spectrum {1} (simple), faithful unique fixed point, M = B(K).

    Uses only the bond-space spectrum, never the modular data.
    """
    per = peripheral_phases(state.system)
    trivial = per.trivial and per.multiplicities == (1,)
    stat = state.stationary
    faithful_unique = stat.faithful and stat.unique and not state.compressed
    full = algebra_closure(state.system).is_full
    return PrimitivityVerdict(trivial and faithful_unique and full, trivial, faithful_unique, full)
