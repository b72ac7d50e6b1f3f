"""Nearest-neighbour models, exact diagonalization, energy densities, the
ground-state inequality and the consistency audit of symmetry verdicts."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Literal

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import ArpackNoConvergence, eigsh

from . import opcore, su2, zoo
from .errors import ConvergenceError, DimensionMismatch, IncompleteBundle, ResourceCapError, UnknownModel
from .popescu import ChainState, PopescuSystem, window_density

ED_CAP = 3**10
DENSE_LIMIT = 4096
GAP_TOL = 1e-8
GROUND_TOL = 1e-8
MODEL_NAMES = ("xy", "xyz", "aklt")


@dataclass(frozen=True)
class LocalHamiltonian:
    h0: np.ndarray  # Hermitian d^r x d^r
    d: int
    r: int = 2
    name: str = "custom"
    params: dict = field(default_factory=dict)
    reference: PopescuSystem | None = None

    def __post_init__(self):
        h = np.asarray(self.h0, dtype=complex)
        if h.shape != (self.d**self.r, self.d**self.r):
            raise ValueError(f"h0 has shape {h.shape}, expected {(self.d**self.r,) * 2}")
        object.__setattr__(self, "h0", opcore.hermitian_part(h))

    def reality_residual(self) -> float:
        return float(np.abs(self.h0 - self.h0.T).max())

    def reflection_residual(self) -> float:
        perm = opcore.site_reversal_permutation(self.d, self.r)
        return float(np.abs(self.h0 - perm @ self.h0 @ perm.T).max())


def parse_model(label: str) -> tuple[str, str | None]:
    """'aklt', 'xyz:1/2', 'xy:0.5' -> (name, parameter string)."""
    name, _, param = label.partition(":")
    return name.strip().lower(), (param.strip() or None)


def build_model(name: str, param: float | str | None = None, basis: su2.Basis | None = None) -> LocalHamiltonian:
    """xy(λ): -(σx⊗σx + σy⊗σy) - λ(σz⊗1 + 1⊗σz); xyz(s): S·S; aklt(s): S·S + (S·S)²/3."""
    if name == "xy":
        lam = float(param) if param is not None else 0.0
        sx, sy, sz = zoo.PAULIS
        eye = np.eye(2)
        # the on-site field 2λσz is split half-half over the two bonds touching a site
        h0 = -(np.kron(sx, sx) + np.kron(sy, sy)) - lam * (np.kron(sz, eye) + np.kron(eye, sz))
        return LocalHamiltonian(h0, 2, 2, "xy", {"lambda": lam})
    if name in ("xyz", "aklt"):
        s = su2.parse_spin(param if param is not None else (Fraction(1, 2) if name == "xyz" else 1))
        if s == 0:
            raise UnknownModel(f"{name} needs spin > 0")
        basis = basis if basis is not None else su2.default_basis(s)
        gens = su2.rep_build(s, basis).generators
        dot = sum(np.kron(g, g) for g in gens)
        d = gens.shape[1]
        if name == "xyz":
            return LocalHamiltonian(dot, d, 2, "xyz", {"spin": str(s), "basis": basis})
        ref = zoo.aklt() if (s == 1 and basis == "cartesian") else None
        return LocalHamiltonian(dot + dot @ dot / 3, d, 2, "aklt", {"spin": str(s), "basis": basis}, ref)
    raise UnknownModel(f"unknown model {name!r}; choose from {list(MODEL_NAMES)}")


def model_from_label(label: str, basis: su2.Basis | None = None) -> LocalHamiltonian:
    name, param = parse_model(label)
    return build_model(name, param, basis)


# ---------------------------------------------------------------------------
# exact diagonalization


@dataclass(frozen=True)
class EDResult:
    N: int
    boundary: Literal["periodic", "open"]
    ground_energy: float
    degeneracy: int
    eigenvalues: np.ndarray
    method: str

    @property
    def energy_density(self) -> float:
        return self.ground_energy / self.N


def _translation(d: int, N: int) -> sp.csr_matrix:
    """Permutation T with T|i_0 ... i_{N-1}> = |i_{N-1} i_0 ... i_{N-2}>."""
    dim = d**N
    idx = np.arange(dim).reshape((d,) * N)
    target = np.moveaxis(idx, -1, 0).reshape(-1)
    return sp.csr_matrix((np.ones(dim), (np.arange(dim), target)), shape=(dim, dim))


def chain_hamiltonian(h: LocalHamiltonian, N: int, boundary: str) -> sp.csr_matrix:
    """Σ_j θ_j(h0) on N sites; periodic adds the terms that wrap around."""
    if boundary not in ("periodic", "open"):
        raise ValueError("boundary must be 'periodic' or 'open'")
    if N < h.r:
        raise ValueError(f"need at least {h.r} sites")
    d, r = h.d, h.r
    h0 = sp.csr_matrix(h.h0)
    n_terms = N if boundary == "periodic" else N - r + 1
    total = sp.csr_matrix((d**N, d**N), dtype=complex)
    for j in range(min(n_terms, N - r + 1)):
        total = total + sp.kron(sp.kron(sp.identity(d**j), h0), sp.identity(d ** (N - r - j)), format="csr")
    if n_terms > N - r + 1:
        # wrapped terms: conjugate the term at sites 0..r-1 by translations
        t = _translation(d, N)
        first = sp.kron(h0, sp.identity(d ** (N - r)), format="csr")
        shift = sp.identity(d**N, format="csr")
        for j in range(1, N):
            shift = t @ shift
            if j > N - r:
                total = total + shift @ first @ shift.T
    return total.tocsr()


def ed_ground(
    h: LocalHamiltonian,
    N: int,
    boundary: Literal["periodic", "open"] = "periodic",
    cap: int = ED_CAP,
    n_eigs: int = 6,
    seed: int = 0,
) -> EDResult:
    """Lowest eigenvalues of the finite chain; dense below 4096 states, Lanczos above."""
    dim = h.d**N
    if dim > cap:
        raise ResourceCapError(f"Hilbert space dimension {dim} exceeds cap {cap}")
    ham = chain_hamiltonian(h, N, boundary)
    if dim < DENSE_LIMIT:
        evals = np.linalg.eigvalsh(ham.toarray())
        method = "dense"
    else:
        v0 = np.random.default_rng(seed).normal(size=dim)
        try:
            evals = np.sort(eigsh(ham, k=min(n_eigs, dim - 2), which="SA", v0=v0, tol=1e-12, return_eigenvectors=False))
        except ArpackNoConvergence as exc:
            raise ConvergenceError(f"Lanczos did not converge: {exc}") from None
        method = "lanczos"
    e0 = float(evals[0])
    degeneracy = int(np.sum(evals - e0 < GAP_TOL))
    return EDResult(N, boundary, e0, degeneracy, np.asarray(evals[: max(n_eigs, degeneracy)]), method)


# ---------------------------------------------------------------------------
# energies and the ground-state inequality


def energy_density(state: ChainState, h: LocalHamiltonian, cap: int | None = None) -> float:
    """ω(h0) = Tr(ρ_r h0)."""
    if state.d != h.d:
        raise DimensionMismatch(f"state has d = {state.d}, Hamiltonian has d = {h.d}")
    return float(np.real(np.trace(window_density(state, h.r, cap) @ h.h0)))


@dataclass(frozen=True)
class GroundCheck:
    min_eig: float
    passes: bool
    antihermitian_residual: float
    window: int
    tol: float


def ground_inequality(
    state: ChainState,
    h: LocalHamiltonian,
    m: int,
    tol: float = GROUND_TOL,
    cap: int | None = None,
) -> GroundCheck:
    """Min eigenvalue of G_ab = ω(Q_a^* [H, Q_b]) over matrix units Q of an m-site window.

    Only the terms θ_j(h0) overlapping the window fail to commute with it, so
    the computation lives on m + 2(r-1) sites with reduced density R:
    G_{(p,q), b} = (Tr_outer([H_loc, Q_b] R))_{pq}.
    """
    if state.d != h.d:
        raise DimensionMismatch(f"state has d = {state.d}, Hamiltonian has d = {h.d}")
    d, r = h.d, h.r
    pad = r - 1
    size = m + 2 * pad
    dm, dpad = d**m, d**pad
    opcore.check_cap(dm * dm, cap, f"window algebra d^{2 * m}")
    R = window_density(state, size, cap)
    dim = d**size
    h_loc = np.zeros((dim, dim), dtype=complex)
    for j in range(size - r + 1):
        h_loc += np.kron(np.kron(np.eye(d**j), h.h0), np.eye(d ** (size - r - j)))
    g = np.zeros((dm * dm, dm * dm), dtype=complex)
    for b in range(dm * dm):
        qb = np.zeros((dm, dm))
        qb.flat[b] = 1.0
        big = np.kron(np.kron(np.eye(dpad), qb), np.eye(dpad))
        x = (h_loc @ big - big @ h_loc) @ R
        # trace over the padding sites on both sides
        y = np.einsum("apbaqb->pq", x.reshape(dpad, dm, dpad, dpad, dm, dpad))
        g[:, b] = y.reshape(-1)
    herm = opcore.hermitian_part(g)
    anti = float(np.abs(g - herm).max())
    min_eig = float(np.linalg.eigvalsh(herm)[0])
    return GroundCheck(min_eig, min_eig >= -tol, anti, m, tol)


# ---------------------------------------------------------------------------
# consistency audit of the symmetry verdicts


@dataclass(frozen=True)
class AuditBundle:
    d: int | None
    lattice_symmetric: bool | None
    real: bool | None
    pure: bool | None
    su2_irrep_covariant: bool | None
    effective_generators: np.ndarray | None = None

    def missing(self) -> list[str]:
        return [
            key
            for key in ("d", "lattice_symmetric", "real", "pure", "su2_irrep_covariant")
            if getattr(self, key) is None
        ]


@dataclass(frozen=True)
class AuditResult:
    consistent: bool
    violated_clause: str | None
    engaged: bool  # all hypotheses claimed; the parity of d decides
    localization: su2.RealFormResult | None = None


def obstruction_audit(bundle: AuditBundle) -> AuditResult:
    """A lattice-symmetric, real, pure state covariant under an SU(2) irrep must have odd d.

    All five claims together with even d are contradictory; the audit then
    reruns the real-form search on ζ·v(g), when provided, to show where the
    claimed real structure fails.
    """
    missing = bundle.missing()
    if missing:
        raise IncompleteBundle(f"audit bundle lacks {', '.join(missing)}")
    engaged = bool(bundle.lattice_symmetric and bundle.real and bundle.pure and bundle.su2_irrep_covariant)
    if not engaged or bundle.d % 2 == 1:
        return AuditResult(True, None, engaged)
    local = None
    if bundle.effective_generators is not None:
        local = su2.real_form_search(bundle.effective_generators)
    clause = (
        f"lattice symmetric + real + pure + SU(2)-irrep covariant with even d = {bundle.d}: "
        "an even-dimensional spin irrep has no real form"
    )
    return AuditResult(False, clause, engaged, local)
