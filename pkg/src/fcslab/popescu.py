"""Popescu systems, transfer maps, stationary states and the induced chain state.

A Popescu system is a family v_1..v_d of k x k matrices with
sum_i v_i v_i^* = 1.  Together with a stationary density ρ (τ^*(ρ) = ρ) it
defines the translation-invariant chain state

    ω(e^{i1}_{j1} ⊗ ... ⊗ e^{in}_{jn}) = Tr(ρ v_I v_J^*),

and the Cuntz-algebra moments ψ(s_I s_J^*) = Tr(ρ v_I v_J^*).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np

from . import opcore
from .errors import NoStationaryState, NormalizationError, ShapeError

DEFAULT_TOL = 1e-10
RANK_TOL = 1e-10
PSD_CLIP = 1e-12

SuperKind = Literal["transfer", "adjoint", "doubled"]


@dataclass(frozen=True)
class PopescuSystem:
    kraus: np.ndarray  # shape (d, k, k)
    residual: float = 0.0

    @property
    def d(self) -> int:
        return self.kraus.shape[0]

    @property
    def k(self) -> int:
        return self.kraus.shape[1]

    def __iter__(self):
        return iter(self.kraus)


def normalization_residual(kraus: np.ndarray) -> float:
    k = kraus.shape[-1]
    total = np.einsum("iab,icb->ac", kraus, kraus.conj())
    return float(np.linalg.norm(total - np.eye(k), 2))


def validate_system(kraus: Sequence[np.ndarray] | np.ndarray, tol: float = DEFAULT_TOL) -> PopescuSystem:
    """Check shapes and sum_i v_i v_i^* = 1; return an immutable system."""
    try:
        arr = np.array([np.asarray(v, dtype=complex) for v in kraus])
    except ValueError as exc:
        raise ShapeError(f"Kraus matrices have inconsistent shapes: {exc}") from None
    if arr.ndim != 3:
        raise ShapeError(f"expected a list of square matrices, got array of shape {arr.shape}")
    d, k, k2 = arr.shape
    if k != k2:
        raise ShapeError(f"Kraus matrices must be square, got {k}x{k2}")
    if d < 2:
        raise ShapeError(f"need at least 2 Kraus matrices, got {d}")
    if k < 1:
        raise ShapeError("bond dimension must be positive")
    res = normalization_residual(arr)
    if res > tol:
        raise NormalizationError(f"sum_i v_i v_i^* deviates from identity by {res:.3e} > tol {tol:.1e}")
    arr.setflags(write=False)
    return PopescuSystem(arr, res)


@dataclass(frozen=True)
class Superoperator:
    matrix: np.ndarray
    kind: SuperKind

    def apply(self, x: np.ndarray) -> np.ndarray:
        k = x.shape[0]
        return opcore.unvectorize(self.matrix @ opcore.vectorize(x), k)

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvals(self.matrix)


def transfer_superoperator(system: PopescuSystem, kind: SuperKind = "transfer") -> Superoperator:
    """τ(x) = Σ v x v^* ("transfer") or its trace dual τ^*(x) = Σ v^* x v ("adjoint")."""
    v = system.kraus
    if kind == "transfer":
        mat = opcore.kraus_map_matrix(v, v)
    elif kind == "adjoint":
        vh = np.conj(np.transpose(v, (0, 2, 1)))
        mat = opcore.kraus_map_matrix(vh, vh)
    else:
        raise ValueError("use doubled_transfer for paired families")
    return Superoperator(mat, kind)


def doubled_transfer(left: Sequence[np.ndarray], right: Sequence[np.ndarray]) -> Superoperator:
    """x -> Σ a_i x b_i^*; covers twisted and mixed transfer maps."""
    return Superoperator(opcore.kraus_map_matrix(left, right), "doubled")


@dataclass(frozen=True)
class StationaryData:
    rho: np.ndarray
    faithful: bool
    unique: bool
    residual: float
    min_eigenvalue: float
    fixed_dim: int


def _psd_normalize(x: np.ndarray) -> np.ndarray:
    x = opcore.hermitian_part(x)
    if np.trace(x).real < 0:
        x = -x
    w, u = np.linalg.eigh(x)
    w = np.where(w < PSD_CLIP, 0.0, w)
    x = (u * w) @ u.conj().T
    tr = np.trace(x).real
    if tr <= 0:
        raise NoStationaryState("fixed-point eigenvector has no positive part")
    return x / tr


def stationary_state(system: PopescuSystem, tol: float = DEFAULT_TOL) -> StationaryData:
    """Density ρ with τ^*(ρ) = ρ from the eigenvalue-1 eigenspace of τ^*."""
    k = system.k
    if k == 1:
        rho = np.ones((1, 1), dtype=complex)
        return StationaryData(rho, True, True, 0.0, 1.0, 1)
    tstar = transfer_superoperator(system, "adjoint").matrix
    eye = np.eye(k * k)
    right = opcore.kernel(tstar - eye, tol=max(tol, 1e-9))
    fixed_dim = right.shape[1]
    if fixed_dim == 0:
        raise NoStationaryState("τ^* has no numerical eigenvalue 1")
    if fixed_dim == 1:
        rho = _psd_normalize(opcore.unvectorize(right[:, 0], k))
    else:
        # spectral projection of the maximally mixed state onto the fixed space
        left = opcore.kernel((tstar - eye).conj().T, tol=max(tol, 1e-9))
        proj = right @ np.linalg.solve(left.conj().T @ right, left.conj().T)
        rho = _psd_normalize(opcore.unvectorize(proj @ opcore.vectorize(np.eye(k) / k), k))
    res = float(np.linalg.norm(opcore.unvectorize(tstar @ opcore.vectorize(rho), k) - rho))
    min_eig = float(np.linalg.eigvalsh(rho)[0])
    return StationaryData(rho, min_eig > RANK_TOL, fixed_dim == 1, res, min_eig, fixed_dim)


def compress_to_support(system: PopescuSystem, rho: np.ndarray, tol: float = DEFAULT_TOL) -> tuple[PopescuSystem, np.ndarray]:
    """Restrict v_k to supp(ρ); the support is invariant under every v_k^*."""
    w, u = np.linalg.eigh(opcore.hermitian_part(rho))
    p = u[:, w > RANK_TOL]
    kraus = np.array([p.conj().T @ v @ p for v in system.kraus])
    rho_c = p.conj().T @ rho @ p
    return validate_system(kraus, tol=max(tol, 1e-8)), rho_c / np.trace(rho_c).real


@dataclass(frozen=True)
class ChainState:
    system: PopescuSystem
    stationary: StationaryData
    original: PopescuSystem | None = None
    compressed: bool = False
    _sqrt_rho: np.ndarray = field(default=None, repr=False, compare=False)

    @property
    def rho(self) -> np.ndarray:
        return self.stationary.rho

    @property
    def d(self) -> int:
        return self.system.d

    @property
    def sqrt_rho(self) -> np.ndarray:
        if self._sqrt_rho is None:
            object.__setattr__(self, "_sqrt_rho", opcore.psd_sqrt(self.rho))
        return self._sqrt_rho


def chain_state(system: PopescuSystem, tol: float = DEFAULT_TOL) -> ChainState:
    """Stationary chain state; a non-faithful ρ triggers compression to its support."""
    stat = stationary_state(system, tol)
    if stat.faithful:
        return ChainState(system, stat, original=system)
    small, rho_c = compress_to_support(system, stat.rho, tol)
    tstar = transfer_superoperator(small, "adjoint").matrix
    res = float(np.linalg.norm(tstar @ opcore.vectorize(rho_c) - opcore.vectorize(rho_c)))
    min_eig = float(np.linalg.eigvalsh(rho_c)[0])
    stat_c = StationaryData(rho_c, min_eig > RANK_TOL, stat.unique, res, min_eig, stat.fixed_dim)
    return ChainState(small, stat_c, original=system, compressed=True)


def _weighted_products(state: ChainState, n: int, cap: int | None) -> np.ndarray:
    # rows are vec(ρ^{1/2} v_I), so Tr(ρ v_I v_J^*) = rows[I] . conj(rows[J])
    stack = opcore.products_by_length(state.system.kraus, n, cap)
    return np.einsum("ab,wbc->wac", state.sqrt_rho, stack).reshape(stack.shape[0], -1)


def moment_block(state: ChainState, n_left: int, n_right: int, cap: int | None = None) -> np.ndarray:
    """Matrix of ψ(s_I s_J^*) for |I| = n_left (rows), |J| = n_right (columns)."""
    a = _weighted_products(state, n_left, cap)
    b = a if n_right == n_left else _weighted_products(state, n_right, cap)
    return a @ b.conj().T


def window_density(state: ChainState, n: int, cap: int | None = None) -> np.ndarray:
    """Reduced density ρ_n on n consecutive sites, normalized so ω(Q) = Tr(ρ_n Q)."""
    if n < 1:
        raise ValueError("window length must be >= 1")
    opcore.check_cap(state.d**n, cap, f"window d^{n}")
    gram = moment_block(state, n, n, cap)  # gram[I, J] = ω(e^I_J)
    return gram.T


def cuntz_moment(state: ChainState, left: Sequence[int], right: Sequence[int], cap: int | None = None) -> complex:
    opcore.check_cap(len(left) + len(right), cap, "word length")
    v = state.system.kraus
    a = opcore.word_product(v, left)
    b = opcore.word_product(v, right)
    return complex(np.trace(state.rho @ a @ b.conj().T))


def partial_trace_last(rho: np.ndarray, d: int) -> np.ndarray:
    m = rho.shape[0] // d
    return np.einsum("aibi->ab", rho.reshape(m, d, m, d))


def partial_trace_first(rho: np.ndarray, d: int) -> np.ndarray:
    m = rho.shape[0] // d
    return np.einsum("iaib->ab", rho.reshape(d, m, d, m))


def marginal_residual(state: ChainState, max_n: int, cap: int | None = None) -> float:
    """Max deviation of both one-site marginals of ρ_{n+1} from ρ_n, n < max_n."""
    worst = 0.0
    prev = window_density(state, 1, cap)
    worst = max(worst, abs(np.trace(prev) - 1.0))
    for n in range(1, max_n):
        nxt = window_density(state, n + 1, cap)
        worst = max(
            worst,
            float(np.abs(partial_trace_last(nxt, state.d) - prev).max()),
            float(np.abs(partial_trace_first(nxt, state.d) - prev).max()),
        )
        prev = nxt
    return worst
