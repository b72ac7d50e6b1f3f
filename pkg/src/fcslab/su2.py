"""Spin-s representations of SU(2), Clebsch-Gordan blocks, Frobenius-Schur
indicator and the search for a real basis of an irreducible representation."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Literal, Sequence

import numpy as np
from scipy.linalg import expm

from . import opcore
from .errors import NotIrreducible, QuadratureNotConverged

# Gauss-Legendre points per Euler angle; the s=2 indicator is within 1e-12 of +1
FS_DEFAULT_ORDER = 24
FS_ROUND_TOL = 1e-4
REALFORM_TOL = 1e-10

Basis = Literal["standard", "cartesian"]


def parse_spin(value: str | float | Fraction) -> Fraction:
    """Accepts 1, 0.5, "3/2"; the result must be a nonnegative half-integer."""
    spin = Fraction(value).limit_denominator(2) if not isinstance(value, str) else Fraction(value)
    if spin < 0 or (2 * spin).denominator != 1:
        raise ValueError(f"spin must be a nonnegative half-integer, got {value}")
    return spin


def spin_operators(s: float | Fraction) -> np.ndarray:
    """Sx, Sy, Sz in the Sz eigenbasis m = s, s-1, ..., -s (Condon-Shortley phases)."""
    s = float(parse_spin(s))
    m = s - np.arange(int(round(2 * s)) + 1)
    # <m+1|S+|m> on the superdiagonal
    up = np.diag(np.sqrt(s * (s + 1) - m[1:] * (m[1:] + 1)), 1).astype(complex)
    down = up.conj().T
    return np.array([(up + down) / 2, (up - down) / 2j, np.diag(m).astype(complex)])


def cartesian_spin1() -> np.ndarray:
    """(L_a)_{bc} = -i ε_{abc}: spin 1 acting on C^3 by rotation generators."""
    eps = np.zeros((3, 3, 3))
    for a, b, c in [(0, 1, 2), (1, 2, 0), (2, 0, 1)]:
        eps[a, b, c] = 1.0
        eps[a, c, b] = -1.0
    return -1j * eps


@dataclass(frozen=True)
class SpinRep:
    s: Fraction
    generators: np.ndarray  # (3, d, d): Sx, Sy, Sz
    basis: Basis = "standard"

    @property
    def d(self) -> int:
        return self.generators.shape[1]

    def element(self, theta: Sequence[float]) -> np.ndarray:
        """exp(-i θ·S)."""
        return expm(-1j * np.einsum("a,aij->ij", np.asarray(theta, dtype=float), self.generators))

    def commutator_residual(self) -> float:
        sx, sy, sz = self.generators
        worst = 0.0
        for a, b, c in [(sx, sy, sz), (sy, sz, sx), (sz, sx, sy)]:
            worst = max(worst, float(np.abs(a @ b - b @ a - 1j * c).max()))
        return worst

    def casimir_residual(self) -> float:
        cas = sum(g @ g for g in self.generators)
        s = float(self.s)
        return float(np.abs(cas - s * (s + 1) * np.eye(self.d)).max())


def rep_build(s: float | Fraction | str, basis: Basis = "standard") -> SpinRep:
    """Spin-s irreducible representation; basis="cartesian" is available for s = 1."""
    spin = parse_spin(s)
    if basis == "standard":
        return SpinRep(spin, spin_operators(spin), "standard")
    if basis == "cartesian":
        if spin != 1:
            raise ValueError("the Cartesian basis exists only for spin 1")
        return SpinRep(spin, cartesian_spin1(), "cartesian")
    raise ValueError(f"unknown basis {basis!r}")


def default_basis(s: float | Fraction) -> Basis:
    """Spin 1 defaults to the Cartesian basis, matching the valence-bond Kraus family."""
    return "cartesian" if parse_spin(s) == 1 else "standard"


def sample_panel(rng: np.random.Generator | None = None, n_random: int = 0) -> np.ndarray:
    """Rotation vectors: each axis at angles π/2 and π, then random draws."""
    fixed = [angle * np.eye(3)[a] for a in range(3) for angle in (np.pi / 2, np.pi)]
    fixed.append(np.array([0.3, -1.1, 0.7]))
    out = np.array(fixed)
    if n_random and rng is not None:
        out = np.vstack([out, rng.normal(scale=1.5, size=(n_random, 3))])
    return out


@dataclass(frozen=True)
class CGResult:
    spins: tuple[Fraction, ...]
    unitary: np.ndarray  # columns: |J M> ordered by ascending J, then M = J..-J
    residual: float


def clebsch_gordan(s: float | Fraction | str, t: float | Fraction | str, panel: np.ndarray | None = None) -> CGResult:
    """Decompose spin s ⊗ spin t into spins |s-t|..s+t by highest-weight vectors and lowering."""
    s, t = parse_spin(s), parse_spin(t)
    a, b = rep_build(s), rep_build(t)
    da, db = a.d, b.d
    total = np.array([np.kron(ga, np.eye(db)) + np.kron(np.eye(da), gb) for ga, gb in zip(a.generators, b.generators)])
    lower = total[0] - 1j * total[1]
    raise_ = total[0] + 1j * total[1]
    # product basis |m1>|m2> has total M = m1 + m2
    m_total = np.add.outer(float(s) - np.arange(da), float(t) - np.arange(db)).reshape(-1)
    blocks: dict[Fraction, np.ndarray] = {}
    taken = np.zeros((da * db, 0), dtype=complex)
    J = s + t
    while J >= abs(s - t):
        sector = np.eye(da * db, dtype=complex)[:, np.isclose(m_total, float(J))]
        # highest weight: annihilated by J+, orthogonal to larger multiplets
        constraints = np.vstack([raise_ @ sector, taken.conj().T @ sector])
        coeff = opcore.kernel(constraints, 1e-9)
        if coeff.shape[1] != 1:
            raise RuntimeError(f"highest-weight space for J={J} has dimension {coeff.shape[1]}")
        vec = sector @ coeff[:, 0]
        # fix the phase: first nonzero component real positive
        lead = vec[np.argmax(np.abs(vec) > 1e-12)]
        vec = vec * abs(lead) / lead
        cols = [vec]
        jf = float(J)
        for k in range(int(round(2 * jf))):
            m = jf - k
            cols.append(lower @ cols[-1] / np.sqrt(jf * (jf + 1) - m * (m - 1)))
        block = np.array(cols).T
        blocks[J] = block
        taken = np.hstack([taken, block])
        J -= 1
    spins = tuple(sorted(blocks))
    unitary = np.hstack([blocks[j] for j in spins])
    if panel is None:
        panel = sample_panel()
    residual = float(np.abs(unitary.conj().T @ unitary - np.eye(da * db)).max())
    for theta in panel:
        big = np.kron(a.element(theta), b.element(theta))
        direct = _block_diag([rep_build(j).element(theta) for j in spins])
        residual = max(residual, float(np.abs(unitary.conj().T @ big @ unitary - direct).max()))
    return CGResult(spins, unitary, residual)


def _block_diag(mats: Sequence[np.ndarray]) -> np.ndarray:
    n = sum(m.shape[0] for m in mats)
    out = np.zeros((n, n), dtype=complex)
    i = 0
    for m in mats:
        out[i : i + m.shape[0], i : i + m.shape[0]] = m
        i += m.shape[0]
    return out


@dataclass(frozen=True)
class FSResult:
    indicator: int
    value: float
    deviation: float
    order: int


def frobenius_schur(s: float | Fraction | str, order: int = FS_DEFAULT_ORDER) -> FSResult:
    """Haar average of Tr(D(g)^2) over Euler angles with product Gauss-Legendre rules.

    g = e^{-iαSz} e^{-iβSy} e^{-iγSz}, α ∈ [0,2π), β ∈ [0,π], γ ∈ [0,4π),
    Haar density sin β / (16π²).
    """
    rep = rep_build(s)
    x, w = np.polynomial.legendre.leggauss(order)
    alpha = np.pi * (x + 1)
    beta = np.pi / 2 * (x + 1)
    gamma = 2 * np.pi * (x + 1)
    wa, wb, wg = np.pi * w, np.pi / 2 * w, 2 * np.pi * w
    mz = np.diag(rep.generators[2]).real
    ey, uy = np.linalg.eigh(rep.generators[1])
    # D[a, b, g] = diag(e^{-iα m}) B(β) diag(e^{-iγ m})
    phase_a = np.exp(-1j * np.outer(alpha, mz))  # (n, d)
    phase_g = np.exp(-1j * np.outer(gamma, mz))
    bmat = np.einsum("ij,bj,kj->bik", uy, np.exp(-1j * np.outer(beta, ey)), uy.conj())  # (n, d, d)
    # dmat[a, b, g] = D(α_a, β_b, γ_g)
    dmat = phase_a[:, None, None, :, None] * bmat[None, :, None, :, :] * phase_g[None, None, :, None, :]
    tr_sq = np.einsum("abgij,abgji->abg", dmat, dmat)
    weights = np.einsum("a,b,g->abg", wa, wb * np.sin(beta), wg)
    value = float(np.real(np.sum(weights * tr_sq)) / (16 * np.pi**2))
    nearest = int(round(value))
    nearest = max(-1, min(1, nearest))
    dev = abs(value - nearest)
    if dev >= FS_ROUND_TOL:
        raise QuadratureNotConverged(f"indicator {value:.6g} is {dev:.2e} from {nearest}; raise the order (now {order})")
    return FSResult(nearest, value, dev, order)


@dataclass(frozen=True)
class RealFormResult:
    exists: bool
    basis_change: np.ndarray | None  # W with W v(g) W^* real
    intertwiner: np.ndarray | None  # C with v(g) C = C conj(v(g)), scaled so C conj(C) = ±1
    c_symmetry: Literal["symmetric", "antisymmetric", "none"]
    max_imag: float  # over the panel, only when exists
    cc_residual: float  # ||C conj(C) ∓ 1||


def is_irreducible(generators: Sequence[np.ndarray], tol: float = 1e-9) -> bool:
    return opcore.commutant_basis(list(generators), tol).shape[1] == 1


def _takagi_symmetric_unitary(c: np.ndarray) -> np.ndarray:
    """Q unitary with C = Q Qᵀ for symmetric unitary C."""
    x, y = c.real, c.imag
    # C C̄ = 1 makes Re C and Im C commuting real symmetric matrices
    for mix in (0.6180339887, 1.4142135623, 2.7182818284, 0.3010299957):
        _, o = np.linalg.eigh(x + mix * y)
        diag = o.T @ c @ o
        if np.abs(diag - np.diag(np.diag(diag))).max() < 1e-9:
            return o * np.exp(0.5j * np.angle(np.diag(diag)))
    raise RuntimeError("failed to diagonalize the symmetric intertwiner")


def real_form_search(
    generators: Sequence[np.ndarray],
    tol: float = REALFORM_TOL,
    panel: np.ndarray | None = None,
) -> RealFormResult:
    """Look for a basis where the representation exp(-i θ·S) is real.

    C solves S_a C + C conj(S_a) = 0 for every generator, i.e. v(g) C = C conj(v(g)).
    For an irreducible representation C is unique up to scale and C C̄ = ±1:
    symmetric C yields a real form through C = Q Qᵀ and W = Q^*, antisymmetric
    C (quaternionic type) rules it out.
    """
    gens = [np.asarray(g, dtype=complex) for g in generators]
    n = gens[0].shape[0]
    if not is_irreducible(gens):
        raise NotIrreducible("the generators have a nontrivial commutant")
    eye = np.eye(n)
    system = np.vstack([opcore.sandwich_matrix(g, eye) + opcore.sandwich_matrix(eye, g.conj()) for g in gens])
    sol = opcore.kernel(system, 1e-9)
    if sol.shape[1] == 0:
        return RealFormResult(False, None, None, "none", float("nan"), float("nan"))
    c = opcore.unvectorize(sol[:, 0], n)
    ccbar = c @ c.conj()
    scale = ccbar[0, 0].real
    c = c / np.sqrt(abs(scale))
    sign = 1.0 if scale > 0 else -1.0
    cc_res = float(np.abs(c @ c.conj() - sign * eye).max())
    sym_res = float(np.abs(c - c.T).max())
    anti_res = float(np.abs(c + c.T).max())
    if anti_res < sym_res:
        return RealFormResult(False, None, c, "antisymmetric", float("nan"), cc_res)
    # make C exactly unitary before the factorization (it is, up to roundoff)
    u, _, vh = np.linalg.svd(c)
    c_unit = u @ vh
    c_unit = 0.5 * (c_unit + c_unit.T)
    q = _takagi_symmetric_unitary(c_unit)
    w = q.conj().T
    if panel is None:
        panel = sample_panel()
    max_imag = 0.0
    stack = np.array(gens)
    for theta in panel:
        theta = np.resize(np.asarray(theta, dtype=float), len(gens))
        g = expm(-1j * np.einsum("a,aij->ij", theta, stack))
        max_imag = max(max_imag, float(np.abs((w @ g @ w.conj().T).imag).max()))
    return RealFormResult(max_imag < max(tol, 1e-8), w, c, "symmetric", max_imag, cc_res)
