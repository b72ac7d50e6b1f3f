"""Reference Popescu systems and seeded random generators."""

from __future__ import annotations

import numpy as np

from .popescu import PopescuSystem, validate_system

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (PAULI_X, PAULI_Y, PAULI_Z)


def aklt() -> PopescuSystem:
    """Spin-1 valence-bond state, v_a = σ_a/√3 in the Cartesian basis."""
    return validate_system([p / np.sqrt(3) for p in PAULIS])


def product() -> PopescuSystem:
    """k = 1 system v_0 = 1, v_1 = 0: the product state |00...>."""
    return validate_system([np.ones((1, 1)), np.zeros((1, 1))])


def flip() -> PopescuSystem:
    """Classical period-2 flip, v_0 = e_12, v_1 = e_21."""
    e12 = np.array([[0, 1], [0, 0]], dtype=complex)
    return validate_system([e12, e12.T])


def diagonal_pair() -> PopescuSystem:
    """v_0 = diag(1,0), v_1 = diag(0,1): every diag(p, 1-p) is stationary."""
    return validate_system([np.diag([1.0, 0.0]), np.diag([0.0, 1.0])])


def nonreal_scalar() -> PopescuSystem:
    """k = 1 system (1/√2, i/√2); ω(e^0_1) = -i/2, so the state is not real."""
    return validate_system([np.array([[1.0]]) / np.sqrt(2), np.array([[1j]]) / np.sqrt(2)])


def random_system(rng: np.random.Generator, k: int, d: int) -> PopescuSystem:
    """Haar-like random system from the blocks of a random isometry C^k -> C^d ⊗ C^k."""
    g = rng.normal(size=(d * k, k)) + 1j * rng.normal(size=(d * k, k))
    q, r = np.linalg.qr(g)
    q = q * (np.diag(r) / np.abs(np.diag(r)))
    # rows of block i form v_i^*, so sum_i v_i v_i^* = Q^* Q = 1
    kraus = [q[i * k : (i + 1) * k].conj().T for i in range(d)]
    return validate_system(kraus)


def random_real_symmetric_system(rng: np.random.Generator, k: int, d: int) -> PopescuSystem:
    """Real symmetric Kraus matrices; ρ = 1/k, and the state is real and lattice symmetric.

    d - 1 random symmetric letters are scaled to fit, the last letter is the
    positive square root of what remains of the identity. With d = 2 the two
    letters commute, so use d >= 3 for an ergodic system.
    """
    mats = []
    for _ in range(d - 1):
        a = rng.normal(size=(k, k))
        mats.append(a + a.T)
    top = np.linalg.eigvalsh(sum(m @ m for m in mats))[-1]
    mats = [m * np.sqrt(0.8 / top) for m in mats]
    w, u = np.linalg.eigh(np.eye(k) - sum(m @ m for m in mats))
    mats.append((u * np.sqrt(np.clip(w, 0, None))) @ u.T)
    return validate_system(mats)


def classical_markov(rng: np.random.Generator, block: int, period: int) -> PopescuSystem:
    """Periodic classical chain embedded as v_j = Σ_i sqrt(P_ij) |j><i|.

    P is doubly stochastic and block-cyclic: k = block * period states in
    `period` classes, every transition goes from class c to class c+1. Column
    sums of 1 give Σ_j v_j v_j^* = 1, and on diagonal matrices τ acts as the
    classical chain, so the peripheral spectrum contains the period-th roots of 1.
    """
    k = block * period
    p = np.zeros((k, k))
    for c in range(period):
        rows = slice(c * block, (c + 1) * block)
        nxt = (c + 1) % period
        cols = slice(nxt * block, (nxt + 1) * block)
        weights = rng.dirichlet(np.ones(block + 1))
        b = sum(w * np.eye(block)[rng.permutation(block)] for w in weights)
        p[rows, cols] = b
    kraus = []
    for j in range(k):
        v = np.zeros((k, k), dtype=complex)
        v[j, :] = np.sqrt(p[:, j])
        kraus.append(v)
    return validate_system(kraus)


def named(name: str) -> PopescuSystem:
    table = {
        "aklt": aklt,
        "product": product,
        "flip": flip,
        "diagonal": diagonal_pair,
        "nonreal": nonreal_scalar,
    }
    if name not in table:
        raise KeyError(f"unknown zoo system {name!r}; choose from {sorted(table)}")
    return table[name]()
