"""Dense complex linear-algebra helpers, words over {0..d-1}, vectorization.

Vectorization is row-major (numpy C order): vec(A X B) = (A ⊗ Bᵀ) vec(X).
Letters of a word are 0-based internally; file formats and the CLI use the
same 0-based indices.
"""

from __future__ import annotations

import itertools
from typing import Iterator, Sequence

import numpy as np

from .errors import ResourceCapError

Word = tuple[int, ...]

DEFAULT_CAP = 100_000


def reverse_word(word: Sequence[int]) -> Word:
    return tuple(reversed(tuple(word)))


def words_of_length(d: int, n: int) -> Iterator[Word]:
    """Words of length n in lexicographic order, first letter most significant."""
    return itertools.product(range(d), repeat=n)


def all_words(d: int, max_len: int) -> list[Word]:
    out: list[Word] = []
    for n in range(max_len + 1):
        out.extend(words_of_length(d, n))
    return out


def check_cap(count: int, cap: int | None, what: str = "entries") -> None:
    cap = DEFAULT_CAP if cap is None else cap
    if count > cap:
        raise ResourceCapError(f"{what}: {count} exceeds cap {cap}")


def vectorize(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x)
    return x.reshape(-1).copy()


def unvectorize(v: np.ndarray, k: int | None = None) -> np.ndarray:
    v = np.asarray(v)
    if k is None:
        k = int(round(np.sqrt(v.size)))
    if k * k != v.size:
        raise ValueError(f"vector of length {v.size} is not a square matrix")
    return v.reshape(k, k).copy()


def sandwich_matrix(left: np.ndarray, right: np.ndarray) -> np.ndarray:
    """Matrix of X -> left @ X @ right under the vectorization convention."""
    return np.kron(left, right.T)


def kraus_map_matrix(left_ops: Sequence[np.ndarray], right_ops: Sequence[np.ndarray]) -> np.ndarray:
    """Matrix of X -> sum_k a_k X b_k^* for paired operator families."""
    a0 = np.asarray(left_ops[0])
    out = np.zeros((a0.shape[0] * np.asarray(right_ops[0]).shape[0],) * 2, dtype=complex)
    for a, b in zip(left_ops, right_ops):
        out += np.kron(a, np.conj(b))
    return out


def word_product(kraus: np.ndarray, word: Sequence[int]) -> np.ndarray:
    k = kraus.shape[-1]
    out = np.eye(k, dtype=complex)
    for letter in word:
        out = out @ kraus[letter]
    return out


def products_by_length(kraus: np.ndarray, n: int, cap: int | None = None) -> np.ndarray:
    """Stack of v_I for all words of length n, shape (d**n, k, k), lexicographic."""
    d, k, _ = kraus.shape
    check_cap(d**n, cap, f"d^{n} words")
    stack = np.eye(k, dtype=complex)[None]
    for _ in range(n):
        # v_{I.i} = v_I v_i; new word index = old * d + i
        stack = np.einsum("wab,ibc->wiac", stack, kraus).reshape(-1, k, k)
    return stack


def word_products(kraus: np.ndarray, max_len: int, cap: int | None = None) -> dict[Word, np.ndarray]:
    """Map every word of length <= max_len to its Kraus product v_I."""
    if max_len < 0:
        raise ValueError("max_len must be nonnegative")
    d = kraus.shape[0]
    total = sum(d**n for n in range(max_len + 1))
    check_cap(total, cap, "word table")
    table: dict[Word, np.ndarray] = {}
    for n in range(max_len + 1):
        stack = products_by_length(kraus, n, cap)
        for idx, word in enumerate(words_of_length(d, n)):
            table[word] = stack[idx]
    return table


def kernel(a: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Orthonormal basis (columns) of the numerical null space of a."""
    a = np.atleast_2d(a)
    n = a.shape[1]
    if a.shape[0] == 0:
        return np.eye(n, dtype=complex)
    _, s, vh = np.linalg.svd(a, full_matrices=a.shape[0] < n)
    s_full = np.zeros(n)
    s_full[: len(s)] = s
    return vh[s_full <= tol].conj().T


def hermitian_part(x: np.ndarray) -> np.ndarray:
    return 0.5 * (x + x.conj().T)


def psd_sqrt(x: np.ndarray, floor: float = 0.0) -> np.ndarray:
    w, u = np.linalg.eigh(hermitian_part(x))
    w = np.clip(w, floor, None)
    return (u * np.sqrt(w)) @ u.conj().T


def psd_power(x: np.ndarray, power: float, floor: float = 1e-14) -> np.ndarray:
    w, u = np.linalg.eigh(hermitian_part(x))
    w = np.clip(w, floor, None)
    return (u * w**power) @ u.conj().T


def orthonormalize(vectors: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Orthonormal basis (columns) for the column span of `vectors`."""
    if vectors.size == 0:
        return vectors
    u, s, _ = np.linalg.svd(vectors, full_matrices=False)
    return u[:, s > tol * max(1.0, s[0])]


def commutant_basis(ops: Sequence[np.ndarray], tol: float = 1e-10) -> np.ndarray:
    """Basis of {X : [A, X] = 0 for all A in ops}, as vectors (columns)."""
    n = ops[0].shape[0]
    eye = np.eye(n)
    basis = np.eye(n * n, dtype=complex)
    # shrink the candidate space one constraint at a time
    for a in ops:
        block = (sandwich_matrix(a, eye) - sandwich_matrix(eye, a)) @ basis
        if basis.shape[1] == 0:
            break
        basis = basis @ kernel(block, tol)
    return basis


def site_reversal_permutation(d: int, n: int) -> np.ndarray:
    """Permutation matrix P with P |i1..in> = |in..i1>."""
    dim = d**n
    idx = np.arange(dim).reshape((d,) * n)
    perm = idx.transpose(tuple(reversed(range(n)))).reshape(-1)
    p = np.zeros((dim, dim))
    p[np.arange(dim), perm] = 1.0
    return p


def nkron(ops: Sequence[np.ndarray]) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for op in ops:
        out = np.kron(out, op)
    return out
