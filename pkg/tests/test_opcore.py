import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fcslab import opcore, zoo
from fcslab.errors import ResourceCapError
from conftest import random_systems, seeds


def test_identity_round_trip():
    v = opcore.vectorize(np.eye(2))
    assert np.array_equal(v, [1, 0, 0, 1])
    assert np.array_equal(opcore.unvectorize(v), np.eye(2))


def test_matrix_unit_slot():
    e12 = np.zeros((2, 2))
    e12[0, 1] = 1
    assert np.array_equal(opcore.vectorize(e12), [0, 1, 0, 0])


@given(seeds, st.sampled_from([2, 3, 4]))
def test_sandwich_identity(seed, k):
    rng = np.random.default_rng(seed)
    a, x, b = (rng.normal(size=(k, k)) + 1j * rng.normal(size=(k, k)) for _ in range(3))
    lhs = opcore.vectorize(a @ x @ b)
    assert np.linalg.norm(lhs - opcore.sandwich_matrix(a, b) @ opcore.vectorize(x)) < 1e-12 * max(1, np.linalg.norm(lhs))


def test_sandwich_hundred_triples_per_size():
    rng = np.random.default_rng(0)
    for k in (2, 3, 4):
        for _ in range(100):
            a, x, b = (rng.normal(size=(k, k)) + 1j * rng.normal(size=(k, k)) for _ in range(3))
            direct = opcore.vectorize(a @ x @ b)
            assert np.linalg.norm(direct - np.kron(a, b.T) @ opcore.vectorize(x)) < 1e-12


def test_aklt_word_xy():
    v = zoo.aklt().kraus
    sz = zoo.PAULI_Z
    assert np.allclose(opcore.word_product(v, (0, 1)), 1j * sz / 3, atol=1e-15)


def test_empty_word_is_identity():
    v = zoo.aklt().kraus
    assert np.array_equal(opcore.word_product(v, ()), np.eye(2))


def test_product_system_words():
    v = zoo.product().kraus
    table = opcore.word_products(v, 4)
    for word, prod in table.items():
        assert prod[0, 0] == (0 if 1 in word else 1)


@given(random_systems(ds=(2, 3)))
def test_product_table_associative(system):
    table = opcore.word_products(system.kraus, 4)
    for i, j in itertools.product(opcore.all_words(system.d, 2), repeat=2):
        assert np.allclose(table[i + j], table[i] @ table[j], atol=1e-13)


def test_products_by_length_order_matches_words():
    v = zoo.random_system(np.random.default_rng(3), 2, 3).kraus
    stack = opcore.products_by_length(v, 3)
    for idx, w in enumerate(opcore.words_of_length(3, 3)):
        assert np.allclose(stack[idx], v[w[0]] @ v[w[1]] @ v[w[2]])


def test_word_table_cap():
    with pytest.raises(ResourceCapError):
        opcore.word_products(zoo.aklt().kraus, 12, cap=1000)


def test_kraus_map_matrix_matches_direct_application():
    rng = np.random.default_rng(1)
    ops = rng.normal(size=(3, 2, 2)) + 1j * rng.normal(size=(3, 2, 2))
    x = rng.normal(size=(2, 2))
    direct = sum(a @ x @ a.conj().T for a in ops)
    assert np.allclose(opcore.kraus_map_matrix(ops, ops) @ x.reshape(-1), direct.reshape(-1))


def test_commutant_of_paulis_is_scalars():
    basis = opcore.commutant_basis(zoo.PAULIS)
    assert basis.shape[1] == 1


def test_commutant_of_diagonal_is_diagonal():
    basis = opcore.commutant_basis([np.diag([1.0, 2.0, 3.0])])
    assert basis.shape[1] == 3


def test_site_reversal():
    p = opcore.site_reversal_permutation(2, 3)
    e = np.zeros(8)
    e[0b001] = 1  # |0 0 1>
    assert (p @ e)[0b100] == 1
