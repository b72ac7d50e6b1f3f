from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.linalg import expm

from fcslab import su2, zoo
from fcslab.errors import NotIrreducible, QuadratureNotConverged

HALF_INTEGER = [Fraction(1, 2), Fraction(3, 2), Fraction(5, 2)]
INTEGER = [Fraction(0), Fraction(1), Fraction(2), Fraction(3)]
spins = st.integers(min_value=0, max_value=6).map(lambda n: Fraction(n, 2))


def test_parse_spin():
    assert su2.parse_spin("3/2") == Fraction(3, 2)
    assert su2.parse_spin(1) == 1
    with pytest.raises(ValueError):
        su2.parse_spin("1/3")


def test_spin_half_is_pauli_over_two():
    s = su2.spin_operators(Fraction(1, 2))
    for a in range(3):
        assert np.allclose(s[a], zoo.PAULIS[a] / 2)


def test_spin_one_z_and_commutators():
    rep = su2.rep_build(1)
    assert np.allclose(rep.generators[2], np.diag([1, 0, -1]))
    assert rep.commutator_residual() < 1e-14


def test_spin_three_halves_casimir():
    rep = su2.rep_build("3/2")
    c = sum(g @ g for g in rep.generators)
    assert np.allclose(c, 15 / 4 * np.eye(4), atol=1e-14)


@given(spins, st.sampled_from(["standard", "cartesian"]))
def test_rep_relations(s, basis):
    if basis == "cartesian" and s != 1:
        return
    rep = su2.rep_build(s, basis)
    assert rep.commutator_residual() < 1e-12
    assert rep.casimir_residual() < 1e-12


def test_cartesian_spin_one_is_real_rotation():
    rep = su2.rep_build(1, "cartesian")
    g = rep.element([0.3, -1.1, 0.7])
    assert np.abs(g.imag).max() < 1e-15
    assert np.allclose(g @ g.T, np.eye(3)) and np.isclose(np.linalg.det(g.real), 1)


def test_cg_half_half():
    assert su2.clebsch_gordan("1/2", "1/2").spins == (0, 1)


def test_cg_with_trivial():
    res = su2.clebsch_gordan(0, 1)
    assert res.spins == (1,)
    assert np.allclose(res.unitary, np.eye(3))


@pytest.mark.parametrize("s,t,expected", [(1, 1, (0, 1, 2)), (1, 2, (1, 2, 3))])
def test_cg_block_structure(s, t, expected):
    res = su2.clebsch_gordan(s, t)
    assert res.spins == expected
    assert sum(int(2 * j + 1) for j in res.spins) == res.unitary.shape[0]
    assert res.residual < 1e-10


def _cg_oracle_residual(s, t, res):
    """Block-diagonality of U^* (D_s ⊗ D_t) U on random group elements."""
    a, b = su2.rep_build(s), su2.rep_build(t)
    rng = np.random.default_rng(0)
    worst = 0.0
    for theta in rng.normal(size=(5, 3)):
        big = np.kron(a.element(theta), b.element(theta))
        m = res.unitary.conj().T @ big @ res.unitary
        start = 0
        for j in res.spins:
            n = int(2 * j + 1)
            block = su2.rep_build(j).element(theta)
            worst = max(worst, float(np.abs(m[start:start + n, start:start + n] - block).max()))
            start += n
        mask = np.ones_like(m, dtype=bool)
        start = 0
        for j in res.spins:
            n = int(2 * j + 1)
            mask[start:start + n, start:start + n] = False
            start += n
        worst = max(worst, float(np.abs(m[mask]).max(initial=0.0)))
    return worst


@given(spins, spins)
def test_cg_property(s, t):
    res = su2.clebsch_gordan(s, t)
    assert res.spins == tuple(Fraction(abs(s - t)) + n for n in range(int(s + t - abs(s - t)) + 1))
    assert _cg_oracle_residual(s, t, res) < 1e-10


@pytest.mark.parametrize("s", INTEGER)
def test_fs_integer(s):
    res = su2.frobenius_schur(s)
    assert res.indicator == 1 and res.deviation < 1e-6


@pytest.mark.parametrize("s", HALF_INTEGER)
def test_fs_half_integer(s):
    res = su2.frobenius_schur(s)
    assert res.indicator == -1 and res.deviation < 1e-6


def test_fs_low_order_fails_loudly():
    with pytest.raises(QuadratureNotConverged):
        su2.frobenius_schur(3, order=4)


def test_real_form_spin_one():
    res = su2.real_form_search(su2.rep_build(1).generators)
    assert res.exists and res.max_imag < 1e-10 and res.c_symmetry == "symmetric"


def test_real_form_spin_half():
    res = su2.real_form_search(su2.rep_build("1/2").generators)
    assert not res.exists and res.c_symmetry == "antisymmetric"
    # C is proportional to i σ_y
    c = res.intertwiner
    ratio = c[0, 1] / (1j * zoo.PAULI_Y)[0, 1]
    assert np.allclose(c, ratio * 1j * zoo.PAULI_Y)


def test_real_form_three_halves():
    assert not su2.real_form_search(su2.rep_build("3/2").generators).exists


@pytest.mark.parametrize("s", INTEGER + HALF_INTEGER)
def test_two_realness_tests_agree(s):
    fs = su2.frobenius_schur(s).indicator
    rf = su2.real_form_search(su2.rep_build(s).generators)
    assert (fs == 1) == rf.exists
    assert rf.cc_residual < 1e-10
    assert rf.c_symmetry == ("symmetric" if fs == 1 else "antisymmetric")


@pytest.mark.parametrize("s,t", [(1, 1), (1, 2)])
def test_summands_of_real_products_are_real(s, t):
    for j in su2.clebsch_gordan(s, t).spins:
        assert su2.real_form_search(su2.rep_build(j).generators).exists


def test_real_form_rejects_reducible():
    a = su2.rep_build("1/2").generators
    reducible = [np.kron(g, np.eye(2)) + np.kron(np.eye(2), g) for g in a]
    with pytest.raises(NotIrreducible):
        su2.real_form_search(reducible)


def test_basis_change_makes_group_elements_real():
    res = su2.real_form_search(su2.rep_build(2).generators)
    g = expm(-1j * np.einsum("a,aij->ij", [0.2, 0.9, -0.4], su2.rep_build(2).generators))
    assert np.abs((res.basis_change @ g @ res.basis_change.conj().T).imag).max() < 1e-10
