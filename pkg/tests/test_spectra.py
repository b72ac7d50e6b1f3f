import math

import numpy as np
import pytest
from hypothesis import given

from fcslab import opcore, zoo
from fcslab.errors import NotErgodic
from fcslab.popescu import chain_state, cuntz_moment
from fcslab.spectra import (
    detect_gauge_group,
    ergodicity_check,
    fixed_point_commutant,
    peripheral_phases,
    primitivity_oracle,
    purity_check,
)
from fcslab.symmetry import reality_check, reflection_check
from conftest import random_systems, zoo_systems


def test_ergodicity_examples():
    e = ergodicity_check(zoo.aklt())
    assert e.ergodic and e.fixed_dim == 1
    e = ergodicity_check(zoo.diagonal_pair())
    assert not e.ergodic and e.fixed_dim == 2
    assert ergodicity_check(zoo.product()).ergodic


def test_peripheral_examples():
    assert peripheral_phases(zoo.aklt()).trivial
    assert peripheral_phases(zoo.product()).trivial
    flip = peripheral_phases(zoo.flip())
    assert np.allclose(flip.eigenvalues, [1, -1])


@pytest.mark.parametrize("period", [2, 3, 4])
def test_markov_peripheral_roots_of_unity(period):
    system = zoo.classical_markov(np.random.default_rng(period), 1, period)
    per = peripheral_phases(system)
    assert np.allclose(np.sort(per.phases), 2 * np.pi * np.arange(period) / period, atol=1e-8)


def _gauge_oracle(state, L):
    """gcd of |I| - |J| over nonzero moments, each moment a separate trace."""
    n = 0
    for nl in range(L + 1):
        for nr in range(nl):
            for i in opcore.words_of_length(state.d, nl):
                if any(abs(cuntz_moment(state, i, j)) > 1e-10 for j in opcore.words_of_length(state.d, nr)):
                    n = math.gcd(n, nl - nr)
                    break
    return n


def test_gauge_examples(aklt_state, product_state):
    assert detect_gauge_group(product_state, 5).label() == "{1}"
    h = detect_gauge_group(aklt_state, 4)
    assert h.label() == "{1}" and (2, 0) in h.witnesses and (3, 0) in h.witnesses
    assert detect_gauge_group(chain_state(zoo.flip()), 5).label() == "{1,-1}"


@pytest.mark.parametrize("name", sorted(zoo_systems()))
def test_gauge_matches_moment_oracle(name):
    state = chain_state(zoo_systems()[name])
    L = 4 if state.d <= 3 else 3
    assert detect_gauge_group(state, L).order == _gauge_oracle(state, L)


@pytest.mark.parametrize("name", sorted(zoo_systems()))
def test_gauge_stable_in_window(name):
    system = zoo_systems()[name]
    if not ergodicity_check(system).ergodic:
        pytest.skip("not ergodic")
    state = chain_state(system)
    assert detect_gauge_group(state, 4).order == detect_gauge_group(state, 5).order


def test_markov_gauge_group():
    state = chain_state(zoo.classical_markov(np.random.default_rng(0), 1, 3))
    assert detect_gauge_group(state, 5).label() == "Z_3"


def test_commutant_examples(aklt_state, product_state):
    c = fixed_point_commutant(aklt_state)
    assert c.holds and c.fixed_dim == c.commutant_dim == 4
    assert fixed_point_commutant(product_state).holds
    state = chain_state(zoo.random_system(np.random.default_rng(2), 2, 3))
    assert fixed_point_commutant(state).holds


@given(random_systems())
def test_commutant_property(system):
    c = fixed_point_commutant(chain_state(system))
    assert c.holds and c.containment_residual < 1e-8


def test_purity_examples(aklt_state, product_state):
    assert purity_check(aklt_state, True).pure
    assert purity_check(product_state, True).pure
    flip = purity_check(chain_state(zoo.flip()), True)
    assert not flip.pure
    # the kernel alone does not separate the flip state; the peripheral spectrum does
    assert flip.kernel_matches and not flip.factor_state


@pytest.mark.parametrize("block,period", [(1, 2), (1, 3), (2, 2), (1, 4)])
def test_markov_not_pure(block, period):
    state = chain_state(zoo.classical_markov(np.random.default_rng(block * 10 + period), block, period))
    assert not purity_check(state, True).pure


def test_purity_requires_ergodic():
    with pytest.raises(NotErgodic):
        purity_check(chain_state(zoo.diagonal_pair()), True)


def test_purity_caveat_flag(aklt_state):
    assert purity_check(aklt_state, False).caveat_lattice_symmetry
    assert not purity_check(aklt_state, True).caveat_lattice_symmetry


@given(random_systems())
def test_purity_agrees_with_primitivity(system):
    state = chain_state(system)
    assert purity_check(state, True).pure == primitivity_oracle(state).primitive


@pytest.mark.parametrize("name", sorted(zoo_systems()))
def test_certified_members_have_small_gauge_group(name):
    state = chain_state(zoo_systems()[name])
    if not ergodicity_check(state.system).ergodic:
        pytest.skip("not ergodic")
    refl, real = reflection_check(state, 5), reality_check(state, 5)
    if refl.holds and real.holds and purity_check(state, True).pure:
        assert detect_gauge_group(state, 5).label() in ("{1}", "{1,-1}")
