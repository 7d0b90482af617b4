import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from mprdisc import rfs
from mprdisc.rfs import SetFunction


def subsets(universe):
    u = tuple(universe)
    return [frozenset(c) for r in range(len(u) + 1) for c in itertools.combinations(u, r)]


def naive_belief(pmf):
    return {C: sum(v for B, v in pmf.items() if B <= C) for C in pmf}


def naive_mobius(beta):
    return {B: sum((-1) ** len(B - C) * v for C, v in beta.items() if C <= B) for B in beta}


def test_mask_roundtrip():
    u = ("a", "b", "c")
    assert rfs.mask_of({"a", "c"}, u) == 0b101
    assert rfs.members_of(0b101, u) == {"a", "c"}
    with pytest.raises(ValueError):
        rfs.mask_of({"z"}, u)


def test_popcounts():
    assert rfs.popcounts(3).tolist() == [0, 1, 1, 2, 1, 2, 2, 3]


@settings(max_examples=50)
@given(st.integers(0, 5), st.integers(0, 2**32 - 1))
def test_fast_transforms_match_naive(K, seed):
    rng = np.random.default_rng(seed)
    u = tuple(range(K))
    w = rng.random(1 << K)
    w /= w.sum()
    pmf = SetFunction(u, w)
    beta = rfs.belief_mass_from_pmf(pmf)
    naive = naive_belief(dict(pmf.items()))
    for C, v in beta.items():
        assert v == pytest.approx(naive[C], abs=1e-12)
    back = naive_mobius(dict(beta.items()))
    for B, v in rfs.mobius_inverse(beta).items():
        assert v == pytest.approx(back[B], abs=1e-12)


def test_belief_mass_validates_pmf():
    with pytest.raises(ValueError):
        rfs.belief_mass_from_pmf(SetFunction((0,), [0.5, 0.6]))
    with pytest.raises(ValueError):
        rfs.belief_mass_from_pmf(SetFunction((0,), [1.5, -0.5]))


def test_set_function_validation_and_json():
    with pytest.raises(ValueError):
        SetFunction((0, 0), np.zeros(4))
    with pytest.raises(ValueError):
        SetFunction((0, 1), np.zeros(3))
    f = SetFunction.from_mapping(("x", "y"), {frozenset({"x"}): 0.25, frozenset(): 0.75})
    g = SetFunction.from_json(f.to_json())
    assert g[{"x"}] == 0.25 and g[set()] == 0.75 and g.universe == ("x", "y")


@given(st.integers(0, 4), st.integers(0, 6), st.floats(0.0, 1.0))
def test_membership_density_is_mobius_of_belief(c, J, p):
    u = tuple(range(c))
    beta = SetFunction.from_callable(u, lambda C: rfs.membership_belief_mass(C, J, p))
    f = rfs.mobius_inverse(beta)
    for B, v in f.items():
        assert v == pytest.approx(rfs.membership_density(B, J, p), abs=1e-12)


def test_log_density():
    assert rfs.log_membership_density(2, 4, 0.3) == pytest.approx(math.log(0.3**2 * 0.7**2))
    assert rfs.log_membership_density(5, 4, 0.3) == -math.inf
    assert rfs.log_membership_density(0, 3, 0.0) == 0.0
    assert rfs.log_membership_density(1, 3, 0.0) == -math.inf


def test_priors():
    b = rfs.BinomialPrior.from_radii(8, 500.0, 1000.0)
    assert b.q == 0.25
    assert sum(b.pmf(j) for j in b.support()) == pytest.approx(1.0)
    assert rfs.cardinality_prior(3, b) == pytest.approx(stats.binom.pmf(3, 8, 0.25))
    with pytest.raises(ValueError):
        b.pmf(9)
    p = rfs.PoissonPrior.from_intensity(1e-5, 500.0)
    assert p.mean == pytest.approx(math.pi * 2.5)
    assert sum(p.pmf(j) for j in p.support()) == pytest.approx(1.0, abs=1e-10)
