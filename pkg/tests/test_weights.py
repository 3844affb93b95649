from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from multicz.lattice import CubeFamily, Grid, GridFunction
from multicz.weights import (ExponentVector, WeightVector, ap_constant, characterization_check,
                             component_constants, multi_ap_constant, nu_weight, power_weight,
                             refined_characterization, refinement_growth)

G = Grid(0.0, 1.0, 256)
FAM = CubeFamily(G, "shifted_dyadic")
ONE = GridFunction(G, np.ones(256))


def pw(a, grid=G):
    return power_weight(grid, a)


def test_exponent_vector():
    P = ExponentVector((2, 2))
    assert P.p_exact == 1 and P.m == 2
    assert ExponentVector((1, 1)).p == 0.5
    assert ExponentVector((3, "1.5")).p_exact == Fraction(1)
    assert P.dual(0) == 2 and ExponentVector((1, 2)).dual(0) is None
    with pytest.raises(ValueError):
        ExponentVector((0.5, 2))
    with pytest.raises(ValueError):
        ExponentVector(())


@given(st.lists(st.fractions(1, 20), min_size=1, max_size=4))
def test_p_range(ps):
    P = ExponentVector(tuple(ps))
    assert Fraction(1, P.m) <= P.p_exact
    assert 1 / P.p_exact == sum(1 / p for p in P.p_vec)


def test_nu_examples():
    P = ExponentVector((2, 2))
    np.testing.assert_allclose(nu_weight([ONE, ONE], P).values, 1.0)
    w = pw(0.7)
    np.testing.assert_allclose(nu_weight([w, w], P).values, w.values, rtol=1e-14)
    half = pw(0.5)
    np.testing.assert_allclose(nu_weight([half, half], ExponentVector((1, 1))).values,
                               half.values, rtol=1e-14)


def test_nu_errors():
    P = ExponentVector((2, 2))
    with pytest.raises(ValueError):
        nu_weight([ONE], P)
    with pytest.raises(ValueError):
        nu_weight([ONE, GridFunction(G, np.zeros(256))], P)


def test_weight_vector_nu_consistent(rng):
    P = ExponentVector((3, "1.5"))
    w = WeightVector([GridFunction(G, rng.uniform(0.1, 5, 256)) for _ in range(2)], P)
    np.testing.assert_allclose(w.nu.values, nu_weight(w.weights, P).values, rtol=1e-12)
    with pytest.raises(ValueError):
        WeightVector([ONE], P)


@pytest.mark.parametrize("p", [1, 1.5, 2, 4])
@pytest.mark.parametrize("c", [1.0, 3.5])
def test_ap_of_constant(p, c):
    assert ap_constant(ONE * c, p, FAM) == pytest.approx(1.0, abs=1e-12)


def test_ap_power_weights():
    def c(a, n):
        g = Grid(0.0, 1.0, n)
        return ap_constant(pw(a, g), 2, CubeFamily(g, "shifted_dyadic"))
    good = [c(0.5, n) for n in (256, 512)]
    assert good[0] > 1 and good[1] == pytest.approx(good[0], rel=0.05)
    bad = [c(1.5, n) for n in (256, 512, 1024)]
    # grows like N^(a - 1): a steady factor sqrt(2) per refinement
    assert bad[1] / bad[0] > 1.3 and bad[2] / bad[1] > 1.3


@pytest.mark.parametrize("P", [(2, 2), (1, 1), (3, 1.5), (1, 4)])
def test_multi_ap_of_ones(P):
    P = ExponentVector(P)
    w = WeightVector([ONE, ONE], P)
    assert multi_ap_constant(w, P, FAM) == pytest.approx(1.0, abs=1e-12)
    comp = component_constants(w, P, FAM)
    assert comp["components"] == pytest.approx([1.0, 1.0], abs=1e-12)
    assert comp["nu"] == pytest.approx(1.0, abs=1e-12)


def test_multi_ap_mixed_power_pair():
    P = ExponentVector((2, 2))
    vals = []
    for n in (256, 512):
        g = Grid(0.0, 1.0, n)
        w = WeightVector([pw(0.5, g), pw(-0.5, g)], P)
        np.testing.assert_allclose(w.nu.values, 1.0)
        vals.append(multi_ap_constant(w, P, CubeFamily(g, "shifted_dyadic")))
    assert vals[1] / vals[0] < 1.1


@given(st.floats(-0.9, 0.9), st.floats(-0.9, 0.9), st.floats(0.01, 100))
def test_multi_ap_scale_invariant(a1, a2, c):
    P = ExponentVector((2, 2))
    w = WeightVector([pw(a1), pw(a2)], P)
    wc = WeightVector([pw(a1) * c, pw(a2) * c], P)
    assert multi_ap_constant(wc, P, FAM) == pytest.approx(multi_ap_constant(w, P, FAM),
                                                           rel=1e-10)


@given(st.floats(-0.9, 0.9), st.floats(-0.9, 0.9))
def test_family_monotone(a1, a2):
    P = ExponentVector((2, 2))
    w = WeightVector([pw(a1), pw(a2)], P)
    dy = multi_ap_constant(w, P, CubeFamily(G, "dyadic"))
    assert dy <= multi_ap_constant(w, P, FAM)


@pytest.mark.parametrize("p", [1, "3/2", 2, 3])
@pytest.mark.parametrize("a", [-0.5, 0.0, 0.3])
def test_m1_reduction(p, a):
    # for one weight the multiple constant is the classical one to the power 1/p
    P = ExponentVector((Fraction(p),))
    w = pw(a)
    single = ap_constant(w, Fraction(p), FAM)
    multi = multi_ap_constant(WeightVector([w], P), P, FAM)
    assert multi == pytest.approx(single ** (1 / P.p), rel=1e-12)
    if P.p == 1:
        assert multi == pytest.approx(single, rel=1e-14)


@pytest.mark.parametrize("a1,a2", [(0.5, -0.5), (-0.3, 0.6), (0.0, 0.9), (-0.9, -0.9)])
def test_product_embedding(a1, a2):
    # w_j in A_(p_j) componentwise implies a finite multiple constant
    P = ExponentVector((2, 2))
    growth = refinement_growth(
        lambda g: multi_ap_constant(WeightVector([pw(a1, g), pw(a2, g)], P), P,
                                    CubeFamily(g, "shifted_dyadic")), G)
    assert growth <= 2.0


def test_characterization_ones():
    P = ExponentVector((2, 2))
    r = characterization_check(WeightVector([ONE, ONE], P), P, FAM, threshold=1.0 + 1e-12)
    assert r.multi_finite and r.components_finite and r.agreement


@pytest.mark.parametrize("a1", [-0.8, -0.3, 0.0, 0.4, 0.8])
@pytest.mark.parametrize("a2", [-0.8, 0.0, 0.8])
def test_characterization_admissible_sweep(a1, a2):
    P = ExponentVector((2, 2))
    r = refined_characterization([lambda x: np.abs(x) ** a1, lambda x: np.abs(x) ** a2], P, G)
    assert r.multi_finite and r.components_finite


@pytest.mark.parametrize("a1,a2", [(5.0, 0.0), (-7.0, 0.0), (3.0, 3.0), (-6.0, 0.5)])
def test_characterization_adversarial(a1, a2):
    P = ExponentVector((2, 2))
    r = refined_characterization([lambda x: np.abs(x) ** a1, lambda x: np.abs(x) ** a2], P, G)
    assert not r.components_finite
    assert not r.multi_finite


def test_characterization_with_p_equal_one():
    P = ExponentVector((1, 2))
    r = refined_characterization([lambda x: np.abs(x) ** -0.3, lambda x: np.abs(x) ** 0.2], P, G)
    assert r.agreement and r.multi_finite
