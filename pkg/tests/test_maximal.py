import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from multicz.corpus import log_symbol
from multicz.lattice import (CubeFamily, Grid, GridFunction, build_grid_function, indicator,
                             superlevel_measure)
from multicz.maximal import (SymbolTuple, bmo_norm, hardy_littlewood, m_i_llogl, m_llogl,
                             m_sigma_llogl, maximal_delta, sharp_maximal_delta)
from multicz.orlicz import phi_inverse

G = Grid(0.0, 4.0, 256)
FAM = CubeFamily(G, "shifted_dyadic")


def rand_fn(seed, grid=G, signed=True):
    rng = np.random.default_rng(seed)
    v = rng.normal(0, 2, grid.n_points) * (rng.random(grid.n_points) < 0.3)
    return GridFunction(grid, v if signed else np.abs(v))


seeds = st.integers(0, 2 ** 32 - 1)


@pytest.mark.parametrize("c", [0.0, 2.5, -1.0])
def test_bmo_of_constant(c):
    assert bmo_norm(GridFunction(G, np.full(256, c)), FAM) == pytest.approx(0.0, abs=1e-14)


def test_bmo_of_log_stable():
    vals = []
    for n in (512, 1024):
        g = Grid(8.0, 8.0, n)
        vals.append(bmo_norm(build_grid_function(g, log_symbol), CubeFamily(g, "shifted_dyadic")))
    assert vals[1] == pytest.approx(vals[0], rel=0.1)


def test_bmo_of_linear_grows_with_window():
    # the mean deviation of x over an interval is |Q| / 4; the window is the largest cube
    vals = []
    for R in (4.0, 8.0, 16.0):
        g = Grid(0.0, R, 256)
        vals.append(bmo_norm(build_grid_function(g, lambda x: x), CubeFamily(g, "dyadic")))
    np.testing.assert_allclose(vals, [2.0, 4.0, 8.0], rtol=1e-12)


def test_symbol_tuple_caches_norms():
    b = build_grid_function(G, lambda x: np.sin(3 * x) + 5.0)
    st_ = SymbolTuple([b, b * 2.0], FAM)
    assert st_.m == 2
    assert st_.bmo_norms[0] == pytest.approx(bmo_norm(b, FAM), rel=1e-10)
    assert st_.norm_product == pytest.approx(2 * bmo_norm(b, FAM) ** 2, rel=1e-10)
    assert abs(np.mean(st_.b_vec[0].values)) < 1e-12


@pytest.mark.parametrize("delta", [0.25, 1.0, 2.0])
def test_maximal_of_constant(delta):
    out = maximal_delta(GridFunction(G, np.full(256, -3.0)), delta, FAM)
    np.testing.assert_allclose(out.values, 3.0, rtol=1e-12)


def test_maximal_rejects_bad_delta():
    with pytest.raises(ValueError):
        maximal_delta(indicator(G, 0, 1), 0.0, FAM)
    with pytest.raises(ValueError):
        sharp_maximal_delta(indicator(G, 0, 1), -1.0, FAM)


def test_maximal_indicator_closed_form_all_intervals():
    g = Grid(0.5, 16.0, 1024)
    M = hardy_littlewood(indicator(g, 0.0, 1.0), CubeFamily(g, "all"))
    for lam in np.geomspace(4.01 * g.h, 0.99, 40):
        assert abs(superlevel_measure(M, lam) - (2 / lam - 1)) <= 4 * g.h


@given(seeds, st.sampled_from([0.3, 1.0, 2.0]))
def test_maximal_dominates_function(seed, delta):
    f = rand_fn(seed)
    assert np.all(maximal_delta(f, delta, FAM).values >= np.abs(f.values) * (1 - 1e-12))


@given(seeds)
def test_maximal_monotone_in_delta(seed):
    f = rand_fn(seed)
    outs = [maximal_delta(f, d, FAM).values for d in (0.25, 0.5, 1.0, 2.0)]
    for a, b in zip(outs, outs[1:]):
        assert np.all(a <= b * (1 + 1e-10) + 1e-300)


def test_sharp_of_constant():
    assert not sharp_maximal_delta(GridFunction(G, np.full(256, 4.0)), 0.5, FAM).values.any()


def test_sharp_max_equals_bmo():
    b = build_grid_function(G, lambda x: np.sign(x) * np.sqrt(np.abs(x)))
    # |b| for delta = 1: compare with the oscillation of |b|
    assert sharp_maximal_delta(b, 1.0, FAM).values.max() == pytest.approx(bmo_norm(abs(b), FAM),
                                                                           rel=1e-14)


@given(seeds)
def test_sharp_at_most_twice_maximal(seed):
    f = rand_fn(seed)
    assert np.all(sharp_maximal_delta(f, 1.0, FAM).values
                  <= 2 * hardy_littlewood(f, FAM).values * (1 + 1e-12))


@given(seeds, st.sampled_from([0.25, 0.5, 2.0]))
def test_sharp_delta_bound(seed, delta):
    # |f|^delta - avg <= |f|^delta + avg gives the factor 2^(1/delta)
    f = rand_fn(seed)
    assert np.all(sharp_maximal_delta(f, delta, FAM).values
                  <= 2 ** (1 / delta) * maximal_delta(f, delta, FAM).values * (1 + 1e-12))


@pytest.mark.parametrize("k", [0, 1, 2])
def test_m_llogl_of_ones(k):
    one = GridFunction(G, np.ones(256))
    np.testing.assert_allclose(m_llogl([one, one], FAM, k).values, 1.0, rtol=1e-10)


def test_m_llogl_indicator_witness():
    g = Grid(8.0, 8.0, 256)
    chi = indicator(g, 0.0, 1.0)
    M = m_llogl([chi, chi], CubeFamily(g, "all")).values
    x = g.nodes
    far = x > np.e
    edge = x[far] + g.h / 2
    assert np.all(M[far] >= phi_inverse(1, edge) ** -2.0 * (1 - 1e-10))
    assert np.all(M[far] >= phi_inverse(1, x[far]) ** -2.0 * (1 - 2 * g.h))


@given(seeds, st.floats(-5, 5).filter(lambda c: abs(c) > 1e-2),
       st.floats(-5, 5).filter(lambda c: abs(c) > 1e-2))
def test_m_llogl_homogeneous(seed, c1, c2):
    f1, f2 = rand_fn(seed), rand_fn(seed + 1)
    a = m_llogl([f1 * c1, f2 * c2], FAM).values
    np.testing.assert_allclose(a, abs(c1 * c2) * m_llogl([f1, f2], FAM).values, rtol=1e-8)


@given(seeds)
def test_family_enlargement_never_decreases(seed):
    g = Grid(0.0, 1.0, 64)
    f = rand_fn(seed, g)
    outs = [m_llogl([f], CubeFamily(g, k)).values for k in ("dyadic", "shifted_dyadic", "all")]
    # the Luxemburg bisection stops at relative 1e-12, so compare at that level
    assert np.all(outs[0] <= outs[1] * (1 + 1e-10)) and np.all(outs[1] <= outs[2] * (1 + 1e-10))
    hl = [hardy_littlewood(f, CubeFamily(g, k)).values for k in ("dyadic", "shifted_dyadic", "all")]
    assert np.all(hl[0] <= hl[1]) and np.all(hl[1] <= hl[2])


def test_m_sigma_examples():
    one = GridFunction(G, np.ones(256))
    np.testing.assert_allclose(m_sigma_llogl([one, one], FAM).values, 2.0, rtol=1e-10)
    f = rand_fn(3)
    np.testing.assert_array_equal(m_sigma_llogl([f], FAM).values, m_llogl([f], FAM).values)


@given(seeds)
def test_m_sigma_bounded_by_m_times_m_llogl(seed):
    f = [rand_fn(seed), rand_fn(seed + 7)]
    assert np.all(m_sigma_llogl(f, FAM).values <= 2 * m_llogl(f, FAM).values * (1 + 1e-10))
    assert np.all(m_i_llogl(f, 0, FAM).values <= m_llogl(f, FAM).values * (1 + 1e-10))


def test_m_llogl_needs_a_function():
    with pytest.raises(ValueError):
        m_llogl([], FAM)


def test_grid_mismatch_rejected():
    with pytest.raises(ValueError):
        maximal_delta(indicator(Grid(0.0, 4.0, 128), 0, 1), 1.0, FAM)


def test_multilinear_weak_type_stable():
    # |{M(f1, f2) > t^2}| <= C prod ||f_j||_1 / t over random indicator pairs
    def worst(n):
        g = Grid(0.0, 8.0, n)
        fam = CubeFamily(g, "shifted_dyadic")
        rng = np.random.default_rng(5)
        out = 0.0
        for _ in range(20):
            a = rng.uniform(-3, 2, 2)
            f = [indicator(g, a[j], a[j] + rng.uniform(0.2, 1.0)) for j in range(2)]
            cv_norm = np.prod([f_.support()[0].size * g.h for f_ in f])
            M = m_llogl(f, fam, k=0)
            for t in np.geomspace(0.05, 1.0, 20):
                out = max(out, superlevel_measure(M, t * t) / (cv_norm ** 0.5 / t))
        return out
    c1, c2 = worst(256), worst(512)
    assert max(c1, c2) / min(c1, c2) < 2
