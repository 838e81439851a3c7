"""Property tests for graph and estimator invariants."""

import math

import numpy as np
from hypothesis import given, settings, strategies as st

from nodedp.estimators import (CdParams, compute_weight_profile, estimator_f, find_k_g,
                               sensitivity_envelope, smooth_bound, smooth_bound_for)
from nodedp.graph import (concentration_parameter, degree_summary, disjoint_cliques,
                          edge_density, near_equal_sizes, num_pairs, rewire_node, sample_er,
                          scaled_deviations, star)
from nodedp.harness import sample_family
from nodedp.noise import RandomStream

from oracles import brute_force_f, definition_profile

SETTINGS = settings(max_examples=150, deadline=None)


@st.composite
def graphs(draw, max_n=60):
    seed = draw(st.integers(0, 2**32))
    family = draw(st.sampled_from(["er", "star", "cliques", "sparse", "dense"]))
    n = draw(st.integers(2, max_n))
    stream = RandomStream(seed)
    if family == "er":
        return sample_er(n, draw(st.floats(0, 1)), stream)
    if family == "sparse":
        return sample_er(n, draw(st.floats(0, 0.1)), stream)
    if family == "dense":
        return sample_er(n, draw(st.floats(0.85, 1)), stream)
    if family == "star":
        return star(n)
    return disjoint_cliques(near_equal_sizes(n, draw(st.integers(1, n))))


params_st = st.builds(CdParams, eps=st.sampled_from([0.05, 0.2, 0.5, 1.0, 3.0]),
                      k_star=st.integers(0, 30))


@SETTINGS
@given(graphs())
def test_density_and_average_degree(g):
    s = degree_summary(g)
    assert 0.0 <= s.p_hat_empirical <= 1.0
    assert math.isclose(s.d_bar, (g.n - 1) * s.p_hat_empirical, rel_tol=1e-12, abs_tol=1e-12)
    assert int(s.degrees.sum()) == 2 * g.m


@SETTINGS
@given(graphs())
def test_concentration_parameter_is_minimal(g):
    k = concentration_parameter(g)
    d_bar = degree_summary(g).d_bar
    dev = np.abs(g.degrees - d_bar)
    assert np.all(dev <= k + 1e-9)
    if k >= 1:
        assert np.any(dev > k - 1 + 1e-9)


@SETTINGS
@given(graphs(), st.data())
def test_rewire_changes_only_edges_at_v(g, data):
    v = data.draw(st.integers(0, g.n - 1))
    others = [x for x in range(g.n) if x != v]
    nbrs = data.draw(st.sets(st.sampled_from(others))) if others else set()
    h = rewire_node(g, v, nbrs)
    diff = g.edge_set() ^ h.edge_set()
    assert all(v in e for e in diff)
    assert set(h.neighbors(v).tolist()) == set(nbrs)
    assert h.n == g.n


@SETTINGS
@given(graphs(), params_st)
def test_binary_search_matches_linear_scan(g, params):
    k_g, t, wt = definition_profile(g, params.k_star, params.beta)
    assert find_k_g(g, params.k_star) == k_g
    prof = compute_weight_profile(g, params)
    np.testing.assert_allclose(prof.wt, wt, atol=1e-9)


@SETTINGS
@given(graphs(), params_st)
def test_k_g_predicate_is_monotone(g, params):
    dev = np.sort(scaled_deviations(g))

    def ok(k):
        return int(np.sum(dev > g.n * (params.k_star + 3 * k))) <= k

    values = [ok(k) for k in range(1, g.n + 1)]
    first = values.index(True)
    assert all(values[first:])
    assert first + 1 == find_k_g(g, params.k_star)


@SETTINGS
@given(graphs(), params_st)
def test_weight_profile_invariants(g, params):
    prof = compute_weight_profile(g, params)
    np.testing.assert_allclose(prof.wt, np.maximum(0, 1 - params.beta * prof.t))
    assert np.all((prof.wt == 1.0) == (prof.t == 0))
    assert int(np.sum(prof.t > 0)) <= prof.k_g
    assert prof.k_prime == params.k_star + 3 * prof.k_g


@SETTINGS
@given(graphs(), params_st)
def test_reduced_f_matches_pair_sum_and_range(g, params):
    prof = compute_weight_profile(g, params)
    f = estimator_f(g, prof, params)
    assert math.isclose(f, brute_force_f(g, prof.wt), rel_tol=1e-9, abs_tol=1e-9)
    assert -1e-9 <= f <= num_pairs(g.n) + 1e-9


@SETTINGS
@given(graphs(), params_st)
def test_f_exact_when_k_star_covers_concentration(g, params):
    params = CdParams(params.eps, max(params.k_star, concentration_parameter(g)))
    assert estimator_f(g, compute_weight_profile(g, params), params) == g.m


@SETTINGS
@given(st.integers(0, 2**32), params_st)
def test_smoothness_on_adjacent_pairs(seed, params):
    stream = RandomStream(seed)
    gen = stream.generator
    g = sample_family(["er", "star", "cliques"][seed % 3], stream)
    v = int(gen.integers(g.n))
    d = int(gen.integers(g.n))
    h = rewire_node(g, v, gen.choice(np.delete(np.arange(g.n), v), size=d, replace=False))
    s_g = smooth_bound(compute_weight_profile(g, params), params)
    s_h = smooth_bound(compute_weight_profile(h, params), params)
    bound = math.exp(params.beta) * (1 + 1e-12)
    assert s_h <= bound * s_g and s_g <= bound * s_h
    pg, ph = compute_weight_profile(g, params), compute_weight_profile(h, params)
    assert abs(pg.k_g - ph.k_g) <= 1
    assert abs(estimator_f(g, pg, params) - estimator_f(h, ph, params)) <= min(s_g, s_h)


@SETTINGS
@given(st.integers(1, 200), params_st)
def test_smooth_bound_sandwich(k_g, params):
    s = smooth_bound_for(k_g, params)
    b, c, k = params.beta, params.sens_const, params.k_star
    assert s >= sensitivity_envelope(k_g, params) * (1 - 1e-12)
    assert s <= c * (3 * k_g + 2 * k + b * k_g * (k_g + k) + 3 / b) * (1 + 1e-12)
    # A grid over l never beats the closed form.
    ell = np.linspace(0, 3 / b + 5, 2001)
    x = k_g + ell
    h = c * np.exp(-b * ell) * ((x + k) + b * x * (x + k) + 1 / b)
    assert h.max() <= s * (1 + 1e-12)


@SETTINGS
@given(st.integers(2, 120), st.floats(0, 1), st.integers(0, 2**32))
def test_er_sampling_is_deterministic(n, p, seed):
    a = sample_er(n, p, RandomStream(seed, 1))
    b = sample_er(n, p, RandomStream(seed, 1))
    assert a == b and a.fingerprint == b.fingerprint
    assert 0 <= edge_density(a) <= 1
