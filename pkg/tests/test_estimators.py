import math

import numpy as np
import pytest

from nodedp.errors import ContractError, InvalidGraphError, ParameterError
from nodedp.estimators import (CdParams, ErParams, compute_weight_profile, er_k_tilde,
                               estimate_concentrated, estimate_er, estimator_f, find_k_g,
                               local_sensitivity_probe, naive_estimate, smooth_bound,
                               smooth_bound_for)
from nodedp.graph import (Graph, concentration_parameter, cycle, disjoint_cliques,
                          edge_density, near_equal_sizes, num_pairs, sample_er, star)
from nodedp.noise import RandomStream, sample_laplace, sample_student_t3

from oracles import brute_force_f, definition_profile, grid_smooth_bound


# -- parameters ---------------------------------------------------------------

def test_beta_rules():
    assert CdParams(0.5, 0).beta == 0.5
    assert CdParams(1.0, 16).beta == 0.25
    assert CdParams(0.1, 16).beta == 0.1
    assert CdParams(1.0, 16, beta_rule="linear").beta == 1 / 16
    for k in (0, 1, 7, 1000):
        assert CdParams(0.3, k).beta <= 0.3


@pytest.mark.parametrize("kwargs", [
    {"eps": 0}, {"eps": -1}, {"eps": math.nan}, {"eps": 1, "k_star": -1},
    {"eps": 1, "k_star": 1.5}, {"eps": 1, "sens_const": 0}, {"eps": 1, "beta_rule": "cube"},
])
def test_cd_params_validation(kwargs):
    with pytest.raises(ParameterError):
        CdParams(**kwargs)


def test_er_params_validation():
    with pytest.raises(ParameterError):
        ErParams(1.0, alpha=1.0)
    with pytest.raises(ParameterError):
        ErParams(1.0, alpha=0.0)
    assert ErParams(1.0).resolved_alpha(10) == 0.01
    assert ErParams(1.0).resolved_p_floor(100) == pytest.approx(math.log(100) / 100)


# -- naive --------------------------------------------------------------------

def test_naive_vanishing_noise(rng):
    g = sample_er(300, 0.2, rng)
    est = naive_estimate(g, 1e9, RandomStream(1))
    assert est.p_hat == pytest.approx(edge_density(g), abs=1e-6)


def test_naive_zero_mean_on_empty_graph():
    g = Graph.empty(200)
    raw = np.array([naive_estimate(g, 1.0, RandomStream(3, s)).p_unclamped
                    for s in range(10_000)])
    se = raw.std(ddof=1) / math.sqrt(raw.size)
    assert abs(raw.mean()) <= 3 * se
    clamped = naive_estimate(g, 1.0, RandomStream(3, 0))
    assert 0.0 <= clamped.p_hat <= 1.0


def test_naive_variance(rng):
    n, eps = 500, 1.0
    g = sample_er(n, 0.3, rng)
    raw = np.array([naive_estimate(g, eps, RandomStream(4, s)).p_unclamped
                    for s in range(10_000)])
    assert raw.var(ddof=1) == pytest.approx(8 / (eps**2 * n**2), rel=0.15)


def test_naive_rejects_bad_eps(rng):
    with pytest.raises(ParameterError):
        naive_estimate(cycle(5), 0.0, rng)


# -- weight profile -----------------------------------------------------------

def test_profile_cycle():
    prof = compute_weight_profile(cycle(10), CdParams(1.0, 0))
    assert prof.k_g == 1 and np.all(prof.wt == 1.0) and np.all(prof.t == 0)


def test_profile_star():
    prof = compute_weight_profile(star(10), CdParams(0.1, 0))
    assert prof.k_g == 1 and prof.k_prime == 3
    assert prof.interval == pytest.approx((1.8 - 3, 1.8 + 3))
    assert prof.t[0] == pytest.approx(9 - 4.8)
    assert prof.wt[0] == pytest.approx(1 - 0.1 * 4.2)
    assert np.all(prof.wt[1:] == 1.0)


def test_profile_boundary_counts_as_inside():
    # K_{1,4} plus three isolated nodes: d_bar = 1, center deviation 3 = k' exactly.
    g = Graph(8, [(0, 1), (0, 2), (0, 3), (0, 4)])
    prof = compute_weight_profile(g, CdParams(1.0, 0))
    assert prof.k_prime == 3
    assert prof.t[0] == 0 and prof.wt[0] == 1.0


def test_profile_all_ones_when_k_star_covers_concentration(rng):
    for s in range(10):
        g = sample_er(60, 0.3, RandomStream(8, s))
        prof = compute_weight_profile(g, CdParams(0.5, concentration_parameter(g)))
        assert prof.k_g == 1 and np.all(prof.wt == 1.0)


def test_profile_matches_definition():
    for s in range(40):
        stream = RandomStream(12, s)
        g = _mixed_graph(stream, s)
        params = CdParams([0.1, 0.5, 2.0][s % 3], [0, 1, 3][s % 3])
        prof = compute_weight_profile(g, params)
        k_g, t, wt = definition_profile(g, params.k_star, params.beta)
        assert prof.k_g == k_g
        np.testing.assert_allclose(prof.t, t, atol=1e-9)
        np.testing.assert_allclose(prof.wt, wt, atol=1e-9)


def test_k_g_needs_two_nodes():
    with pytest.raises(InvalidGraphError):
        compute_weight_profile(Graph(1), CdParams(1.0))


def test_find_k_g_more_outliers():
    # Four hubs on 40 nodes: k* = 0 needs k_G large enough to fit them.
    edges = [(h, v) for h in range(4) for v in range(4, 40)]
    g = Graph(40, edges)
    assert find_k_g(g, 0) == definition_profile(g, 0, 1.0)[0]


# -- f ------------------------------------------------------------------------

def test_f_exact_on_concentrated_graphs():
    for s in range(10):
        g = sample_er(80, 0.4, RandomStream(13, s))
        params = CdParams(1.0, concentration_parameter(g))
        assert estimator_f(g, compute_weight_profile(g, params), params) == g.m


def test_f_empty_graph():
    for params in (CdParams(1.0, 0), CdParams(0.01, 5)):
        g = Graph.empty(12)
        assert estimator_f(g, compute_weight_profile(g, params), params) == 0.0


def test_f_star_matches_pair_sum():
    g = star(10)
    params = CdParams(0.25, 0)
    prof = compute_weight_profile(g, params)
    assert estimator_f(g, prof, params) == pytest.approx(brute_force_f(g, prof.wt), abs=1e-12)
    # Center weight is clipped to 0, so its 9 pairs each contribute p_G = 0.2.
    assert estimator_f(g, prof, params) == pytest.approx(1.8, abs=1e-12)


def test_f_rejects_stale_profile(rng):
    g = sample_er(30, 0.3, rng)
    h = sample_er(30, 0.3, rng)
    params = CdParams(1.0, 0)
    with pytest.raises(ContractError):
        estimator_f(h, compute_weight_profile(g, params), params)
    with pytest.raises(ContractError):
        estimator_f(g, compute_weight_profile(g, params), CdParams(0.5, 0))


# -- smooth bound -------------------------------------------------------------

def test_smooth_bound_clipped_maximizer():
    params = CdParams(0.5, 16)  # beta = 0.25, k* = 16 >= 1/beta^2
    c, b, k = params.sens_const, params.beta, params.k_star
    assert smooth_bound_for(1, params) == pytest.approx(c * ((1 + k) + b * (1 + k) + 1 / b),
                                                        rel=1e-14)


@pytest.mark.parametrize("eps, k_star, k_g", [(0.1, 10, 1), (0.1, 0, 1), (0.05, 2, 3),
                                              (1.0, 0, 1), (0.2, 1, 4)])
def test_smooth_bound_matches_grid_search(eps, k_star, k_g):
    params = CdParams(eps, k_star, sens_const=1.0)
    hi = max(50.0, 2 / params.beta)
    expected = grid_smooth_bound(k_g, k_star, params.beta, 1.0, hi=hi)
    # Grid misses the true peak by at most h'' * step^2, far below 1e-6 here.
    assert smooth_bound_for(k_g, params) == pytest.approx(expected, abs=1e-6)
    assert smooth_bound_for(k_g, params) >= expected - 1e-12


def test_smooth_bound_on_concentrated_graph_is_order_k_plus_inverse_beta(rng):
    g = sample_er(200, 0.5, rng)
    k = concentration_parameter(g)
    params = CdParams(0.5, k)
    prof = compute_weight_profile(g, params)
    s = smooth_bound(prof, params)
    b, c = params.beta, params.sens_const
    assert prof.k_g == 1
    assert s <= c * (3 + 2 * k + b * (1 + k) + 3 / b)
    assert s >= c * (k + 1 / b)


# -- concentrated release -----------------------------------------------------

def test_concentrated_vanishing_noise(rng):
    g = sample_er(300, 0.3, rng)
    est = estimate_concentrated(g, CdParams(1e9, concentration_parameter(g)), RandomStream(2))
    assert est.f_raw == g.m
    assert est.p_hat == pytest.approx(edge_density(g), abs=1e-6)


def test_concentrated_release_formula(rng):
    g = sample_er(100, 0.2, rng)
    params = CdParams(0.7, 3)
    est = estimate_concentrated(g, params, RandomStream(5, 1))
    z = sample_student_t3(RandomStream(5, 1))
    assert est.noise_draw == z
    expected = (est.f_raw + est.s / 0.7 * z) / num_pairs(100)
    assert est.p_unclamped == pytest.approx(expected, rel=1e-15)
    assert est.p_hat == min(1.0, max(0.0, expected))


def test_concentrated_mse_bound():
    n, p, eps = 1000, 0.5, 1.0
    k = math.ceil(math.sqrt(p * n * math.log(n * 1e3)))
    g = sample_er(n, p, RandomStream(31))
    assert concentration_parameter(g) <= k
    params = CdParams(eps, k)
    p_g = edge_density(g)
    errs = np.array([estimate_concentrated(g, params, RandomStream(32, s)).p_hat - p_g
                     for s in range(1000)])
    # E[(released - p_G)^2] <= 3 (s/eps)^2 / C(n,2)^2 with s <= C (10 k + 3/eps) for
    # k >= 1, giving MSE <= c' (k^2/(eps^2 n^4) + 1/(eps^4 n^4)) with
    # c' = 2400 C^2 (n/(n-1))^2.
    c_prime = 2400 * params.sens_const**2 * (n / (n - 1)) ** 2
    bound = c_prime * (k**2 / (eps**2 * n**4) + 1 / (eps**4 * n**4))
    assert np.mean(errs**2) <= bound


# -- Erdos-Renyi release ------------------------------------------------------

def test_er_vanishing_noise():
    for s in range(5):
        g = sample_er(400, 0.3, RandomStream(41, s))
        est = estimate_er(g, ErParams(1e9), RandomStream(42, s))
        assert est.p_hat == pytest.approx(edge_density(g), abs=1e-4)


def test_er_draws_one_laplace_then_one_t3(rng):
    g = sample_er(150, 0.3, rng)
    params = ErParams(0.8, alpha=1e-4)
    est = estimate_er(g, params, RandomStream(7, 7))
    replay = RandomStream(7, 7)
    lap = sample_laplace(replay, 1.0)
    z = sample_student_t3(replay)
    assert est.laplace_draw == lap and est.noise_draw == z
    n = g.n
    p_tilde = max(edge_density(g) + 2 / (0.8 * n) * lap + 4 * math.log(1e4) / (0.8 * n),
                  math.log(n) / n)
    assert est.p_tilde == pytest.approx(p_tilde, rel=1e-15)
    assert est.k_tilde == math.ceil(math.sqrt(p_tilde * n * math.log(n / 1e-4)))
    assert est.k_star == est.k_tilde and est.mechanism == "er"


def test_er_floors_negative_density():
    g = Graph.empty(50)
    floored = 0
    for s in range(200):
        est = estimate_er(g, ErParams(0.05, alpha=0.5), RandomStream(8, s))
        assert est.p_tilde >= math.log(50) / 50
        floored += est.p_tilde == math.log(50) / 50
        assert 0.0 <= est.p_hat <= 1.0
    assert floored > 0


def test_er_k_tilde_rounds_up():
    assert er_k_tilde(0.25, 100, 0.01) == math.ceil(math.sqrt(25 * math.log(1e4)))


def test_er_unbiased_at_moderate_scale():
    n, p = 1000, 0.2
    vals = np.array([estimate_er(sample_er(n, p, RandomStream(51, s)), ErParams(1.0),
                                 RandomStream(52, s)).p_hat for s in range(1000)])
    se = vals.std(ddof=1) / math.sqrt(vals.size)
    assert abs(vals.mean() - p) <= 3 * se


# -- sensitivity probe --------------------------------------------------------

def test_probe_identity_rewires_give_zero(rng):
    g = sample_er(40, 0.3, rng)
    probe = local_sensitivity_probe(g, CdParams(0.5, 2), 50, rng,
                                    sampler=lambda graph, v, r: graph.neighbors(v))
    assert probe == 0.0


def test_probe_hand_computed_single_rewire():
    # Empty graph on 20 nodes, node v gets 4 neighbors; eps = beta = 1/4.
    # G': p' = 4/190, d_bar' = 0.4, k_G = 1 (only v is beyond 3), t_v = 0.6, wt_v = 0.85;
    # f(G') = 4 * 0.85 + 19 * 0.15 * p' = 3.46 and f(G) = 0.
    n = 20
    params = CdParams(0.25, 0)
    probe = local_sensitivity_probe(
        Graph.empty(n), params, 3, RandomStream(1),
        sampler=lambda graph, v, r: [x for x in range(n) if x != v][:4])
    assert probe == pytest.approx(3.46, abs=1e-12)


def test_probe_dominated_by_smooth_bound_on_er():
    g = sample_er(500, 0.3, RandomStream(61))
    for k_star in (0, concentration_parameter(g)):
        params = CdParams(1.0, k_star)
        probe = local_sensitivity_probe(g, params, 1000, RandomStream(62, k_star))
        assert 0 < probe <= smooth_bound(compute_weight_profile(g, params), params)


def test_probe_rejects_zero_trials(rng):
    with pytest.raises(ParameterError):
        local_sensitivity_probe(cycle(5), CdParams(1.0), 0, rng)


def _mixed_graph(stream, s):
    kind = s % 3
    if kind == 0:
        return sample_er(int(stream.generator.integers(5, 60)), 0.3, stream)
    if kind == 1:
        return star(int(stream.generator.integers(5, 60)))
    n = int(stream.generator.integers(6, 60))
    return disjoint_cliques(near_equal_sizes(n, int(stream.generator.integers(1, 6))))
