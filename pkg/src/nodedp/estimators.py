"""Node-private edge-density estimators.

Three releases are provided:

* :func:`naive_estimate` adds Laplace noise scaled to the global
  sensitivity ``2/n`` of the edge density.
* :func:`estimate_concentrated` evaluates a reweighted edge count ``f(G)``
  that equals ``|E|`` on graphs whose degrees sit within ``k*`` of the
  average, and releases it with Student's t noise scaled to a beta-smooth
  upper bound on its local sensitivity.
* :func:`estimate_er` spends a Laplace query on a rough density, turns it
  into a concentration guess, and hands that to the concentrated
  estimator.

Seeded streams are for simulation. Releases made with a known seed are not
private.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ContractError, ParameterError
from .graph import (Graph, average_degree, edge_density, num_pairs, rewire_node,
                    scaled_deviations)
from .noise import RandomStream, sample_laplace, sample_student_t3

DEFAULT_SENS_CONST = 30.0
BETA_RULES = ("sqrt", "linear")


def _check_eps(eps):
    if not (isinstance(eps, (int, float, np.number)) and eps > 0 and not math.isnan(eps)):
        raise ParameterError(f"eps must be positive, got {eps!r}")


@dataclass(frozen=True)
class CdParams:
    """Configuration of the concentrated-degree estimator.

    Attributes:
        eps: Privacy parameter.
        k_star: Guess for the concentration parameter of the input graph.
        sens_const: Multiplier in the local-sensitivity bound
            ``C * ((k + k*)(1 + beta*k) + 1/beta)``.
        clamp: Clamp the released value to [0, 1].
        beta_rule: ``"sqrt"`` for ``beta = min(eps, 1/sqrt(k*))`` or
            ``"linear"`` for ``min(eps, 1/k*)``; ``k* = 0`` gives ``beta = eps``.
    """

    eps: float
    k_star: int = 0
    sens_const: float = DEFAULT_SENS_CONST
    clamp: bool = True
    beta_rule: str = "sqrt"

    def __post_init__(self):
        _check_eps(self.eps)
        if int(self.k_star) != self.k_star or self.k_star < 0:
            raise ParameterError(f"k_star must be a non-negative integer, got {self.k_star!r}")
        object.__setattr__(self, "k_star", int(self.k_star))
        if not (self.sens_const > 0 and math.isfinite(self.sens_const)):
            raise ParameterError(f"sens_const must be positive, got {self.sens_const!r}")
        if self.beta_rule not in BETA_RULES:
            raise ParameterError(f"beta_rule must be one of {BETA_RULES}, got {self.beta_rule!r}")

    @property
    def beta(self) -> float:
        if self.k_star == 0:
            return float(self.eps)
        cap = 1 / math.sqrt(self.k_star) if self.beta_rule == "sqrt" else 1 / self.k_star
        return float(min(self.eps, cap))


@dataclass(frozen=True)
class ErParams:
    """Configuration of the Erdos-Renyi wrapper.

    ``alpha`` defaults to ``1/n**2`` and ``p_floor`` to ``log(n)/n``, both
    resolved against the input graph at call time.
    """

    eps: float
    alpha: float | None = None
    p_floor: float | None = None
    sens_const: float = DEFAULT_SENS_CONST
    clamp: bool = True
    beta_rule: str = "sqrt"

    def __post_init__(self):
        _check_eps(self.eps)
        if self.alpha is not None and not 0 < self.alpha < 1:
            raise ParameterError(f"alpha must lie in (0, 1), got {self.alpha!r}")
        if self.p_floor is not None and not self.p_floor >= 0:
            raise ParameterError(f"p_floor must be non-negative, got {self.p_floor!r}")

    def resolved_alpha(self, n: int) -> float:
        return self.alpha if self.alpha is not None else 1.0 / n**2

    def resolved_p_floor(self, n: int) -> float:
        return self.p_floor if self.p_floor is not None else math.log(n) / n


@dataclass(frozen=True)
class WeightProfile:
    """Per-vertex trust weights of a graph under given parameters.

    ``interval`` is the trusted degree range ``[d_bar - k', d_bar + k']``
    with ``k' = k* + 3*k_g``; ``t[v]`` is the distance from ``deg(v)`` to it
    and ``wt[v] = max(0, 1 - beta*t[v])``.
    """

    k_g: int
    k_prime: int
    interval: tuple[float, float]
    t: np.ndarray
    wt: np.ndarray
    beta: float
    graph_fingerprint: str = field(repr=False)


@dataclass(frozen=True)
class PrivateEstimate:
    """A released density together with the values that produced it.

    Only ``p_hat`` (and the public configuration) may leave a deployment;
    every other numeric field depends on the graph without noise or on the
    noise itself. :meth:`to_record` drops them when ``deployment`` is set.
    """

    mechanism: str
    p_hat: float
    p_unclamped: float
    f_raw: float
    s: float
    noise_draw: float
    eps: float
    n: int
    seed: int
    stream_key: tuple
    k_star: int | None = None
    beta: float | None = None
    k_g: int | None = None
    laplace_draw: float | None = None
    p_tilde: float | None = None
    k_tilde: int | None = None

    def to_record(self, deployment: bool = False) -> dict:
        rec = {
            "mechanism": self.mechanism,
            "p_hat": self.p_hat,
            "eps": self.eps,
            "n": self.n,
        }
        if deployment:
            return rec
        rec.update(
            p_unclamped=self.p_unclamped,
            f_raw=self.f_raw,
            s=self.s,
            noise_draw=self.noise_draw,
            seed=self.seed,
            stream_key=".".join(map(str, self.stream_key)) or "-",
        )
        for name in ("k_star", "beta", "k_g", "laplace_draw", "p_tilde", "k_tilde"):
            value = getattr(self, name)
            if value is not None:
                rec[name] = value
        return rec


def _release(p_unclamped, clamp):
    return min(1.0, max(0.0, p_unclamped)) if clamp else p_unclamped


def naive_estimate(g: Graph, eps: float, rng: RandomStream, clamp: bool = True) -> PrivateEstimate:
    """Edge density plus Laplace noise of scale ``(2/n)/eps``."""
    _check_eps(eps)
    n = g.n
    p_g = edge_density(g)
    z = sample_laplace(rng, 1.0)
    # Changing one node's neighborhood moves at most n-1 edges.
    s = float(n - 1)
    raw = p_g + (2.0 / (eps * n)) * z
    return PrivateEstimate("naive", _release(raw, clamp), raw, float(g.m), s, z,
                           float(eps), n, rng.seed, rng.key)


def _outliers(sorted_dev, n, bound):
    # Number of vertices with n*|deg - d_bar| > n*bound (closed interval counts as inside).
    return sorted_dev.size - int(np.searchsorted(sorted_dev, n * bound, side="right"))


def find_k_g(g: Graph, k_star: int) -> int:
    """Smallest positive k with at most k vertices outside ``d_bar +- (k* + 3k)``.

    The predicate is monotone in k, so this binary searches ``[1, n]``.
    """
    n = g.n
    sorted_dev = np.sort(scaled_deviations(g))
    lo, hi = 1, n
    while lo < hi:
        mid = (lo + hi) // 2
        if _outliers(sorted_dev, n, k_star + 3 * mid) <= mid:
            hi = mid
        else:
            lo = mid + 1
    return lo


def compute_weight_profile(g: Graph, params: CdParams) -> WeightProfile:
    if g.n < 2:
        edge_density(g)  # raises InvalidGraphError
    n = g.n
    beta = params.beta
    k_g = find_k_g(g, params.k_star)
    k_prime = params.k_star + 3 * k_g
    d_bar = average_degree(g)
    excess = np.maximum(scaled_deviations(g) - n * k_prime, 0)
    t = excess / n
    wt = np.where(excess == 0, 1.0, np.maximum(0.0, 1.0 - beta * t))
    t.setflags(write=False)
    wt.setflags(write=False)
    return WeightProfile(k_g, k_prime, (d_bar - k_prime, d_bar + k_prime), t, wt,
                         beta, g.fingerprint)


def estimator_f(g: Graph, profile: WeightProfile, params: CdParams | None = None) -> float:
    """Sum over all unordered pairs of ``wt(e)*x_e + (1 - wt(e))*p_G``.

    Only pairs touching a vertex of weight below one differ from ``x_e``,
    so the sum is ``|E|`` plus a correction over those pairs: a linear term
    for each low-weight vertex against the full-weight vertices, and an
    explicit sum over pairs inside the low-weight set.

    Raises:
        ContractError: if ``profile`` was computed for a different graph, or
            for a different beta than ``params`` implies.
    """
    if profile.graph_fingerprint != g.fingerprint:
        raise ContractError("weight profile was computed for a different graph")
    if params is not None and params.beta != profile.beta:
        raise ContractError("weight profile was computed with different parameters")
    m = g.m
    low = np.flatnonzero(profile.wt < 1.0)
    if low.size == 0:
        return float(m)
    n = g.n
    p = edge_density(g)
    w_low = profile.wt[low]
    is_low = np.zeros(n, dtype=bool)
    is_low[low] = True
    pos = np.full(n, -1, dtype=np.int64)
    pos[low] = np.arange(low.size)

    u, v = g.edge_endpoints
    inner = is_low[u] & is_low[v]
    x_inner = np.zeros((low.size, low.size), dtype=bool)
    x_inner[pos[u[inner]], pos[v[inner]]] = True
    x_inner |= x_inner.T
    deg_inner = x_inner.sum(axis=1)

    # Low vertex against every full-weight vertex: pair weight is wt(u).
    deg_outer = g.degrees[low] - deg_inner
    outer = np.sum((1.0 - w_low) * (p * (n - low.size) - deg_outer))

    # Pairs with both endpoints of low weight, each counted once.
    iu, ju = np.triu_indices(low.size, 1)
    w_pair = np.minimum(w_low[iu], w_low[ju])
    both = np.sum((1.0 - w_pair) * (p - x_inner[iu, ju]))
    return float(m + outer + both)


def _smooth_terms(params):
    beta = params.beta
    if not (beta > 0 and math.isfinite(beta)):
        raise ParameterError(f"beta must be positive and finite, got {beta}")
    return beta, params.sens_const, params.k_star


def sensitivity_envelope(k: float, params: CdParams) -> float:
    """``C * ((k + k*)(1 + beta*k) + 1/beta)``, the local-sensitivity bound at ``k_G = k``."""
    beta, c, ks = _smooth_terms(params)
    return c * ((k + ks) * (1 + beta * k) + 1 / beta)


def smooth_bound_for(k_g: int, params: CdParams) -> float:
    """sup over real l >= 0 of ``exp(-beta*l) * envelope(k_g + l)``.

    The derivative of the objective has the sign of ``1 - beta*(k_g + l + k*)``,
    so the supremum sits at ``l = max(0, 1/beta - k_g - k*)``.
    """
    beta, c, ks = _smooth_terms(params)

    def h(ell):
        x = k_g + ell
        return c * math.exp(-beta * ell) * ((x + ks) + beta * x * (x + ks) + 1 / beta)

    ell_star = max(0.0, 1 / beta - k_g - ks)
    return max(h(0.0), h(ell_star))


def smooth_bound(profile: WeightProfile, params: CdParams) -> float:
    if params.beta != profile.beta:
        raise ContractError("weight profile was computed with different parameters")
    return smooth_bound_for(profile.k_g, params)


def estimate_concentrated(g: Graph, params: CdParams, rng: RandomStream) -> PrivateEstimate:
    """Release ``(f(G) + (s/eps)*Z) / C(n,2)`` with Z ~ Student's t(3)."""
    profile = compute_weight_profile(g, params)
    f = estimator_f(g, profile, params)
    s = smooth_bound(profile, params)
    z = sample_student_t3(rng)
    raw = (f + (s / params.eps) * z) / num_pairs(g.n)
    return PrivateEstimate("concentrated", _release(raw, params.clamp), raw, f, s, z,
                           float(params.eps), g.n, rng.seed, rng.key,
                           k_star=params.k_star, beta=params.beta, k_g=profile.k_g)


def er_k_tilde(p_tilde: float, n: int, alpha: float) -> int:
    return math.ceil(math.sqrt(p_tilde * n * math.log(n / alpha)))


def estimate_er(g: Graph, params: ErParams, rng: RandomStream) -> PrivateEstimate:
    """Estimate the parameter p of G(n, p).

    A Laplace release of the density (scale ``2/(eps*n)``) is shifted up by
    ``4*log(1/alpha)/(eps*n)``, floored at ``p_floor``, and converted to the
    concentration guess ``ceil(sqrt(p~ * n * log(n/alpha)))`` for
    :func:`estimate_concentrated`. Each stage spends ``eps``.
    """
    n = g.n
    alpha = params.resolved_alpha(n)
    if not 0 < alpha < 1:
        raise ParameterError(f"alpha must lie in (0, 1), got {alpha}")
    eps = params.eps
    lap = sample_laplace(rng, 1.0)
    p_rough = edge_density(g) + (2.0 / (eps * n)) * lap
    p_tilde = max(p_rough + 4 * math.log(1 / alpha) / (eps * n), params.resolved_p_floor(n))
    k_tilde = er_k_tilde(p_tilde, n, alpha)
    cd = CdParams(eps, k_tilde, params.sens_const, params.clamp, params.beta_rule)
    est = estimate_concentrated(g, cd, rng)
    return replace(est, mechanism="er", laplace_draw=lap, p_tilde=p_tilde, k_tilde=k_tilde)


def f_value(g: Graph, params: CdParams) -> float:
    """``f(G)`` evaluated with the graph's own weight profile."""
    return estimator_f(g, compute_weight_profile(g, params), params)


def random_neighborhood(g: Graph, v: int, rng: RandomStream, params: CdParams | None = None):
    """Sample a replacement neighborhood for ``v``.

    The target degree is drawn from a mixture that stresses the estimator:
    uniform over ``[0, n-1]``, the extremes, and (given ``params``) degrees
    just inside and outside the trusted band and at the edge of the
    weight ramp. Half of the time the current neighborhood is edited
    toward the target instead of replaced.
    """
    gen = rng.generator
    n = g.n
    others = np.delete(np.arange(n), v)
    mode = gen.integers(4 if params is not None else 2)
    if mode == 0:
        d = int(gen.integers(n))
    elif mode == 1:
        d = int(gen.choice([0, n - 1]))
    else:
        k_prime = params.k_star + 3 * find_k_g(g, params.k_star)
        ramp = 1 / params.beta
        offset = k_prime + (gen.uniform(-3, 3) if mode == 2 else ramp * gen.uniform(0, 1.5))
        d = int(round(average_degree(g) + gen.choice([-1, 1]) * offset))
    d = min(max(d, 0), n - 1)
    if gen.integers(2) == 0:
        return gen.choice(others, size=d, replace=False)
    current = g.neighbors(v)
    if d <= current.size:
        return gen.choice(current, size=d, replace=False)
    pool = np.setdiff1d(others, current)
    return np.concatenate((current, gen.choice(pool, size=d - current.size, replace=False)))


def local_sensitivity_probe(g: Graph, params: CdParams, trials: int, rng: RandomStream,
                            sampler=None) -> float:
    """Largest ``|f(G) - f(G')|`` over ``trials`` sampled node rewirings ``G'``.

    Each value is attained by an actual neighbor, so the result is a lower
    bound on the local sensitivity of ``f`` at ``g``. ``sampler(g, v, rng)``
    overrides :func:`random_neighborhood`.
    """
    if trials < 1:
        raise ParameterError(f"trials must be at least 1, got {trials}")
    if sampler is None:
        def sampler(graph, node, stream):
            return random_neighborhood(graph, node, stream, params)
    f0 = f_value(g, params)
    best = 0.0
    gen = rng.generator
    for _ in range(trials):
        v = int(gen.integers(g.n))
        g2 = rewire_node(g, v, sampler(g, v, rng))
        best = max(best, abs(f0 - f_value(g2, params)))
    return best
