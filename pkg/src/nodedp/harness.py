"""Monte Carlo experiments over G(n, p) and audits of the estimator's guarantees.

Every trial owns the stream ``root.child(cell_index, trial_index)``; the
graph is drawn from its child 0 and estimator ``j`` uses child ``j + 1``.
Results therefore depend only on the base seed, never on execution order.
"""

from __future__ import annotations

import io
import math
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from .errors import ConfigError, ConstructionError, ParameterError
from .estimators import (CdParams, ErParams, compute_weight_profile, estimate_concentrated,
                         estimate_er, estimator_f, naive_estimate, random_neighborhood,
                         smooth_bound, DEFAULT_SENS_CONST)
from .graph import (Graph, concentration_parameter, disjoint_cliques, edge_density,
                    near_equal_sizes, num_pairs, rewire_node, sample_er, star)
from .noise import RandomStream
from .witnesses import witness_large_k, witness_small_k

ESTIMATORS = ("nonprivate", "naive", "concentrated", "er")
FAMILIES = ("er", "star", "cliques")


@dataclass(frozen=True)
class ExperimentConfig:
    """A grid of ``(n, p, eps)`` cells and how to run each.

    ``k_star`` is either ``"oracle"`` (``ceil(sqrt(p*n*log(n/alpha)))`` from
    the true p) or a fixed non-negative integer. ``alpha`` defaults to
    ``1/n**2`` per cell.
    """

    n_values: tuple
    p_values: tuple
    eps_values: tuple
    trials: int
    estimators: tuple = ESTIMATORS
    seed: int = 0
    k_star: str | int = "oracle"
    alpha: float | None = None
    sens_const: float = DEFAULT_SENS_CONST
    clamp: bool = True

    def __post_init__(self):
        for name in ("n_values", "p_values", "eps_values", "estimators"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
            if not getattr(self, name):
                raise ConfigError(f"grid axis {name!r} is empty")
        if self.trials < 1:
            raise ConfigError(f"trials must be at least 1, got {self.trials}")
        unknown = [e for e in self.estimators if e not in ESTIMATORS]
        if unknown:
            raise ConfigError(f"unknown estimators {unknown}; choose from {ESTIMATORS}")
        if self.k_star != "oracle" and (isinstance(self.k_star, str) or self.k_star < 0):
            raise ConfigError(f"k_star must be 'oracle' or a non-negative integer, got {self.k_star!r}")

    def cells(self):
        return [(n, p, eps) for n in self.n_values for p in self.p_values
                for eps in self.eps_values]

    def cell_problem(self, n, p, eps) -> str | None:
        """Why a cell cannot run, or None."""
        if int(n) != n or n < 2:
            return f"n must be an integer >= 2, got {n}"
        if not 0 <= p <= 1:
            return f"p must lie in [0, 1], got {p}"
        if not eps > 0:
            return f"eps must be positive, got {eps}"
        alpha = self.cell_alpha(n)
        if not 0 < alpha < 1:
            return f"alpha must lie in (0, 1), got {alpha}"
        return None

    def invalid_cells(self):
        return [(c, r) for c in self.cells() if (r := self.cell_problem(*c)) is not None]

    def cell_alpha(self, n):
        return self.alpha if self.alpha is not None else 1.0 / n**2

    def cell_k(self, n, p):
        if self.k_star == "oracle":
            return oracle_k(n, p, self.cell_alpha(n))
        return int(self.k_star)

    def manifest(self) -> str:
        parts = [f"{f.name}={_manifest_value(getattr(self, f.name))}" for f in fields(self)]
        return " ".join(parts)


def _manifest_value(v):
    if isinstance(v, tuple):
        return ",".join(map(str, v))
    return str(v)


def oracle_k(n: int, p: float, alpha: float) -> int:
    """Concentration width of G(n, p) at failure probability about alpha."""
    return math.ceil(math.sqrt(p * n * math.log(n / alpha)))


@dataclass(frozen=True)
class ResultRow:
    n: int
    p: float
    eps: float
    estimator: str
    k: int
    trials: int
    seed: int
    status: str
    reason: str
    mse_true: float
    mse_true_se: float
    mse_emp: float
    mse_emp_se: float
    mse_true_unclamped: float
    mse_true_unclamped_se: float
    bias: float
    bias_se: float
    bias_unclamped: float
    bias_unclamped_se: float
    theory_nonprivate: float
    theory_k_term: float
    theory_eps_term: float
    theory_naive: float


def theory_terms(n, p, eps, k) -> dict:
    """Reference error terms for one cell, computed from scratch."""
    return {
        "theory_nonprivate": p * (1 - p) / num_pairs(n),
        "theory_k_term": k**2 / (eps**2 * n**4),
        "theory_eps_term": 1 / (eps**4 * n**4),
        "theory_naive": 8 / (eps**2 * n**2),
    }


def _mean_se(x):
    x = np.asarray(x, dtype=float)
    if x.size < 2:
        return float(x.mean()), 0.0
    return float(x.mean()), float(x.std(ddof=1) / math.sqrt(x.size))


def _run_one(name, g, n, p, eps, k, config, stream):
    """Return (released, unclamped) for one estimator on one graph."""
    if name == "nonprivate":
        v = edge_density(g)
        return v, v
    if name == "naive":
        est = naive_estimate(g, eps, stream, clamp=config.clamp)
    elif name == "concentrated":
        est = estimate_concentrated(g, CdParams(eps, k, config.sens_const, config.clamp), stream)
    else:
        est = estimate_er(g, ErParams(eps, alpha=config.cell_alpha(n),
                                      sens_const=config.sens_const, clamp=config.clamp), stream)
    return est.p_hat, est.p_unclamped


def run_grid(config: ExperimentConfig) -> list[ResultRow]:
    """Run every estimator on fresh G(n, p) samples for every cell.

    Cells that violate a precondition yield one ``status="skipped"`` row
    per estimator, with the reason and NaN statistics.
    """
    root = RandomStream(config.seed)
    rows = []
    for ci, (n, p, eps) in enumerate(config.cells()):
        problem = config.cell_problem(n, p, eps)
        k = config.cell_k(n, p) if problem is None else 0
        if problem is not None:
            theory = {f: math.nan for f in ("theory_nonprivate", "theory_k_term",
                                            "theory_eps_term", "theory_naive")}
            for name in config.estimators:
                rows.append(ResultRow(n, p, eps, name, k, 0, config.seed, "skipped", problem,
                                      *([math.nan] * 10), **theory))
            continue
        n = int(n)
        released = np.empty((len(config.estimators), config.trials))
        unclamped = np.empty_like(released)
        p_emp = np.empty(config.trials)
        for t in range(config.trials):
            stream = root.child(ci, t)
            g = sample_er(n, p, stream.child(0))
            p_emp[t] = edge_density(g)
            for j, name in enumerate(config.estimators):
                released[j, t], unclamped[j, t] = _run_one(
                    name, g, n, p, eps, k, config, stream.child(j + 1))
        theory = theory_terms(n, p, eps, k)
        for j, name in enumerate(config.estimators):
            mse_true, mse_true_se = _mean_se((released[j] - p) ** 2)
            mse_emp, mse_emp_se = _mean_se((released[j] - p_emp) ** 2)
            mse_u, mse_u_se = _mean_se((unclamped[j] - p) ** 2)
            bias, bias_se = _mean_se(released[j] - p)
            bias_u, bias_u_se = _mean_se(unclamped[j] - p)
            rows.append(ResultRow(n, p, eps, name, k, config.trials, config.seed, "ok", "",
                                  mse_true, mse_true_se, mse_emp, mse_emp_se, mse_u, mse_u_se,
                                  bias, bias_se, bias_u, bias_u_se, **theory))
    order = {name: i for i, name in enumerate(ESTIMATORS)}
    rows.sort(key=lambda r: (r.n, r.p, r.eps, order[r.estimator]))
    return rows


def _csv_cell(v):
    if isinstance(v, float):
        return format(v, ".12g")
    return str(v)


def format_csv(rows, config: ExperimentConfig | None = None) -> str:
    """CSV text: a ``#`` manifest line, a header, then one line per row."""
    out = io.StringIO()
    if config is not None:
        out.write(f"# {config.manifest()}\n")
    names = [f.name for f in fields(ResultRow)]
    out.write(",".join(names) + "\n")
    for row in rows:
        d = asdict(row)
        out.write(",".join(_csv_cell(d[k]).replace(",", ";") for k in names) + "\n")
    return out.getvalue()


def write_csv(rows, path, config: ExperimentConfig | None = None) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_csv(rows, config))


# ---------------------------------------------------------------------------
# Audits


@dataclass
class AuditReport:
    name: str
    passed: bool
    summary: dict = field(default_factory=dict)
    violations: list = field(default_factory=list)

    def format(self) -> str:
        lines = [f"audit={self.name}", f"passed={self.passed}"]
        lines += [f"{k}={_csv_cell(v)}" for k, v in self.summary.items()]
        lines += [f"violation={v}" for v in self.violations]
        return "\n".join(lines) + "\n"


def sample_family(family: str, rng: RandomStream, n: int | None = None) -> Graph:
    """Random test graph: G(n, p), a star with stray edges, or noisy cliques."""
    gen = rng.generator
    if n is None:
        n = int(gen.integers(8, 121))
    if family == "er":
        return sample_er(n, float(gen.uniform(0.02, 0.9)), rng)
    if family == "star":
        base = star(n, center=int(gen.integers(n)))
        extra = sample_er(n, float(gen.uniform(0, 0.08)), rng)
        return _union(base, extra)
    if family == "cliques":
        parts = int(gen.integers(1, max(2, n // 4) + 1))
        base = disjoint_cliques(near_equal_sizes(n, parts))
        return _xor(base, sample_er(n, float(gen.uniform(0, 0.05)), rng))
    raise ParameterError(f"unknown graph family {family!r}; choose from {FAMILIES}")


def _union(a: Graph, b: Graph) -> Graph:
    e = np.unique(np.vstack((a.edges, b.edges)), axis=0)
    return Graph(a.n, e)


def _xor(a: Graph, b: Graph) -> Graph:
    sa, sb = a.edge_set(), b.edge_set()
    return Graph(a.n, sorted(sa ^ sb))


AUDIT_EPS = (0.1, 0.25, 0.5, 1.0, 2.0)
AUDIT_K = (0, 1, 2, 5, 10, 25)


def audit_smoothness(families=FAMILIES, pairs: int = 1000, rng: RandomStream | None = None,
                     sens_const: float = DEFAULT_SENS_CONST, sampler=None,
                     rel_tol: float = 1e-12) -> AuditReport:
    """Check beta-smoothness and dominance of the smooth bound on random adjacent pairs.

    For each pair a family, graph, eps and k* are drawn, one node is
    rewired (via :func:`random_neighborhood` or ``sampler(g, v, rng)``), and
    both ``S(G')/S(G)`` and ``S(G)/S(G')`` are compared against
    ``exp(beta)``. The observed ``|f(G) - f(G')|`` lower-bounds the local
    sensitivity at both graphs, so it must not exceed either bound.
    ``rel_tol`` absorbs rounding when the ratio equals ``exp(beta)``
    analytically.
    """
    if pairs < 1:
        raise ParameterError(f"pairs must be at least 1, got {pairs}")
    rng = rng if rng is not None else RandomStream(0)
    families = tuple(families)
    max_ratio = 0.0
    max_ratio_over_bound = 0.0
    max_probe_over_s = 0.0
    violations = []
    for i in range(pairs):
        stream = rng.child(i)
        gen = stream.generator
        family = families[int(gen.integers(len(families)))]
        params = CdParams(float(gen.choice(AUDIT_EPS)), int(gen.choice(AUDIT_K)), sens_const)
        g = sample_family(family, stream)
        v = int(gen.integers(g.n))
        nbrs = (sampler(g, v, stream) if sampler is not None
                else random_neighborhood(g, v, stream, params))
        g2 = rewire_node(g, v, nbrs)
        prof1, prof2 = compute_weight_profile(g, params), compute_weight_profile(g2, params)
        s1, s2 = smooth_bound(prof1, params), smooth_bound(prof2, params)
        delta = abs(estimator_f(g, prof1, params) - estimator_f(g2, prof2, params))
        ratio = max(s2 / s1, s1 / s2)
        bound = math.exp(params.beta)
        max_ratio = max(max_ratio, ratio)
        max_ratio_over_bound = max(max_ratio_over_bound, ratio / bound)
        max_probe_over_s = max(max_probe_over_s, delta / min(s1, s2))
        where = f"pair={i} family={family} n={g.n} eps={params.eps} k_star={params.k_star}"
        if ratio > bound * (1 + rel_tol):
            violations.append(f"{where} smooth ratio {ratio:.12g} > exp(beta) {bound:.12g}")
        if delta > min(s1, s2):
            violations.append(f"{where} |f(G)-f(G')| {delta:.12g} > S {min(s1, s2):.12g}")
    return AuditReport("smoothness", not violations, {
        "pairs": pairs,
        "families": ",".join(families),
        "sens_const": sens_const,
        "max_ratio": max_ratio,
        "max_ratio_over_exp_beta": max_ratio_over_bound,
        "max_probe_over_s": max_probe_over_s,
    }, violations)


def verify_witnesses(n: int, k: int, eps: float) -> AuditReport:
    """Build both lower-bound witness pairs and check their certified properties."""
    checks = {}
    violations = []

    def check(name, ok, detail=""):
        checks[name] = bool(ok)
        if not ok:
            violations.append(f"{name}: {detail}" if detail else name)

    n_pairs = num_pairs(n)
    try:
        lk = witness_large_k(n, k, eps)
    except (ParameterError, ConstructionError) as exc:
        check("large_k_construction", False, f"large-k witness precondition violated: {exc}")
    else:
        left = math.floor(1 / eps)
        check("large_k_g0_member", concentration_parameter(lk.g0) <= k)
        c1 = concentration_parameter(lk.g1)
        check("large_k_g1_member", c1 <= k, f"concentration {c1} > k={k}")
        check("large_k_distance", lk.node_distance_bound <= left,
              f"{lk.node_distance_bound} > {left}")
        edge_gap = abs(lk.g1.m - lk.g0.m)
        check("large_k_gap_exact", edge_gap == left * k, f"{edge_gap} edges != {left * k}")
        check("large_k_gap_lower", lk.density_gap >= k / (2 * eps * n_pairs),
              f"{lk.density_gap} < k/(2 eps C(n,2))")
        checks["large_k_gap"] = lk.density_gap
    try:
        sk = witness_small_k(n, eps)
    except (ParameterError, ConstructionError) as exc:
        check("small_k_construction", False, f"small-k witness precondition violated: {exc}")
    else:
        ell = n // (math.ceil(round(n * eps, 9)) + 1)
        check("small_k_member", concentration_parameter(sk.g0) <= 1
              and concentration_parameter(sk.g1) <= 1)
        check("small_k_distance", sk.node_distance_bound <= math.floor(1 / eps),
              f"{sk.node_distance_bound} > floor(1/eps)")
        check("small_k_ell_above_quarter_inv_eps", ell > 1 / (4 * eps),
              f"ell={ell} <= 1/(4 eps)")
        need = ell * (ell + 1) // 2
        edge_gap = abs(sk.g0.m - sk.g1.m)
        check("small_k_gap_lower", edge_gap >= need, f"{edge_gap} edges < C(ell+1,2)={need}")
        checks["small_k_gap"] = sk.density_gap
        checks["small_k_ell"] = ell
    summary = {"n": n, "k": k, "eps": eps, **checks}
    return AuditReport("witnesses", not violations, summary, violations)
