"""Pairs of concentrated-degree graphs at small node distance but far apart in density.

Any eps-node-DP estimator must err by about the density gap on one graph of
such a pair, so these constructions witness the lower bounds the
concentrated-degree estimator is measured against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConstructionError, ParameterError
from .graph import (Graph, concentration_parameter, disjoint_cliques, edge_density,
                    near_equal_sizes)


@dataclass(frozen=True)
class WitnessPair:
    """Two n-node graphs with a certified node-distance bound.

    ``members`` records whether both graphs were checked to lie in the
    concentrated class with parameter ``k``; for small ``n`` the large-k
    construction can fall outside it and this is reported, not raised.
    """

    g0: Graph
    g1: Graph
    k: int
    node_distance_bound: int
    density_gap: float
    members: bool


def _pair(g0, g1, k, distance):
    gap = abs(edge_density(g0) - edge_density(g1))
    members = concentration_parameter(g0) <= k and concentration_parameter(g1) <= k
    return WitnessPair(g0, g1, k, distance, gap, members)


def witness_large_k(n: int, k: int, eps: float) -> WitnessPair:
    """Empty graph versus a sparse bipartite graph.

    ``g1`` has ``L = floor(1/eps)`` left nodes (ids ``0..L-1``), each joined
    to ``k`` right nodes taken round-robin over ids ``L..n-1``, wrapping
    around. Deleting the left nodes' edges one node at a time turns ``g1``
    into ``g0`` in ``L`` steps.

    Raises:
        ParameterError: if ``k < 1`` or ``eps < 2/n``.
        ConstructionError: if a left node cannot get ``k`` distinct right
            neighbors (``k > n - L``).
    """
    if k < 1:
        raise ParameterError(f"k must be at least 1, got {k}")
    # Rounded so eps = 2/n itself passes despite float error.
    if not (eps > 0 and round(eps * n, 9) >= 2):
        raise ParameterError(f"need eps >= 2/n, got eps={eps} with n={n}")
    left = math.floor(1 / eps)
    right = n - left
    if left < 1 or right < k:
        raise ConstructionError(
            f"cannot attach {left} left nodes to {k} distinct right nodes each "
            f"with only {right} right nodes (n={n})")
    edges = []
    slot = 0
    for a in range(left):
        for _ in range(k):
            edges.append((a, left + slot % right))
            slot += 1
    return _pair(Graph.empty(n), Graph(n, edges), k, left)


def witness_small_k(n: int, eps: float) -> WitnessPair:
    """``i = ceil(n*eps)`` near-equal disjoint cliques versus ``i + 1`` of them.

    Both graphs are 1-concentrated. Dissolving one clique of ``g1`` (size
    at least ``floor(n/(i+1))``) into the others reaches ``g0``.

    Raises:
        ParameterError: unless ``n >= 4`` and ``2/n <= eps <= 1/4``.
    """
    if n < 4:
        raise ParameterError(f"need n >= 4, got {n}")
    if not (eps * n >= 2 and eps <= 0.25):
        raise ParameterError(f"need 2/n <= eps <= 1/4, got eps={eps} with n={n}")
    # round() guards against n*eps landing a hair above an integer.
    i = math.ceil(round(n * eps, 9))
    g0 = disjoint_cliques(near_equal_sizes(n, i))
    g1 = disjoint_cliques(near_equal_sizes(n, i + 1))
    return _pair(g0, g1, 1, n // (i + 1))
