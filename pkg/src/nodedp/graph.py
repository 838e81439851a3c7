"""Immutable undirected simple graphs and the degree statistics built on them."""

from __future__ import annotations

import functools
import hashlib
import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import InvalidGraphError, ParameterError
from .noise import RandomStream


def num_pairs(n: int) -> int:
    """C(n, 2), the number of unordered node pairs."""
    return n * (n - 1) // 2


def _frozen(a):
    a = np.ascontiguousarray(a, dtype=np.int64)
    a.setflags(write=False)
    return a


class Graph:
    """An undirected simple graph on nodes ``0 .. n-1``.

    Edges are stored once each as ``(u, v)`` with ``u < v``, sorted
    lexicographically. Degrees, a CSR adjacency (sorted neighbor lists,
    so membership is a binary search) and a content fingerprint are
    computed on first use and cached; none of them can be modified.

    Args:
        n: Number of nodes.
        edges: Iterable of node pairs or an ``(m, 2)`` integer array. Pair
            orientation does not matter.

    Raises:
        InvalidGraphError: on self-loops, duplicate edges, or ids out of range.
    """

    __slots__ = ("_n", "_u", "_v", "_degrees", "_indptr", "_indices", "_fingerprint")

    def __init__(self, n: int, edges: Iterable = ()):
        n = int(n)
        if n < 1:
            raise InvalidGraphError(f"graph needs at least one node, got n={n}")
        arr = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges,
                         dtype=np.int64)
        arr = arr.reshape(-1, 2)
        if arr.size and (arr.min() < 0 or arr.max() >= n):
            raise InvalidGraphError(f"node ids must lie in [0, {n})")
        if np.any(arr[:, 0] == arr[:, 1]):
            bad = arr[arr[:, 0] == arr[:, 1]][0]
            raise InvalidGraphError(f"self-loop at node {bad[0]}")
        u = np.minimum(arr[:, 0], arr[:, 1])
        v = np.maximum(arr[:, 0], arr[:, 1])
        order = np.lexsort((v, u))
        u, v = u[order], v[order]
        if u.size > 1:
            dup = (u[1:] == u[:-1]) & (v[1:] == v[:-1])
            if np.any(dup):
                i = int(np.flatnonzero(dup)[0])
                raise InvalidGraphError(f"duplicate edge ({u[i]}, {v[i]})")
        self._init(n, u, v)

    def _init(self, n, u, v):
        self._n = n
        self._u = _frozen(u)
        self._v = _frozen(v)
        self._degrees = None
        self._indptr = None
        self._indices = None
        self._fingerprint = None

    @classmethod
    def _from_sorted(cls, n: int, u, v) -> "Graph":
        # Trusted fast path: u < v, lexicographically sorted, no duplicates.
        g = cls.__new__(cls)
        g._init(n, u, v)
        return g

    @classmethod
    def empty(cls, n: int) -> "Graph":
        return cls._from_sorted(n, np.empty(0, np.int64), np.empty(0, np.int64))

    @classmethod
    def complete(cls, n: int) -> "Graph":
        u, v = _pair_index(n)
        return cls._from_sorted(n, u, v)

    @property
    def n(self) -> int:
        return self._n

    @property
    def m(self) -> int:
        return int(self._u.size)

    @property
    def edges(self) -> np.ndarray:
        """``(m, 2)`` array of edges, ``u < v``, lexicographically sorted."""
        return np.column_stack((self._u, self._v))

    @property
    def edge_endpoints(self) -> tuple[np.ndarray, np.ndarray]:
        return self._u, self._v

    def edge_set(self) -> frozenset:
        return frozenset(zip(self._u.tolist(), self._v.tolist()))

    @property
    def degrees(self) -> np.ndarray:
        if self._degrees is None:
            deg = np.bincount(np.concatenate((self._u, self._v)), minlength=self._n)
            self._degrees = _frozen(deg)
        return self._degrees

    def _csr(self):
        if self._indptr is None:
            src = np.concatenate((self._u, self._v))
            dst = np.concatenate((self._v, self._u))
            order = np.lexsort((dst, src))
            indptr = np.zeros(self._n + 1, dtype=np.int64)
            np.cumsum(self.degrees, out=indptr[1:])
            self._indices = _frozen(dst[order])
            self._indptr = _frozen(indptr)
        return self._indptr, self._indices

    def neighbors(self, v: int) -> np.ndarray:
        """Sorted neighbors of ``v``."""
        indptr, indices = self._csr()
        return indices[indptr[v]:indptr[v + 1]]

    def has_edge(self, u: int, v: int) -> bool:
        if u == v:
            return False
        nbrs = self.neighbors(u)
        i = np.searchsorted(nbrs, v)
        return bool(i < nbrs.size and nbrs[i] == v)

    def adjacency_matrix(self) -> np.ndarray:
        """Dense boolean adjacency matrix (O(n^2) memory)."""
        a = np.zeros((self._n, self._n), dtype=bool)
        a[self._u, self._v] = True
        a[self._v, self._u] = True
        return a

    @property
    def fingerprint(self) -> str:
        """Content hash; equal graphs have equal fingerprints."""
        if self._fingerprint is None:
            h = hashlib.blake2b(digest_size=16)
            h.update(self._n.to_bytes(8, "little"))
            h.update(self._u.tobytes())
            h.update(self._v.tobytes())
            self._fingerprint = h.hexdigest()
        return self._fingerprint

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return (self._n == other._n and np.array_equal(self._u, other._u)
                and np.array_equal(self._v, other._v))

    def __hash__(self):
        return hash(self.fingerprint)

    def __repr__(self):
        return f"Graph(n={self._n}, m={self.m})"


@dataclass(frozen=True)
class DegreeSummary:
    degrees: np.ndarray
    d_bar: float
    p_hat_empirical: float
    min_deg: int
    max_deg: int


def _require_pairs(g: Graph):
    if g.n < 2:
        raise InvalidGraphError(f"operation needs n >= 2, got n={g.n}")


def edge_density(g: Graph) -> float:
    """Empirical edge density ``m / C(n, 2)``."""
    _require_pairs(g)
    return g.m / num_pairs(g.n)


def average_degree(g: Graph) -> float:
    # (n-1) * m / C(n,2) simplifies to 2m/n; one rounding instead of two.
    return 2 * g.m / g.n


def degree_summary(g: Graph) -> DegreeSummary:
    _require_pairs(g)
    deg = g.degrees
    return DegreeSummary(
        degrees=deg,
        d_bar=average_degree(g),
        p_hat_empirical=edge_density(g),
        min_deg=int(deg.min()),
        max_deg=int(deg.max()),
    )


def scaled_deviations(g: Graph) -> np.ndarray:
    """``n * |deg(v) - d_bar|`` per node, exact in integer arithmetic."""
    return np.abs(g.n * g.degrees - 2 * g.m)


def concentration_parameter(g: Graph) -> int:
    """Smallest integer k >= 0 with every degree inside ``[d_bar - k, d_bar + k]``."""
    _require_pairs(g)
    worst = int(scaled_deviations(g).max())
    return -(-worst // g.n)


def in_concentrated_class(g: Graph, k: int) -> bool:
    return concentration_parameter(g) <= k


@functools.lru_cache(maxsize=8)
def _pair_index(n: int):
    # Upper-triangle pairs in lexicographic order, matching Graph's edge order.
    u, v = np.triu_indices(n, 1)
    return _frozen(u), _frozen(v)


def sample_er(n: int, p: float, rng: RandomStream) -> Graph:
    """Sample G(n, p): each of the C(n, 2) pairs is an edge independently w.p. ``p``.

    Raises:
        ParameterError: if ``p`` is outside [0, 1] or ``n < 1``.
    """
    if not 0.0 <= p <= 1.0:
        raise ParameterError(f"edge probability must lie in [0, 1], got {p}")
    if n < 1:
        raise ParameterError(f"n must be positive, got {n}")
    u, v = _pair_index(n)
    # uniform() < p, compared on the 53-bit integers so no floats are built.
    threshold = np.uint64(math.ceil(p * 2.0**53))
    keep = np.flatnonzero((rng.raw(u.size) >> np.uint64(11)) < threshold)
    return Graph._from_sorted(n, u.take(keep), v.take(keep))


def rewire_node(g: Graph, v: int, new_neighbors: Iterable[int]) -> Graph:
    """Return the node-adjacent graph in which ``v``'s neighborhood is ``new_neighbors``.

    Every edge not touching ``v`` is kept as is.

    Raises:
        InvalidGraphError: if ``v`` is a member of ``new_neighbors`` or an id
            is out of range.
    """
    n = g.n
    if not 0 <= v < n:
        raise InvalidGraphError(f"node {v} out of range for n={n}")
    nbrs = np.unique(np.fromiter((int(x) for x in new_neighbors), dtype=np.int64))
    if nbrs.size and (nbrs[0] < 0 or nbrs[-1] >= n):
        raise InvalidGraphError(f"neighbor ids must lie in [0, {n})")
    if np.any(nbrs == v):
        raise InvalidGraphError(f"rewiring node {v} to itself would create a self-loop")
    u0, v0 = g.edge_endpoints
    keep = (u0 != v) & (v0 != v)
    u = np.concatenate((u0[keep], np.minimum(nbrs, v)))
    w = np.concatenate((v0[keep], np.maximum(nbrs, v)))
    order = np.lexsort((w, u))
    return Graph._from_sorted(n, u[order], w[order])


def star(n: int, center: int = 0) -> Graph:
    return Graph(n, [(center, x) for x in range(n) if x != center])


def cycle(n: int) -> Graph:
    return Graph(n, [(i, (i + 1) % n) for i in range(n)])


def disjoint_cliques(sizes: Iterable[int]) -> Graph:
    """Disjoint union of cliques, laid out on consecutive node ids."""
    sizes = [int(s) for s in sizes]
    edges = []
    start = 0
    for s in sizes:
        for a in range(start, start + s):
            edges.extend((a, b) for b in range(a + 1, start + s))
        start += s
    return Graph(start, edges)


def near_equal_sizes(n: int, parts: int) -> list[int]:
    """Split ``n`` into ``parts`` sizes of floor(n/parts) or ceil, larger ones first."""
    if parts < 1:
        raise ParameterError(f"need at least one part, got {parts}")
    q, r = divmod(n, parts)
    return [q + 1] * r + [q] * (parts - r)

