"""Plain-text edge-list format.

::

    # comment lines start with '#'
    n m
    u v        (m lines, 0-based ids, u < v)

Blank lines are skipped. Writers emit edges in lexicographic order, so a
graph always serializes to the same bytes.
"""

from __future__ import annotations

import io
import os

import numpy as np

from .errors import EdgeListParseError, InvalidGraphError
from .graph import Graph


def format_edge_list(g: Graph, comments=()) -> str:
    out = io.StringIO()
    for c in comments:
        out.write(f"# {c}\n")
    out.write(f"{g.n} {g.m}\n")
    u, v = g.edge_endpoints
    for a, b in zip(u.tolist(), v.tolist()):
        out.write(f"{a} {b}\n")
    return out.getvalue()


def write_edge_list(g: Graph, path, comments=()) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(format_edge_list(g, comments))


def _ints(line: str, lineno: int, what: str):
    parts = line.split()
    if len(parts) != 2:
        raise EdgeListParseError(f"expected two integers ({what}), got {line!r}", lineno)
    try:
        return int(parts[0]), int(parts[1])
    except ValueError:
        raise EdgeListParseError(f"non-integer token in {line!r}", lineno) from None


def parse_edge_list(text: str) -> Graph:
    """Parse edge-list text into a :class:`Graph`.

    Raises:
        EdgeListParseError: with the offending line number on any malformed
            header, edge line, out-of-range id, self-loop, duplicate, or edge
            count mismatch.
    """
    header = None
    pairs = []
    lines = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if header is None:
            n, m = _ints(line, lineno, "header 'n m'")
            if n < 1 or m < 0:
                raise EdgeListParseError(f"invalid header n={n} m={m}", lineno)
            header = (n, m)
            continue
        a, b = _ints(line, lineno, "edge 'u v'")
        n = header[0]
        if not (0 <= a < n and 0 <= b < n):
            raise EdgeListParseError(f"node id out of range [0, {n}) in {line!r}", lineno)
        if a == b:
            raise EdgeListParseError(f"self-loop at node {a}", lineno)
        pairs.append((min(a, b), max(a, b)))
        lines.append(lineno)
    if header is None:
        raise EdgeListParseError("missing 'n m' header", None)
    n, m = header
    if len(pairs) != m:
        raise EdgeListParseError(f"header declares {m} edges but {len(pairs)} were found",
                                 lines[-1] if lines else None)
    seen = {}
    for pair, lineno in zip(pairs, lines):
        if pair in seen:
            raise EdgeListParseError(
                f"duplicate edge {pair} (first seen on line {seen[pair]})", lineno)
        seen[pair] = lineno
    try:
        return Graph(n, np.array(pairs, dtype=np.int64).reshape(-1, 2))
    except InvalidGraphError as exc:  # pragma: no cover - validated above
        raise EdgeListParseError(str(exc)) from exc


def read_edge_list(path: str | os.PathLike) -> Graph:
    with open(path, encoding="utf-8") as fh:
        return parse_edge_list(fh.read())
