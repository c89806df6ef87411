"""Loop-multigraphs and the connectivity statistics used for decodability.

Vertices are labelled ``1..n``.  Edges are positional: the index of an edge in
``MultiGraph.edges`` is its id, so parallel edges and repeated loops stay
distinguishable erasure targets.  Loops never join components and never count
towards an edge cut, but each loop adds exactly one to the incidence degree of
its vertex.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

__all__ = [
    "Edge",
    "GraphStats",
    "GraphError",
    "MultiGraph",
    "UnionFind",
    "components",
    "delete_edges",
    "edge_connectivity",
    "is_decodable",
    "loopless_components",
    "min_loop_cut",
    "new_graph",
    "stats",
]


class GraphError(ValueError):
    """Raised for malformed graphs or operations undefined on the input."""


class UnionFind:
    """Disjoint sets over ``1..n`` with path halving and union by size."""

    def __init__(self, n: int):
        self.parent = list(range(n + 1))
        self.size = [1] * (n + 1)

    def find(self, a: int) -> int:
        parent = self.parent
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        return True


@dataclass(frozen=True)
class Edge:
    """An undirected edge; ``u == v`` is a loop.

    The endpoints are stored sorted so that ``Edge(3, 1) == Edge(1, 3)``.
    ``provenance`` optionally records the ``(relay, slot)`` that produced it.
    """

    u: int
    v: int
    provenance: Optional[tuple[int, int]] = None

    def __post_init__(self):
        if self.u > self.v:
            u, v = self.v, self.u
            object.__setattr__(self, "u", u)
            object.__setattr__(self, "v", v)

    @property
    def is_loop(self) -> bool:
        return self.u == self.v


@dataclass(frozen=True)
class MultiGraph:
    n: int
    edges: tuple[Edge, ...] = ()

    def __post_init__(self):
        if self.n < 0:
            raise GraphError(f"vertex count must be non-negative, got {self.n}")
        object.__setattr__(self, "edges", tuple(self.edges))
        for idx, e in enumerate(self.edges):
            if not (1 <= e.u <= self.n and 1 <= e.v <= self.n):
                raise GraphError(
                    f"edge {idx} ({e.u}, {e.v}) has an endpoint outside 1..{self.n}"
                )

    @property
    def m(self) -> int:
        return len(self.edges)

    @property
    def vertices(self) -> range:
        return range(1, self.n + 1)

    @cached_property
    def loop_ids(self) -> tuple[int, ...]:
        return tuple(i for i, e in enumerate(self.edges) if e.is_loop)

    @property
    def loop_count(self) -> int:
        return len(self.loop_ids)

    @cached_property
    def incident(self) -> dict[int, tuple[int, ...]]:
        """Edge ids touching each vertex; a loop appears once at its vertex."""
        inc: dict[int, list[int]] = {v: [] for v in self.vertices}
        for i, e in enumerate(self.edges):
            inc[e.u].append(i)
            if not e.is_loop:
                inc[e.v].append(i)
        return {v: tuple(ids) for v, ids in inc.items()}

    def pairs(self) -> list[tuple[int, int]]:
        return [(e.u, e.v) for e in self.edges]

    def to_dict(self) -> dict:
        return {"n": self.n, "edges": [[e.u, e.v] for e in self.edges]}

    @classmethod
    def from_dict(cls, data: dict) -> "MultiGraph":
        try:
            n = int(data["n"])
            pairs = [tuple(int(x) for x in pair) for pair in data["edges"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise GraphError(f"malformed graph document: {exc}") from exc
        for idx, pair in enumerate(pairs):
            if len(pair) != 2:
                raise GraphError(f"edge {idx} must have two endpoints, got {list(pair)}")
        return new_graph(n, pairs)

    def dump(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict()) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "MultiGraph":
        return cls.from_dict(json.loads(Path(path).read_text()))


@dataclass(frozen=True)
class GraphStats:
    """Loop and incidence-degree statistics of a graph.

    ``alpha`` and ``beta`` are only filled when a ``target`` degree is given:
    they count vertices with incidence degree exactly ``target`` and at least
    ``target + 2``.
    """

    n: int
    m: int
    loop_count: int
    incidence_degree: dict[int, int]
    min_incidence_degree: int
    loops_at_vertex: dict[int, int]
    max_loops: int
    incidence_sum: int
    target: Optional[int] = None
    alpha: Optional[int] = None
    beta: Optional[int] = None


def new_graph(n: int, edges: Iterable[Sequence[int]]) -> MultiGraph:
    """Build a graph on ``1..n`` from vertex pairs; edge ids follow input order."""
    if n < 1:
        raise GraphError(f"a graph needs at least one vertex, got n={n}")
    out = []
    for idx, pair in enumerate(edges):
        u, v = pair
        if not (1 <= u <= n and 1 <= v <= n):
            raise GraphError(f"edge {idx} ({u}, {v}) has an endpoint outside 1..{n}")
        out.append(Edge(u, v))
    return MultiGraph(n, tuple(out))


def _union_find(g: MultiGraph) -> UnionFind:
    uf = UnionFind(g.n)
    for e in g.edges:
        if not e.is_loop:
            uf.union(e.u, e.v)
    return uf


def components(g: MultiGraph) -> list[frozenset[int]]:
    """Connected components, ordered by their smallest vertex."""
    uf = _union_find(g)
    blocks: dict[int, set[int]] = {}
    for v in g.vertices:
        blocks.setdefault(uf.find(v), set()).add(v)
    return sorted((frozenset(b) for b in blocks.values()), key=min)


def loopless_components(g: MultiGraph) -> list[frozenset[int]]:
    looped = {g.edges[i].u for i in g.loop_ids}
    return [c for c in components(g) if not (c & looped)]


def is_decodable(g: MultiGraph) -> bool:
    """True iff every connected component carries at least one loop.

    An isolated vertex without a loop is its own undecodable component.  The
    empty graph is decodable.
    """
    uf = _union_find(g)
    has_loop = set()
    for i in g.loop_ids:
        has_loop.add(uf.find(g.edges[i].u))
    return all(uf.find(v) in has_loop for v in g.vertices)


def delete_edges(g: MultiGraph, ids: Iterable[int]) -> MultiGraph:
    """Remove the given edge ids.

    The survivors keep their relative order and provenance but are re-indexed
    ``0..m'-1`` in the returned graph.
    """
    drop = set(ids)
    bad = sorted(i for i in drop if not 0 <= i < g.m)
    if bad:
        raise GraphError(f"unknown edge ids {bad} (graph has {g.m} edges)")
    return MultiGraph(g.n, tuple(e for i, e in enumerate(g.edges) if i not in drop))


def stats(g: MultiGraph, target: Optional[int] = None) -> GraphStats:
    inc = {v: len(ids) for v, ids in g.incident.items()}
    loops = {v: 0 for v in g.vertices}
    for i in g.loop_ids:
        loops[g.edges[i].u] += 1
    s_i = sum(inc.values())
    lg = g.loop_count
    assert s_i == 2 * g.m - lg, "incidence sum must equal 2m - L_G"
    alpha = beta = None
    if target is not None:
        alpha = sum(1 for d in inc.values() if d == target)
        beta = sum(1 for d in inc.values() if d >= target + 2)
    return GraphStats(
        n=g.n,
        m=g.m,
        loop_count=lg,
        incidence_degree=inc,
        min_incidence_degree=min(inc.values(), default=0),
        loops_at_vertex=loops,
        max_loops=max(loops.values(), default=0),
        incidence_sum=s_i,
        target=target,
        alpha=alpha,
        beta=beta,
    )


# Vertex-set enumeration is 2^n; above this edge connectivity uses Stoer-Wagner.
_VERTEX_SETS_MAX_N = 20
# Largest edge-subset count the breadth-first loop-cut search will visit.
_SEARCH_BUDGET = 20_000


def _set_costs(g: MultiGraph) -> tuple[np.ndarray, np.ndarray]:
    """Crossing-edge and inside-loop counts for every vertex set.

    Entry ``S`` (a bitmask over vertices ``1..n``) of the first array counts
    pair edges with exactly one endpoint in ``S``; the second counts loops at
    vertices of ``S``.
    """
    masks = np.arange(1 << g.n, dtype=np.int64)
    cut = np.zeros(masks.shape, dtype=np.int32)
    loops = np.zeros(masks.shape, dtype=np.int32)
    for e in g.edges:
        bu = (masks >> (e.u - 1)) & 1
        if e.is_loop:
            loops += bu.astype(np.int32)
        else:
            cut += (bu ^ ((masks >> (e.v - 1)) & 1)).astype(np.int32)
    return cut, loops


def _edge_cut_stoer_wagner(g: MultiGraph) -> int:
    import networkx as nx

    h = nx.Graph()
    h.add_nodes_from(g.vertices)
    for e in g.edges:
        if e.is_loop:
            continue
        w = h.edges[e.u, e.v]["weight"] + 1 if h.has_edge(e.u, e.v) else 1
        h.add_edge(e.u, e.v, weight=w)
    value, _ = nx.stoer_wagner(h)
    return int(value)


def edge_connectivity(g: MultiGraph) -> int:
    """Fewest non-loop edges whose removal disconnects a connected graph.

    A minimum cut always splits the graph in two, so this is the smallest
    number of pair edges crossing a proper nonempty vertex set.
    """
    if g.n < 2:
        raise GraphError("edge connectivity is undefined for a single vertex")
    if len(components(g)) > 1:
        raise GraphError("graph is already disconnected")
    if g.n > _VERTEX_SETS_MAX_N:
        return _edge_cut_stoer_wagner(g)
    cut, _ = _set_costs(g)
    return int(cut[1:-1].min())


def _loop_cut_search(g: MultiGraph, limit: int) -> int:
    for size in range(1, limit + 1):
        for ids in itertools.combinations(range(g.m), size):
            if not is_decodable(delete_edges(g, ids)):
                return size
    return limit


def _loop_cut_vertex_sets(g: MultiGraph) -> int:
    # Deleting D strands a loopless component C only if D holds every loop in
    # C and every edge leaving C, and deleting exactly those always works.
    cut, loops = _set_costs(g)
    return int((cut + loops)[1:].min())


def min_loop_cut(g: MultiGraph, method: str = "auto") -> int:
    """Size of the smallest edge set whose deletion leaves ``g`` undecodable.

    ``method="search"`` tries edge subsets in order of increasing size.
    Deleting every loop, or every edge at a vertex of minimum incidence
    degree, always works, so it stops by ``min(L_G, delta_I)``.
    ``method="vertex-sets"`` minimises loops inside plus edges leaving over all
    nonempty vertex sets.  ``"auto"`` searches when that is cheap.
    """
    if not is_decodable(g):
        raise GraphError("loop cut is undefined for an undecodable graph")
    st = stats(g)
    limit = min(st.loop_count, st.min_incidence_degree)
    if method == "auto":
        work = sum(math.comb(g.m, size) for size in range(1, limit + 1))
        method = "search" if work <= _SEARCH_BUDGET or g.n > _VERTEX_SETS_MAX_N else "vertex-sets"
    if method == "search":
        return _loop_cut_search(g, limit)
    if method == "vertex-sets":
        return _loop_cut_vertex_sets(g)
    raise ValueError(f"unknown method {method!r}")
