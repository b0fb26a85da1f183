"""Directed acyclic graphs over dense integer vertices.

Vertices are the integers ``0 .. n-1``; a sidecar name table maps them to
strings.  Vertex sets are plain ``frozenset`` objects of indices.  All
functions here are pure and never mutate their inputs.
"""

from __future__ import annotations

import heapq
from collections.abc import Iterable, Sequence

import numpy as np

from .errors import CycleError, DuplicateEdgeError, GraphError, SelfLoopError, VertexError

VertexSet = frozenset  # frozenset[int]


class Dag:
    """Immutable DAG with parent and child adjacency lists.

    Parameters
    ----------
    names : sequence of str
        Unique vertex names; position ``i`` names vertex ``i``.
    parents : sequence of iterables of int
        ``parents[v]`` lists the parents of ``v``.
    origin : sequence of int, optional
        For induced subgraphs, ``origin[i]`` is the index of vertex ``i`` in
        the graph it was taken from.
    """

    __slots__ = ("names", "parents", "children", "origin", "_index", "_topo")

    def __init__(self, names: Sequence[str], parents: Sequence[Iterable[int]], origin=None):
        names = tuple(str(s) for s in names)
        n = len(names)
        if len(parents) != n:
            raise GraphError("parents must have one entry per vertex")
        index = {}
        for i, s in enumerate(names):
            if s in index:
                raise GraphError(f"duplicate vertex name {s!r}")
            index[s] = i
        pa = []
        for v, ps in enumerate(parents):
            ps = list(ps)
            seen = set()
            for p in ps:
                if not 0 <= p < n:
                    raise VertexError(f"parent index {p} of {names[v]!r} out of range")
                if p == v:
                    raise SelfLoopError(f"self-loop on {names[v]!r}")
                if p in seen:
                    raise DuplicateEdgeError(f"duplicate edge {names[p]!r} -> {names[v]!r}")
                seen.add(p)
            pa.append(tuple(sorted(ps)))
        ch = [[] for _ in range(n)]
        for v in range(n):
            for p in pa[v]:
                ch[p].append(v)
        self.names = names
        self.parents = tuple(pa)
        self.children = tuple(tuple(c) for c in ch)
        self.origin = None if origin is None else tuple(origin)
        self._index = index
        self._topo = _kahn(self)

    @property
    def n(self) -> int:
        return len(self.names)

    def __len__(self):
        return len(self.names)

    @property
    def edges(self) -> list[tuple[int, int]]:
        return [(p, v) for v in range(self.n) for p in self.parents[v]]

    @property
    def edge_count(self) -> int:
        return sum(len(ps) for ps in self.parents)

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise VertexError(f"unknown vertex {name!r}") from None

    def vertex_set(self, names: Iterable[str]) -> frozenset:
        return frozenset(self.index(s) for s in names)

    def names_of(self, vertices: Iterable[int]) -> list[str]:
        return [self.names[v] for v in sorted(vertices)]

    def adjacent(self, u: int, v: int) -> bool:
        return u in self.parents[v] or v in self.parents[u]

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self.parents[v] + self.children[v]

    def __eq__(self, other):
        if not isinstance(other, Dag):
            return NotImplemented
        return self.names == other.names and self.parents == other.parents

    def __hash__(self):
        return hash((self.names, self.parents))

    def __repr__(self):
        return f"Dag(n={self.n}, edges={self.edge_count})"


def _kahn(g: Dag) -> tuple[int, ...]:
    indeg = [len(ps) for ps in g.parents]
    heap = [v for v in range(g.n) if indeg[v] == 0]
    heapq.heapify(heap)
    order = []
    while heap:
        v = heapq.heappop(heap)
        order.append(v)
        for c in g.children[v]:
            indeg[c] -= 1
            if indeg[c] == 0:
                heapq.heappush(heap, c)
    if len(order) < g.n:
        raise CycleError([g.names[v] for v in _find_cycle(g, indeg)])
    return tuple(order)


def _find_cycle(g: Dag, indeg: list[int]) -> list[int]:
    # every vertex left with positive in-degree lies on or downstream of a cycle;
    # walking parents inside that set must eventually repeat
    left = {v for v in range(g.n) if indeg[v] > 0}
    v = min(left)
    path, pos = [], {}
    while v not in pos:
        pos[v] = len(path)
        path.append(v)
        v = next(p for p in g.parents[v] if p in left)
    cycle = path[pos[v]:]
    cycle.reverse()
    return cycle + [cycle[0]]


def build_dag(edges: Iterable[tuple[str, str]], nodes: Iterable[str] = ()) -> Dag:
    """Build a DAG from ``(parent, child)`` name pairs.

    Vertices get indices in order of first appearance, ``nodes`` first.
    """
    index: dict[str, int] = {}
    parents: list[list[int]] = []

    def get(name):
        name = str(name)
        if name not in index:
            index[name] = len(parents)
            parents.append([])
        return index[name]

    for s in nodes:
        get(s)
    for p, c in edges:
        pi, ci = get(p), get(c)
        parents[ci].append(pi)
    return Dag(list(index), parents)


def topological_order(g: Dag) -> list[int]:
    """Topological order, ties broken by ascending index."""
    return list(g._topo)


def _check(g: Dag, a: Iterable[int]) -> frozenset:
    a = frozenset(a)
    for v in a:
        if not (isinstance(v, (int, np.integer)) and 0 <= v < g.n):
            raise VertexError(f"vertex {v!r} out of range for a graph with {g.n} vertices")
    return a


def ancestral_closure(g: Dag, a: Iterable[int]) -> frozenset:
    """``An_G(a)``: ``a`` together with all of its ancestors."""
    a = _check(g, a)
    seen = set(a)
    stack = list(a)
    parents = g.parents
    while stack:
        for p in parents[stack.pop()]:
            if p not in seen:
                seen.add(p)
                stack.append(p)
    return frozenset(seen)


def descendants(g: Dag, v: int) -> frozenset:
    """Strict descendants of ``v``."""
    seen = set()
    stack = [v]
    while stack:
        for c in g.children[stack.pop()]:
            if c not in seen:
                seen.add(c)
                stack.append(c)
    return frozenset(seen)


def markov_boundary(g: Dag, a: Iterable[int]) -> frozenset:
    """Parents, children and co-parents of the members of ``a``, minus ``a``."""
    a = _check(g, a)
    mb = set()
    for v in a:
        mb.update(g.parents[v])
        for c in g.children[v]:
            mb.add(c)
            mb.update(g.parents[c])
    return frozenset(mb - a)


class UndirectedGraph:
    """Symmetric adjacency without self-loops."""

    __slots__ = ("adjacency",)

    def __init__(self, adjacency: Sequence[Iterable[int]]):
        adj = [set(nb) for nb in adjacency]
        for u, nb in enumerate(adj):
            if u in nb:
                raise SelfLoopError(f"self-loop on {u}")
            for v in nb:
                if u not in adj[v]:
                    raise GraphError(f"adjacency is not symmetric at ({u}, {v})")
        self.adjacency = tuple(frozenset(nb) for nb in adj)

    @property
    def vertex_count(self) -> int:
        return len(self.adjacency)

    def neighbors(self, v: int) -> frozenset:
        return self.adjacency[v]

    def has_edge(self, u: int, v: int) -> bool:
        return v in self.adjacency[u]

    def edges(self) -> list[tuple[int, int]]:
        return [(u, v) for u, nb in enumerate(self.adjacency) for v in sorted(nb) if u < v]

    def __eq__(self, other):
        if not isinstance(other, UndirectedGraph):
            return NotImplemented
        return self.adjacency == other.adjacency

    def __repr__(self):
        return f"UndirectedGraph(n={self.vertex_count}, edges={len(self.edges())})"


def moralize(g: Dag) -> UndirectedGraph:
    """Moral graph: skeleton plus an edge between every pair of co-parents."""
    adj = [set(g.parents[v]) | set(g.children[v]) for v in range(g.n)]
    for v in range(g.n):
        ps = g.parents[v]
        for i, p in enumerate(ps):
            for q in ps[i + 1:]:
                adj[p].add(q)
                adj[q].add(p)
    return UndirectedGraph(adj)


def induced_subgraph(g: Dag, a: Iterable[int]) -> Dag:
    """``G_A``: the vertices of ``a`` (in ascending order) and the edges among them.

    The result keeps the original names; ``result.origin[i]`` is the index in
    ``g`` of the subgraph's vertex ``i``.
    """
    keep = sorted(_check(g, a))
    remap = {v: i for i, v in enumerate(keep)}
    parents = [[remap[p] for p in g.parents[v] if p in remap] for v in keep]
    return Dag([g.names[v] for v in keep], parents, origin=keep)


class _DisjointSets:
    def __init__(self, items):
        self.parent = {x: x for x in items}

    def find(self, x):
        parent = self.parent
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    def union(self, x, y):
        rx, ry = self.find(x), self.find(y)
        if rx != ry:
            if ry < rx:
                rx, ry = ry, rx
            self.parent[ry] = rx


def d_connected_components(g: Dag, r: Iterable[int]) -> list[frozenset]:
    """Maximal d-connected vertex sets of ``V \\ r`` with respect to ``r``.

    Two vertices outside ``r`` are joined when they are adjacent, or when both
    are parents of a common vertex of ``r``.  An ``r``-vertex can only sit on a
    witnessing path as a collider between two non-``r`` neighbours, so the
    connected components of that auxiliary graph are exactly the d-connected
    components.  Returned in order of smallest member.
    """
    r = _check(g, r)
    rest = [v for v in range(g.n) if v not in r]
    dsu = _DisjointSets(rest)
    for v in rest:
        for p in g.parents[v]:
            if p not in r:
                dsu.union(p, v)
    for w in r:
        outside = [p for p in g.parents[w] if p not in r]
        for p in outside[1:]:
            dsu.union(outside[0], p)
    groups: dict[int, list[int]] = {}
    for v in rest:
        groups.setdefault(dsu.find(v), []).append(v)
    return sorted((frozenset(m) for m in groups.values()), key=min)


def random_dag(n: int, p: float, seed=None) -> Dag:
    """Erdos-Renyi style DAG.

    Each pair ``i < j`` of a random vertex permutation gets the edge
    ``perm[i] -> perm[j]`` independently with probability ``p``.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"edge probability {p} outside [0, 1]")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    hit = np.triu(rng.random((n, n)) < p, k=1)
    parents = [[] for _ in range(n)]
    for i, j in zip(*np.nonzero(hit)):
        parents[perm[j]].append(int(perm[i]))
    return Dag([f"v{i}" for i in range(n)], parents)


def random_tree_dag(n: int, p_extra: float, max_parents: int = 3, seed=None,
                    extra: str = "pair") -> Dag:
    """Random directed tree plus extra forward edges.

    Vertex ``j > 0`` picks one parent uniformly among ``0 .. j-1``.  With
    ``extra="pair"`` every other forward pair ``(i, j)`` is then added with
    probability ``p_extra`` (candidates visited in random order) while ``j``
    has fewer than ``max_parents`` parents.  With ``extra="vertex"`` each
    vertex instead gains at most one extra parent, with probability
    ``p_extra``.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if max_parents < 1:
        raise ValueError("max_parents must be at least 1")
    if not 0.0 <= p_extra <= 1.0:
        raise ValueError(f"edge probability {p_extra} outside [0, 1]")
    if extra not in ("pair", "vertex"):
        raise ValueError(f"unknown extra-edge mode {extra!r}")
    rng = np.random.default_rng(seed)
    parents = [[] for _ in range(n)]
    for j in range(1, n):
        parents[j].append(int(rng.integers(j)))
    for j in range(1, n):
        if extra == "vertex":
            if j > 1 and len(parents[j]) < max_parents and rng.random() < p_extra:
                cands = [i for i in range(j) if i not in parents[j]]
                parents[j].append(int(cands[rng.integers(len(cands))]))
            continue
        for i in rng.permutation(j):
            if len(parents[j]) >= max_parents:
                break
            if int(i) not in parents[j] and rng.random() < p_extra:
                parents[j].append(int(i))
    return Dag([f"v{i}" for i in range(n)], parents)
