"""d-separation by directional reachability, plus exhaustive oracles.

Two reachability flavours live here and are deliberately kept apart:

* :func:`reachable_set` lets a conditioning vertex be passed only as a
  collider and never looks at descendants.  This is the traversal used to
  extract close minimal separators.
* :func:`d_separated` is the usual Bayes-ball test where a collider is open
  when it or one of its descendants is conditioned on.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass

import numpy as np

from .dag import Dag, _check, ancestral_closure, induced_subgraph
from .errors import GraphError, OverlapError, SizeGuardError

UP, DOWN = 0, 1  # arrived from a child / arrived from a parent


@dataclass(frozen=True)
class ReachQuery:
    """Reachability request from ``source`` given ``conditioning``.

    The traversal is confined to ``universe``.  When ``universe`` is None it
    defaults to ``An({source, target})`` if a target is given, otherwise to
    the whole graph.
    """

    source: int
    conditioning: frozenset = frozenset()
    universe: frozenset | None = None
    target: int | None = None


def reachable_set(g: Dag, q: ReachQuery) -> frozenset:
    """Vertices joined to ``q.source`` by a path whose conditioning vertices are colliders.

    Paths stay inside the universe.  Conditioning vertices that are reached
    but cannot be passed are still part of the result; the source always is.
    """
    w = _check(g, q.conditioning)
    if q.universe is not None:
        universe = _check(g, q.universe)
    elif q.target is not None:
        universe = ancestral_closure(g, [q.source, q.target])
    else:
        universe = None
    u = q.source
    _check(g, [u])
    if u in w:
        raise GraphError("source vertex may not be conditioned on")
    if universe is not None and (u not in universe or not w <= universe):
        raise GraphError("source and conditioning set must lie inside the universe")
    return frozenset(_reach(g, u, w, universe))


def _reach(g: Dag, u: int, w, universe) -> set:
    if universe is not None:
        mask = bytearray(g.n)
        for x in universe:
            mask[x] = 1
    else:
        mask = None
    up, down = _reach_masks(g, u, w, mask)
    out = {x for x in range(g.n) if up[x] or down[x]}
    out.add(u)
    return out


def _reach_masks(g: Dag, u: int, w, mask):
    """Directional traversal behind :func:`reachable_set`.

    States are encoded as ``2 * vertex + direction``.  Returns the per-vertex
    "entered moving up" and "entered moving down" marks.
    """
    n = g.n
    parents, children = g.parents, g.children
    if mask is None:
        mask = b"\x01" * n
    up = bytearray(n)
    down = bytearray(n)
    stack = []
    for p in parents[u]:
        if mask[p]:
            up[p] = 1
            stack.append(p << 1)
    for c in children[u]:
        if mask[c]:
            down[c] = 1
            stack.append((c << 1) | 1)
    pop, push = stack.pop, stack.append
    while stack:
        s = pop()
        x = s >> 1
        if x in w:
            if not s & 1:
                continue
            for p in parents[x]:
                if mask[p] and not up[p]:
                    up[p] = 1
                    push(p << 1)
            continue
        for p in parents[x]:
            if mask[p] and not up[p]:
                up[p] = 1
                push(p << 1)
        for c in children[x]:
            if mask[c] and not down[c]:
                down[c] = 1
                push((c << 1) | 1)
    return up, down


def _disjoint(g, x, y, z):
    x, y, z = _check(g, x), _check(g, y), _check(g, z)
    if not x or not y:
        raise GraphError("x and y must be non-empty")
    if x & y or x & z or y & z:
        raise OverlapError("x, y and z must be pairwise disjoint")
    return x, y, z


def d_separated(g: Dag, x, y, z=()) -> bool:
    """True iff every path between ``x`` and ``y`` is blocked by ``z``."""
    x, y, z = _disjoint(g, x, y, z)
    return not (_d_reachable(g, x, z) & y)


def _d_reachable(g: Dag, x, z) -> set:
    anc = ancestral_closure(g, z)
    parents, children = g.parents, g.children
    seen = set()
    reached = set()
    queue = deque((v, UP) for v in x)
    while queue:
        state = queue.popleft()
        if state in seen:
            continue
        seen.add(state)
        v, d = state
        if v not in z:
            reached.add(v)
        if d == UP:
            if v in z:
                continue
            for p in parents[v]:
                queue.append((p, UP))
            for c in children[v]:
                queue.append((c, DOWN))
        else:
            if v not in z:
                for c in children[v]:
                    queue.append((c, DOWN))
            if v in anc:
                for p in parents[v]:
                    queue.append((p, UP))
    return reached


def d_separated_bruteforce(g: Dag, x, y, z=(), limit: int = 12) -> bool:
    """Path-enumeration d-separation, applying the blocking rules literally.

    Only meant as a test oracle; refuses graphs with more than ``limit``
    vertices.
    """
    if g.n > limit:
        raise SizeGuardError(f"{g.n} vertices exceeds the brute-force limit of {limit}")
    x, y, z = _disjoint(g, x, y, z)
    desc = [_desc_or_self(g, v) for v in range(g.n)]

    def blocked(path):
        for i in range(1, len(path) - 1):
            a, w, b = path[i - 1], path[i], path[i + 1]
            collider = a in g.parents[w] and b in g.parents[w]
            if collider:
                if not desc[w] & z:
                    return True
            elif w in z:
                return True
        return False

    def paths(src, dst):
        stack = [(src, [src])]
        while stack:
            v, path = stack.pop()
            if v == dst:
                yield path
                continue
            for nb in g.neighbors(v):
                if nb not in path:
                    stack.append((nb, path + [nb]))

    for a in x:
        for b in y:
            for path in paths(a, b):
                if not blocked(path):
                    return False
    return True


def _desc_or_self(g: Dag, v: int) -> frozenset:
    out = {v}
    stack = [v]
    while stack:
        for c in g.children[stack.pop()]:
            if c not in out:
                out.add(c)
                stack.append(c)
    return frozenset(out)


def independence_projection_equal(g: Dag, a, limit: int = 8) -> bool:
    """Check ``I(G)_A == I(G_A)`` by enumerating every disjoint triple inside ``a``."""
    a = sorted(_check(g, a))
    if len(a) > limit:
        raise SizeGuardError(f"|A| = {len(a)} exceeds the enumeration limit of {limit}")
    sub = induced_subgraph(g, a)
    local = {v: i for i, v in enumerate(a)}
    k = len(a)
    for labels in itertools.product(range(4), repeat=k):
        xs = [a[i] for i in range(k) if labels[i] == 1]
        ys = [a[i] for i in range(k) if labels[i] == 2]
        if not xs or not ys or xs[0] > ys[0]:
            continue
        zs = [a[i] for i in range(k) if labels[i] == 3]
        in_g = d_separated(g, xs, ys, zs)
        in_sub = d_separated(sub, [local[v] for v in xs], [local[v] for v in ys],
                             [local[v] for v in zs])
        if in_g != in_sub:
            return False
    return True


def separation_table(g: Dag, u: int, v: int, pool, limit: int = 16) -> np.ndarray:
    """d-separation of ``u`` and ``v`` for every conditioning set drawn from ``pool``.

    Returns a boolean array ``t`` of length ``2**len(pool)`` where ``t[m]`` is
    True iff ``u`` and ``v`` are d-separated given ``{pool[i] : bit i of m}``.
    """
    pool = list(pool)
    if v in pool or u == v:
        raise OverlapError("u, v and the pool must be disjoint")
    return ~connection_table(g, u, pool, limit=limit)[v]


def connection_table(g: Dag, u: int, pool, limit: int = 16) -> np.ndarray:
    """d-connection from ``u`` to every vertex, for every conditioning set from ``pool``.

    Entry ``[x, m]`` is True iff ``x`` is d-connected to ``u`` given
    ``{pool[i] : bit i of m}`` (entries for conditioned ``x`` are meaningless).
    All ``2**len(pool)`` conditioning sets are handled at once by running the
    directional reachability on boolean vectors indexed by the mask; this
    shares no code with :func:`d_separated` and serves as an independent
    oracle.
    """
    pool = list(pool)
    if len(pool) > limit:
        raise SizeGuardError(f"pool of {len(pool)} exceeds the table limit of {limit}")
    if u in pool:
        raise OverlapError("the source may not be in the pool")
    n, k = g.n, len(pool)
    masks = np.arange(1 << k)
    in_z = np.zeros((n, 1 << k), dtype=bool)
    for i, zv in enumerate(pool):
        in_z[zv] = (masks >> i) & 1
    # active[x, m]: x or one of its descendants is conditioned on
    active = in_z.copy()
    for zv in pool:
        stack, seen = [zv], {zv}
        while stack:
            for p in g.parents[stack.pop()]:
                if p not in seen:
                    seen.add(p)
                    stack.append(p)
                    active[p] |= in_z[zv]
    open_ = ~in_z
    up = np.zeros_like(in_z)
    down = np.zeros_like(in_z)
    up[u] = True
    edges = g.edges
    changed = True
    while changed:
        changed = False
        for p, c in edges:
            nd = down[c] | ((up[p] | down[p]) & open_[p])
            nu = up[p] | (up[c] & open_[c]) | (down[c] & active[c])
            if (nd != down[c]).any():
                down[c] = nd
                changed = True
            if (nu != up[p]).any():
                up[p] = nu
                changed = True
    return up | down
