"""Information pairs, d-convexity and d-convex hulls.

The hull of a query set ``R`` is the smallest ``H ⊇ R`` such that no two
non-adjacent members of ``H`` are joined by an inducing path of ``H``.
:func:`cmdsa` finds it by repeatedly absorbing close minimal d-separators of
the offending pairs; :func:`hull_bruteforce` is the exhaustive oracle.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .dag import Dag, _check, ancestral_closure, d_connected_components, induced_subgraph
from .errors import AdjacentPairError, EmptyQueryError, GraphError, MembershipError, SizeGuardError
from .separation import connection_table, d_separated, separation_table


@dataclass(frozen=True, order=True)
class IPair:
    """Unordered pair of non-adjacent vertices joined by an inducing path."""

    u: int
    v: int

    def __post_init__(self):
        if self.u == self.v:
            raise GraphError("an i-pair needs two distinct vertices")
        if self.u > self.v:
            a, b = self.v, self.u
            object.__setattr__(self, "u", a)
            object.__setattr__(self, "v", b)

    def __iter__(self):
        return iter((self.u, self.v))


@dataclass(frozen=True)
class HullResult:
    hull: frozenset
    iterations: int
    absorbed_separators: list = field(default_factory=list)
    drc: Fraction = Fraction(0)

    def names(self, g: Dag) -> list[str]:
        return g.names_of(self.hull)


def _ancestors_within(g: Dag, seeds, scope) -> set:
    seen = set(seeds)
    stack = list(seeds)
    parents = g.parents
    while stack:
        for p in parents[stack.pop()]:
            if p not in seen and (scope is None or p in scope):
                seen.add(p)
                stack.append(p)
    return seen


def _moral_path(g: Dag, u: int, v: int, allowed, anc) -> bool:
    """Is there a path u .. v in the moral graph of ``G_anc`` with every
    intermediate vertex in ``allowed``?"""
    parents, children = g.parents, g.children
    seen = {u}
    stack = [u]
    while stack:
        x = stack.pop()
        nbrs = list(parents[x])
        for c in children[x]:
            if c in anc:
                nbrs.append(c)
                nbrs.extend(parents[c])
        for y in nbrs:
            if y == v:
                return True
            if y not in seen and y in allowed and y in anc:
                seen.add(y)
                stack.append(y)
    return False


def _pair_check(g: Dag, u: int, v: int, r):
    r = _check(g, r)
    _check(g, [u, v])
    if u == v:
        raise GraphError("u and v must be distinct")
    if u not in r or v not in r:
        raise MembershipError("both endpoints must belong to r")
    if g.adjacent(u, v):
        raise AdjacentPairError(f"{g.names[u]} and {g.names[v]} are adjacent")
    return r


def is_ipair(g: Dag, u: int, v: int, r) -> bool:
    """Moral-graph test: a path between ``u`` and ``v`` in the moral graph of
    ``G_{An({u,v})}`` whose intermediate vertices all lie outside ``r``."""
    r = _pair_check(g, u, v, r)
    anc = ancestral_closure(g, [u, v])
    return _moral_path(g, u, v, anc - r, anc)


def is_ipair_dconnected(g: Dag, u: int, v: int, r) -> bool:
    """d-connection test: ``u`` and ``v`` are d-connected given ``an({u,v}) ∩ r``."""
    r = _pair_check(g, u, v, r)
    z = (ancestral_closure(g, [u, v]) - {u, v}) & r
    return not d_separated(g, [u], [v], z)


def is_ipair_bruteforce(g: Dag, u: int, v: int, r, limit: int = 14) -> bool:
    """No subset of ``r \\ {u, v}`` d-separates ``u`` from ``v`` (every subset tried)."""
    r = _pair_check(g, u, v, r)
    pool = sorted(r - {u, v})
    return not separation_table(g, u, v, pool, limit=limit).any()


def _boundary(g: Dag, m, h) -> set:
    out = set()
    parents, children = g.parents, g.children
    for x in m:
        out.update(parents[x])
        for c in children[x]:
            out.add(c)
            out.update(parents[c])
    return out & h


def _component_ipairs(g: Dag, h, skip=frozenset(), first=False):
    """``∪_M I_{G_{M ∪ h}}(h)`` over the d-connected components ``M`` of ``g`` w.r.t. ``h``.

    ``g`` must already be ancestral for ``h`` (every vertex an ancestor of
    ``h``).  Pairs in ``skip`` are known not to be i-pairs and are not tested.
    Returns the sorted i-pairs and the set of pairs that were tested.
    """
    found = set()
    tested = set()
    for m in d_connected_components(g, h):
        bd = sorted(_boundary(g, m, h))
        if len(bd) < 2:
            continue
        scope = m | h
        anc = {}
        for u, v in itertools.combinations(bd, 2):
            if (u, v) in skip or (u, v) in found or g.adjacent(u, v):
                continue
            tested.add((u, v))
            if u not in anc:
                anc[u] = _ancestors_within(g, [u], scope)
            if v not in anc:
                anc[v] = _ancestors_within(g, [v], scope)
            if _moral_path(g, u, v, m, anc[u] | anc[v]):
                found.add((u, v))
                if first:
                    return sorted(found), tested
    return sorted(found), tested


def ipairs(g: Dag, r) -> list[IPair]:
    """All i-pairs of ``r``, sorted.

    Only non-adjacent pairs in the Markov boundary of some d-connected
    component of ``G_{An(r)}`` w.r.t. ``r`` can be i-pairs, so only those are
    tested.
    """
    r = _check(g, r)
    if len(r) < 2:
        return []
    base = sorted(ancestral_closure(g, r))
    sub = induced_subgraph(g, base)
    local = {x: i for i, x in enumerate(base)}
    pairs, _ = _component_ipairs(sub, frozenset(local[x] for x in r))
    return [IPair(base[a], base[b]) for a, b in pairs]


def is_d_convex(g: Dag, h) -> bool:
    """True iff ``h`` has no i-pairs, i.e. there is no inducing path of ``h``."""
    h = _check(g, h)
    if len(h) < 2:
        return True
    base = sorted(ancestral_closure(g, h))
    sub = induced_subgraph(g, base)
    local = {x: i for i, x in enumerate(base)}
    return not _component_ipairs(sub, frozenset(local[x] for x in h), first=True)[0]


def fcmds(g: Dag, u: int, v: int) -> frozenset:
    """The unique minimal u-v d-separator contained in u's Markov boundary
    within the ancestral subgraph of ``{u, v}``.

    Take that boundary ``B``, collect every vertex reachable from ``v`` when
    ``B``-vertices may only be crossed as colliders, and return the part of
    ``B`` that was reached.
    """
    _check(g, [u, v])
    if u == v:
        raise GraphError("u and v must be distinct")
    if g.adjacent(u, v):
        raise AdjacentPairError(f"{g.names[u]} and {g.names[v]} are adjacent")
    return _fcmds(g, u, v)


def _anc_mask(g: Dag, seeds) -> bytearray:
    mask = bytearray(g.n)
    stack = list(seeds)
    for x in stack:
        mask[x] = 1
    parents = g.parents
    while stack:
        for p in parents[stack.pop()]:
            if not mask[p]:
                mask[p] = 1
                stack.append(p)
    return mask


def _fcmds(g: Dag, u: int, v: int, anc=None) -> frozenset:
    if anc is None:
        anc = _anc_mask(g, [u, v])
    parents, children = g.parents, g.children
    mb = set(parents[u])
    for c in children[u]:
        if anc[c]:
            mb.add(c)
            mb.update(parents[c])
    mb.discard(u)
    # reachability from v in which boundary vertices are crossed only as
    # colliders; stops as soon as every boundary vertex has been reached
    n = g.n
    up = bytearray(n)
    down = bytearray(n)
    hit = set()
    stack = []
    for p in parents[v]:
        if anc[p]:
            up[p] = 1
            stack.append(p << 1)
    for c in children[v]:
        if anc[c]:
            down[c] = 1
            stack.append((c << 1) | 1)
    need = len(mb)
    pop, push = stack.pop, stack.append
    while stack and len(hit) < need:
        s = pop()
        x = s >> 1
        if x in mb:
            hit.add(x)
            if not s & 1:
                continue
            for p in parents[x]:
                if anc[p] and not up[p]:
                    up[p] = 1
                    push(p << 1)
            continue
        for p in parents[x]:
            if anc[p] and not up[p]:
                up[p] = 1
                push(p << 1)
        for c in children[x]:
            if anc[c] and not down[c]:
                down[c] = 1
                push((c << 1) | 1)
    return frozenset(hit)


def minimal_dsep_verify(g: Dag, s, u: int, v: int, limit: int = 16) -> bool:
    """``s`` separates ``u`` from ``v`` and no proper subset of ``s`` does."""
    s = sorted(_check(g, s))
    if len(s) > limit:
        raise SizeGuardError(f"|S| = {len(s)} exceeds the subset limit of {limit}")
    if not d_separated(g, [u], [v], s):
        return False
    for k in range(len(s)):
        for sub in itertools.combinations(s, k):
            if d_separated(g, [u], [v], sub):
                return False
    return True


def cmdsa(g: Dag, r) -> HullResult:
    """d-convex hull of ``r`` by close minimal d-separator absorption.

    Each round splits ``G_{An(r)}`` into d-connected components w.r.t. the
    current ``H``, collects the i-pairs of ``H`` within every ``G_{M ∪ H}``,
    and absorbs both close minimal separators of every such pair.  Rounds
    repeat until no i-pair is left.  A pair that is not an i-pair of ``H``
    cannot become one for a larger ``H``, so it is never retested.
    """
    r = _check(g, r)
    if not r:
        raise EmptyQueryError("the query set is empty")
    base = sorted(ancestral_closure(g, r))
    sub = induced_subgraph(g, base)
    local = {x: i for i, x in enumerate(base)}
    h = {local[x] for x in r}
    settled: set = set()
    trace = []
    iterations = 0
    while True:
        iterations += 1
        if len(h) < 2:
            break
        q, tested = _component_ipairs(sub, frozenset(h), skip=settled)
        # found pairs become separated once their separators are absorbed, the
        # rest were not i-pairs; either way they are settled for good
        settled |= tested
        if not q:
            break
        grown = set(h)
        for u, v in q:
            anc = _anc_mask(sub, [u, v])
            su = _fcmds(sub, u, v, anc)
            sv = _fcmds(sub, v, u, anc)
            trace.append((IPair(base[u], base[v]),
                          frozenset(base[x] for x in su), frozenset(base[x] for x in sv)))
            grown |= su | sv
        h = grown
    hull = frozenset(base[x] for x in h)
    return HullResult(hull, iterations, trace, drc(g, hull))


def _subset_or(table: np.ndarray, k: int) -> np.ndarray:
    """``out[m] = OR of table[s] over all s ⊆ m`` (k-bit masks)."""
    out = table.copy()
    for i in range(k):
        view = out.reshape(-1, 2, 1 << i)
        view[:, 1, :] |= view[:, 0, :]
    return out


def hull_bruteforce(g: Dag, r, limit: int = 14) -> frozenset:
    """Intersection of every d-convex ``H`` with ``r ⊆ H ⊆ An(r)``.

    d-convexity of each candidate is decided from scratch: ``H`` is d-convex
    iff every non-adjacent pair ``u, v`` in ``H`` is d-separated by some
    ``Z ⊆ H \\ {u, v}``, with all such ``Z`` enumerated via
    :func:`separation_table`.
    """
    r = _check(g, r)
    if not r:
        raise EmptyQueryError("the query set is empty")
    a = sorted(ancestral_closure(g, r))
    m = len(a)
    if m > limit:
        raise SizeGuardError(f"|An(R)| = {m} exceeds the brute-force limit of {limit}")
    pos = {x: i for i, x in enumerate(a)}
    masks = np.arange(1 << m, dtype=np.int64)
    convex = np.ones(1 << m, dtype=bool)
    for iu, u in enumerate(a):
        pool = a[:iu] + a[iu + 1:]
        conn = connection_table(g, u, pool)
        low = (1 << iu) - 1
        pool_mask = (masks & low) | ((masks >> (iu + 1)) << iu)
        for v in a[iu + 1:]:
            if g.adjacent(u, v):
                continue
            iv = pos[v]
            bit_v = 1 << (iv - 1)
            pool_masks = np.arange(1 << (m - 1))
            sep = ~conn[v] & ((pool_masks & bit_v) == 0)
            separable = _subset_or(sep, m - 1)
            both = ((masks >> iu) & 1).astype(bool) & ((masks >> iv) & 1).astype(bool)
            convex &= ~both | separable[pool_mask]
    rmask = sum(1 << pos[x] for x in r)
    cands = masks[convex & ((masks & rmask) == rmask)]
    hmask = int(np.bitwise_and.reduce(cands))
    return frozenset(a[i] for i in range(m) if hmask >> i & 1)


def drc(g: Dag, hull) -> Fraction:
    """Dimension reduction capability ``1 - |hull| / n``."""
    if g.n == 0:
        raise GraphError("DRC is undefined for an empty graph")
    hull = _check(g, hull)
    return 1 - Fraction(len(hull), g.n)
