"""Discrete Bayesian networks, factors and exact inference.

A :class:`Factor` is a scope (tuple of vertex indices) plus a dense numpy
array with one axis per scope variable.  A CPT for vertex ``v`` is the factor
over ``(v, *parents)`` with the child on axis 0, so ``table[:, j, k, ...]`` is
one distribution over the child's states.  Evidence maps are plain dicts from
vertex index to state index.
"""

from __future__ import annotations

import heapq
import math
from collections.abc import Mapping

import numpy as np

from .dag import Dag, _check, ancestral_closure, induced_subgraph, topological_order
from .errors import (DegenerateEstimateError, FactorError, GraphError, NotConvexError,
                     SizeGuardError, ZeroEvidenceProbabilityError)

JOINT_CAP = 1 << 20
CPT_TOL = 1e-12


class Factor:
    """Non-negative table over an ordered scope of discrete variables."""

    __slots__ = ("scope", "table")

    def __init__(self, scope, table):
        scope = tuple(int(v) for v in scope)
        table = np.asarray(table, dtype=float)
        if len(set(scope)) != len(scope):
            raise FactorError(f"duplicate variable in scope {scope}")
        if table.ndim != len(scope):
            raise FactorError(f"table has {table.ndim} axes for a scope of {len(scope)}")
        self.scope = scope
        self.table = table

    @property
    def cards(self) -> dict:
        return dict(zip(self.scope, self.table.shape))

    def total(self) -> float:
        return float(self.table.sum())

    def transpose(self, scope) -> Factor:
        """Same factor with its axes reordered to ``scope``."""
        scope = tuple(scope)
        if sorted(scope) != sorted(self.scope):
            raise FactorError(f"{scope} is not a permutation of {self.scope}")
        axes = [self.scope.index(v) for v in scope]
        return Factor(scope, np.transpose(self.table, axes))

    def __repr__(self):
        return f"Factor(scope={self.scope}, shape={self.table.shape})"


def _unit() -> Factor:
    return Factor((), np.ones(()))


def factor_product(a: Factor, b: Factor) -> Factor:
    """Pointwise product over the union of the two scopes (``a``'s order first)."""
    ca, cb = a.cards, b.cards
    for v in set(ca) & set(cb):
        if ca[v] != cb[v]:
            raise FactorError(f"variable {v} has cardinality {ca[v]} in one factor and {cb[v]} in the other")
    scope = a.scope + tuple(v for v in b.scope if v not in ca)
    return Factor(scope, _einsum([a, b], scope))


def factor_marginalize(f: Factor, out) -> Factor:
    """Sum the variables in ``out`` out of ``f``."""
    out = set(out)
    if not out <= set(f.scope):
        raise FactorError(f"cannot sum out {sorted(out - set(f.scope))}: not in scope")
    axes = tuple(i for i, v in enumerate(f.scope) if v in out)
    keep = tuple(v for v in f.scope if v not in out)
    return Factor(keep, f.table.sum(axis=axes))


def factor_reduce(f: Factor, evidence: Mapping[int, int]) -> Factor:
    """Slice ``f`` at the observed states; observed variables leave the scope.

    Evidence on variables outside the scope is ignored.
    """
    index = []
    keep = []
    for v, k in zip(f.scope, f.table.shape):
        if v in evidence:
            s = int(evidence[v])
            if not 0 <= s < k:
                raise FactorError(f"state {s} out of range for variable {v} with {k} states")
            index.append(s)
        else:
            index.append(slice(None))
            keep.append(v)
    return Factor(keep, f.table[tuple(index)])


def _einsum(factors, out_scope) -> np.ndarray:
    labels: dict[int, int] = {}
    for f in factors:
        for v in f.scope:
            labels.setdefault(v, len(labels))
    if len(labels) > 52:
        # einsum's sublist labels are limited; fall back to explicit broadcasting
        acc = _unit()
        for f in factors:
            acc = _broadcast_product(acc, f)
        drop = [v for v in acc.scope if v not in out_scope]
        return factor_marginalize(acc, drop).transpose(out_scope).table
    args = []
    for f in factors:
        args.append(f.table)
        args.append([labels[v] for v in f.scope])
    args.append([labels[v] for v in out_scope])
    return np.einsum(*args, optimize=len(factors) > 2)


def _broadcast_product(a: Factor, b: Factor) -> Factor:
    scope = a.scope + tuple(v for v in b.scope if v not in a.scope)
    ta = a.table.reshape(a.table.shape + (1,) * (len(scope) - len(a.scope)))
    axes = [b.scope.index(v) for v in scope if v in b.scope]
    tb = np.transpose(b.table, axes)
    shape = [b.cards[v] if v in b.scope else 1 for v in scope]
    return Factor(scope, ta * tb.reshape(shape))


class DiscreteBn:
    """A DAG with a CPT for every vertex.

    Parameters
    ----------
    dag : Dag
    cpts : sequence of Factor or array
        ``cpts[v]`` is over ``(v, *dag.parents[v])``; bare arrays are taken
        to be in that axis order.
    states : sequence of sequences of str, optional
        State labels per vertex; defaults to ``s0, s1, ...``.
    name : str
    """

    __slots__ = ("dag", "cards", "cpts", "states", "name")

    def __init__(self, dag: Dag, cpts, states=None, name: str = "network", tol: float = CPT_TOL):
        if len(cpts) != dag.n:
            raise FactorError("one CPT per vertex is required")
        factors = []
        for v, t in enumerate(cpts):
            scope = (v,) + dag.parents[v]
            if isinstance(t, Factor):
                if set(t.scope) != set(scope) or len(t.scope) != len(scope):
                    raise FactorError(f"CPT of {dag.names[v]!r} has scope {t.scope}, expected {scope}")
                t = t.transpose(scope)
            else:
                t = Factor(scope, t)
            factors.append(t)
        cards = tuple(f.table.shape[0] for f in factors)
        for v, f in enumerate(factors):
            want = tuple(cards[x] for x in f.scope)
            if f.table.shape != want:
                raise FactorError(f"CPT of {dag.names[v]!r} has shape {f.table.shape}, expected {want}")
            if cards[v] < 1:
                raise FactorError(f"{dag.names[v]!r} has no states")
            t = f.table
            if not np.all(np.isfinite(t)) or t.min(initial=0.0) < 0 or t.max(initial=0.0) > 1:
                raise FactorError(f"CPT of {dag.names[v]!r} has entries outside [0, 1]")
            sums = t.sum(axis=0)
            if np.abs(sums - 1).max(initial=0.0) > tol:
                raise FactorError(f"CPT of {dag.names[v]!r} has a row summing to "
                                  f"{sums.flat[np.abs(sums - 1).argmax()]!r}")
        if states is None:
            states = [[f"s{i}" for i in range(k)] for k in cards]
        states = tuple(tuple(str(s) for s in ss) for ss in states)
        if len(states) != dag.n or any(len(ss) != k for ss, k in zip(states, cards)):
            raise FactorError("state labels do not match the cardinalities")
        self.dag = dag
        self.cards = cards
        self.cpts = tuple(factors)
        self.states = states
        self.name = str(name)

    @property
    def n(self) -> int:
        return self.dag.n

    def joint_size(self, vertices=None) -> int:
        vs = range(self.n) if vertices is None else vertices
        return math.prod(self.cards[v] for v in vs)

    def __eq__(self, other):
        if not isinstance(other, DiscreteBn):
            return NotImplemented
        return (self.dag == other.dag and self.cards == other.cards
                and self.states == other.states and self.name == other.name
                and all(np.array_equal(a.table, b.table) for a, b in zip(self.cpts, other.cpts)))

    __hash__ = None

    def __repr__(self):
        return f"DiscreteBn({self.name!r}, n={self.n}, edges={self.dag.edge_count})"


def random_bn(dag: Dag, cardinality=2, seed=None, name: str = "random") -> DiscreteBn:
    """Random CPTs with rows drawn from a flat Dirichlet.

    ``cardinality`` is an int shared by all vertices or one int per vertex.
    """
    rng = np.random.default_rng(seed)
    if np.isscalar(cardinality):
        cards = [int(cardinality)] * dag.n
    else:
        cards = [int(k) for k in cardinality]
    cpts = []
    for v in range(dag.n):
        rows = math.prod(cards[p] for p in dag.parents[v])
        t = rng.dirichlet(np.ones(cards[v]), size=rows).T
        t = t / t.sum(axis=0)
        cpts.append(t.reshape([cards[v]] + [cards[p] for p in dag.parents[v]]))
    return DiscreteBn(dag, cpts, name=name)


def _check_evidence(bn: DiscreteBn, evidence) -> dict:
    evidence = dict(evidence or {})
    _check(bn.dag, evidence)
    for v, s in evidence.items():
        if not 0 <= int(s) < bn.cards[v]:
            raise FactorError(f"state {s} out of range for {bn.dag.names[v]!r}")
    return {int(v): int(s) for v, s in evidence.items()}


def elimination_order(scopes, eliminate) -> list[int]:
    """Greedy min-fill order over the interaction graph of ``scopes``.

    Ties are broken by smaller degree, then smaller vertex index, so the
    order is deterministic.
    """
    adj: dict[int, set] = {}
    for s in scopes:
        for v in s:
            adj.setdefault(v, set()).update(s)
    for v, nb in adj.items():
        nb.discard(v)
    todo = set(eliminate)
    for v in todo:
        adj.setdefault(v, set())

    def score(v):
        nb = list(adj[v])
        fill = 0
        for i, a in enumerate(nb):
            na = adj[a]
            for b in nb[i + 1:]:
                if b not in na:
                    fill += 1
        return (fill, len(nb), v)

    current = {v: score(v) for v in todo}
    heap = list(current.values())
    heapq.heapify(heap)
    order = []
    while todo:
        key = heapq.heappop(heap)
        v = key[2]
        if v not in todo or current[v] != key:
            continue
        order.append(v)
        todo.discard(v)
        nb = adj.pop(v)
        for a in nb:
            adj[a].discard(v)
            adj[a].update(nb)
            adj[a].discard(a)
        touched = set(nb)
        for a in nb:
            touched.update(adj[a])
        for a in touched & todo:
            k = score(a)
            if k != current[a]:
                current[a] = k
                heapq.heappush(heap, k)
    return order


def _eliminate(factors: list[Factor], order) -> list[Factor]:
    factors = list(factors)
    for x in order:
        bucket = [f for f in factors if x in f.scope]
        if not bucket:
            continue
        factors = [f for f in factors if x not in f.scope]
        scope = []
        for f in bucket:
            scope.extend(v for v in f.scope if v != x and v not in scope)
        factors.append(Factor(scope, _einsum(bucket, scope)))
    return factors


def variable_elimination(bn: DiscreteBn, query, evidence=None) -> Factor:
    """``P(query | evidence)`` as a normalized factor over the sorted query.

    Vertices that are not ancestors of the query or the evidence are barren
    and dropped before elimination; the rest are eliminated in min-fill
    order.
    """
    q = sorted(_check(bn.dag, query))
    if not q:
        raise GraphError("the query set is empty")
    evidence = _check_evidence(bn, evidence)
    if set(q) & set(evidence):
        raise GraphError("query and evidence variables overlap")
    relevant = ancestral_closure(bn.dag, set(q) | set(evidence))
    factors = [factor_reduce(bn.cpts[v], evidence) for v in sorted(relevant)]
    elim = relevant - set(q) - set(evidence)
    order = elimination_order([f.scope for f in factors], elim)
    factors = _eliminate(factors, order)
    table = _einsum(factors, q) if factors else np.ones([bn.cards[v] for v in q])
    z = table.sum()
    if not z > 0:
        raise ZeroEvidenceProbabilityError("the evidence has probability zero")
    return Factor(q, table / z)


def joint_enumerate(bn: DiscreteBn, cap: int = JOINT_CAP) -> Factor:
    """The full joint over vertices ``0 .. n-1`` as one factor (test oracle)."""
    size = bn.joint_size()
    if size > cap:
        raise SizeGuardError(f"joint has {size} states, above the cap of {cap}")
    return Factor(range(bn.n), _einsum(list(bn.cpts), tuple(range(bn.n))))


def log_joint(bn: DiscreteBn, cap: int = JOINT_CAP) -> np.ndarray:
    """Elementwise log of the joint, accumulated as a sum of log-CPTs."""
    size = bn.joint_size()
    if size > cap:
        raise SizeGuardError(f"joint has {size} states, above the cap of {cap}")
    out = np.zeros(bn.cards)
    with np.errstate(divide="ignore"):
        for f in bn.cpts:
            shape = [1] * bn.n
            axes = sorted(range(len(f.scope)), key=lambda i: f.scope[i])
            t = np.transpose(f.table, axes)
            for v in f.scope:
                shape[v] = bn.cards[v]
            out = out + np.log(t).reshape(shape)
    return out


def _conditional(joint: Factor, child: int) -> np.ndarray:
    """``P(child | rest)`` from a joint factor whose axis 0 is ``child``."""
    t = joint.table
    z = t.sum(axis=0, keepdims=True)
    k = t.shape[0]
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(z > 0, t / np.where(z > 0, z, 1), 1.0 / k)
    return out / out.sum(axis=0, keepdims=True)


def localize_from_global(bn: DiscreteBn, hull, cache: dict | None = None,
                         check: bool = True) -> DiscreteBn:
    """Parameterize ``G_hull`` so that its joint is the global marginal over ``hull``.

    Vertices whose parent set is unchanged in ``G_hull`` keep their CPT.  For
    the others ``P(v | pa_hull(v))`` is computed by variable elimination on
    ``bn``; parent configurations of probability zero get a uniform row.
    ``cache`` maps ``(v, local parents)`` in global indices to the computed
    table and is filled in place.

    Local vertex ``i`` is the ``i``-th smallest member of ``hull``.
    """
    from .convexity import is_d_convex

    hull = _check(bn.dag, hull)
    if not hull:
        raise GraphError("the hull is empty")
    if check and not is_d_convex(bn.dag, hull):
        raise NotConvexError("the vertex set is not d-convex")
    sub = induced_subgraph(bn.dag, hull)
    base = sub.origin
    cpts = []
    for i, v in enumerate(base):
        pa = tuple(base[p] for p in sub.parents[i])
        if pa == bn.dag.parents[v]:
            cpts.append(bn.cpts[v].table)
            continue
        key = (v, pa)
        if cache is not None and key in cache:
            cpts.append(cache[key])
            continue
        joint = variable_elimination(bn, (v,) + pa).transpose((v,) + pa)
        t = _conditional(joint, v)
        if cache is not None:
            cache[key] = t
        cpts.append(t)
    return DiscreteBn(sub, cpts, states=[bn.states[v] for v in base], name=bn.name)


def forward_sample(bn: DiscreteBn, count: int, seed=None) -> np.ndarray:
    """``count`` ancestral samples as an int array of shape ``(count, n)``."""
    if count < 0:
        raise ValueError("count must be non-negative")
    rng = np.random.default_rng(seed)
    data = np.zeros((count, bn.n), dtype=np.int64)
    for v in topological_order(bn.dag):
        t = bn.cpts[v].table
        k = t.shape[0]
        pa = bn.dag.parents[v]
        flat = t.reshape(k, -1)
        if pa:
            row = np.ravel_multi_index(tuple(data[:, p] for p in pa), t.shape[1:])
        else:
            row = np.zeros(count, dtype=np.int64)
        cum = np.cumsum(flat[:, row], axis=0)
        u = rng.random(count)
        data[:, v] = np.minimum((u > cum).sum(axis=0), k - 1)
    return data


def mle_fit(structure: Dag, cardinalities, data, smoothing: float = 1.0,
            states=None, name: str = "fitted") -> DiscreteBn:
    """Smoothed maximum-likelihood CPTs for ``structure`` from complete data.

    Entries are ``(count + s) / (parent count + s * k)``.  With ``s = 0`` a
    parent configuration that never occurs gets a uniform row.
    """
    if smoothing < 0:
        raise ValueError("smoothing must be non-negative")
    data = np.asarray(data, dtype=np.int64)
    cards = [int(k) for k in cardinalities]
    if data.ndim != 2 or data.shape[1] != structure.n or len(cards) != structure.n:
        raise GraphError("data needs one column per vertex of the structure")
    if len(data) == 0 and smoothing == 0:
        raise DegenerateEstimateError("no data and no smoothing: the estimate is undefined")
    if len(data) and (data.min() < 0 or np.any(data.max(axis=0) >= np.array(cards))):
        raise FactorError("data contains a state outside its variable's range")
    cpts = []
    for v in range(structure.n):
        pa = structure.parents[v]
        shape = [cards[v]] + [cards[p] for p in pa]
        idx = np.ravel_multi_index(tuple(data[:, x] for x in (v,) + pa), shape)
        counts = np.bincount(idx, minlength=math.prod(shape)).reshape(shape).astype(float)
        num = counts + smoothing
        den = num.sum(axis=0, keepdims=True)
        with np.errstate(invalid="ignore", divide="ignore"):
            t = np.where(den > 0, num / np.where(den > 0, den, 1), 1.0 / cards[v])
        cpts.append(t)
    return DiscreteBn(structure, cpts, states=states, name=name)


def kl_divergence(p: DiscreteBn, q: DiscreteBn, cap: int = JOINT_CAP) -> float:
    """Exact ``KL(p || q)`` in nats.

    Joints with at most ``cap`` states are enumerated.  Larger ones use the
    chain rule, which is exact for two networks on the same DAG::

        KL(p || q) = sum_v  sum_{pa}  p(pa_v) * KL(p(v | pa) || q(v | pa))

    with ``p(pa_v)`` obtained by variable elimination.  Terms with
    ``p(x) = 0`` contribute nothing; ``p(x) > 0`` with ``q(x) = 0`` makes the
    result ``inf``.
    """
    if p.dag.n != q.dag.n or p.dag.parents != q.dag.parents:
        raise GraphError("the two networks have different structures")
    if p.cards != q.cards:
        raise GraphError("the two networks have different cardinalities")
    if p.joint_size() <= cap:
        lp = log_joint(p, cap)
        lq = log_joint(q, cap)
        pos = np.isfinite(lp)
        if np.any(~np.isfinite(lq[pos])):
            return math.inf
        px = np.exp(lp[pos])
        return max(float(np.sum(px * (lp[pos] - lq[pos]))), 0.0)
    total = 0.0
    for v in range(p.n):
        pa = p.dag.parents[v]
        tp, tq = p.cpts[v].table, q.cpts[v].table
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = np.where(tp > 0, tp * (np.log(tp) - np.log(tq)), 0.0)
        rows = terms.sum(axis=0)
        if pa:
            weight = variable_elimination(p, pa).transpose(pa).table
        else:
            weight = np.ones(())
        live = weight > 0
        if np.any(np.isinf(rows[live])):
            return math.inf
        total += float(np.sum(weight[live] * rows[live]))
    return max(total, 0.0)
