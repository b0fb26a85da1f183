import itertools

import numpy as np
import pytest

from conftest import random_dags, vs
from dconvex.dag import ancestral_closure, build_dag, induced_subgraph
from dconvex.errors import GraphError, OverlapError, SizeGuardError
from dconvex.separation import (ReachQuery, connection_table, d_separated,
                                d_separated_bruteforce, independence_projection_equal,
                                reachable_set, separation_table)


def test_reach_chain_blocked_terminal(chain):
    # b is reached but cannot be passed, so c stays out
    q = ReachQuery(0, frozenset({1}))
    assert reachable_set(chain, q) == {0, 1}


def test_reach_collider(vstruct):
    q = ReachQuery(0, frozenset({2}))
    assert reachable_set(vstruct, q) == {0, 1, 2}


def test_reach_no_descendant_activation():
    # a -> c <- b, c -> d: only membership in W matters, never descendants
    g = build_dag([("a", "c"), ("b", "c"), ("c", "d")])
    a = g.index("a")
    assert reachable_set(g, ReachQuery(a, vs(g, "d"))) == vs(g, "abcd")
    assert reachable_set(g, ReachQuery(a, vs(g, "c"))) == vs(g, "abc")
    assert reachable_set(g, ReachQuery(a, vs(g, "b"))) == vs(g, "abcd")


def test_reach_fig3(fig3):
    h, c = fig3.index("h"), fig3.index("c")
    q = ReachQuery(h, frozenset({c}), target=fig3.index("d"))
    assert reachable_set(fig3, q) & {c} == {c}


def test_reach_validation(chain):
    with pytest.raises(GraphError):
        reachable_set(chain, ReachQuery(0, frozenset({0})))
    with pytest.raises(GraphError):
        reachable_set(chain, ReachQuery(0, frozenset({2}), universe=frozenset({0, 1})))


def test_reach_empty_conditioning_is_component():
    rng = np.random.default_rng(5)
    for g in random_dags(60, 10, seed=5, n_min=2):
        u, v = (int(x) for x in rng.choice(g.n, 2, replace=False))
        universe = ancestral_closure(g, [u, v])
        got = reachable_set(g, ReachQuery(u, target=v))
        comp, stack = {u}, [u]
        while stack:
            for w in g.neighbors(stack.pop()):
                if w in universe and w not in comp:
                    comp.add(w)
                    stack.append(w)
        assert got == comp


def test_d_separated_basics(chain, vstruct, fig3):
    assert d_separated(chain, [0], [2], [1])
    assert not d_separated(chain, [0], [2])
    assert d_separated(vstruct, [0], [1])
    assert not d_separated(vstruct, [0], [1], [2])
    assert d_separated(fig3, vs(fig3, "d"), vs(fig3, "h"), vs(fig3, "c"))


def test_descendant_activates_collider():
    g = build_dag([("a", "c"), ("b", "c"), ("c", "d")])
    assert d_separated(g, vs(g, "a"), vs(g, "b"))
    assert not d_separated(g, vs(g, "a"), vs(g, "b"), vs(g, "d"))


def test_d_separated_overlap(chain):
    with pytest.raises(OverlapError):
        d_separated(chain, [0], [0])
    with pytest.raises(OverlapError):
        d_separated(chain, [0], [2], [2])
    with pytest.raises(GraphError):
        d_separated(chain, [], [2])


def test_bruteforce_examples(chain, fig2):
    assert not d_separated_bruteforce(chain, [0], [2])
    assert not d_separated_bruteforce(fig2, vs(fig2, "a"), vs(fig2, "i"))
    big = build_dag([(f"v{i}", f"v{i + 1}") for i in range(13)])
    with pytest.raises(SizeGuardError):
        d_separated_bruteforce(big, [0], [1])


def test_symmetry_and_decomposition():
    rng = np.random.default_rng(6)
    for g in random_dags(60, 9, seed=6, n_min=4):
        lab = rng.integers(0, 4, g.n)
        x = [v for v in range(g.n) if lab[v] == 1]
        y = [v for v in range(g.n) if lab[v] == 2]
        z = [v for v in range(g.n) if lab[v] == 3]
        if not x or not y:
            continue
        sep = d_separated(g, x, y, z)
        assert sep == d_separated(g, y, x, z)
        if sep:
            assert d_separated(g, x[:1], y[:1], z)


def test_bayes_ball_matches_paths_on_sets():
    rng = np.random.default_rng(7)
    for g in random_dags(80, 8, seed=7, n_min=3):
        lab = rng.integers(0, 4, g.n)
        x = [v for v in range(g.n) if lab[v] == 1]
        y = [v for v in range(g.n) if lab[v] == 2]
        z = [v for v in range(g.n) if lab[v] == 3]
        if x and y:
            assert d_separated(g, x, y, z) == d_separated_bruteforce(g, x, y, z)


def test_connection_table_matches_bayes_ball():
    rng = np.random.default_rng(8)
    for g in random_dags(40, 8, seed=8, n_min=3):
        u = int(rng.integers(g.n))
        pool = [v for v in range(g.n) if v != u]
        table = connection_table(g, u, pool)
        for m in range(1 << len(pool)):
            z = [pool[i] for i in range(len(pool)) if m >> i & 1]
            for v in range(g.n):
                if v != u and v not in z:
                    assert table[v, m] == (not d_separated(g, [u], [v], z))


def test_separation_table_guards(chain):
    with pytest.raises(OverlapError):
        separation_table(chain, 0, 2, [2])
    with pytest.raises(SizeGuardError):
        connection_table(chain, 0, list(range(1, 3)), limit=1)


def test_projection_examples(fig3):
    assert independence_projection_equal(fig3, range(8))
    assert independence_projection_equal(fig3, vs(fig3, "cdh"))
    assert not independence_projection_equal(fig3, vs(fig3, "dh"))
    with pytest.raises(SizeGuardError):
        independence_projection_equal(fig3, range(8), limit=7)


def test_projection_of_subgraph_direct():
    # the projection test agrees with a literal triple-by-triple comparison
    rng = np.random.default_rng(9)
    for g in random_dags(20, 6, seed=9, n_min=3):
        a = sorted(int(x) for x in rng.choice(g.n, size=3, replace=False))
        sub = induced_subgraph(g, a)
        equal = True
        for x, y, z in itertools.product(range(3), repeat=3):
            if len({x, y, z}) < 3:
                continue
            for zz in ([], [z]):
                lhs = d_separated(g, [a[x]], [a[y]], [a[i] for i in zz])
                rhs = d_separated(sub, [x], [y], zz)
                equal &= lhs == rhs
        assert independence_projection_equal(g, a) == equal
