import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_dags, vs
from dconvex.dag import (Dag, UndirectedGraph, ancestral_closure, build_dag,
                         d_connected_components, descendants, induced_subgraph, markov_boundary,
                         moralize, random_dag, random_tree_dag, topological_order)
from dconvex.errors import (CycleError, DuplicateEdgeError, GraphError, SelfLoopError,
                            VertexError)


def test_build_chain(chain):
    assert chain.names == ("a", "b", "c")
    assert chain.edges == [(0, 1), (1, 2)]
    assert chain.children[0] == (1,)


def test_build_fig3(fig3):
    assert fig3.n == 8 and fig3.edge_count == 8
    assert fig3.names_of(fig3.parents[fig3.index("c")]) == ["b", "e"]


def test_first_appearance_order():
    g = build_dag([("x", "a"), ("a", "m")])
    assert g.names == ("x", "a", "m")


def test_cycle_is_named():
    with pytest.raises(CycleError) as e:
        build_dag([("a", "b"), ("b", "a")])
    assert set(e.value.cycle) == {"a", "b"}
    with pytest.raises(CycleError) as e:
        build_dag([("s", "a"), ("a", "b"), ("b", "c"), ("c", "a")])
    cyc = e.value.cycle
    assert cyc[0] == cyc[-1] and set(cyc) == {"a", "b", "c"}


def test_bad_edges():
    with pytest.raises(DuplicateEdgeError):
        build_dag([("a", "b"), ("a", "b")])
    with pytest.raises(SelfLoopError):
        build_dag([("a", "a")])
    with pytest.raises(VertexError):
        Dag(["a"], [[3]])
    with pytest.raises(GraphError):
        Dag(["a", "a"], [[], []])


def test_parents_children_mirror():
    for g in random_dags(30, 12, seed=1):
        for v in range(g.n):
            for p in g.parents[v]:
                assert v in g.children[p]
            for c in g.children[v]:
                assert v in g.parents[c]


def test_topological_order(chain, fig3):
    assert topological_order(chain) == [0, 1, 2]
    assert topological_order(Dag([], [])) == []
    order = topological_order(fig3)
    pos = {v: i for i, v in enumerate(order)}
    assert all(pos[p] < pos[c] for p, c in fig3.edges)
    assert pos[0] < pos[1] < pos[2] < pos[3]


def test_topological_order_ties_ascending():
    g = Dag(["a", "b", "c", "d"], [[], [], [], [0]])
    assert topological_order(g) == [0, 1, 2, 3]


def test_ancestral_closure(fig3, chain):
    assert ancestral_closure(fig3, vs(fig3, "dh")) == frozenset(range(8))
    assert ancestral_closure(chain, vs(chain, "c")) == frozenset(range(3))
    assert ancestral_closure(chain, range(3)) == frozenset(range(3))
    with pytest.raises(VertexError):
        ancestral_closure(chain, [7])


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 12), st.floats(0, 0.7), st.integers(0, 10**6), st.data())
def test_ancestral_closure_laws(n, p, seed, data):
    g = random_dag(n, p, seed=seed)
    a = frozenset(data.draw(st.sets(st.integers(0, n - 1))))
    b = a | frozenset(data.draw(st.sets(st.integers(0, n - 1))))
    an = ancestral_closure(g, a)
    assert a <= an
    assert ancestral_closure(g, an) == an
    assert an <= ancestral_closure(g, b)


def test_descendants(chain):
    assert descendants(chain, 0) == {1, 2}
    assert descendants(chain, 2) == frozenset()


def test_markov_boundary(fig3):
    assert markov_boundary(fig3, vs(fig3, "d")) == vs(fig3, "c")
    assert markov_boundary(fig3, vs(fig3, "c")) == vs(fig3, "bedhg")
    assert markov_boundary(fig3, range(8)) == frozenset()


def test_moralize_small(vstruct, chain):
    m = moralize(vstruct)
    assert m.edges() == [(0, 1), (0, 2), (1, 2)]
    assert moralize(chain).edges() == [(0, 1), (1, 2)]


def test_moralize_fig3(fig3):
    m = moralize(fig3)
    c, g, e, b = (fig3.index(s) for s in "cgeb")
    assert m.has_edge(c, g) and m.has_edge(e, b)


def test_moralize_properties():
    for g in random_dags(40, 10, seed=2):
        m = moralize(g)
        for p, c in g.edges:
            assert m.has_edge(p, c)
        for v in range(g.n):
            for a, b in itertools.combinations(g.parents[v], 2):
                assert m.has_edge(a, b)
        # nothing else
        extra = {tuple(sorted(e)) for e in m.edges()} - {tuple(sorted(e)) for e in g.edges}
        for a, b in extra:
            assert set(g.children[a]) & set(g.children[b])


def test_moral_graph_of_ancestral_subgraph():
    rng = np.random.default_rng(3)
    for g in random_dags(40, 10, seed=3):
        a = frozenset(int(x) for x in rng.choice(g.n, size=min(g.n, 3), replace=False))
        an = sorted(ancestral_closure(g, a))
        sub = induced_subgraph(g, an)
        m = moralize(sub)
        direct = set()
        for v in an:
            ps = [p for p in g.parents[v] if p in an]
            direct.update((min(p, v), max(p, v)) for p in ps)
            direct.update((min(x, y), max(x, y)) for x, y in itertools.combinations(ps, 2))
        got = {(sub.origin[x], sub.origin[y]) for x, y in m.edges()}
        assert got == direct


def test_undirected_graph_validation():
    with pytest.raises(GraphError):
        UndirectedGraph([{1}, set()])
    with pytest.raises(SelfLoopError):
        UndirectedGraph([{0}])


def test_induced_subgraph(fig3):
    sub = induced_subgraph(fig3, vs(fig3, "cdh"))
    assert sub.names == ("c", "d", "h")
    assert [(sub.names[p], sub.names[c]) for p, c in sub.edges] == [("c", "d"), ("c", "h")]
    assert sub.origin == (2, 3, 7)
    assert induced_subgraph(fig3, range(8)) == fig3
    assert induced_subgraph(fig3, []).n == 0


def test_components_fig2(fig2):
    comps = d_connected_components(fig2, vs(fig2, "ai"))
    assert comps == [vs(fig2, "bcdefgh")]
    sub = induced_subgraph(fig2, ancestral_closure(fig2, vs(fig2, "ai")))
    comps = d_connected_components(sub, sub.vertex_set("ai"))
    assert [sub.names_of(m) for m in comps] == [list("bcdefg")]


def test_components_trivial(fig3):
    assert d_connected_components(fig3, range(8)) == []
    two = build_dag([("a", "b"), ("c", "d")])
    assert d_connected_components(two, []) == [{0, 1}, {2, 3}]


def _dconnected_pair(g, x, y, r):
    # brute force: a path whose intermediate r-vertices are all colliders
    stack = [(x, (x,))]
    while stack:
        v, path = stack.pop()
        for w in g.neighbors(v):
            if w in path:
                continue
            if w == y:
                full = path + (y,)
                if all(full[i] not in r or (full[i - 1] in g.parents[full[i]]
                                            and full[i + 1] in g.parents[full[i]])
                       for i in range(1, len(full) - 1)):
                    return True
                continue
            stack.append((w, path + (w,)))
    return False


def test_components_match_definition():
    rng = np.random.default_rng(4)
    for g in random_dags(60, 9, seed=4):
        r = frozenset(int(x) for x in rng.choice(g.n, size=int(rng.integers(0, g.n + 1)),
                                                 replace=False))
        comps = d_connected_components(g, r)
        seen = set()
        for m in comps:
            assert not (m & seen) and not (m & r)
            seen |= m
            for x, y in itertools.combinations(sorted(m), 2):
                assert _dconnected_pair(g, x, y, r)
        assert seen == set(range(g.n)) - r
        for m1, m2 in itertools.combinations(comps, 2):
            assert not any(_dconnected_pair(g, x, y, r) for x in m1 for y in m2)


def test_random_dag_basics():
    assert random_dag(0, 0.5, seed=1).n == 0
    g = random_dag(7, 1.0, seed=1)
    assert g.edge_count == 21
    assert random_dag(30, 0.2, seed=5) == random_dag(30, 0.2, seed=5)
    with pytest.raises(ValueError):
        random_dag(5, 1.5)


def test_random_dag_edge_count():
    counts = [random_dag(200, 0.01, seed=s).edge_count for s in range(50)]
    mean, sd = 0.01 * 200 * 199 / 2, np.sqrt(0.01 * 0.99 * 200 * 199 / 2)
    assert abs(np.mean(counts) - mean) < 3 * sd / np.sqrt(50)


def test_random_tree_dag():
    assert random_tree_dag(1, 0.5, seed=0).n == 1
    g = random_tree_dag(5, 0.0, seed=0)
    assert all(len(g.parents[v]) == 1 for v in range(1, 5))
    assert random_tree_dag(40, 0.0, seed=3).edge_count == 39
    for s in range(20):
        g = random_tree_dag(40, 0.1, 3, seed=s)
        assert max(len(p) for p in g.parents) <= 3
        g = random_tree_dag(40, 0.3, 3, seed=s, extra="vertex")
        assert max(len(p) for p in g.parents) <= 2
    with pytest.raises(ValueError):
        random_tree_dag(0, 0.1)
    with pytest.raises(ValueError):
        random_tree_dag(5, 0.1, max_parents=0)

