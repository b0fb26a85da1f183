#!/usr/bin/env python
# coding: utf-8

# # d-convex hulls on two small graphs
#
# The two bundled toy graphs are the smallest interesting cases: `fig3a`
# needs one round of separator absorption, `fig2a` has an inducing path
# that a naive "take the ancestors" approach would miss.

from dconvex.convexity import cmdsa, fcmds, ipairs, is_d_convex
from dconvex.dag import ancestral_closure, d_connected_components, induced_subgraph
from dconvex.netio import load_bundled

# ## The query {d, h}
#
# d and h are not adjacent, and nothing inside {d, h} can separate them,
# so {d, h} on its own is not d-convex.

bn = load_bundled("fig3a")
g = bn.dag
print(g.names, g.edge_count, "edges")

d, h = g.index("d"), g.index("h")
print("d-convex:", is_d_convex(g, {d, h}))
print("i-pairs:", [g.names_of(p) for p in ipairs(g, {d, h})])

# The close minimal separator of the pair is the single vertex c.

print("separator near d:", g.names_of(fcmds(g, d, h)))
print("separator near h:", g.names_of(fcmds(g, h, d)))

# Absorbing it leaves no i-pair, so the hull is {c, d, h} after one
# absorbing round and one confirming round.

res = cmdsa(g, {d, h})
print("hull:", res.names(g), "iterations:", res.iterations, "drc:", res.drc)

# ## An inducing path
#
# In the second graph a and i are joined by a path whose inner vertices are
# all outside {a, i}; the d-connected components of the ancestral subgraph
# show where the separators have to come from.

g2 = load_bundled("fig2a")
r = g2.vertex_set("ai")
print("i-pairs:", [g2.names_of(p) for p in ipairs(g2, r)])

sub = induced_subgraph(g2, ancestral_closure(g2, r))
for m in d_connected_components(sub, sub.vertex_set("ai")):
    print("component:", sub.names_of(sorted(m)))

res = cmdsa(g2, r)
print("hull:", res.names(g2))
for pair, su, sv in res.absorbed_separators:
    print(" ", g2.names_of(pair), "absorbed", g2.names_of(sorted(su)), g2.names_of(sorted(sv)))

# b is an ancestor of i but never needed: the hull stays strictly inside
# the ancestral set.

print("ancestral set:", g2.names_of(sorted(ancestral_closure(g2, r))))
