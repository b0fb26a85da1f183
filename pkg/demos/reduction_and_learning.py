#!/usr/bin/env python
# coding: utf-8

# # How much smaller is the hull, and how well can it be learned?
#
# Two small versions of the experiments behind the command-line tool.  The
# full-size runs are `dconvex drc` and `dconvex learn-eval`.

from dconvex.experiments import drc_network, drc_random, learn_eval
from dconvex.netio import load_bundled

# ## Dimension reduction on random graphs
#
# DRC is the fraction of vertices left out of the hull.  At p = 0.01 the
# graphs are sparse enough that the hull of a few query vertices stays
# small at these sizes.

report = drc_random([100, 200, 300], p=0.01, nets=10, queries=10, seed=0)
for agg in report.aggregates:
    print(f"n={agg['n']:4d}  mean |E|={agg['mean_edges']:6.1f}  mean DRC={agg['mean_drc']:.3f}")

# and on a benchmark network:

alarm = load_bundled("alarm").dag
print("alarm mean DRC:", round(drc_network(alarm, "alarm", queries=20).aggregates[0]["mean_drc"], 3))

# ## Learning the hull model from data
#
# Random trees with a few extra edges get random CPTs; the hull of five
# query vertices is fitted from forward samples and compared with the exact
# hull model by KL divergence.  More samples should mean a smaller KL.

report = learn_eval(sizes=(20, 40), p_extra=(0.05,), nets=4, queries=3, q_size=5,
                    sample_sizes=(1000, 5000), seed=0)
for agg in report.aggregates:
    print(f"n={agg['n']:3d}  samples={agg['samples']:5d}  mean KL={agg['mean_kl']:.4f}")
