"""Experiment protocols behind the command-line tool.

Every protocol is split into independent units (one network, or one
network and its queries).  Each unit draws its randomness from
``np.random.default_rng([master_seed, *unit_key])``, so results do not
depend on the number of worker processes or on scheduling order.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .bn import (DiscreteBn, forward_sample, kl_divergence, localize_from_global, mle_fit,
                 random_bn, variable_elimination)
from .convexity import cmdsa
from .dag import Dag, random_dag, random_tree_dag
from .errors import ZeroEvidenceProbabilityError

SCHEMA_VERSION = 1


def unit_rng(seed: int, *key) -> np.random.Generator:
    return np.random.default_rng([int(seed), *(int(k) for k in key)])


@dataclass
class Report:
    """Rows of one experiment plus aggregates and the configuration that produced them."""

    command: str
    config: dict
    columns: list
    rows: list = field(default_factory=list)
    aggregates: list = field(default_factory=list)
    partial: bool = False

    def to_json(self) -> str:
        obj = {
            "schema_version": SCHEMA_VERSION,
            "tool_version": __version__,
            "command": self.command,
            "config": self.config,
            "partial": self.partial,
            "columns": self.columns,
            "rows": self.rows,
            "aggregates": self.aggregates,
        }
        return json.dumps(obj, sort_keys=True, indent=1) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=self.columns, lineterminator="\r\n")
        w.writeheader()
        for r in self.rows:
            w.writerow(r)
        return buf.getvalue()


def run_units(fn, units, jobs: int = 1, budget_secs: float | None = None):
    """Apply ``fn`` to every unit; returns ``(results in unit order, partial)``.

    Once the budget is spent no further units are started; the results of
    the units that did finish are kept and the run is flagged partial.
    """
    start = time.monotonic()

    def over():
        return budget_secs is not None and time.monotonic() - start > budget_secs

    results = []
    if jobs <= 1:
        for u in units:
            if over():
                return results, True
            results.append(fn(u))
        return results, False
    partial = False
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        futures = []
        for u in units:
            futures.append(pool.submit(fn, u))
        for f in futures:
            if over():
                partial = True
                f.cancel()
                continue
            results.append(f.result())
    return results, partial


def _ms(t0: float, t1: float) -> float:
    return round((t1 - t0) * 1000.0, 6)


def _mean(xs):
    xs = [x for x in xs if x is not None and not (isinstance(x, float) and math.isnan(x))]
    return sum(xs) / len(xs) if xs else float("nan")


# --------------------------------------------------------------------------- DRC

DRC_COLUMNS = ["network", "n", "edges", "net", "query", "r_size", "hull_size", "drc",
               "iterations", "hull_ms"]


def random_queries(rng: np.random.Generator, n: int, count: int, r_min: int, r_max: int) -> list:
    out = []
    for _ in range(count):
        k = int(rng.integers(r_min, min(r_max, n) + 1))
        out.append(sorted(int(x) for x in rng.choice(n, size=k, replace=False)))
    return out


def _drc_rows(g: Dag, label: str, net: int, queries) -> list:
    rows = []
    for j, r in enumerate(queries):
        t0 = time.perf_counter()
        res = cmdsa(g, r)
        t1 = time.perf_counter()
        rows.append({
            "network": label, "n": g.n, "edges": g.edge_count, "net": net, "query": j,
            "r_size": len(r), "hull_size": len(res.hull), "drc": float(res.drc),
            "iterations": res.iterations, "hull_ms": _ms(t0, t1),
        })
    return rows


def _drc_random_unit(args):
    seed, n, p, net, queries, r_min, r_max = args
    g = random_dag(n, p, seed=[seed, n, net])
    qs = random_queries(unit_rng(seed, n, net, 1), n, queries, r_min, r_max)
    return _drc_rows(g, f"random-{n}", net, qs)


def _drc_aggregate(rows) -> list:
    groups = defaultdict(list)
    for r in rows:
        groups[(r["network"], r["n"])].append(r)
    out = []
    for (label, n), rs in groups.items():
        out.append({
            "network": label, "n": n, "queries": len(rs),
            "mean_edges": _mean([r["edges"] for r in rs]),
            "mean_hull_size": _mean([r["hull_size"] for r in rs]),
            "mean_drc": _mean([r["drc"] for r in rs]),
            "max_hull_ms": max(r["hull_ms"] for r in rs),
        })
    return out


def drc_random(sizes, p: float = 0.01, nets: int = 50, queries: int = 20, r_min: int = 2,
               r_max: int = 8, seed: int = 0, jobs: int = 1, budget_secs=None) -> Report:
    """Mean DRC of random DAGs per size: ``nets`` graphs, ``queries`` random query sets each."""
    units = [(seed, int(n), p, i, queries, r_min, r_max) for n in sizes for i in range(nets)]
    results, partial = run_units(_drc_random_unit, units, jobs, budget_secs)
    rows = [r for rs in results for r in rs]
    config = {"sizes": list(map(int, sizes)), "p": p, "nets": nets, "queries": queries,
              "r_min": r_min, "r_max": r_max, "seed": seed}
    return Report("drc", config, DRC_COLUMNS, rows, _drc_aggregate(rows), partial)


def drc_network(g: Dag, label: str, queries: int = 20, r_min: int = 2, r_max: int = 8,
                seed: int = 0) -> Report:
    """Mean DRC of a fixed network under the same random-query protocol."""
    qs = random_queries(unit_rng(seed, 0, 0, 1), g.n, queries, r_min, r_max)
    rows = _drc_rows(g, label, 0, qs)
    config = {"network": label, "queries": queries, "r_min": r_min, "r_max": r_max, "seed": seed}
    return Report("drc", config, DRC_COLUMNS, rows, _drc_aggregate(rows))


# ----------------------------------------------------------------------- compare

COMPARE_COLUMNS = ["network", "query", "a", "b", "evidence_state", "hull_size", "global_ms",
                   "hull_ms", "localize_ms", "local_ms", "con_ve_ms", "con_ve_with_localize_ms",
                   "zero_evidence", "deviation"]


def _compare_one(bn: DiscreteBn, a: int, b: int, s: int, cache: dict) -> dict:
    t0 = time.perf_counter()
    glob_m = variable_elimination(bn, [a, b])
    try:
        glob_c = variable_elimination(bn, [b], {a: s})
    except ZeroEvidenceProbabilityError:
        glob_c = None
    t1 = time.perf_counter()
    hull = cmdsa(bn.dag, [a, b]).hull
    t2 = time.perf_counter()
    # the hull is d-convex by construction, so the check is skipped
    local = localize_from_global(bn, hull, cache=cache, check=False)
    t3 = time.perf_counter()
    base = sorted(hull)
    la, lb = base.index(a), base.index(b)
    loc_m = variable_elimination(local, [la, lb])
    try:
        loc_c = variable_elimination(local, [lb], {la: s})
    except ZeroEvidenceProbabilityError:
        loc_c = None
    t4 = time.perf_counter()
    # local indices keep the global order, so both marginals share axis order
    dev = float(np.abs(glob_m.table - loc_m.table).max())
    zero = glob_c is None
    if (glob_c is None) != (loc_c is None):
        dev = math.inf
    elif glob_c is not None:
        dev = max(dev, float(np.abs(glob_c.table - loc_c.table).max()))
    return {
        "hull_size": len(hull), "global_ms": _ms(t0, t1), "hull_ms": _ms(t1, t2),
        "localize_ms": _ms(t2, t3), "local_ms": _ms(t3, t4),
        "con_ve_ms": round(_ms(t1, t2) + _ms(t3, t4), 6),
        "con_ve_with_localize_ms": _ms(t1, t4),
        "zero_evidence": zero, "deviation": dev,
    }


def compare(bn: DiscreteBn, queries: int = 100, seed: int = 0, tol: float = 1e-9,
            budget_secs=None) -> Report:
    """Global VE against hull + local VE on random pairs ``Q = {a, b}``.

    Each query computes the marginal ``P(a, b)`` and the conditional
    ``P(b | a = s)`` with ``s`` drawn uniformly.  ``con_ve_ms`` is hull
    search plus inference on the local network; CPT localization is timed
    separately (``localize_ms``) because local tables are cached and reused.
    One untimed warm-up query runs first.  Runs serially so that timings
    are not disturbed by other workers.
    """
    rng = unit_rng(seed, 2)
    n = bn.n
    if n < 2:
        raise ValueError("the network needs at least two vertices")
    picks = []
    for _ in range(queries + 1):
        a, b = (int(x) for x in rng.choice(n, size=2, replace=False))
        picks.append((a, b, int(rng.integers(bn.cards[a]))))
    _compare_one(bn, *picks[0], cache={})
    cache: dict = {}
    rows = []
    start = time.monotonic()
    partial = False
    for j, (a, b, s) in enumerate(picks[1:]):
        if budget_secs is not None and time.monotonic() - start > budget_secs:
            partial = True
            break
        row = {"network": bn.name, "query": j, "a": bn.dag.names[a], "b": bn.dag.names[b],
               "evidence_state": bn.states[a][s]}
        row.update(_compare_one(bn, a, b, s, cache))
        rows.append(row)
    k = len(rows)
    tot = {c: sum(r[c] for r in rows) for c in ("global_ms", "hull_ms", "localize_ms", "local_ms",
                                                 "con_ve_ms", "con_ve_with_localize_ms")}
    agg = {"network": bn.name, "n": n, "edges": bn.dag.edge_count, "queries": k,
           "max_deviation": max((r["deviation"] for r in rows), default=0.0),
           "within_tolerance": all(r["deviation"] <= tol for r in rows),
           "zero_evidence_queries": sum(r["zero_evidence"] for r in rows),
           "mean_hull_size": _mean([r["hull_size"] for r in rows])}
    for c, v in tot.items():
        agg["total_" + c] = v
        agg["mean_" + c] = v / k if k else float("nan")
    agg["speedup"] = tot["global_ms"] / tot["con_ve_ms"] if tot["con_ve_ms"] else float("nan")
    config = {"network": bn.name, "queries": queries, "seed": seed, "tol": tol}
    return Report("compare", config, COMPARE_COLUMNS, rows, [agg], partial)


# -------------------------------------------------------------------- learn-eval

LEARN_COLUMNS = ["n", "p_extra", "net", "query", "hull_size", "samples", "kl"]


def _learn_unit(args):
    seed, n, p, net, queries, q_size, sample_sizes, smoothing, extra, cardinality = args
    pkey = int(round(p * 1e6))
    g = random_tree_dag(n, p, 3, seed=[seed, n, pkey, net], extra=extra)
    bn = random_bn(g, cardinality, seed=[seed, n, pkey, net, 1])
    rng = unit_rng(seed, n, pkey, net, 2)
    rows = []
    for j in range(queries):
        q = sorted(int(x) for x in rng.choice(n, size=min(q_size, n), replace=False))
        hull = sorted(cmdsa(g, q).hull)
        truth = localize_from_global(bn, hull, check=False)
        for m in sample_sizes:
            data = forward_sample(bn, m, seed=[seed, n, pkey, net, 3, j, m])[:, hull]
            fit = mle_fit(truth.dag, truth.cards, data, smoothing)
            rows.append({"n": n, "p_extra": p, "net": net, "query": j, "hull_size": len(hull),
                         "samples": m, "kl": kl_divergence(truth, fit)})
    return rows


def learn_eval(sizes=(20, 40, 60, 80, 100), p_extra=(0.1, 0.05, 0.01, 0.005), nets: int = 10,
               queries: int = 5, q_size: int = 5, sample_sizes=(1000, 5000), smoothing: float = 1.0,
               extra: str = "pair", cardinality: int = 2, seed: int = 0, jobs: int = 1,
               budget_secs=None) -> Report:
    """KL from the localized true hull model to one fitted on forward samples.

    For every size and extra-edge probability, ``nets`` random trees with
    extra edges get random CPTs; each gets ``queries`` random query sets of
    ``q_size`` vertices.  The hull's true model comes from
    :func:`localize_from_global`; the fitted one from smoothed MLE on the
    hull's columns of a forward sample of the global network.
    """
    units = [(seed, int(n), float(p), i, queries, q_size, tuple(sample_sizes), smoothing, extra,
              cardinality) for n in sizes for p in p_extra for i in range(nets)]
    results, partial = run_units(_learn_unit, units, jobs, budget_secs)
    rows = [r for rs in results for r in rs]
    groups = defaultdict(list)
    for r in rows:
        groups[(r["n"], r["p_extra"], r["samples"])].append(r)
    agg = [{"n": n, "p_extra": p, "samples": m, "fits": len(rs),
            "mean_hull_size": _mean([r["hull_size"] for r in rs]),
            "mean_kl": _mean([r["kl"] for r in rs])} for (n, p, m), rs in groups.items()]
    config = {"sizes": list(map(int, sizes)), "p_extra": list(map(float, p_extra)), "nets": nets,
              "queries": queries, "q_size": q_size, "sample_sizes": list(map(int, sample_sizes)),
              "smoothing": smoothing, "extra": extra, "cardinality": cardinality, "seed": seed}
    return Report("learn-eval", config, LEARN_COLUMNS, rows, agg, partial)


# --------------------------------------------------------------------------- gen

def generate(kind: str, n: int, p: float, count: int = 1, cardinality: int = 2,
             max_parents: int = 3, seed: int = 0, extra: str = "pair") -> list[DiscreteBn]:
    """Random networks with flat-Dirichlet CPT rows.

    ``kind`` is ``"er"`` (:func:`random_dag`) or ``"tree"``
    (:func:`random_tree_dag`).
    """
    out = []
    for i in range(count):
        if kind == "er":
            g = random_dag(n, p, seed=[seed, n, i])
        elif kind == "tree":
            g = random_tree_dag(n, p, max_parents, seed=[seed, n, i], extra=extra)
        else:
            raise ValueError(f"unknown generator {kind!r}")
        out.append(random_bn(g, cardinality, seed=[seed, n, i, 1], name=f"{kind}-{n}-{i}"))
    return out
