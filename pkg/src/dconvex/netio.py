"""Reading and writing networks: BIF 0.3, canonical JSON and plain edge lists.

CPT row order
-------------
A :class:`NetworkDocument` keeps each CPT as a mapping from a tuple of
parent state labels (in the order the parents are listed in the document)
to the child's distribution.  ``table`` blocks with parents are read
child-major: the values for child state ``i`` come as one run over all
parent configurations, with the last listed parent varying fastest.
:func:`to_discrete_bn` then transposes every table to the internal order,
which has the child on axis 0 followed by the parents in ascending vertex
index.  Vertices are indexed in the order their ``variable`` blocks appear.
"""

from __future__ import annotations

import gzip
import itertools
import json
import math
import re
import warnings
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import NamedTuple

import jsonschema
import numpy as np

from .bn import DiscreteBn
from .dag import Dag, build_dag
from .errors import BifSemanticError, BifSyntaxError, GraphError, SchemaError

ROW_TOL = 1e-6


@dataclass
class NetworkDocument:
    """On-disk form of a discrete network.

    ``tables[child]`` is ``(parents, rows)`` where ``rows`` maps a tuple of
    parent state labels to the child's distribution (``()`` for a root).
    """

    name: str
    variables: list = field(default_factory=list)  # [(name, (state, ...))]
    edges: list = field(default_factory=list)  # [(parent, child)]
    tables: dict = field(default_factory=dict)


_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<comment>//[^\n]*|/\*.*?\*/)
  | (?P<string>"[^"]*")
  | (?P<punct>[{}()\[\],;|])
  | (?P<word>[^\s{}()\[\],;|"]+)
""", re.VERBOSE | re.DOTALL)


class _Tok(NamedTuple):
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Tok]:
    out = []
    append = out.append
    line, line_start, pos = 1, 0, 0
    for m in _TOKEN.finditer(text):
        if m.start() != pos:
            break
        kind = m.lastgroup
        pos = m.end()
        if kind == "punct" or kind == "word":
            append(_Tok(kind, m.group(), line, m.start() - line_start + 1))
        elif kind == "string":
            append(_Tok("word", m.group()[1:-1], line, m.start() - line_start + 1))
        if kind != "punct" and kind != "word":
            s = m.group()
            nl = s.count("\n")
            if nl:
                line += nl
                line_start = m.start() + s.rindex("\n") + 1
    if pos != len(text):
        raise BifSyntaxError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
    out.append(_Tok("eof", "", line, pos - line_start + 1))
    return out


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self) -> _Tok:
        return self.toks[self.i]

    def next(self) -> _Tok:
        t = self.toks[self.i]
        if t.kind != "eof":
            self.i += 1
        return t

    def fail(self, expected, tok=None):
        tok = tok or self.peek()
        got = "end of input" if tok.kind == "eof" else repr(tok.text)
        raise BifSyntaxError(f"unexpected {got}", tok.line, tok.col, expected)

    def expect(self, text: str) -> _Tok:
        t = self.peek()
        if t.text != text or t.kind == "eof":
            self.fail(repr(text))
        return self.next()

    def word(self, what="a name") -> _Tok:
        t = self.peek()
        if t.kind != "word":
            self.fail(what)
        return self.next()

    def number(self) -> float:
        t = self.peek()
        if t.kind != "word":
            self.fail("a number")
        try:
            x = float(t.text)
        except ValueError:
            self.fail("a number")
        self.next()
        return x

    def numbers(self) -> list[float]:
        vals = [self.number()]
        while self.peek().text == ",":
            self.next()
            vals.append(self.number())
        self.expect(";")
        return vals

    def skip_property(self):
        # property contents are not interpreted
        self.expect("property")
        while self.peek().text != ";":
            if self.peek().kind == "eof":
                self.fail("';'")
            self.next()
        self.next()


def parse_bif(text: str) -> NetworkDocument:
    """Parse a BIF 0.3 document with discrete variables.

    Probability blocks may use ``table`` rows, per-configuration entry lines
    and a ``default`` line.  Rows off from 1 by at most ``1e-6`` are
    renormalized (with a warning when the error exceeds float round-off);
    larger deviations are errors.
    """
    p = _Parser(text)
    name = "network"
    variables: dict[str, tuple] = {}
    blocks = []
    seen_network = False
    while p.peek().kind != "eof":
        t = p.peek()
        if t.text == "network" and not seen_network:
            p.next()
            name = p.word("a network name").text
            p.expect("{")
            while p.peek().text == "property":
                p.skip_property()
            p.expect("}")
            seen_network = True
        elif t.text == "variable":
            p.next()
            vt = p.word("a variable name")
            if vt.text in variables:
                raise BifSemanticError(f"line {vt.line}: variable {vt.text!r} declared twice")
            p.expect("{")
            states = None
            while p.peek().text != "}":
                if p.peek().text == "property":
                    p.skip_property()
                    continue
                p.expect("type")
                kind = p.word("'discrete'")
                if kind.text != "discrete":
                    raise BifSemanticError(f"line {kind.line}: only discrete variables are supported")
                p.expect("[")
                nt = p.word("a state count")
                if not nt.text.isdigit():
                    p.fail("a state count", nt)
                p.expect("]")
                p.expect("{")
                labels = [p.word("a state name").text]
                while p.peek().text == ",":
                    p.next()
                    labels.append(p.word("a state name").text)
                p.expect("}")
                p.expect(";")
                if len(labels) != int(nt.text):
                    raise BifSemanticError(f"line {nt.line}: {vt.text!r} declares {nt.text} states "
                                           f"but lists {len(labels)}")
                if len(set(labels)) != len(labels):
                    raise BifSemanticError(f"line {nt.line}: {vt.text!r} repeats a state name")
                states = tuple(labels)
            p.expect("}")
            if states is None:
                raise BifSemanticError(f"line {vt.line}: {vt.text!r} has no type declaration")
            variables[vt.text] = states
        elif t.text == "probability":
            blocks.append(_parse_probability(p))
        else:
            p.fail("'network', 'variable' or 'probability'")
    doc = NetworkDocument(name, list(variables.items()))
    renormalized = 0
    for child_tok, parent_toks, entries in blocks:
        renormalized += _build_table(doc, variables, child_tok, parent_toks, entries)
    for v in variables:
        if v not in doc.tables:
            raise BifSemanticError(f"variable {v!r} has no probability block")
    for v, (parents, _) in doc.tables.items():
        doc.edges.extend((u, v) for u in parents)
    try:
        to_dag(doc)
    except GraphError as e:
        raise BifSemanticError(str(e)) from e
    if renormalized:
        warnings.warn(f"renormalized {renormalized} CPT rows that did not sum to 1", stacklevel=2)
    return doc


def _parse_probability(p: _Parser):
    p.expect("probability")
    p.expect("(")
    child = p.word("a variable name")
    parents = []
    if p.peek().text == "|":
        p.next()
        parents.append(p.word("a variable name"))
        while p.peek().text == ",":
            p.next()
            parents.append(p.word("a variable name"))
    p.expect(")")
    p.expect("{")
    entries = []
    while p.peek().text != "}":
        t = p.peek()
        if t.text == "property":
            p.skip_property()
        elif t.text in ("table", "default"):
            p.next()
            entries.append((t.text, t, p.numbers()))
        elif t.text == "(":
            p.next()
            labels = [p.word("a state name")]
            while p.peek().text == ",":
                p.next()
                labels.append(p.word("a state name"))
            p.expect(")")
            entries.append(("row", labels, p.numbers()))
        else:
            p.fail("'table', 'default' or '('")
    p.expect("}")
    return child, parents, entries


def _build_table(doc, variables, child_tok, parent_toks, entries) -> int:
    for t in [child_tok] + parent_toks:
        if t.text not in variables:
            raise BifSemanticError(f"line {t.line}: undeclared variable {t.text!r}")
    child = child_tok.text
    if child in doc.tables:
        raise BifSemanticError(f"line {child_tok.line}: second probability block for {child!r}")
    parents = tuple(t.text for t in parent_toks)
    if len(set(parents)) != len(parents) or child in parents:
        raise BifSemanticError(f"line {child_tok.line}: repeated variable in the block for {child!r}")
    k = len(variables[child])
    configs = list(itertools.product(*(variables[u] for u in parents)))
    rows: dict[tuple, list] = {}
    default = None
    fixed = 0

    def take(vals, line):
        nonlocal fixed
        if len(vals) != k:
            raise BifSemanticError(f"line {line}: {child!r} has {k} states but the row has {len(vals)} values")
        if min(vals) < 0 or max(vals) > 1 + ROW_TOL:
            raise BifSemanticError(f"line {line}: probability outside [0, 1] for {child!r}")
        s = math.fsum(vals)
        if abs(s - 1) > ROW_TOL:
            raise BifSemanticError(f"line {line}: row for {child!r} sums to {s!r}")
        if abs(s - 1) > 1e-12:
            fixed += 1
            return [x / s for x in vals]
        return list(vals)

    for kind, where, vals in entries:
        if kind == "table":
            if len(vals) != k * len(configs):
                raise BifSemanticError(f"line {where.line}: table for {child!r} needs "
                                       f"{k * len(configs)} values, got {len(vals)}")
            grid = np.array(vals).reshape(k, len(configs))
            for j, cfg in enumerate(configs):
                rows[cfg] = take(grid[:, j].tolist(), where.line)
        elif kind == "default":
            default = (where.line, vals)
        else:
            labels = tuple(t.text for t in where)
            if len(labels) != len(parents):
                raise BifSemanticError(f"line {where[0].line}: expected {len(parents)} parent states, "
                                       f"got {len(labels)}")
            for u, s, t in zip(parents, labels, where):
                if s not in variables[u]:
                    raise BifSemanticError(f"line {t.line}: {s!r} is not a state of {u!r}")
            rows[labels] = take(vals, where[0].line)
    for cfg in configs:
        if cfg not in rows:
            if default is None:
                raise BifSemanticError(f"no probabilities for {child!r} given {cfg}")
            rows[cfg] = take(default[1], default[0])
    doc.tables[child] = (parents, {cfg: rows[cfg] for cfg in configs})
    return fixed


def to_dag(doc: NetworkDocument) -> Dag:
    return build_dag(doc.edges, nodes=[v for v, _ in doc.variables])


def to_discrete_bn(doc: NetworkDocument) -> DiscreteBn:
    """Build the network, with vertex ``i`` the ``i``-th declared variable."""
    dag = to_dag(doc)
    states = dict(doc.variables)
    cpts = []
    for v, _ in doc.variables:
        parents, rows = doc.tables[v]
        k = len(states[v])
        shape = [len(states[u]) for u in parents]
        t = np.empty([k] + shape)
        for j, cfg in enumerate(itertools.product(*(states[u] for u in parents))):
            t[(slice(None),) + np.unravel_index(j, shape)] = rows[cfg]
        idx = [dag.index(u) for u in parents]
        order = sorted(range(len(parents)), key=lambda i: idx[i])
        cpts.append(np.transpose(t, [0] + [i + 1 for i in order]))
    return DiscreteBn(dag, cpts, states=[states[v] for v, _ in doc.variables], name=doc.name)


def from_discrete_bn(bn: DiscreteBn) -> NetworkDocument:
    """Document form of ``bn``; parents are listed in ascending vertex index."""
    g = bn.dag
    doc = NetworkDocument(bn.name, [(g.names[v], bn.states[v]) for v in range(g.n)])
    for v in range(g.n):
        pa = g.parents[v]
        t = bn.cpts[v].table
        rows = {}
        for idx in itertools.product(*(range(bn.cards[u]) for u in pa)):
            cfg = tuple(bn.states[u][s] for u, s in zip(pa, idx))
            rows[cfg] = [float(x) for x in t[(slice(None),) + idx]]
        doc.tables[g.names[v]] = (tuple(g.names[u] for u in pa), rows)
        doc.edges.extend((g.names[u], g.names[v]) for u in pa)
    return doc


def write_bif(doc) -> str:
    """BIF text: ``table`` for roots, one entry line per parent configuration otherwise.

    Accepts a :class:`NetworkDocument` or a :class:`DiscreteBn`.
    """
    if isinstance(doc, DiscreteBn):
        doc = from_discrete_bn(doc)
    out = [f"network {doc.name} {{", "}"]
    for v, states in doc.variables:
        out.append(f"variable {v} {{")
        out.append(f"  type discrete [ {len(states)} ] {{ {', '.join(states)} }};")
        out.append("}")
    for v, _ in doc.variables:
        parents, rows = doc.tables[v]
        if parents:
            out.append(f"probability ( {v} | {', '.join(parents)} ) {{")
            for cfg, vals in rows.items():
                out.append(f"  ({', '.join(cfg)}) {', '.join(map(repr, vals))};")
        else:
            out.append(f"probability ( {v} ) {{")
            out.append(f"  table {', '.join(map(repr, rows[()]))};")
        out.append("}")
    return "\n".join(out) + "\n"


JSON_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["name", "variables", "edges", "cpts"],
    "properties": {
        "name": {"type": "string"},
        "variables": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["name", "states"],
                "properties": {
                    "name": {"type": "string", "minLength": 1},
                    "states": {"type": "array", "minItems": 1, "items": {"type": "string"}},
                },
            },
        },
        "edges": {
            "type": "array",
            "items": {"type": "array", "minItems": 2, "maxItems": 2, "items": {"type": "string"}},
        },
        "cpts": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["variable", "parents", "rows"],
                "properties": {
                    "variable": {"type": "string"},
                    "parents": {"type": "array", "items": {"type": "string"}},
                    "rows": {
                        "type": "array",
                        "items": {"type": "array", "items": {"type": "number", "minimum": 0}},
                    },
                },
            },
        },
    },
}


def write_json(bn: DiscreteBn) -> str:
    """Canonical JSON with sorted keys.

    ``rows`` holds one child distribution per parent configuration, parents
    in the listed order with the last one varying fastest.  Floats are
    written with Python's shortest round-trip repr, so reading back is
    exact.
    """
    g = bn.dag
    obj = {
        "name": bn.name,
        "variables": [{"name": g.names[v], "states": list(bn.states[v])} for v in range(g.n)],
        "edges": [[g.names[p], g.names[c]] for p, c in sorted(g.edges, key=lambda e: (e[1], e[0]))],
        "cpts": [],
    }
    for v in range(g.n):
        t = bn.cpts[v].table
        obj["cpts"].append({
            "variable": g.names[v],
            "parents": [g.names[u] for u in g.parents[v]],
            "rows": t.reshape(bn.cards[v], -1).T.tolist(),
        })
    return json.dumps(obj, sort_keys=True, indent=1) + "\n"


def _pointer(path) -> str:
    return "".join("/" + str(p).replace("~", "~0").replace("/", "~1") for p in path)


def read_json(text: str) -> DiscreteBn:
    """Inverse of :func:`write_json`; schema violations raise :class:`SchemaError`."""
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as e:
        raise SchemaError("", f"invalid JSON: {e}") from e
    err = jsonschema.exceptions.best_match(jsonschema.Draft202012Validator(JSON_SCHEMA).iter_errors(obj))
    if err is not None:
        raise SchemaError(_pointer(err.absolute_path), err.message)
    names = [v["name"] for v in obj["variables"]]
    index = {s: i for i, s in enumerate(names)}
    if len(index) != len(names):
        raise SchemaError("/variables", "duplicate variable name")
    for i, (p, c) in enumerate(obj["edges"]):
        for j, s in enumerate((p, c)):
            if s not in index:
                raise SchemaError(f"/edges/{i}/{j}", f"unknown variable {s!r}")
    try:
        dag = build_dag([tuple(e) for e in obj["edges"]], nodes=names)
    except GraphError as e:
        raise SchemaError("/edges", str(e)) from e
    cards = [len(v["states"]) for v in obj["variables"]]
    by_var = {}
    for i, c in enumerate(obj["cpts"]):
        if c["variable"] not in index:
            raise SchemaError(f"/cpts/{i}/variable", f"unknown variable {c['variable']!r}")
        if c["variable"] in by_var:
            raise SchemaError(f"/cpts/{i}/variable", "second table for the same variable")
        by_var[c["variable"]] = (i, c)
    cpts = []
    for v, s in enumerate(names):
        if s not in by_var:
            raise SchemaError("/cpts", f"no table for {s!r}")
        i, c = by_var[s]
        want = [names[u] for u in dag.parents[v]]
        if c["parents"] != want:
            raise SchemaError(f"/cpts/{i}/parents", f"expected {want}")
        shape = [cards[u] for u in dag.parents[v]]
        rows = c["rows"]
        if len(rows) != math.prod(shape) or any(len(r) != cards[v] for r in rows):
            raise SchemaError(f"/cpts/{i}/rows", "row count or length does not match the cardinalities")
        cpts.append(np.array(rows, dtype=float).T.reshape([cards[v]] + shape))
    try:
        return DiscreteBn(dag, cpts, states=[v["states"] for v in obj["variables"]], name=obj["name"])
    except ValueError as e:
        raise SchemaError("/cpts", str(e)) from e


def read_edges(text: str) -> Dag:
    """Edge list: one ``parent child`` pair per line.

    A line with a single name declares an isolated vertex; ``#`` starts a
    comment.
    """
    edges, nodes = [], []
    for lineno, line in enumerate(text.splitlines(), 1):
        parts = line.split("#", 1)[0].split()
        if not parts:
            continue
        if len(parts) == 1:
            nodes.append(parts[0])
        elif len(parts) == 2:
            nodes.extend(parts)
            edges.append((parts[0], parts[1]))
        else:
            raise GraphError(f"line {lineno}: expected 'parent child', got {line.strip()!r}")
    return build_dag(edges, nodes=nodes)


def write_edges(g: Dag) -> str:
    """Inverse of :func:`read_edges`; vertices are declared first, in index order."""
    lines = [g.names[v] for v in range(g.n)]
    lines += [f"{g.names[p]} {g.names[c]}" for p, c in sorted(g.edges, key=lambda e: (e[1], e[0]))]
    return "\n".join(lines) + "\n"


def _read_text(path) -> str:
    path = Path(path)
    if path.suffix == ".gz":
        with gzip.open(path, "rt", encoding="utf-8") as fh:
            return fh.read()
    return path.read_text(encoding="utf-8")


def bundled_names() -> list[str]:
    names = []
    for f in resources.files("dconvex").joinpath("networks").iterdir():
        for suffix in (".bif.gz", ".json", ".edges"):
            if f.name.endswith(suffix):
                names.append(f.name[: -len(suffix)])
    return sorted(names)


def load_bundled(name: str):
    """A bundled network by lower-case name.

    These are the benchmark networks (BIF) plus the two small worked-example
    graphs ``fig2a`` (edge list) and ``fig3a`` (JSON with fixed CPTs).
    """
    key = name.lower()
    root = resources.files("dconvex").joinpath("networks")
    for suffix, fmt in ((".bif.gz", "bif"), (".json", "json"), (".edges", "edges")):
        f = root.joinpath(key + suffix)
        if f.is_file():
            data = f.read_bytes()
            if suffix.endswith(".gz"):
                data = gzip.decompress(data)
            net = _from_text(data.decode("utf-8"), fmt)
            if isinstance(net, DiscreteBn):
                net.name = key
            return net
    raise KeyError(f"no bundled network {name!r}; available: {', '.join(bundled_names())}")


def _from_text(text: str, fmt: str):
    if fmt == "bif":
        return to_discrete_bn(parse_bif(text))
    if fmt == "json":
        return read_json(text)
    if fmt == "edges":
        return read_edges(text)
    raise ValueError(f"unknown network format {fmt!r}")


def guess_format(path) -> str:
    s = str(path).lower().removesuffix(".gz")
    if s.endswith(".bif"):
        return "bif"
    if s.endswith(".json"):
        return "json"
    return "edges"


def load_network(source, fmt: str | None = None):
    """Load a file (``bif``, ``json`` or ``edges``) or a bundled network name.

    Returns a :class:`DiscreteBn`, or a bare :class:`Dag` for edge lists.
    """
    path = Path(str(source))
    if not path.exists() and fmt is None and str(source).lower() in bundled_names():
        return load_bundled(str(source))
    return _from_text(_read_text(path), fmt or guess_format(path))
