"""JSON formats (the source of truth) and DOT/GraphML exports."""
from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path
from typing import Any

from .hypergraph import AnyGraph, Hyperedge, Hypergraph, OpenHypergraph, as_graph
from .rewrite import LabelVar, PhaseSum, RewriteRule


class InputError(ValueError):
    """Malformed input file; the message carries the location."""


def load_json(path: str | Path) -> Any:
    text = Path(path).read_text(encoding="utf-8")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc


def dump_json(obj: Any) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


# -- labels ------------------------------------------------------------------


def label_to_json(label: Any) -> Any:
    if isinstance(label, tuple) and len(label) == 2 and isinstance(label[0], str) and isinstance(label[1], Fraction):
        return {"kind": label[0], "phase": format_phase(label[1])}
    if isinstance(label, tuple) and all(isinstance(p, tuple) and len(p) == 2 for p in label):
        return {str(k): v for k, v in label}
    return label


def label_from_json(obj: Any) -> Any:
    if isinstance(obj, dict):
        if set(obj) == {"kind", "phase"}:
            return (obj["kind"], parse_phase(obj["phase"]))
        return tuple(sorted(obj.items()))
    if isinstance(obj, list):
        return tuple(obj)
    return obj


def format_phase(p: Fraction) -> str:
    return str(p.numerator) if p.denominator == 1 else f"{p.numerator}/{p.denominator}"


def parse_phase(text: str | int) -> Fraction:
    try:
        return Fraction(text) % 2
    except (ValueError, ZeroDivisionError) as exc:
        raise InputError(f"bad phase {text!r}") from exc


# -- hypergraphs -------------------------------------------------------------


def graph_to_json(h: AnyGraph) -> dict:
    g = as_graph(h)
    out: dict = {
        "vertices": sorted(g.vertices),
        "edges": [{"id": e.id, "v": list(e.incidence)} for e in g.edges],
    }
    if g.labels:
        out["labels"] = {str(v): label_to_json(lab) for v, lab in sorted(g.labels.items())}
    if g.unordered:
        out["unordered"] = True
    if isinstance(h, OpenHypergraph):
        out["boundary"] = list(h.boundary)
        out["dummy"] = sorted(h.dummies)
    return out


def graph_from_json(obj: Any) -> AnyGraph:
    """Parse the hypergraph JSON format.

    Edge ids are optional (``e<k>`` in listed order). Vertices may be named
    by strings; names get fresh integer ids after the largest integer id.
    """
    if isinstance(obj, list):  # bare edge list shorthand: [[0,1],[1,2]]
        obj = {"edges": obj}
    if not isinstance(obj, dict) or "edges" not in obj:
        raise InputError("hypergraph JSON needs an 'edges' list")
    ints: set[int] = {v for v in obj.get("vertices", []) if isinstance(v, int)}
    raw_edges = obj["edges"]
    for e in raw_edges:
        inc = e["v"] if isinstance(e, dict) else e
        ints.update(v for v in inc if isinstance(v, int))
    names: dict[str, int] = {}
    nxt = max(ints, default=-1) + 1

    def vid(v: Any) -> int:
        nonlocal nxt
        if isinstance(v, bool) or not isinstance(v, (int, str)):
            raise InputError(f"bad vertex id {v!r}")
        if isinstance(v, int):
            return v
        if v not in names:
            names[v] = nxt
            nxt += 1
        return names[v]

    vertices = {vid(v) for v in obj.get("vertices", [])}
    edges = []
    for k, e in enumerate(raw_edges):
        if isinstance(e, dict):
            eid, inc = str(e.get("id", f"e{k}")), e["v"]
        else:
            eid, inc = f"e{k}", e
        edges.append(Hyperedge(eid, tuple(vid(v) for v in inc)))
        vertices.update(edges[-1].incidence)
    for v in obj.get("boundary", []) + obj.get("dummy", []):
        vertices.add(vid(v))
    labels = {vid(int(k) if k.lstrip("-").isdigit() else k): label_from_json(v) for k, v in obj.get("labels", {}).items()}
    try:
        g = Hypergraph(frozenset(vertices), tuple(edges), labels, bool(obj.get("unordered", False)))
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    if "boundary" in obj or "dummy" in obj:
        boundary = tuple(vid(v) for v in obj.get("boundary", []))
        dummies = frozenset(vid(v) for v in obj.get("dummy", obj.get("boundary", [])))
        return OpenHypergraph(g, dummies, boundary)
    return g


# -- rules -------------------------------------------------------------------


def _template_to_json(t: Any) -> Any:
    if isinstance(t, LabelVar):
        return {"var": t.name}
    if isinstance(t, PhaseSum):
        return {"sum": list(t.terms), "const": format_phase(t.const)}
    if isinstance(t, Fraction):
        return format_phase(t)
    if isinstance(t, tuple):
        return [_template_to_json(c) for c in t]
    return t


def rule_to_json(rule: RewriteRule) -> dict:
    out: dict = {"name": rule.name, "lhs": [list(e) for e in rule.lhs], "rhs": [list(e) for e in rule.rhs]}
    if rule.lhs_labels:
        out["lhs_labels"] = {k: _template_to_json(v) for k, v in sorted(rule.lhs_labels.items())}
    if rule.rhs_labels:
        out["rhs_labels"] = {k: _template_to_json(v) for k, v in sorted(rule.rhs_labels.items())}
    if rule.closed:
        out["closed"] = sorted(rule.closed)
    return out


def rule_from_json(obj: Any) -> RewriteRule:
    try:
        name = str(obj.get("name", "rule"))
        lhs = [list(e) for e in obj["lhs"]]
        rhs = [list(e) for e in obj["rhs"]]
    except (KeyError, TypeError, AttributeError) as exc:
        raise InputError(f"rule JSON needs 'lhs' and 'rhs' lists: {exc}") from exc
    for e in lhs + rhs:
        for t in e:
            if isinstance(t, bool) or not isinstance(t, (str, int)):
                raise InputError(f"rule {name}: bad term {t!r}")
    if obj.get("lhs_labels") or obj.get("rhs_labels"):
        raise InputError(f"rule {name}: labeled rules are built in code, not parsed")
    return RewriteRule.parse(name, lhs, rhs, closed=frozenset(obj.get("closed", [])))


def rules_from_json(obj: Any) -> list[RewriteRule]:
    if isinstance(obj, dict) and "rules" in obj:
        obj = obj["rules"]
    if isinstance(obj, dict):
        obj = [obj]
    rules = [rule_from_json(r) for r in obj]
    names = [r.name for r in rules]
    dup = sorted({n for n in names if names.count(n) > 1})
    if dup:
        raise InputError(f"duplicate rule names: {', '.join(dup)}")
    return rules


# -- multiway graphs -----------------------------------------------------------


def _edge_text(g: AnyGraph) -> str:
    return "{" + ",".join("{" + ",".join(map(str, e.incidence)) + "}" for e in as_graph(g).edges) + "}"


def _q(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def multiway_to_json(mw, cg=None) -> dict:
    ids = mw.state_ids()
    out = {
        "initial": ids[mw.initial],
        "steps": mw.steps,
        "complete": mw.complete,
        "states": [
            {"id": ids[k], "key": _key_text(k), "generation": mw.generation[k], "graph": graph_to_json(g)}
            for k, g in mw.states.items()
        ],
        "events": [
            {
                "id": e.id,
                "rule": e.rule,
                "from": ids[e.from_state],
                "to": ids[e.to_state],
                "consumed": sorted(e.consumed),
                "created": sorted(e.created),
                "step": e.step,
            }
            for e in mw.events
        ],
    }
    if cg is not None:
        out["causal_edges"] = [list(p) for p in cg.edges]
    return out


def _key_text(key: bytes) -> str:
    import hashlib

    return hashlib.sha256(key).hexdigest()[:16]


def multiway_to_dot(mw, cg=None) -> str:
    ids = mw.state_ids()
    lines = ["digraph multiway {", "  rankdir=TB;"]
    for k, g in mw.states.items():
        lines.append(f"  s{ids[k]} [shape=box, label={_q(_edge_text(g))}];")
    for e in mw.events:
        lines.append(f"  ev{e.id} [shape=ellipse, style=filled, fillcolor=yellow, label={_q(e.rule)}];")
        lines.append(f"  s{ids[e.from_state]} -> ev{e.id};")
        lines.append(f"  ev{e.id} -> s{ids[e.to_state]};")
    if cg is not None:
        for a, b in cg.edges:
            lines.append(f"  ev{a} -> ev{b} [color=orange, style=dashed];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def multiway_to_graphml(mw, cg=None) -> str:
    import networkx as nx

    ids = mw.state_ids()
    g = nx.DiGraph()
    for k, st in mw.states.items():
        g.add_node(f"s{ids[k]}", kind="state", edges=_edge_text(st), generation=mw.generation[k])
    for e in mw.events:
        g.add_node(f"ev{e.id}", kind="event", rule=e.rule, step=e.step)
        g.add_edge(f"s{ids[e.from_state]}", f"ev{e.id}", kind="input")
        g.add_edge(f"ev{e.id}", f"s{ids[e.to_state]}", kind="output")
    if cg is not None:
        for a, b in cg.edges:
            g.add_edge(f"ev{a}", f"ev{b}", kind="causal")
    return "\n".join(nx.generate_graphml(g)) + "\n"


# -- proofs ------------------------------------------------------------------

_PROOF_STYLE = {
    "axiom": 'shape=box, style=filled, fillcolor="#ccffcc"',
    "critical_pair_lemma": 'shape=triangle, style=filled, fillcolor="#ff8c00"',
    "substitution_lemma": 'shape=circle, style=filled, fillcolor="#ffd8a8"',
    "hypothesis": 'shape=diamond, style=filled, fillcolor="#006400", fontcolor=white',
}


def proof_to_json(pg) -> dict:
    return {
        "nodes": [{"id": n.id, "kind": n.kind.value, "statement": n.statement} for n in pg.nodes],
        "edges": [{"from": a, "to": b, "kind": k.value} for a, b, k in pg.edges],
    }


def proof_from_json(obj: Any):
    from .prover import EdgeKind, NodeKind, ProofGraph, ProofNode

    try:
        nodes = [ProofNode(int(n["id"]), NodeKind(n["kind"]), n["statement"]) for n in obj["nodes"]]
        edges = [(int(e["from"]), int(e["to"]), EdgeKind(e["kind"])) for e in obj["edges"]]
    except (KeyError, ValueError, TypeError) as exc:
        raise InputError(f"bad proof JSON: {exc}") from exc
    return ProofGraph(nodes, edges)


def _proof_label(n) -> str:
    st = n.statement
    if n.kind.value == "axiom" or n.kind.value == "critical_pair_lemma":
        r = st["rule"]
        return f"{r['name']}"
    if n.kind.value == "substitution_lemma":
        return f"{st['rule']}"
    return "goal"


def proof_to_dot(pg) -> str:
    lines = ["digraph proof {", "  rankdir=TB;"]
    for n in pg.nodes:
        lines.append(f"  n{n.id} [{_PROOF_STYLE[n.kind.value]}, label={_q(_proof_label(n))}];")
    for a, b, k in pg.edges:
        style = "solid" if k.value == "substitution" else "dashed"
        lines.append(f"  n{a} -> n{b} [style={style}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


# -- ZX diagrams -------------------------------------------------------------


def zx_to_json(d) -> dict:
    """Spiders, wires and boundary lists with string ids ``v<n>``."""

    def name(v: int) -> str:
        return f"v{v}"

    return {
        "spiders": [
            {"id": name(v), "color": c, "phase": format_phase(p)} for v, (c, p) in sorted(d.spiders.items())
        ],
        "wires": [[name(a), name(b)] for a, b in d.wires],
        "inputs": [name(v) for v in d.inputs],
        "outputs": [name(v) for v in d.outputs],
    }


def zx_from_json(obj: Any):
    """Parse a ZX diagram. Ids of the form ``v<n>`` (or bare integers) keep
    the number n; any other names get fresh numbers in order of appearance."""
    from .zx import ZXDiagram, ZXError

    try:
        raw_spiders = obj.get("spiders", [])
        if isinstance(raw_spiders, dict):  # {"id": {"color": .., "phase": ..}}
            raw_spiders = [dict(s, id=k) for k, s in raw_spiders.items()]
        names = [s["id"] for s in raw_spiders] + list(obj.get("inputs", [])) + list(obj.get("outputs", []))
        names += [v for w in obj["wires"] for v in w]

        def fixed(v: Any) -> int | None:
            if isinstance(v, int) and not isinstance(v, bool):
                return v
            if isinstance(v, str) and v[:1] == "v" and v[1:].isdigit():
                return int(v[1:])
            return None

        ids: dict[Any, int] = {}
        taken = {fixed(v) for v in names} - {None}
        nxt = max(taken, default=-1) + 1
        for v in names:
            if v in ids:
                continue
            f = fixed(v)
            if f is None:
                f, nxt = nxt, nxt + 1
            ids[v] = f
        spiders = {}
        for s in raw_spiders:
            color = s.get("color", s.get("kind"))
            spiders[ids[s["id"]]] = (color, parse_phase(s.get("phase", "0")))
        return ZXDiagram(
            spiders,
            tuple((ids[a], ids[b]) for a, b in obj["wires"]),
            tuple(ids[v] for v in obj.get("inputs", [])),
            tuple(ids[v] for v in obj.get("outputs", [])),
        )
    except (KeyError, TypeError, AttributeError, ValueError, ZXError) as exc:
        raise InputError(f"bad ZX diagram JSON: {exc}") from exc
