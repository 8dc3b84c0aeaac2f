"""Reachability and equality proofs guided by multiway causal structure.

Search states are canonical hypergraphs. The causal strategy orders the
frontier by the selection score of the path leading to each state: the
number of causal out-edges of the path's events, where the out-edges of an
event are the distinct next-step events that consume an edge it created.
Critical pairs (concurrent compositions of two rules along an overlap) can
be added as lemmas, ranked by the same score on a bounded probe.
"""
from __future__ import annotations

import heapq
import itertools
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

from .hypergraph import AnyGraph, Hypergraph, canonical_form, prune_isolated
from .multiway import Successor, expand_state, probe
from .rewrite import (
    CompositionError,
    Match,
    RewriteRule,
    apply_match,
    compose_concurrent,
    enumerate_overlaps,
)

log = logging.getLogger(__name__)


class Strategy(str, Enum):
    CAUSAL = "causal"
    BFS = "bfs"


class NodeKind(str, Enum):
    AXIOM = "axiom"
    CRITICAL_PAIR_LEMMA = "critical_pair_lemma"
    SUBSTITUTION_LEMMA = "substitution_lemma"
    HYPOTHESIS = "hypothesis"


class EdgeKind(str, Enum):
    SUBSTITUTION = "substitution"
    DERIVED_INFERENCE = "derived_inference"


@dataclass
class ProverConfig:
    strategy: Strategy = Strategy.CAUSAL
    max_depth: int = 8
    max_expansions: int = 20_000
    lemma_generation: bool = False
    max_lemmas: int = 4
    probe_depth: int = 2
    probe_max_states: int = 500
    bidirectional: bool = False
    workers: int = 1


@dataclass(frozen=True)
class ProofNode:
    id: int
    kind: NodeKind
    statement: dict


@dataclass
class ProofGraph:
    nodes: list[ProofNode] = field(default_factory=list)
    edges: list[tuple[int, int, EdgeKind]] = field(default_factory=list)

    def add(self, kind: NodeKind, statement: dict) -> int:
        self.nodes.append(ProofNode(len(self.nodes), kind, statement))
        return len(self.nodes) - 1

    def link(self, a: int, b: int, kind: EdgeKind) -> None:
        self.edges.append((a, b, kind))

    def of_kind(self, kind: NodeKind) -> list[ProofNode]:
        return [n for n in self.nodes if n.kind == kind]

    def problems(self) -> list[str]:
        """Well-formedness violations (empty when the graph is sound)."""
        import networkx as nx

        out: list[str] = []
        g = nx.DiGraph()
        g.add_nodes_from(n.id for n in self.nodes)
        g.add_edges_from((a, b) for a, b, _ in self.edges)
        if not nx.is_directed_acyclic_graph(g):
            out.append("proof graph has a cycle")
        kinds = {n.id: n.kind for n in self.nodes}
        for n in self.of_kind(NodeKind.SUBSTITUTION_LEMMA):
            subs = [a for a, b, k in self.edges if b == n.id and k == EdgeKind.SUBSTITUTION]
            if len(subs) != 1 or kinds[subs[0]] not in (NodeKind.AXIOM, NodeKind.CRITICAL_PAIR_LEMMA):
                out.append(f"substitution lemma {n.id} lacks a unique axiom/lemma substitution")
        axioms = {n.id for n in self.of_kind(NodeKind.AXIOM)}
        for n in self.of_kind(NodeKind.HYPOTHESIS):
            if g.out_degree(n.id):
                out.append(f"hypothesis {n.id} is not a sink")
            if self.of_kind(NodeKind.SUBSTITUTION_LEMMA) and not (nx.ancestors(g, n.id) & axioms):
                out.append(f"hypothesis {n.id} is not reachable from an axiom")
        return out


@dataclass(frozen=True)
class ProofStep:
    """One rewrite, with its match expressed on the concrete graph ``before``."""

    rule: RewriteRule
    match: Match
    before: AnyGraph
    after: AnyGraph
    side: str = "forward"  # "reverse" steps run from the goal towards the meeting state


@dataclass
class SearchStats:
    expanded: int = 0
    generated: int = 0
    depth_reached: int = 0
    wall_time: float = 0.0
    budget_hit: bool = False

    def as_dict(self) -> dict:
        return {
            "expanded": self.expanded,
            "generated": self.generated,
            "depth_reached": self.depth_reached,
            "wall_time": self.wall_time,
            "budget_hit": self.budget_hit,
        }


@dataclass
class Proof:
    graph: ProofGraph
    steps: list[ProofStep]
    stats: SearchStats
    lemmas: list[RewriteRule] = field(default_factory=list)

    found = True

    @property
    def length(self) -> int:
        return len(self.steps)

    @property
    def forward(self) -> list[ProofStep]:
        return [s for s in self.steps if s.side == "forward"]

    @property
    def reverse(self) -> list[ProofStep]:
        return [s for s in self.steps if s.side == "reverse"]


@dataclass
class NotFound:
    stats: SearchStats
    exhausted: bool  # True: every state within the depth bound was explored

    found = False

    @property
    def reason(self) -> str:
        return "exhausted" if self.exhausted else "budget"


def replay(steps: Sequence[ProofStep], start: AnyGraph) -> AnyGraph:
    """Apply recorded matches in order, starting from ``start``."""
    g = start
    for s in steps:
        g = apply_match(s.rule, g, s.match).result
    return g


# -- critical pairs ------------------------------------------------------------


def rule_key(rule: RewriteRule) -> bytes:
    """Canonical key of a rule up to variable renaming and edge reordering."""
    names: dict[object, int] = {}
    labels: dict[int, object] = {}
    lhs_marker, rhs_marker = 0, 1
    labels[lhs_marker] = ("side", "L")
    labels[rhs_marker] = ("side", "R")

    def vid(t: object) -> int:
        if t not in names:
            names[t] = len(names) + 2
            labels[names[t]] = ("const", t) if isinstance(t, int) else ("var",)
        return names[t]

    edges = [[lhs_marker] + [vid(t) for t in e] for e in rule.lhs]
    edges += [[rhs_marker] + [vid(t) for t in e] for e in rule.rhs]
    g = Hypergraph.from_edges(edges, vertices=[0, 1], labels=labels)
    return canonical_form(g).key


@dataclass(frozen=True)
class CriticalPair:
    rule: RewriteRule
    first: str
    second: str
    overlap: tuple[tuple[int, int], ...]


def critical_pairs(rules: Sequence[RewriteRule], max_overlap_edges: int) -> list[CriticalPair]:
    if max_overlap_edges < 1:
        raise ValueError("max_overlap_edges must be >= 1")
    seen: set[bytes] = set()
    out: list[CriticalPair] = []
    for p1, p2 in itertools.product(rules, repeat=2):
        for ov in enumerate_overlaps(p1, p2, max_overlap_edges):
            try:
                composed = compose_concurrent(p1, p2, ov, name=f"cp{len(out)}[{p1.name}*{p2.name}]")
            except CompositionError:
                continue
            if not composed.lhs:
                continue
            k = rule_key(composed)
            if k in seen:
                continue
            seen.add(k)
            out.append(CriticalPair(composed, p1.name, p2.name, tuple(sorted(ov.items()))))
    return out


def enumerate_critical_pairs(rules: Sequence[RewriteRule], max_overlap_edges: int) -> list[RewriteRule]:
    """Composed rules for every unifiable overlap, deduplicated up to rule isomorphism."""
    return [cp.rule for cp in critical_pairs(rules, max_overlap_edges)]


def rank_lemmas(
    candidates: Sequence[RewriteRule],
    rules: Sequence[RewriteRule],
    state: AnyGraph,
    depth: int = 2,
    max_states: int = 500,
) -> list[tuple[RewriteRule, int]]:
    """Score each candidate by the causal out-edges of its events in a probe
    evolution from ``state`` and sort best first."""
    scored = []
    for cand in candidates:
        mw, cg = probe(list(rules) + [cand], state, depth, max_states)
        score = sum(cg.out_degree(e.id) for e in mw.events if e.rule == cand.name)
        scored.append((cand, score, rule_key(cand)))
    scored.sort(key=lambda t: (-t[1], t[2]))
    return [(c, s) for c, s, _ in scored]


# -- search ------------------------------------------------------------------


def _expand_job(job: tuple[Sequence[RewriteRule], AnyGraph]) -> list[Successor]:
    return expand_state(*job)


class _Expander:
    """Memoized one-step expansion; prefetches run on a process pool."""

    def __init__(self, rules: Sequence[RewriteRule], workers: int):
        self.rules = list(rules)
        self.cache: dict[bytes, list[Successor]] = {}
        self.pool = ProcessPoolExecutor(workers) if workers > 1 else None

    def successors(self, key: bytes, rep: AnyGraph) -> list[Successor]:
        if key not in self.cache:
            raw = expand_state(self.rules, rep)
            self.cache[key] = _dedup(self.rules, key, raw)
        return self.cache[key]

    def prefetch(self, items: Sequence[tuple[bytes, AnyGraph]]) -> None:
        todo = [(k, r) for k, r in items if k not in self.cache]
        if self.pool is None or len(todo) < 2:
            return
        for (k, _), raw in zip(todo, self.pool.map(_expand_job, [(self.rules, r) for _, r in todo])):
            self.cache[k] = _dedup(self.rules, k, raw)

    def close(self) -> None:
        if self.pool is not None:
            self.pool.shutdown()


def _dedup(rules: Sequence[RewriteRule], key: bytes, succs: list[Successor]) -> list[Successor]:
    seen: set[tuple] = set()
    out = []
    for s in succs:
        sig = (rules[s.rule_index].name, s.key, s.consumed, s.created)
        if sig not in seen:
            seen.add(sig)
            out.append(s)
    return out


@dataclass
class _Node:
    key: bytes
    rep: AnyGraph
    depth: int
    score: int
    parent: "_Node | None" = None
    via: Successor | None = None


class _Frontier:
    def __init__(self, strategy: Strategy):
        self.strategy = strategy
        self.heap: list[tuple] = []
        self.counter = itertools.count()

    def push(self, node: _Node) -> None:
        if self.strategy == Strategy.BFS:
            prio: tuple = (node.depth, next(self.counter))
        else:
            prio = (-node.score, node.depth, node.key)
        heapq.heappush(self.heap, (prio, next(self.counter), node))

    def pop(self) -> _Node:
        return heapq.heappop(self.heap)[-1]

    def __len__(self) -> int:
        return len(self.heap)


class _Side:
    """One direction of a (possibly bidirectional) search."""

    def __init__(self, start: AnyGraph, cfg: ProverConfig, expander: _Expander):
        ck = canonical_form(prune_isolated(start))
        self.cfg = cfg
        self.expander = expander
        self.root = _Node(ck.key, ck.graph, 0, 0)
        self.nodes: dict[bytes, _Node] = {ck.key: self.root}
        self.frontier = _Frontier(cfg.strategy)
        self.frontier.push(self.root)

    def step(self, stats: SearchStats, other: dict[bytes, _Node]) -> tuple[_Node, _Node | None] | None:
        """Expand one node; return a meeting pair when a state of ``other`` is generated."""
        while self.frontier:
            node = self.frontier.pop()
            if node.depth >= self.cfg.max_depth:
                continue
            stats.expanded += 1
            succs = self.expander.successors(node.key, node.rep)
            scores = self._scores(succs) if self.cfg.strategy == Strategy.CAUSAL else [0] * len(succs)
            for s, sc in zip(succs, scores):
                if s.key in self.nodes:
                    continue
                child = _Node(s.key, s.state, node.depth + 1, node.score + sc, node, s)
                self.nodes[s.key] = child
                stats.generated += 1
                stats.depth_reached = max(stats.depth_reached, child.depth)
                if s.key in other:
                    return child, other[s.key]
                self.frontier.push(child)
            return None
        return None

    def _scores(self, succs: list[Successor]) -> list[int]:
        fresh = [(s.key, s.state) for s in succs]
        self.expander.prefetch(fresh)
        out = []
        for s in succs:
            nxt = self.expander.successors(s.key, s.state)
            out.append(sum(1 for t in nxt if t.consumed & s.created))
        return out

    @property
    def exhausted(self) -> bool:
        return not self.frontier


def _path(node: _Node) -> list[_Node]:
    out = []
    while node.parent is not None:
        out.append(node)
        node = node.parent
    return out[::-1]


def _concrete_steps(
    rules: Sequence[RewriteRule], start: AnyGraph, path: list[_Node], side: str
) -> tuple[list[ProofStep], AnyGraph]:
    """Transport each canonical-representative match onto the concrete graph."""
    steps = []
    g = start
    for node in path:
        s = node.via
        assert s is not None and node.parent is not None
        rule = rules[s.rule_index]
        ck = canonical_form(prune_isolated(g))
        assert ck.key == node.parent.key
        raw_edge = {i: eid for eid, i in ck.edge_index.items()}
        raw_vertex = {c: v for v, c in ck.vertex_map.items()}
        pos = {e.id: i for i, e in enumerate(node.parent.rep.edges)}
        m = Match(
            rule.name,
            {k: raw_vertex[v] for k, v in s.match.binding.items()},
            tuple(raw_edge[pos[x]] for x in s.match.edges),
            s.match.label_binding,
        )
        after = apply_match(rule, g, m).result
        steps.append(ProofStep(rule, m, g, after, side))
        g = after
    return steps, g


def _describe(g: AnyGraph) -> dict:
    from .io import graph_to_json

    return graph_to_json(g)


def _build_proof_graph(
    rules: Sequence[RewriteRule],
    lemma_info: dict[str, CriticalPair],
    steps: list[ProofStep],
    source: AnyGraph,
    target: AnyGraph,
) -> ProofGraph:
    from .io import rule_to_json

    pg = ProofGraph()
    if not steps:
        pg.add(NodeKind.HYPOTHESIS, {"from": _describe(source), "to": _describe(target)})
        return pg
    # axioms only for base rules the proof relies on, directly or via a lemma
    by_name = {r.name: r for r in rules}
    needed: list[str] = []
    for s in steps:
        cp = lemma_info.get(s.rule.name)
        needed += [cp.first, cp.second] if cp is not None else [s.rule.name]
    origin: dict[str, int] = {}
    for name in dict.fromkeys(needed):
        origin[name] = pg.add(NodeKind.AXIOM, {"rule": rule_to_json(by_name[name])})
    for s in steps:
        cp = lemma_info.get(s.rule.name)
        if cp is not None and s.rule.name not in origin:
            nid = pg.add(
                NodeKind.CRITICAL_PAIR_LEMMA,
                {"rule": rule_to_json(s.rule), "parents": [cp.first, cp.second], "overlap": [list(p) for p in cp.overlap]},
            )
            origin[s.rule.name] = nid
            for parent in dict.fromkeys((cp.first, cp.second)):
                pg.link(origin[parent], nid, EdgeKind.DERIVED_INFERENCE)
    hyp_statement = {"from": _describe(source), "to": _describe(target)}
    chains: dict[str, list[int]] = {"forward": [], "reverse": []}
    for s in steps:
        nid = pg.add(
            NodeKind.SUBSTITUTION_LEMMA,
            {"rule": s.rule.name, "side": s.side, "before": _describe(s.before), "after": _describe(s.after)},
        )
        pg.link(origin[s.rule.name], nid, EdgeKind.SUBSTITUTION)
        chain = chains[s.side]
        if chain:
            pg.link(chain[-1], nid, EdgeKind.DERIVED_INFERENCE)
        chain.append(nid)
    hyp = pg.add(NodeKind.HYPOTHESIS, hyp_statement)
    for chain in chains.values():
        if chain:
            pg.link(chain[-1], hyp, EdgeKind.DERIVED_INFERENCE)
    return pg


def _select_lemmas(rules: Sequence[RewriteRule], source: AnyGraph, cfg: ProverConfig) -> dict[str, CriticalPair]:
    pairs = critical_pairs(rules, 1)
    ranked = rank_lemmas([cp.rule for cp in pairs], rules, source, cfg.probe_depth, cfg.probe_max_states)
    by_name = {cp.rule.name: cp for cp in pairs}
    chosen = [r for r, score in ranked if score > 0][: cfg.max_lemmas]
    return {r.name: by_name[r.name] for r in chosen}


def prove_reachability(
    rules: Sequence[RewriteRule],
    source: AnyGraph,
    target: AnyGraph,
    cfg: ProverConfig | None = None,
) -> Proof | NotFound:
    """Search for a rewrite path from ``source`` to a graph isomorphic to ``target``.

    With ``cfg.bidirectional`` the target is rewritten too and a proof is a
    pair of paths meeting in a common state; the target-side steps are read
    in reverse, i.e. as applications of the inverse rules.
    """
    cfg = cfg or ProverConfig()
    t0 = time.perf_counter()
    stats = SearchStats()
    lemma_info: dict[str, CriticalPair] = {}
    if cfg.lemma_generation:
        lemma_info = _select_lemmas(rules, source, cfg)
    all_rules = list(rules) + [cp.rule for cp in lemma_info.values()]
    expander = _Expander(all_rules, cfg.workers)
    try:
        fwd = _Side(source, cfg, expander)
        goal_key = canonical_form(prune_isolated(target)).key
        if fwd.root.key == goal_key:
            stats.wall_time = time.perf_counter() - t0
            return Proof(_build_proof_graph(all_rules, lemma_info, [], source, target), [], stats)
        bwd = _Side(target, cfg, expander) if cfg.bidirectional else None
        goal_nodes = bwd.nodes if bwd is not None else {goal_key: _Node(goal_key, target, 0, 0)}
        meeting = None
        turn = 0
        while meeting is None:
            if stats.expanded >= cfg.max_expansions:
                stats.budget_hit = True
                break
            sides = [(fwd, goal_nodes)]
            if bwd is not None:
                sides.append((bwd, fwd.nodes))
            active = [(s, o) for s, o in sides if not s.exhausted]
            if not active:
                break
            side, other = active[turn % len(active)]
            turn += 1
            hit = side.step(stats, other)
            if hit is not None:
                meeting = (hit, side is fwd)
        stats.wall_time = time.perf_counter() - t0
        if meeting is None:
            return NotFound(stats, exhausted=not stats.budget_hit)
        (mine, theirs), from_fwd = meeting
        a, b = (mine, theirs) if from_fwd else (theirs, mine)
        steps, _ = _concrete_steps(all_rules, source, _path(a), "forward")
        if bwd is not None:
            back, _ = _concrete_steps(all_rules, target, _path(b), "reverse")
            steps += back
        used = {s.rule.name for s in steps}
        lemmas = [cp.rule for name, cp in lemma_info.items() if name in used]
        pg = _build_proof_graph(all_rules, lemma_info, steps, source, target)
        stats.wall_time = time.perf_counter() - t0
        return Proof(pg, steps, stats, lemmas)
    finally:
        expander.close()


# -- strategy comparison ---------------------------------------------------------


def compare_strategies(
    rules: Sequence[RewriteRule],
    instances: Iterable[tuple[AnyGraph, AnyGraph]],
    cfgs: tuple[ProverConfig, ProverConfig] | None = None,
    names: tuple[str, str] = ("causal", "bfs"),
) -> dict:
    """Run both configurations on every instance and collect search metrics."""
    if cfgs is None:
        cfgs = (ProverConfig(strategy=Strategy.CAUSAL), ProverConfig(strategy=Strategy.BFS))
    records = []
    for idx, (src, dst) in enumerate(instances):
        rec: dict = {"index": idx}
        for name, cfg in zip(names, cfgs):
            res = prove_reachability(rules, src, dst, cfg)
            rec[name] = {
                "found": res.found,
                "expanded": res.stats.expanded,
                "generated": res.stats.generated,
                "proof_length": res.length if isinstance(res, Proof) else None,
                "wall_time": res.stats.wall_time,
            }
        records.append(rec)
    return {"instances": records, "aggregate": aggregate(records, names)}


def aggregate(records: list[dict], names: tuple[str, str] = ("causal", "bfs")) -> dict:
    import math

    a, b = names
    if not records:
        return {}
    both = [r for r in records if r[a]["found"] and r[b]["found"]]
    out: dict = {
        "instances": len(records),
        "solved": {a: sum(r[a]["found"] for r in records), b: sum(r[b]["found"] for r in records)},
        f"{a}_expanded_total": sum(r[a]["expanded"] for r in records),
        f"{b}_expanded_total": sum(r[b]["expanded"] for r in records),
        f"{a}_fewer_expansions": sum(r[a]["expanded"] < r[b]["expanded"] for r in records),
        f"{a}_at_most_expansions": sum(r[a]["expanded"] <= r[b]["expanded"] for r in records),
    }
    if both:
        out["expansion_ratio"] = sum(r[b]["expanded"] for r in both) / max(1, sum(r[a]["expanded"] for r in both))
        out["proof_length_ratio"] = sum(r[b]["proof_length"] for r in both) / max(1, sum(r[a]["proof_length"] for r in both))
        exps = [
            math.log(r[b]["expanded"]) / math.log(r[a]["expanded"])
            for r in both
            if r[a]["expanded"] > 1 and r[b]["expanded"] > 1
        ]
        # 2.0 would correspond to a quadratic speedup; reported, never asserted
        out["speedup_exponent"] = sum(exps) / len(exps) if exps else None
    out["timing"] = {
        f"{a}_wall_time": sum(r[a]["wall_time"] for r in records),
        f"{b}_wall_time": sum(r[b]["wall_time"] for r in records),
    }
    return out
