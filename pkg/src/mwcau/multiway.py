"""Multiway evolution with isomorphism merging and causal structure.

States are canonical representatives keyed by their canonical key. Each
rewrite event records the edges it consumed and created as canonical edge
indices of its endpoint states, which is what lets causal edges be read
off merged states.
"""
from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .hypergraph import AnyGraph, canonical_form, prune_isolated
from .rewrite import Match, RewriteRule, apply_match, find_matches

log = logging.getLogger(__name__)

StateKey = bytes

DEFAULT_MAX_STATES = 100_000
DEFAULT_MAX_EVENTS = 1_000_000


class BudgetExceeded(RuntimeError):
    """Evolution stopped at a state or event cap; ``partial`` holds what was built."""

    def __init__(self, message: str, partial: "MultiwayGraph"):
        super().__init__(message)
        self.partial = partial


class PathError(ValueError):
    pass


@dataclass(frozen=True)
class Event:
    id: int
    rule: str
    from_state: StateKey
    to_state: StateKey
    consumed: frozenset[int]
    created: frozenset[int]
    step: int
    match: Match = field(compare=False, repr=False)

    @property
    def signature(self) -> tuple:
        return (self.rule, self.from_state, self.to_state, self.consumed, self.created)


@dataclass
class MultiwayGraph:
    states: dict[StateKey, AnyGraph]
    generation: dict[StateKey, int]
    events: list[Event]
    initial: StateKey
    steps: int
    complete: bool = True

    def state_ids(self) -> dict[StateKey, int]:
        """Stable small integers for states, in discovery order."""
        return {k: i for i, k in enumerate(self.states)}

    def successors(self, key: StateKey) -> list[Event]:
        return [e for e in self.events if e.from_state == key]


@dataclass
class CausalGraph:
    events: list[Event]
    edges: list[tuple[int, int]]

    def __post_init__(self) -> None:
        self._out: dict[int, set[int]] = {e.id: set() for e in self.events}
        self._in: dict[int, set[int]] = {e.id: set() for e in self.events}
        for a, b in self.edges:
            self._out[a].add(b)
            self._in[b].add(a)
        self._by_id = {e.id: e for e in self.events}

    def event(self, event_id: int) -> Event:
        return self._by_id[event_id]

    def out_degree(self, event_id: int) -> int:
        return len(self._out[event_id])

    def related(self, a: int, b: int) -> bool:
        return b in self._out.get(a, ()) or a in self._out.get(b, ())

    def is_acyclic(self) -> bool:
        import networkx as nx

        g = nx.DiGraph()
        g.add_nodes_from(self._out)
        g.add_edges_from(self.edges)
        return nx.is_directed_acyclic_graph(g)


@dataclass(frozen=True)
class Successor:
    rule_index: int
    match: Match
    key: StateKey
    state: AnyGraph
    consumed: frozenset[int]
    created: frozenset[int]


def expand_state(rules: Sequence[RewriteRule], state: AnyGraph) -> list[Successor]:
    """All one-step successors of a canonical representative.

    ``state`` must be a canonical representative, so an edge's position is
    its canonical index.
    """
    position = {e.id: i for i, e in enumerate(state.edges)}
    out: list[Successor] = []
    for ri, rule in enumerate(rules):
        for m in find_matches(rule, state):
            res = apply_match(rule, state, m)
            ck = canonical_form(prune_isolated(res.result))
            out.append(
                Successor(
                    ri,
                    m,
                    ck.key,
                    ck.graph,
                    frozenset(position[x] for x in res.consumed),
                    frozenset(ck.edge_index[x] for x in res.created),
                )
            )
    return out


def _expand_job(job: tuple[Sequence[RewriteRule], AnyGraph]) -> list[Successor]:
    return expand_state(*job)


def evolve(
    rules: Sequence[RewriteRule],
    init: AnyGraph,
    max_steps: int,
    max_states: int = DEFAULT_MAX_STATES,
    max_events: int = DEFAULT_MAX_EVENTS,
    workers: int = 1,
) -> MultiwayGraph:
    """Breadth-first multiway evolution for ``max_steps`` generations.

    Every state is expanded once, the generation after it is first seen;
    frontier expansion runs on ``workers`` processes and results are
    committed in frontier order, so the output does not depend on
    scheduling.
    """
    if max_steps < 0:
        raise ValueError("max_steps must be >= 0")
    rules = list(rules)
    ck0 = canonical_form(prune_isolated(init))
    mw = MultiwayGraph({ck0.key: ck0.graph}, {ck0.key: 0}, [], ck0.key, 0)
    seen: set[tuple] = set()
    frontier = [ck0.key]
    pool = ProcessPoolExecutor(workers) if workers > 1 else None
    try:
        for step in range(max_steps):
            jobs = [(rules, mw.states[k]) for k in frontier]
            results: Iterable[list[Successor]]
            if pool is not None and len(jobs) > 1:
                results = pool.map(_expand_job, jobs, chunksize=max(1, len(jobs) // (4 * workers)))
            else:
                results = map(_expand_job, jobs)
            nxt: list[StateKey] = []
            for key, succs in zip(frontier, results):
                for s in succs:
                    sig = (rules[s.rule_index].name, key, s.key, s.consumed, s.created)
                    if sig in seen:
                        continue
                    if s.key not in mw.states:
                        if len(mw.states) >= max_states:
                            mw.complete = False
                            mw.steps = step
                            raise BudgetExceeded(f"state budget {max_states} exceeded", mw)
                        mw.states[s.key] = s.state
                        mw.generation[s.key] = step + 1
                        nxt.append(s.key)
                    seen.add(sig)
                    mw.events.append(
                        Event(len(mw.events), rules[s.rule_index].name, key, s.key, s.consumed, s.created, step + 1, s.match)
                    )
                    if len(mw.events) > max_events:
                        mw.complete = False
                        mw.steps = step
                        raise BudgetExceeded(f"event budget {max_events} exceeded", mw)
            mw.steps = step + 1
            log.debug("step %d: %d states, %d events", step + 1, len(mw.states), len(mw.events))
            frontier = nxt
    finally:
        if pool is not None:
            pool.shutdown()
    return mw


def causal_graph(mw: MultiwayGraph) -> CausalGraph:
    """Causal edge ``(e1, e2)`` iff ``e2`` starts where ``e1`` ends and consumes
    a canonical edge slot that ``e1`` created."""
    by_from: dict[StateKey, list[Event]] = {}
    for e in mw.events:
        by_from.setdefault(e.from_state, []).append(e)
    edges = []
    for e1 in mw.events:
        for e2 in by_from.get(e1.to_state, ()):
            if e1.created & e2.consumed:
                edges.append((e1.id, e2.id))
    return CausalGraph(list(mw.events), edges)


def selection_score(cg: CausalGraph, path: Sequence[int]) -> int:
    """Total number of causal out-edges of the events along ``path``."""
    for a, b in zip(path, path[1:]):
        if cg.event(a).to_state != cg.event(b).from_state:
            raise PathError(f"events {a} and {b} are not consecutive")
    return sum(cg.out_degree(e) for e in path)


def causally_independent(cg: CausalGraph, e1: Event | int, e2: Event | int) -> bool:
    a = e1 if isinstance(e1, int) else e1.id
    b = e2 if isinstance(e2, int) else e2.id
    return not cg.related(a, b)


def probe(
    rules: Sequence[RewriteRule],
    state: AnyGraph,
    depth: int = 2,
    max_states: int = 500,
) -> tuple[MultiwayGraph, CausalGraph]:
    """Bounded look-ahead evolution; a budget hit returns the partial graph."""
    try:
        mw = evolve(rules, state, depth, max_states=max_states)
    except BudgetExceeded as exc:
        mw = exc.partial
    return mw, causal_graph(mw)
