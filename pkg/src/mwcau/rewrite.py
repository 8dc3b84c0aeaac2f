"""Rewrite rules as variable-pattern spans, matching, DPO application and
rule composition (sequential/concurrent and parallel).

A rule ``lhs -> rhs`` is a span whose interface is the set of variables the
two sides share. Applying a rule consumes every matched lhs edge instance
and creates one fresh edge per rhs pattern edge; rhs-only variables become
fresh vertices.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Sequence, Union

from .hypergraph import (
    AnyGraph,
    EdgeId,
    Hyperedge,
    Hypergraph,
    OpenHypergraph,
    as_graph,
    replace_graph,
)

Term = Union[str, int]  # variables are strings, vertex constants are ints
PatternEdge = tuple[Term, ...]


class MatchError(ValueError):
    """A match does not fit the host (stale or inconsistent)."""


class CompositionError(ValueError):
    """Two rules cannot be composed along the requested overlap."""


class StateMismatch(ValueError):
    """Two applied rewrites are not consecutive."""


@dataclass(frozen=True)
class LabelVar:
    """Placeholder inside a label pattern; binds one label component."""

    name: str


@dataclass(frozen=True)
class PhaseSum:
    """Label template component: sum of bound phases plus a constant, mod 2."""

    terms: tuple[str, ...]
    const: Fraction = Fraction(0)

    def evaluate(self, bound: Mapping[str, Fraction]) -> Fraction:
        total = self.const + sum((bound[t] for t in self.terms), Fraction(0))
        return total % 2


def _is_var(t: Term) -> bool:
    return isinstance(t, str)


@dataclass(frozen=True, eq=False)
class RewriteRule:
    """A production ``lhs -> rhs`` over variable patterns.

    ``lhs_labels`` constrains the labels of matched vertices (components may
    be :class:`LabelVar`), ``rhs_labels`` sets labels after rewriting
    (components may be :class:`LabelVar` or :class:`PhaseSum`). Variables in
    ``closed`` must bind a vertex no other variable binds, and every host edge
    incident to that vertex must be part of the match.
    """

    name: str
    lhs: tuple[PatternEdge, ...]
    rhs: tuple[PatternEdge, ...]
    lhs_labels: Mapping[str, object] = field(default_factory=dict)
    rhs_labels: Mapping[str, object] = field(default_factory=dict)
    closed: frozenset[str] = frozenset()

    @classmethod
    def parse(cls, name: str, lhs: Iterable[Sequence[Term]], rhs: Iterable[Sequence[Term]], **kw) -> "RewriteRule":
        return cls(name, tuple(tuple(e) for e in lhs), tuple(tuple(e) for e in rhs), **kw)

    @property
    def lhs_vars(self) -> frozenset[str]:
        return frozenset(t for e in self.lhs for t in e if _is_var(t))

    @property
    def rhs_vars(self) -> frozenset[str]:
        return frozenset(t for e in self.rhs for t in e if _is_var(t))

    @property
    def interface(self) -> frozenset[str]:
        return self.lhs_vars & self.rhs_vars

    @property
    def fresh_vars(self) -> list[str]:
        """rhs-only variables in order of first appearance."""
        out: list[str] = []
        lv = self.lhs_vars
        for e in self.rhs:
            for t in e:
                if _is_var(t) and t not in lv and t not in out:
                    out.append(t)
        return out

    @property
    def labeled(self) -> bool:
        return bool(self.lhs_labels or self.rhs_labels or self.closed)

    def inverse(self, name: str | None = None) -> "RewriteRule":
        for template in self.rhs_labels.values():
            if isinstance(template, tuple) and any(isinstance(c, PhaseSum) for c in template):
                raise CompositionError(f"rule {self.name} has computed labels and no inverse")
        return RewriteRule(
            name or f"{self.name}^-1",
            self.rhs,
            self.lhs,
            dict(self.rhs_labels),
            dict(self.lhs_labels),
            self.closed & self.rhs_vars,
        )

    def __repr__(self) -> str:
        def fmt(es):
            return "{" + ",".join("{" + ",".join(map(str, e)) + "}" for e in es) + "}"

        return f"RewriteRule({self.name!r}: {fmt(self.lhs)} -> {fmt(self.rhs)})"


@dataclass(frozen=True)
class Match:
    rule_name: str
    binding: Mapping[str, int]
    edges: tuple[EdgeId, ...]  # host edge id per lhs pattern edge
    label_binding: Mapping[str, object] = field(default_factory=dict)

    @property
    def edge_assignment(self) -> dict[int, EdgeId]:
        return dict(enumerate(self.edges))

    def _key(self) -> tuple:
        return (self.edges, tuple(sorted(self.binding.items())))


@dataclass(frozen=True)
class RewriteResult:
    result: AnyGraph
    consumed: frozenset[EdgeId]
    created: tuple[EdgeId, ...]  # one id per rhs pattern edge, in rhs order
    fresh: Mapping[str, int]  # rhs-only variable -> new vertex id

    @property
    def created_ids(self) -> frozenset[EdgeId]:
        return frozenset(self.created)

    @property
    def fresh_vertices(self) -> frozenset[int]:
        return frozenset(self.fresh.values())


def _match_label(pattern: object, label: object, bound: dict[str, object]) -> bool:
    if isinstance(pattern, LabelVar):
        if pattern.name in bound:
            return bound[pattern.name] == label
        bound[pattern.name] = label
        return True
    if isinstance(pattern, tuple):
        if not isinstance(label, tuple) or len(label) != len(pattern):
            return False
        return all(_match_label(p, c, bound) for p, c in zip(pattern, label))
    return pattern == label


def _orientations(inc: tuple[int, ...], unordered: bool) -> list[tuple[int, ...]]:
    if not unordered or len(inc) < 2:
        return [inc]
    return sorted(set(itertools.permutations(inc)))


def find_matches(rule: RewriteRule, host: AnyGraph) -> list[Match]:
    """Enumerate every match of ``rule.lhs`` in ``host``.

    Vertex binding need not be injective; edge assignment is. Matches are
    ordered by the positions of the assigned host edges.
    """
    g = as_graph(host)
    dummies = host.dummies if isinstance(host, OpenHypergraph) else frozenset()
    position = {e.id: k for k, e in enumerate(g.edges)}
    by_arity: dict[int, list[Hyperedge]] = {}
    for e in g.edges:
        by_arity.setdefault(e.arity, []).append(e)

    lhs = rule.lhs
    found: dict[tuple, Match] = {}
    binding: dict[str, int] = {}
    chosen: list[EdgeId] = []
    used: set[EdgeId] = set()

    def bind(pattern: PatternEdge, inc: tuple[int, ...]) -> list[str] | None:
        added: list[str] = []
        ok = True
        for t, v in zip(pattern, inc):
            if not _is_var(t):
                ok = t == v
            elif t in binding:
                ok = binding[t] == v
            else:
                # per-vertex label check prunes early; cross-vertex consistency is rechecked at the leaf
                ok = t not in rule.lhs_labels or _match_label(rule.lhs_labels[t], g.labels.get(v), {})
                if ok:
                    binding[t] = v
                    added.append(t)
            if not ok:
                for a in added:
                    del binding[a]
                return None
        return added

    def extend(i: int) -> None:
        if i == len(lhs):
            labels: dict[str, object] = {}
            for t in sorted(rule.lhs_labels):
                if t in binding and not _match_label(rule.lhs_labels[t], g.labels.get(binding[t]), labels):
                    return
            if _admissible(rule, g, dummies, binding, chosen):
                m = Match(rule.name, dict(binding), tuple(chosen), labels)
                found.setdefault(m._key(), m)
            return
        pattern = lhs[i]
        for e in by_arity.get(len(pattern), ()):
            if e.id in used:
                continue
            for inc in _orientations(e.incidence, g.unordered):
                added = bind(pattern, inc)
                if added is None:
                    continue
                used.add(e.id)
                chosen.append(e.id)
                extend(i + 1)
                chosen.pop()
                used.discard(e.id)
                for a in added:
                    del binding[a]

    extend(0)
    return sorted(found.values(), key=lambda m: ([position[x] for x in m.edges], sorted(m.binding.items())))


def _admissible(
    rule: RewriteRule,
    g: Hypergraph,
    dummies: frozenset[int],
    binding: Mapping[str, int],
    chosen: Sequence[EdgeId],
) -> bool:
    if rule.closed:
        matched = set(chosen)
        for var in rule.closed:
            v = binding[var]
            if v in dummies:
                return False
            if any(binding[o] == v for o in binding if o != var):
                return False
            for e in g.edges:
                if v in e.incidence and e.id not in matched:
                    return False
    if dummies:
        lcount: dict[str, int] = {}
        rcount: dict[str, int] = {}
        for e in rule.lhs:
            for t in e:
                if _is_var(t):
                    lcount[t] = lcount.get(t, 0) + 1
        for e in rule.rhs:
            for t in e:
                if _is_var(t):
                    rcount[t] = rcount.get(t, 0) + 1
        for var, v in binding.items():
            if v in dummies and (lcount.get(var) != rcount.get(var) or var in rule.rhs_labels):
                return False
    return True


def apply_match(rule: RewriteRule, host: AnyGraph, match: Match) -> RewriteResult:
    """Apply ``rule`` at ``match``: delete matched edges, add rhs edges."""
    g = as_graph(host)
    index = {e.id: e for e in g.edges}
    if len(match.edges) != len(rule.lhs) or len(set(match.edges)) != len(match.edges):
        raise MatchError("edge assignment does not fit the rule")
    for pattern, eid in zip(rule.lhs, match.edges):
        if eid not in index:
            raise MatchError(f"edge {eid!r} is not in the host")
        want = [t if not _is_var(t) else match.binding.get(t) for t in pattern]
        got = list(index[eid].incidence)
        if g.unordered:
            want, got = sorted(want, key=repr), sorted(got, key=repr)
        if want != got:
            raise MatchError(f"edge {eid!r} does not fit pattern {pattern}")

    fresh: dict[str, int] = {}
    nxt = g.next_vertex_id()
    for var in rule.fresh_vars:
        fresh[var] = nxt
        nxt += 1
    resolve = dict(match.binding)
    resolve.update(fresh)

    new_ids = g.fresh_edge_ids(len(rule.rhs))
    consumed = frozenset(match.edges)
    created = tuple(
        Hyperedge(eid, tuple(resolve[t] if _is_var(t) else t for t in pattern))
        for eid, pattern in zip(new_ids, rule.rhs)
    )
    vertices = set(g.vertices) | set(fresh.values())
    for e in created:
        vertices.update(e.incidence)  # constants in rhs may name new vertices
    labels = dict(g.labels)
    for var, template in rule.rhs_labels.items():
        if var in resolve:
            labels[resolve[var]] = _instantiate(template, match.label_binding)
    edges = tuple(e for e in g.edges if e.id not in consumed) + created
    out = Hypergraph(frozenset(vertices), edges, labels, g.unordered)
    return RewriteResult(replace_graph(host, out), consumed, tuple(new_ids), fresh)


def _instantiate(template: object, bound: Mapping[str, object]) -> object:
    if isinstance(template, LabelVar):
        return bound[template.name]
    if isinstance(template, PhaseSum):
        return template.evaluate(bound)  # type: ignore[arg-type]
    if isinstance(template, tuple):
        return tuple(_instantiate(c, bound) for c in template)
    return template


# -- applied rewrites and independence ---------------------------------------


@dataclass(frozen=True)
class AppliedRewrite:
    rule: RewriteRule
    host: AnyGraph
    match: Match
    outcome: RewriteResult

    @property
    def consumed(self) -> frozenset[EdgeId]:
        return self.outcome.consumed

    @property
    def created(self) -> frozenset[EdgeId]:
        return self.outcome.created_ids


def rewrite(rule: RewriteRule, host: AnyGraph, match: Match) -> AppliedRewrite:
    return AppliedRewrite(rule, host, match, apply_match(rule, host, match))


def sequentially_independent(e1: AppliedRewrite, e2: AppliedRewrite) -> bool:
    """True iff ``e2`` consumes nothing that ``e1`` created."""
    if e2.host != e1.outcome.result:
        raise StateMismatch("second rewrite does not start from the first one's result")
    return not (e2.consumed & e1.created)


# -- composition -------------------------------------------------------------


def _renamed(rule: RewriteRule, tag: str) -> tuple[list[PatternEdge], list[PatternEdge]]:
    def r(e: PatternEdge) -> PatternEdge:
        return tuple(f"{t}#{tag}" if _is_var(t) else t for t in e)

    return [r(e) for e in rule.lhs], [r(e) for e in rule.rhs]


def _tidy(name: str, lhs: list[PatternEdge], rhs: list[PatternEdge]) -> RewriteRule:
    names: dict[str, str] = {}
    for e in itertools.chain(lhs, rhs):
        for t in e:
            if _is_var(t) and t not in names:
                names[t] = f"v{len(names)}"

    def r(e: PatternEdge) -> PatternEdge:
        return tuple(names[t] if _is_var(t) else t for t in e)

    return RewriteRule(name, tuple(r(e) for e in lhs), tuple(r(e) for e in rhs))


def compose_parallel(p1: RewriteRule, p2: RewriteRule) -> RewriteRule:
    """The parallel production: both left sides consumed, both right sides created."""
    l1, r1 = _renamed(p1, "1")
    l2, r2 = _renamed(p2, "2")

    def tagged(m: Mapping[str, object], tag: str) -> dict[str, object]:
        return {f"{k}#{tag}": v for k, v in m.items()}

    if p1.labeled or p2.labeled:
        return RewriteRule(
            f"({p1.name}+{p2.name})",
            tuple(l1 + l2),
            tuple(r1 + r2),
            {**tagged(p1.lhs_labels, "1"), **tagged(p2.lhs_labels, "2")},
            {**tagged(p1.rhs_labels, "1"), **tagged(p2.rhs_labels, "2")},
            frozenset(f"{v}#1" for v in p1.closed) | frozenset(f"{v}#2" for v in p2.closed),
        )
    return _tidy(f"({p1.name}+{p2.name})", l1 + l2, r1 + r2)


class _UnionFind:
    def __init__(self) -> None:
        self.parent: dict[object, object] = {}

    def find(self, x: object) -> object:
        self.parent.setdefault(x, x)
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a: object, b: object) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra

    def classes(self) -> dict[object, list[object]]:
        out: dict[object, list[object]] = {}
        for x in list(self.parent):
            out.setdefault(self.find(x), []).append(x)
        return out


@dataclass(frozen=True)
class Overlap:
    """Unification of created edges of ``p1`` with consumed edges of ``p2``."""

    pairs: tuple[tuple[int, int], ...]  # (rhs index of p1, lhs index of p2)
    substitution: Mapping[object, Term]


def unify_overlap(p1: RewriteRule, p2: RewriteRule, overlap: Mapping[int, int]) -> Overlap:
    """Unify ``rhs(p1)[i]`` with ``lhs(p2)[j]`` for every ``i -> j`` in ``overlap``.

    Raises :class:`CompositionError` if no two-step rewrite can realize the
    overlap (clashing constants, fresh vertices identified with existing
    ones, or a fresh vertex required in an edge that must pre-exist).
    """
    if not overlap:
        raise CompositionError("overlap must be nonempty")
    if len(set(overlap.values())) != len(overlap):
        raise CompositionError("overlap must be injective")
    if p1.labeled or p2.labeled:
        raise CompositionError("composition of labeled rules is not supported")
    l1, r1 = _renamed(p1, "1")
    l2, r2 = _renamed(p2, "2")
    uf = _UnionFind()
    for e in itertools.chain(l1, r1, l2, r2):
        for t in e:
            uf.find(t if _is_var(t) else ("const", t))
    for i, j in sorted(overlap.items()):
        if not (0 <= i < len(r1) and 0 <= j < len(l2)):
            raise CompositionError(f"overlap pair {i}->{j} out of range")
        a, b = r1[i], l2[j]
        if len(a) != len(b):
            raise CompositionError(f"overlap pair {i}->{j} has mismatched arity")
        for s, t in zip(a, b):
            uf.union(s if _is_var(s) else ("const", s), t if _is_var(t) else ("const", t))

    fresh1 = {f"{v}#1" for v in p1.fresh_vars}
    vars1 = {t for e in itertools.chain(l1, r1) for t in e if _is_var(t)}
    preexisting2 = {t for j, e in enumerate(l2) if j not in overlap.values() for t in e if _is_var(t)}
    subst: dict[object, Term] = {}
    for members in uf.classes().values():
        consts = {m[1] for m in members if isinstance(m, tuple)}
        if len(consts) > 1:
            raise CompositionError(f"overlap identifies distinct constants {sorted(consts)}")
        fresh = [m for m in members if m in fresh1]
        if fresh:
            if consts or len([m for m in members if m in vars1]) > 1:
                raise CompositionError("overlap identifies a created vertex with another vertex")
            if any(m in preexisting2 for m in members):
                raise CompositionError("a created vertex would have to occur in a pre-existing edge")
        if consts:
            rep: Term = next(iter(consts))
        else:
            named = sorted((m for m in members if not isinstance(m, tuple)), key=lambda m: (m not in vars1, m))
            rep = named[0]  # type: ignore[assignment]
        for m in members:
            subst[m] = rep
    return Overlap(tuple(sorted(overlap.items())), subst)


def compose_concurrent(p1: RewriteRule, p2: RewriteRule, overlap: Mapping[int, int], name: str | None = None) -> RewriteRule:
    """Fuse ``p1`` then ``p2`` into one rule, ``p2`` consuming the overlapped
    edges created by ``p1``."""
    ov = unify_overlap(p1, p2, overlap)
    l1, r1 = _renamed(p1, "1")
    l2, r2 = _renamed(p2, "2")

    def s(e: PatternEdge) -> PatternEdge:
        return tuple(ov.substitution[t if _is_var(t) else ("const", t)] for t in e)

    used_rhs = set(overlap)
    used_lhs = set(overlap.values())
    lhs = [s(e) for e in l1] + [s(e) for j, e in enumerate(l2) if j not in used_lhs]
    rhs = [s(e) for i, e in enumerate(r1) if i not in used_rhs] + [s(e) for e in r2]
    return _tidy(name or f"({p1.name}*{p2.name})", lhs, rhs)


def enumerate_overlaps(p1: RewriteRule, p2: RewriteRule, max_edges: int) -> Iterator[dict[int, int]]:
    """Every partial injective arity-respecting map rhs(p1) -> lhs(p2) of size 1..max_edges."""
    for size in range(1, max_edges + 1):
        for src in itertools.combinations(range(len(p1.rhs)), size):
            for dst in itertools.permutations(range(len(p2.lhs)), size):
                if all(len(p1.rhs[i]) == len(p2.lhs[j]) for i, j in zip(src, dst)):
                    yield dict(zip(src, dst))
