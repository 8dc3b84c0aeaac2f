"""Directed labeled hypergraphs, open hypergraphs and canonical labeling."""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Mapping, Sequence, Union

Label = Hashable
EdgeId = str


class HypergraphError(ValueError):
    """Raised for structurally invalid hypergraphs."""


@dataclass(frozen=True)
class Hyperedge:
    id: EdgeId
    incidence: tuple[int, ...]

    @property
    def arity(self) -> int:
        return len(self.incidence)


@dataclass(frozen=True, eq=False)
class Hypergraph:
    """Immutable directed hypergraph with stable edge identities.

    Edges form a multiset: two edges may share the same incidence sequence
    and are told apart only by their ids. ``unordered`` marks graphs whose
    edge incidence is read as a multiset (used for ZX wires).
    """

    vertices: frozenset[int]
    edges: tuple[Hyperedge, ...]
    labels: Mapping[int, Label] = field(default_factory=dict)
    unordered: bool = False

    def __post_init__(self) -> None:
        seen: set[EdgeId] = set()
        for e in self.edges:
            if e.id in seen:
                raise HypergraphError(f"duplicate edge id {e.id!r}")
            seen.add(e.id)
            if not e.incidence:
                raise HypergraphError(f"edge {e.id!r} has arity 0")
            for v in e.incidence:
                if v not in self.vertices:
                    raise HypergraphError(f"edge {e.id!r} references unknown vertex {v}")
        for v in self.labels:
            if v not in self.vertices:
                raise HypergraphError(f"label on unknown vertex {v}")

    @classmethod
    def from_edges(
        cls,
        edges: Iterable[Sequence[int]],
        vertices: Iterable[int] = (),
        labels: Mapping[int, Label] | None = None,
        unordered: bool = False,
    ) -> "Hypergraph":
        """Build a hypergraph with ids ``e0, e1, ...`` in list order."""
        es = tuple(Hyperedge(f"e{i}", tuple(inc)) for i, inc in enumerate(edges))
        vs = set(vertices)
        for e in es:
            vs.update(e.incidence)
        return cls(frozenset(vs), es, dict(labels or {}), unordered)

    def edge(self, edge_id: EdgeId) -> Hyperedge:
        for e in self.edges:
            if e.id == edge_id:
                return e
        raise KeyError(edge_id)

    def edge_lists(self) -> list[list[int]]:
        return [list(e.incidence) for e in self.edges]

    def degree(self, v: int) -> int:
        return sum(e.incidence.count(v) for e in self.edges)

    def next_vertex_id(self) -> int:
        return max(self.vertices, default=-1) + 1

    def fresh_edge_ids(self, count: int) -> list[EdgeId]:
        start = 0
        for e in self.edges:
            m = re.fullmatch(r"e(\d+)", e.id)
            if m:
                start = max(start, int(m.group(1)) + 1)
        taken = {e.id for e in self.edges}
        out: list[EdgeId] = []
        k = start
        while len(out) < count:
            if f"e{k}" not in taken:
                out.append(f"e{k}")
            k += 1
        return out

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Hypergraph):
            return NotImplemented
        return (
            self.vertices == other.vertices
            and self.edges == other.edges
            and dict(self.labels) == dict(other.labels)
            and self.unordered == other.unordered
        )

    def __repr__(self) -> str:
        return f"Hypergraph({self.edge_lists()})"


@dataclass(frozen=True, eq=False)
class OpenHypergraph:
    """Hypergraph typed over True/Dummy vertices with an ordered interface.

    Dummy vertices sit on the open ends of dangling edges; ``boundary``
    lists them in interface order.
    """

    graph: Hypergraph
    dummies: frozenset[int] = frozenset()
    boundary: tuple[int, ...] = ()

    @property
    def vertices(self) -> frozenset[int]:
        return self.graph.vertices

    @property
    def edges(self) -> tuple[Hyperedge, ...]:
        return self.graph.edges

    @property
    def labels(self) -> Mapping[int, Label]:
        return self.graph.labels

    @property
    def unordered(self) -> bool:
        return self.graph.unordered

    def is_dummy(self, v: int) -> bool:
        return v in self.dummies

    def with_graph(self, graph: Hypergraph) -> "OpenHypergraph":
        return OpenHypergraph(graph, self.dummies, self.boundary)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, OpenHypergraph):
            return NotImplemented
        return (
            self.graph == other.graph
            and self.dummies == other.dummies
            and self.boundary == other.boundary
        )

    def __repr__(self) -> str:
        return f"OpenHypergraph({self.graph.edge_lists()}, boundary={list(self.boundary)})"


AnyGraph = Union[Hypergraph, OpenHypergraph]


def as_graph(h: AnyGraph) -> Hypergraph:
    return h.graph if isinstance(h, OpenHypergraph) else h


def replace_graph(h: AnyGraph, graph: Hypergraph) -> AnyGraph:
    return h.with_graph(graph) if isinstance(h, OpenHypergraph) else graph


def validate_open(g: OpenHypergraph) -> list[str]:
    """Return every violation of the open-hypergraph typing invariants."""
    violations: list[str] = []
    occurrences: dict[int, int] = {v: 0 for v in g.dummies}
    for e in g.edges:
        for v in e.incidence:
            if v in occurrences:
                occurrences[v] += 1
    for v in sorted(g.dummies):
        if v not in g.vertices:
            violations.append(f"dummy {v} is not a vertex")
        if occurrences[v] != 1:
            violations.append(f"dummy {v} occurs in {occurrences[v]} edge positions, expected 1")
    seen: set[int] = set()
    for v in g.boundary:
        if v in seen:
            violations.append(f"boundary lists {v} more than once")
        seen.add(v)
        if v not in g.dummies:
            violations.append(f"boundary vertex {v} is not a dummy")
    for v in sorted(g.dummies - seen):
        violations.append(f"dummy {v} missing from boundary")
    for v in sorted(g.dummies):
        if v in g.labels:
            violations.append(f"dummy {v} carries a label")
    return violations


def prune_isolated(h: AnyGraph) -> AnyGraph:
    """Drop True vertices that no edge references."""
    g = as_graph(h)
    used = {v for e in g.edges for v in e.incidence}
    keep = used | (h.dummies if isinstance(h, OpenHypergraph) else frozenset())
    if keep >= g.vertices:
        return h
    vs = g.vertices & keep
    labels = {v: lab for v, lab in g.labels.items() if v in vs}
    return replace_graph(h, Hypergraph(vs, g.edges, labels, g.unordered))


# -- canonical labeling ------------------------------------------------------


def label_key(label: Label | None) -> str:
    return "" if label is None else repr(label)


@dataclass(frozen=True)
class CanonicalKey:
    """Isomorphism-class key plus the certified relabeling that produced it.

    ``vertex_map`` sends original vertex ids to canonical ids ``0..n-1`` and
    ``edge_index`` sends original edge ids to their position in the canonical
    edge order. ``graph`` is the canonical representative, whose edge ids are
    ``e<index>``.
    """

    key: bytes
    vertex_map: Mapping[int, int] = field(compare=False, hash=False)
    edge_index: Mapping[EdgeId, int] = field(compare=False, hash=False)
    graph: AnyGraph = field(compare=False, hash=False, repr=False)

    @property
    def hex(self) -> str:
        import hashlib

        return hashlib.sha256(self.key).hexdigest()[:16]


class _Refiner:
    """Colored incidence graph over vertex nodes and edge nodes."""

    def __init__(self, h: AnyGraph):
        g = as_graph(h)
        self.unordered = g.unordered
        self.verts = sorted(g.vertices)
        self.vindex = {v: i for i, v in enumerate(self.verts)}
        self.incidence = [tuple(self.vindex[v] for v in e.incidence) for e in g.edges]
        self.occ: list[list[tuple[int, int]]] = [[] for _ in self.verts]
        for j, inc in enumerate(self.incidence):
            for pos, i in enumerate(inc):
                self.occ[i].append((0 if self.unordered else pos, j))
        boundary_pos: dict[int, int] = {}
        dummies: frozenset[int] = frozenset()
        if isinstance(h, OpenHypergraph):
            dummies = h.dummies
            boundary_pos = {v: k for k, v in enumerate(h.boundary)}
        self.vertex_info = []
        for v in self.verts:
            if v in dummies:
                kind: tuple[int, ...] = (1, boundary_pos.get(v, -1))
            else:
                kind = (0,)
            self.vertex_info.append((kind, label_key(g.labels.get(v))))
        sigs = [(0, info) for info in self.vertex_info]
        sigs += [(1, (len(inc),)) for inc in self.incidence]
        vcol, ecol = self._rank(sigs)
        self.initial = (vcol, ecol)

    def _rank(self, sigs: list) -> tuple[list[int], list[int]]:
        order = {s: r for r, s in enumerate(sorted(set(sigs)))}
        ranks = [order[s] for s in sigs]
        n = len(self.verts)
        return ranks[:n], ranks[n:]

    def refine(self, vcol: list[int], ecol: list[int]) -> tuple[list[int], list[int]]:
        count = len(set(vcol)) + len(set(ecol))
        while True:
            sigs: list = []
            for i in range(len(vcol)):
                sigs.append((0, vcol[i], tuple(sorted((pos, ecol[j]) for pos, j in self.occ[i]))))
            for j, inc in enumerate(self.incidence):
                around = [vcol[i] for i in inc]
                if self.unordered:
                    around.sort()
                sigs.append((1, ecol[j], tuple(around)))
            vcol, ecol = self._rank(sigs)
            new_count = len(set(vcol)) + len(set(ecol))
            if new_count == count:
                return vcol, ecol
            count = new_count

    def individualize(self, vcol: list[int], ecol: list[int], i: int) -> tuple[list[int], list[int]]:
        sigs = [(0, c, 0 if k == i else 1) for k, c in enumerate(vcol)]
        sigs += [(1, c, 0) for c in ecol]
        return self._rank(sigs)

    def certificate(self, vcol: list[int]) -> tuple:
        # vcol is discrete here: canonical index = rank among vertex colors
        order = sorted(range(len(vcol)), key=lambda i: vcol[i])
        canon = [0] * len(vcol)
        for k, i in enumerate(order):
            canon[i] = k
        info = tuple(self.vertex_info[i] for i in order)
        edges = sorted(self._canon_edge(inc, canon) for inc in self.incidence)
        return (len(vcol), info, tuple(edges)), canon

    def _canon_edge(self, inc: tuple[int, ...], canon: list[int]) -> tuple[int, ...]:
        out = [canon[i] for i in inc]
        if self.unordered:
            out.sort()
        return tuple(out)


def _orbits(generators: list[list[int]], n: int) -> list[int]:
    parent = list(range(n))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for perm in generators:
        for a, b in enumerate(perm):
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)
    return [find(x) for x in range(n)]


def _search_canonical(r: _Refiner) -> tuple[tuple, list[int]]:
    best: list = [None, None]  # certificate, canon labeling
    first: list = [None, None]
    automorphisms: list[list[int]] = []

    def record(cert: tuple, canon: list[int]) -> None:
        for ref_cert, ref_canon in (first, best):
            if ref_cert is not None and ref_cert == cert:
                # vertex i and the vertex carrying ref-label canon[i] are swapped
                inv = [0] * len(canon)
                for i, c in enumerate(ref_canon):
                    inv[c] = i
                automorphisms.append([inv[canon[i]] for i in range(len(canon))])
                return
        if first[0] is None:
            first[0], first[1] = cert, canon
        if best[0] is None or cert < best[0]:
            best[0], best[1] = cert, canon

    def visit(vcol: list[int], ecol: list[int], prefix: tuple[int, ...]) -> None:
        vcol, ecol = r.refine(vcol, ecol)
        cells: dict[int, list[int]] = {}
        for i, c in enumerate(vcol):
            cells.setdefault(c, []).append(i)
        target = None
        for c in sorted(cells):
            if len(cells[c]) > 1:
                target = cells[c]
                break
        if target is None:
            record(*r.certificate(vcol))
            return
        explored: list[int] = []
        for i in target:
            if explored:
                stab = [p for p in automorphisms if all(p[x] == x for x in prefix)]
                if stab:
                    orbit = _orbits(stab, len(vcol))
                    if any(orbit[i] == orbit[j] for j in explored):
                        continue
            explored.append(i)
            v2, e2 = r.individualize(vcol, ecol, i)
            visit(v2, e2, prefix + (i,))

    visit(*r.initial, ())
    return best[0], best[1]


def canonical_form(h: AnyGraph) -> CanonicalKey:
    """Compute the isomorphism-class key of ``h`` and its canonical relabeling.

    Isomorphisms must preserve vertex labels, incidence order (unless the
    graph is unordered), dummy typing and boundary positions.
    """
    if isinstance(h, OpenHypergraph):
        problems = [p for p in validate_open(h) if "not a vertex" in p]
        if problems:
            raise HypergraphError("; ".join(problems))
    g = as_graph(h)
    r = _Refiner(h)
    cert, canon = _search_canonical(r)
    if cert is None:  # empty vertex set
        cert, canon = (0, (), ()), []
    vertex_map = {v: canon[i] for i, v in enumerate(r.verts)}
    keyed = []
    for pos, e in enumerate(g.edges):
        keyed.append((r._canon_edge(r.incidence[pos], canon), pos, e.id))
    keyed.sort()
    edge_index = {eid: k for k, (_, _, eid) in enumerate(keyed)}
    edges_cert = tuple(inc for inc, _, _ in keyed)
    header = {
        "open": isinstance(h, OpenHypergraph),
        "unordered": g.unordered,
    }
    payload = json.dumps([header, cert[0], cert[1], edges_cert], separators=(",", ":"))
    rep_graph = Hypergraph(
        frozenset(range(len(r.verts))),
        tuple(Hyperedge(f"e{k}", inc) for k, (inc, _, _) in enumerate(keyed)),
        {vertex_map[v]: lab for v, lab in g.labels.items()},
        g.unordered,
    )
    rep: AnyGraph = rep_graph
    if isinstance(h, OpenHypergraph):
        rep = OpenHypergraph(
            rep_graph,
            frozenset(vertex_map[v] for v in h.dummies),
            tuple(vertex_map[v] for v in h.boundary),
        )
    return CanonicalKey(payload.encode(), vertex_map, edge_index, rep)


def canonical_payload(h: AnyGraph, vertex_map: Mapping[int, int]) -> bytes:
    """Serialize ``h`` under an explicit vertex relabeling, in key format."""
    g = as_graph(h)
    n = len(g.vertices)
    inverse = {c: v for v, c in vertex_map.items()}
    dummies = h.dummies if isinstance(h, OpenHypergraph) else frozenset()
    boundary_pos = {v: k for k, v in enumerate(h.boundary)} if isinstance(h, OpenHypergraph) else {}
    info = []
    for c in range(n):
        v = inverse[c]
        kind = [1, boundary_pos.get(v, -1)] if v in dummies else [0]
        info.append([kind, label_key(g.labels.get(v))])
    edges = []
    for e in g.edges:
        inc = [vertex_map[v] for v in e.incidence]
        if g.unordered:
            inc.sort()
        edges.append(tuple(inc))
    edges.sort()
    header = {"open": isinstance(h, OpenHypergraph), "unordered": g.unordered}
    return json.dumps([header, n, info, edges], separators=(",", ":")).encode()


def is_isomorphic(h1: AnyGraph, h2: AnyGraph) -> bool:
    return canonical_form(h1).key == canonical_form(h2).key


def relabel(h: AnyGraph, vertex_map: Mapping[int, int]) -> AnyGraph:
    """Rename vertices of ``h``; edge ids and order are kept."""
    g = as_graph(h)
    graph = Hypergraph(
        frozenset(vertex_map[v] for v in g.vertices),
        tuple(Hyperedge(e.id, tuple(vertex_map[v] for v in e.incidence)) for e in g.edges),
        {vertex_map[v]: lab for v, lab in g.labels.items()},
        g.unordered,
    )
    if isinstance(h, OpenHypergraph):
        return OpenHypergraph(
            graph,
            frozenset(vertex_map[v] for v in h.dummies),
            tuple(vertex_map[v] for v in h.boundary),
        )
    return graph
