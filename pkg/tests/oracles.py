"""Independent brute-force oracles shared by the test suite."""
from __future__ import annotations

import itertools
from collections import Counter

import numpy as np

from mwcau.hypergraph import Hypergraph, OpenHypergraph


def _parts(h):
    if isinstance(h, OpenHypergraph):
        return h.graph, h.dummies, {v: i for i, v in enumerate(h.boundary)}
    return h, frozenset(), {}


def _vertex_profile(g, dummies, boundary, v):
    """Per-vertex data every isomorphism preserves."""
    occ = []
    for e in g.edges:
        for i, x in enumerate(e.incidence):
            if x == v:
                occ.append((e.arity, -1 if g.unordered else i))
    return (repr(g.labels.get(v)), v in dummies, boundary.get(v, -1), tuple(sorted(occ)))


def brute_force_isomorphic(h1, h2) -> bool:
    """Exhaustive search over vertex bijections.

    Only bijections that keep each vertex's label, boundary role and
    incidence profile are tried; any isomorphism has that property, so the
    search is still complete.
    """
    g1, d1, b1 = _parts(h1)
    g2, d2, b2 = _parts(h2)
    if isinstance(h1, OpenHypergraph) != isinstance(h2, OpenHypergraph):
        return False
    if len(g1.vertices) != len(g2.vertices) or len(g1.edges) != len(g2.edges):
        return False

    def norm(inc, unordered):
        return tuple(sorted(inc)) if unordered else tuple(inc)

    target = Counter(norm(e.incidence, g2.unordered) for e in g2.edges)
    classes1: dict = {}
    classes2: dict = {}
    for v in sorted(g1.vertices):
        classes1.setdefault(_vertex_profile(g1, d1, b1, v), []).append(v)
    for v in sorted(g2.vertices):
        classes2.setdefault(_vertex_profile(g2, d2, b2, v), []).append(v)
    if {k: len(v) for k, v in classes1.items()} != {k: len(v) for k, v in classes2.items()}:
        return False
    keys = sorted(classes1)
    for choice in itertools.product(*(itertools.permutations(classes2[k]) for k in keys)):
        m = {}
        for k, perm in zip(keys, choice):
            m.update(zip(classes1[k], perm))
        image = Counter(norm([m[v] for v in e.incidence], g1.unordered) for e in g1.edges)
        if image == target:
            return True
    return False


def random_hypergraph(rng, max_vertices=12, max_edges=16, max_arity=4, labels=False):
    n = int(rng.integers(1, max_vertices + 1))
    m = int(rng.integers(0, max_edges + 1))
    edges = []
    for _ in range(m):
        k = int(rng.integers(1, max_arity + 1))
        edges.append([int(x) for x in rng.integers(0, n, size=k)])
    lab = {}
    if labels:
        lab = {v: ("c", int(rng.integers(0, 2))) for v in range(n)}
    return Hypergraph.from_edges(edges, vertices=range(n), labels=lab)


def permuted(h: Hypergraph, rng) -> Hypergraph:
    vs = sorted(h.vertices)
    perm = [int(x) for x in rng.permutation(len(vs))]
    offset = int(rng.integers(0, 50))
    m = {v: vs[perm[i]] + offset for i, v in enumerate(vs)}
    order = [int(x) for x in rng.permutation(len(h.edges))]
    edges = [[m[v] for v in h.edges[i].incidence] for i in order]
    return Hypergraph.from_edges(
        edges, vertices=m.values(), labels={m[v]: l for v, l in h.labels.items()}
    )


# -- ZX tensor oracle: explicit loops, no einsum ----------------------------

H = np.array([[1, 1], [1, -1]]) / np.sqrt(2)


def spider_tensor(color: str, phase: float, arity: int) -> np.ndarray:
    t = np.zeros((2,) * arity, dtype=complex)
    t[(0,) * arity] = 1
    t[(1,) * arity] += np.exp(1j * np.pi * phase)
    if color == "X":
        for axis in range(arity):
            t = np.moveaxis(np.tensordot(H, t, axes=([1], [axis])), 0, axis)
    return t


def zx_matrix(d) -> np.ndarray:
    """Brute-force sum over one bit per wire; boundary bits index the result."""
    legs = {v: [] for v in d.spiders}
    bwire = {}
    for i, w in enumerate(d.wires):
        for x in w:
            if x in legs:
                legs[x].append(i)
            else:
                bwire[x] = i
    tensors = {v: spider_tensor(c, float(p), len(legs[v])) for v, (c, p) in d.spiders.items()}
    out = np.zeros((2 ** len(d.outputs), 2 ** len(d.inputs)), dtype=complex)
    for bits in itertools.product((0, 1), repeat=len(d.wires)):
        val = 1 + 0j
        for v, t in tensors.items():
            val *= t[tuple(bits[i] for i in legs[v])]
            if val == 0:
                break
        if val == 0:
            continue
        row = int("".join(str(bits[bwire[b]]) for b in d.outputs) or "0", 2)
        col = int("".join(str(bits[bwire[b]]) for b in d.inputs) or "0", 2)
        out[row, col] += val
    return out


def normalized(m: np.ndarray) -> np.ndarray:
    k = np.unravel_index(np.argmax(np.abs(m)), m.shape)
    return m / m[k]


# -- rewriting oracles ------------------------------------------------------


def brute_force_match_count(rule, host) -> int:
    """Count injective edge assignments whose incidences agree on a binding."""
    g = host.graph if isinstance(host, OpenHypergraph) else host
    count = 0
    for chosen in itertools.permutations(g.edges, len(rule.lhs)):
        orients = [
            sorted(set(itertools.permutations(e.incidence))) if g.unordered else [e.incidence]
            for e in chosen
        ]
        bindings = set()
        for combo in itertools.product(*orients):
            binding = {}
            ok = True
            for pattern, inc in zip(rule.lhs, combo):
                if len(pattern) != len(inc):
                    ok = False
                    break
                for t, v in zip(pattern, inc):
                    if isinstance(t, int):
                        ok = ok and t == v
                    elif binding.setdefault(t, v) != v:
                        ok = False
            if ok:
                bindings.add(tuple(sorted(binding.items())))
        count += len(bindings)
    return count


def binding_from_edges(patterns, edges):
    binding = {}
    for pattern, e in zip(patterns, edges):
        for t, v in zip(pattern, e.incidence):
            if isinstance(t, str):
                if binding.setdefault(t, v) != v:
                    return None
            elif t != v:
                return None
    return binding


def two_step_via_overlap(p1, p2, overlap, composed, host, match):
    """Replay one composite match as p1 followed by p2; return both results."""
    from mwcau.rewrite import Match, apply_match

    n1 = len(p1.lhs)
    g = host
    e1 = [g.edge(x) for x in match.edges[:n1]]
    b1 = binding_from_edges(p1.lhs, e1)
    assert b1 is not None
    r1 = apply_match(p1, g, Match(p1.name, b1, tuple(match.edges[:n1])))
    mid = r1.result
    rest = iter(match.edges[n1:])
    inv = {j: i for i, j in overlap.items()}
    edges2 = []
    for j in range(len(p2.lhs)):
        edges2.append(r1.created[inv[j]] if j in inv else next(rest))
    b2 = binding_from_edges(p2.lhs, [mid.edge(x) for x in edges2])
    if b2 is None:
        return None
    two = apply_match(p2, mid, Match(p2.name, b2, tuple(edges2))).result
    one = apply_match(composed, g, match).result
    return one, two


def replay_causal_edges(rules, mw):
    """Recompute causal edges by replaying every consecutive event pair on raw
    edge ids, ignoring the events' stored slot sets."""
    from mwcau.hypergraph import canonical_form, prune_isolated
    from mwcau.rewrite import Match, apply_match

    by_name = {r.name: r for r in rules}
    by_from = {}
    for e in mw.events:
        by_from.setdefault(e.from_state, []).append(e)
    edges = set()
    for e1 in mw.events:
        res1 = apply_match(by_name[e1.rule], mw.states[e1.from_state], e1.match)
        raw = res1.result
        ck = canonical_form(prune_isolated(raw))
        assert ck.key == e1.to_state
        raw_edge = {i: eid for eid, i in ck.edge_index.items()}
        raw_vertex = {c: v for v, c in ck.vertex_map.items()}
        for e2 in by_from.get(e1.to_state, ()):
            m = e2.match
            moved = Match(
                m.rule_name,
                {k: raw_vertex[v] for k, v in m.binding.items()},
                tuple(raw_edge[int(x[1:])] for x in m.edges),
                m.label_binding,
            )
            res2 = apply_match(by_name[e2.rule], raw, moved)
            assert canonical_form(prune_isolated(res2.result)).key == e2.to_state
            if res2.consumed & res1.created_ids:
                edges.add((e1.id, e2.id))
    return edges


def random_rule(rng, name, max_lhs=2, max_rhs=3, arity=2):
    names = ["x", "y", "z", "w", "u"]
    lhs = [[names[int(k)] for k in rng.integers(0, 3, size=arity)] for _ in range(int(rng.integers(1, max_lhs + 1)))]
    rhs = [[names[int(k)] for k in rng.integers(0, 5, size=arity)] for _ in range(int(rng.integers(0, max_rhs + 1)))]
    from mwcau.rewrite import RewriteRule

    return RewriteRule.parse(name, lhs, rhs)


def zx_lhs_hosts(rule, phases=(0, 1, 2, 3)):
    """Every instantiation of a ZX rule's left-hand side as a diagram whose
    unlabeled variables are distinct output boundaries; phases in multiples
    of pi/2 range over ``phases``."""
    from fractions import Fraction

    from mwcau.rewrite import LabelVar
    from mwcau.zx import ZXDiagram

    spider_vars = sorted(rule.lhs_labels)
    names = sorted({t for e in rule.lhs for t in e if t not in rule.lhs_labels})
    ids = {v: i for i, v in enumerate(spider_vars + names)}
    free = sorted({c.name for lab in rule.lhs_labels.values() for c in lab if isinstance(c, LabelVar)})
    for combo in itertools.product(phases, repeat=len(free)):
        bound = dict(zip(free, (Fraction(p, 2) for p in combo)))
        spiders = {}
        for v in spider_vars:
            color, ph = rule.lhs_labels[v]
            spiders[ids[v]] = (color, bound[ph.name] if isinstance(ph, LabelVar) else ph)
        wires = tuple((ids[a], ids[b]) for a, b in rule.lhs)
        yield ZXDiagram(spiders, wires, (), tuple(ids[n] for n in names))
