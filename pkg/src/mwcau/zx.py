"""ZX-diagrams as labeled open hypergraphs, a standard rule set, and a
tensor semantics for checking results.

Spiders are vertices labeled ``("Z" | "X", phase)`` with the phase a
:class:`~fractions.Fraction` in units of pi, taken mod 2. Wires are arity-2
edges in an ``unordered`` graph, and boundary points are dummy vertices
ordered inputs first, then outputs. Every rule removes at least one wire, so
greedy simplification always terminates. Equalities hold up to a nonzero
global scalar.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .hypergraph import Hypergraph, OpenHypergraph, prune_isolated, validate_open
from .prover import (
    Proof,
    ProofGraph,
    ProofStep,
    ProverConfig,
    NotFound,
    Strategy,
    prove_reachability,
)
from .rewrite import LabelVar, PhaseSum, RewriteRule, apply_match, find_matches

log = logging.getLogger(__name__)

COLORS = ("Z", "X")
Spider = tuple[str, Fraction]


class ZXError(ValueError):
    pass


class SignatureMismatch(ZXError):
    """The two diagrams have different numbers of inputs or outputs."""


class MatrixTooLarge(ZXError):
    pass


def _other(color: str) -> str:
    return "X" if color == "Z" else "Z"


@dataclass(frozen=True)
class ZXDiagram:
    """Spiders keyed by vertex id, undirected wires, and boundary vertices.

    Boundary ids must be distinct from spider ids and each boundary vertex
    must be the endpoint of exactly one wire.
    """

    spiders: Mapping[int, Spider]
    wires: tuple[tuple[int, int], ...]
    inputs: tuple[int, ...] = ()
    outputs: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        spiders = {v: (c, Fraction(p) % 2) for v, (c, p) in self.spiders.items()}
        object.__setattr__(self, "spiders", spiders)
        object.__setattr__(self, "wires", tuple(tuple(w) for w in self.wires))
        object.__setattr__(self, "inputs", tuple(self.inputs))
        object.__setattr__(self, "outputs", tuple(self.outputs))
        for v, (c, _) in spiders.items():
            if c not in COLORS:
                raise ZXError(f"spider {v} has unknown color {c!r}")
        bound = self.inputs + self.outputs
        if len(set(bound)) != len(bound):
            raise ZXError("a boundary vertex is listed twice")
        if set(bound) & set(spiders):
            raise ZXError("boundary ids overlap spider ids")
        known = set(bound) | set(spiders)
        count = {b: 0 for b in bound}
        for w in self.wires:
            if len(w) != 2:
                raise ZXError(f"wire {w} must have two endpoints")
            for v in w:
                if v not in known:
                    raise ZXError(f"wire {w} references unknown vertex {v}")
                if v in count:
                    count[v] += 1
        for b, n in count.items():
            if n != 1:
                raise ZXError(f"boundary {b} is on {n} wires, expected 1")

    def normalized(self) -> "ZXDiagram":
        """Same diagram with wires sorted, for structural comparison."""
        return ZXDiagram(self.spiders, tuple(sorted(tuple(sorted(w)) for w in self.wires)), self.inputs, self.outputs)

    def degree(self, v: int) -> int:
        return sum(w.count(v) for w in self.wires)

    def next_id(self) -> int:
        ids = set(self.spiders) | set(self.inputs) | set(self.outputs)
        return max(ids, default=-1) + 1

    def adjoint(self) -> "ZXDiagram":
        return ZXDiagram({v: (c, -p) for v, (c, p) in self.spiders.items()}, self.wires, self.outputs, self.inputs)


def encode(d: ZXDiagram) -> OpenHypergraph:
    bound = d.inputs + d.outputs
    g = Hypergraph.from_edges(d.wires, vertices=list(d.spiders) + list(bound), labels=dict(d.spiders), unordered=True)
    return OpenHypergraph(g, frozenset(bound), bound)


def decode(h: OpenHypergraph, n_inputs: int) -> ZXDiagram:
    problems = validate_open(h)
    if problems:
        raise ZXError("; ".join(problems))
    unlabeled = [v for v in h.vertices if v not in h.dummies and v not in h.labels]
    if unlabeled:
        raise ZXError(f"vertices {sorted(unlabeled)} are neither spiders nor boundary")
    bad = [e.id for e in h.edges if e.arity != 2]
    if bad:
        raise ZXError(f"edges {bad} are not wires")
    return ZXDiagram(
        {v: h.labels[v] for v in h.vertices if v not in h.dummies},
        tuple(e.incidence for e in h.edges),
        h.boundary[:n_inputs],
        h.boundary[n_inputs:],
    )


# -- building blocks -------------------------------------------------------------


def identity_wires(n: int) -> ZXDiagram:
    return ZXDiagram({}, tuple((i, n + i) for i in range(n)), tuple(range(n)), tuple(range(n, 2 * n)))


def cnot() -> ZXDiagram:
    """Control on the first qubit: a Z spider joined to an X spider."""
    return ZXDiagram(
        {4: ("Z", Fraction(0)), 5: ("X", Fraction(0))},
        ((0, 4), (4, 2), (4, 5), (1, 5), (5, 3)),
        (0, 1),
        (2, 3),
    )


def _shifted(d: ZXDiagram, offset: int) -> ZXDiagram:
    return ZXDiagram(
        {v + offset: s for v, s in d.spiders.items()},
        tuple((a + offset, b + offset) for a, b in d.wires),
        tuple(v + offset for v in d.inputs),
        tuple(v + offset for v in d.outputs),
    )


def compose(first: ZXDiagram, second: ZXDiagram) -> ZXDiagram:
    """``second`` after ``first``: outputs of ``first`` feed inputs of ``second``.

    Each plugged pair of boundary points disappears and the wires on either
    side are joined. Closed wire loops formed only of plugged points are
    scalars and are dropped.
    """
    if len(first.outputs) != len(second.inputs):
        raise SignatureMismatch(f"cannot plug {len(first.outputs)} outputs into {len(second.inputs)} inputs")
    b = _shifted(second, first.next_id())
    partner = dict(zip(first.outputs, b.inputs))
    partner.update({v: k for k, v in partner.items()})
    wires = list(first.wires + b.wires)
    wire_at = {x: i for i, w in enumerate(wires) for x in w if x in partner}
    joined: list[tuple[int, int]] = []
    used: set[int] = set()
    for i, (u, v) in enumerate(wires):
        if i in used or (u in partner and v in partner):
            continue
        used.add(i)
        end, cur = (u, v) if v in partner else (v, u)
        while cur in partner:
            nxt = partner[cur]
            j = wire_at[nxt]
            used.add(j)
            a, c = wires[j]
            cur = c if a == nxt else a
        joined.append((end, cur))
    spiders = dict(first.spiders)
    spiders.update(b.spiders)
    return ZXDiagram(spiders, tuple(joined), first.inputs, b.outputs)


def tensor(a: ZXDiagram, b: ZXDiagram) -> ZXDiagram:
    b = _shifted(b, a.next_id())
    spiders = dict(a.spiders)
    spiders.update(b.spiders)
    return ZXDiagram(spiders, a.wires + b.wires, a.inputs + b.inputs, a.outputs + b.outputs)


# -- rules -------------------------------------------------------------------


def _lab(color: str, var: str) -> tuple:
    return (color, LabelVar(var))


def _zero(color: str) -> tuple:
    return (color, Fraction(0))


def fusion_rule(color: str, m: int, n: int, k: int) -> RewriteRule:
    """Fuse spiders ``a`` (degree m) and ``b`` (degree n) joined by k wires."""
    lhs = [("a", "b")] * k + [("a", f"x{i}") for i in range(m - k)] + [("b", f"y{j}") for j in range(n - k)]
    rhs = [("a", f"x{i}") for i in range(m - k)] + [("a", f"y{j}") for j in range(n - k)]
    return RewriteRule.parse(
        f"S1_fuse_{color}_{m}_{n}_{k}",
        lhs,
        rhs,
        lhs_labels={"a": _lab(color, "p"), "b": _lab(color, "q")},
        rhs_labels={"a": (color, PhaseSum(("p", "q")))},
        closed=frozenset({"a", "b"}),
    )


def identity_rule(color: str) -> RewriteRule:
    return RewriteRule.parse(
        f"S2_id_{color}",
        [("x", "s"), ("s", "y")],
        [("x", "y")],
        lhs_labels={"s": _zero(color)},
        closed=frozenset({"s"}),
    )


def loop_rule(color: str, m: int) -> RewriteRule:
    """A wire from a spider to itself is a trace the spider absorbs. With no
    other wires the spider becomes a scalar, which must not be zero, so the
    phase is then fixed to 0."""
    label = _zero(color) if m == 0 else _lab(color, "p")
    others = [("s", f"x{i}") for i in range(m)]
    return RewriteRule.parse(
        f"loop_{color}_{m}", [("s", "s")] + others, others, lhs_labels={"s": label}, closed=frozenset({"s"})
    )


def hopf_rule(m: int, n: int) -> RewriteRule:
    """A Z spider of degree m and an X spider of degree n joined by two wires
    lose both wires. A spider left with no wires must have phase 0, otherwise
    the dropped scalar could be zero."""
    z = _zero("Z") if m == 2 else _lab("Z", "p")
    x = _zero("X") if n == 2 else _lab("X", "q")
    lhs = [("a", "b"), ("a", "b")] + [("a", f"x{i}") for i in range(m - 2)] + [("b", f"y{j}") for j in range(n - 2)]
    rhs = [("a", f"x{i}") for i in range(m - 2)] + [("b", f"y{j}") for j in range(n - 2)]
    return RewriteRule.parse(
        f"Bp_hopf_{m}_{n}", lhs, rhs, lhs_labels={"a": z, "b": x}, closed=frozenset({"a", "b"})
    )


def copy_rule(color: str, n: int) -> RewriteRule:
    """A phase-0 ``color`` state on a spider of the other color with degree n
    is copied onto that spider's other n - 1 neighbors."""
    lhs = [("s", "t")] + [("t", f"y{j}") for j in range(n - 1)]
    rhs = [(f"c{j}", f"y{j}") for j in range(n - 1)]
    return RewriteRule.parse(
        f"B1_copy_{color}_{n}",
        lhs,
        rhs,
        lhs_labels={"s": _zero(color), "t": _lab(_other(color), "p")},
        rhs_labels={f"c{j}": _zero(color) for j in range(n - 1)},
        closed=frozenset({"s", "t"}),
    )


def bialgebra_rule(color: str, m: int, n: int) -> RewriteRule:
    """Complete bipartite K_{m,n} between phase-0 ``color`` spiders u_i and
    other-color spiders v_j, each with one outer wire, becomes one wire
    between an other-color spider (on the u side) and a ``color`` spider."""
    o = _other(color)
    lhs = [(f"u{i}", f"v{j}") for i in range(m) for j in range(n)]
    lhs += [(f"u{i}", f"p{i}") for i in range(m)] + [(f"v{j}", f"q{j}") for j in range(n)]
    rhs = [("U", f"p{i}") for i in range(m)] + [("U", "V")] + [("V", f"q{j}") for j in range(n)]
    labels = {f"u{i}": _zero(color) for i in range(m)}
    labels.update({f"v{j}": _zero(o) for j in range(n)})
    return RewriteRule.parse(
        f"B2_bialg_{color}_{m}_{n}",
        lhs,
        rhs,
        lhs_labels=labels,
        rhs_labels={"U": _zero(o), "V": _zero(color)},
        closed=frozenset(labels),
    )


@dataclass(frozen=True)
class ZXRuleSet:
    rules: tuple[RewriteRule, ...]
    max_arity: int

    def __iter__(self):
        return iter(self.rules)

    def __len__(self) -> int:
        return len(self.rules)

    def by_name(self, name: str) -> RewriteRule:
        for r in self.rules:
            if r.name == name:
                return r
        raise KeyError(name)


def standard_rules(max_arity: int = 4) -> ZXRuleSet:
    """Fusion, identity, self-loop, Hopf, copy and bialgebra rules for
    spiders of degree at most ``max_arity``, in both colors.

    Rules are ordered cheapest first: loops, fusions, identities, Hopf,
    copies, then bialgebras.
    """
    if max_arity < 2:
        raise ValueError("max_arity must be >= 2")
    rules = [loop_rule(c, m) for c in COLORS for m in range(max_arity - 1)]
    for c in COLORS:
        for m in range(1, max_arity + 1):
            for n in range(m, max_arity + 1):
                for k in range(1, m + 1):
                    # two spiders wired only to each other fuse into a scalar
                    # that may be zero, so that case is left alone
                    if not (m == n == k):
                        rules.append(fusion_rule(c, m, n, k))
    rules += [identity_rule(c) for c in COLORS]
    rules += [hopf_rule(m, n) for m in range(2, max_arity + 1) for n in range(2, max_arity + 1)]
    rules += [copy_rule(c, n) for c in COLORS for n in range(1, max_arity + 1)]
    for c in COLORS:
        for m in range(1, max_arity):
            for n in range(1, max_arity):
                if m * n > 1:
                    rules.append(bialgebra_rule(c, m, n))
    return ZXRuleSet(tuple(rules), max_arity)


# -- simplification and proofs -------------------------------------------------


@dataclass
class SimplifyResult:
    diagram: ZXDiagram
    steps: list[ProofStep]
    graph: ProofGraph
    complete: bool  # no rule applies to ``diagram``

    @property
    def rules_used(self) -> list[str]:
        return [s.rule.name for s in self.steps]


def _proof_graph(steps: Sequence[ProofStep], start: OpenHypergraph, end: OpenHypergraph) -> ProofGraph:
    from .prover import _build_proof_graph

    rules = list({s.rule.name: s.rule for s in steps}.values())
    return _build_proof_graph(rules, {}, list(steps), start, end)


def simplify(d: ZXDiagram, rules: ZXRuleSet | None = None, max_steps: int = 10_000) -> SimplifyResult:
    """Apply the first match of the first applicable rule until none applies."""
    rules = rules or standard_rules()
    start = encode(d)
    g = start
    steps: list[ProofStep] = []
    complete = False
    for _ in range(max_steps):
        for rule in rules:
            ms = find_matches(rule, g)
            if ms:
                after = prune_isolated(apply_match(rule, g, ms[0]).result)
                steps.append(ProofStep(rule, ms[0], g, after))
                log.debug("simplify: %s", rule.name)
                g = after
                break
        else:
            complete = True
            break
    return SimplifyResult(decode(g, len(d.inputs)), steps, _proof_graph(steps, start, g), complete)


def prove_equal(
    a: ZXDiagram,
    b: ZXDiagram,
    rules: ZXRuleSet | None = None,
    cfg: ProverConfig | None = None,
) -> Proof | NotFound:
    """Search for a rewrite proof that ``a`` equals ``b``.

    The search runs from both ends; a step on the ``b`` side is read as an
    application of the inverse rule.
    """
    if (len(a.inputs), len(a.outputs)) != (len(b.inputs), len(b.outputs)):
        raise SignatureMismatch(
            f"{len(a.inputs)}->{len(a.outputs)} diagram compared with {len(b.inputs)}->{len(b.outputs)}"
        )
    rules = rules or standard_rules()
    cfg = cfg or ProverConfig(strategy=Strategy.BFS, max_depth=12, bidirectional=True)
    return prove_reachability(list(rules), encode(a), encode(b), cfg)


def prove_unitary(
    d: ZXDiagram, rules: ZXRuleSet | None = None, cfg: ProverConfig | None = None
) -> Proof | NotFound:
    """Prove ``d`` followed by its adjoint is the identity on its inputs."""
    if len(d.inputs) != len(d.outputs):
        raise SignatureMismatch("a unitary needs as many outputs as inputs")
    return prove_equal(compose(d, d.adjoint()), identity_wires(len(d.inputs)), rules, cfg)


# -- tensor semantics -----------------------------------------------------------

_H = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
MAX_BOUNDARY = 16
MAX_INDICES = 52  # numpy's limit on distinct einsum subscripts


def spider_tensor(color: str, phase: Fraction, arity: int) -> np.ndarray:
    t = np.zeros((2,) * arity, dtype=complex)
    t[(0,) * arity] = 1
    t[(1,) * arity] += np.exp(1j * np.pi * float(phase))
    if color == "X":
        for axis in range(arity):
            t = np.moveaxis(np.tensordot(_H, t, axes=([1], [axis])), 0, axis)
    return t


def to_matrix(d: ZXDiagram) -> np.ndarray:
    """The linear map of ``d`` as a ``2^outputs x 2^inputs`` matrix.

    The first input and the first output are the most significant bits.
    """
    bound = d.inputs + d.outputs
    if len(bound) > MAX_BOUNDARY:
        raise MatrixTooLarge(f"{len(bound)} boundary points exceed the limit of {MAX_BOUNDARY}")
    index = itertools.count()
    legs: dict[int, list[int]] = {v: [] for v in d.spiders}
    bidx = {b: next(index) for b in bound}
    operands: list = []
    for u, v in d.wires:
        if u in bidx and v in bidx:
            operands += [np.eye(2), [bidx[u], bidx[v]]]
            continue
        w = bidx[u] if u in bidx else bidx[v] if v in bidx else next(index)
        for x in (u, v):
            if x in legs:
                legs[x].append(w)
    for v, (c, p) in sorted(d.spiders.items()):
        operands += [spider_tensor(c, p, len(legs[v])), legs[v]]
    used = next(index)
    if used > MAX_INDICES:
        raise MatrixTooLarge(f"{used} tensor indices exceed the limit of {MAX_INDICES}")
    out = [bidx[b] for b in d.outputs] + [bidx[b] for b in d.inputs]
    if not operands:
        return np.ones((1, 1), dtype=complex)
    t = np.einsum(*operands, out, optimize=True)
    return np.asarray(t, dtype=complex).reshape(2 ** len(d.outputs), 2 ** len(d.inputs))


def proportional(a: np.ndarray, b: np.ndarray, tol: float = 1e-9) -> bool:
    """Equal up to a nonzero scalar, within ``tol`` after normalization."""
    if a.shape != b.shape:
        return False
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na < tol or nb < tol:
        return na < tol and nb < tol
    a, b = a / na, b / nb
    k = np.argmax(np.abs(a))
    phase = b.flat[k] / a.flat[k] if abs(a.flat[k]) > tol else 1
    return bool(np.max(np.abs(a * phase - b)) <= tol)
