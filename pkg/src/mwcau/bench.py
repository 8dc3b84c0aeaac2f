"""Seeded benchmark suites for comparing search strategies."""
from __future__ import annotations

import random
from typing import Any

from .hypergraph import Hypergraph, prune_isolated
from .prover import ProverConfig, Strategy, aggregate, compare_strategies
from .rewrite import RewriteRule, apply_match, find_matches

TIMING_KEYS = frozenset({"wall_time", "timing"})

SUBDIVIDE = RewriteRule.parse("subdivide", [["x", "y"]], [["x", "z"], ["z", "y"]])
DECOY = RewriteRule.parse("decoy", [["x"]], [["x", "x", "x"]])


def decoy_suite(n: int, tokens: int = 3) -> tuple[list[RewriteRule], list[tuple[Hypergraph, Hypergraph]]]:
    """Grow a path of k + 1 edges (k = 3 .. n + 2) next to unary tokens.

    Every token offers a decoy rewrite whose result no later event builds
    on, so its causal score is zero, while each subdivision feeds two
    further subdivisions. Breadth-first search must sweep the decoy
    branches at every depth; causal ranking follows the productive chain.
    """
    toks = [[100 + i] for i in range(tokens)]
    instances = []
    for k in range(3, n + 3):
        src = Hypergraph.from_edges([[0, 1]] + toks)
        dst = Hypergraph.from_edges([[i, i + 1] for i in range(k + 1)] + toks)
        instances.append((src, dst))
    return [SUBDIVIDE, DECOY], instances


def random_rule(rng: random.Random, name: str) -> RewriteRule:
    names = ["x", "y", "z", "w"]
    lhs = [[rng.choice(names[:3]) for _ in range(2)] for _ in range(rng.randint(1, 2))]
    rhs = [[rng.choice(names) for _ in range(2)] for _ in range(rng.randint(1, 3))]
    return RewriteRule.parse(name, lhs, rhs)


def random_instance(rng: random.Random, rules: list[RewriteRule], steps: int) -> tuple[Hypergraph, Hypergraph] | None:
    """A random start graph and the graph reached by a random rewrite walk."""
    n = rng.randint(2, 4)
    src = Hypergraph.from_edges([[rng.randrange(n), rng.randrange(n)] for _ in range(rng.randint(1, 3))])
    g = src
    for _ in range(steps):
        options = [(r, m) for r in rules for m in find_matches(r, g)]
        if not options:
            return None
        r, m = rng.choice(options)
        g = prune_isolated(apply_match(r, g, m).result)
    return src, g


def strip_timing(obj: Any) -> Any:
    """Drop wall-clock fields so reports can be compared byte for byte."""
    if isinstance(obj, dict):
        return {k: strip_timing(v) for k, v in obj.items() if k not in TIMING_KEYS}
    if isinstance(obj, list):
        return [strip_timing(v) for v in obj]
    return obj


def run_bench(
    seed: int,
    n_random: int = 10,
    n_decoy: int = 10,
    max_depth: int = 13,
    max_expansions: int = 2000,
    workers: int = 1,
) -> dict:
    """Run both strategies on a seeded random suite and the decoy suite."""
    rng = random.Random(seed)

    def cfgs(depth: int) -> tuple[ProverConfig, ProverConfig]:
        return tuple(
            ProverConfig(strategy=s, max_depth=depth, max_expansions=max_expansions, workers=workers)
            for s in (Strategy.CAUSAL, Strategy.BFS)
        )  # type: ignore[return-value]

    report: dict = {"seed": seed, "max_depth": max_depth, "max_expansions": max_expansions, "suites": {}}

    records = []
    attempts = 0
    while len(records) < n_random and attempts < 20 * max(1, n_random):
        attempts += 1
        rules = [random_rule(rng, f"r{len(records)}_{i}") for i in range(rng.randint(1, 2))]
        steps = rng.randint(1, 3)
        inst = random_instance(rng, rules, steps)
        if inst is None:
            continue
        # the walk length bounds the proof depth; a deeper bound only lets
        # explosive random rules swamp both searches
        rec = compare_strategies(rules, [inst], cfgs(min(max_depth, steps + 1)))["instances"][0]
        rec["index"] = len(records)
        rec["rules"] = [r.name + ": " + repr(r).split(": ", 1)[1].rstrip(")") for r in rules]
        records.append(rec)
    report["suites"]["random"] = {"instances": records, "aggregate": aggregate(records)}

    rules, instances = decoy_suite(n_decoy)
    report["suites"]["decoy"] = compare_strategies(rules, instances, cfgs(max_depth))
    return report


def format_table(report: dict) -> str:
    lines = []
    header = f"{'suite':<8}{'#':>4}  {'causal exp':>10} {'bfs exp':>8}  {'causal len':>10} {'bfs len':>8}  {'causal s':>9} {'bfs s':>8}"
    for suite, body in report["suites"].items():
        lines.append(header)
        for r in body["instances"]:
            c, b = r["causal"], r["bfs"]
            lines.append(
                f"{suite:<8}{r['index']:>4}  {c['expanded']:>10} {b['expanded']:>8}  "
                f"{_fmt(c['proof_length']):>10} {_fmt(b['proof_length']):>8}  "
                f"{c['wall_time']:>9.3f} {b['wall_time']:>8.3f}"
            )
        agg = body["aggregate"]
        if agg:
            lines.append(
                f"{suite}: causal expanded fewer on {agg['causal_fewer_expansions']}/{agg['instances']}, "
                f"at most as many on {agg['causal_at_most_expansions']}/{agg['instances']}, "
                f"expansion ratio {_fmt(agg.get('expansion_ratio'))}, speedup exponent {_fmt(agg.get('speedup_exponent'))}"
            )
        lines.append("")
    return "\n".join(lines)


def _fmt(x: Any) -> str:
    if x is None:
        return "-"
    return f"{x:.2f}" if isinstance(x, float) else str(x)
