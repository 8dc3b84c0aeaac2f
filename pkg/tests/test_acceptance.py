"""Acceptance criteria, one test each. Every test prints a single
``ACCEPTANCE <n> PASS|FAIL`` line before asserting."""
import json
import time

import numpy as np
import pytest

from mwcau.bench import decoy_suite, strip_timing
from mwcau.cli import main
from mwcau.hypergraph import Hypergraph, canonical_form, is_isomorphic, prune_isolated
from mwcau.multiway import causal_graph, evolve
from mwcau.prover import ProverConfig, Strategy, compare_strategies, prove_reachability, replay
from mwcau.rewrite import (
    CompositionError,
    Match,
    RewriteRule,
    apply_match,
    compose_concurrent,
    compose_parallel,
    enumerate_overlaps,
    find_matches,
)
from mwcau.zx import cnot, compose, decode, encode, identity_wires, standard_rules

from oracles import (
    binding_from_edges,
    brute_force_isomorphic,
    permuted,
    random_hypergraph,
    random_rule,
    replay_causal_edges,
    two_step_via_overlap,
    zx_lhs_hosts,
    zx_matrix,
)

FIG1 = RewriteRule.parse("fig1", [["x", "y"], ["x", "z"]], [["x", "z"], ["x", "w"], ["w", "y"]])
INIT = Hypergraph.from_edges([[0, 0], [0, 0]])
FIG2 = Hypergraph.from_edges([[0, 1], [1, 2], [2, 0], [0, 3], [3, 4], [4, 5], [5, 0]])
FIG1_JSON = '{"name":"fig1","lhs":[["x","y"],["x","z"]],"rhs":[["x","z"],["x","w"],["w","y"]]}'


@pytest.fixture
def report(capsys):
    def emit(n, ok, detail):
        with capsys.disabled():
            print(f"\nACCEPTANCE {n} {'PASS' if ok else 'FAIL'}: {detail}")
        assert ok, detail

    return emit


def test_1_fig2_reachability(report):
    t0 = time.perf_counter()
    p = prove_reachability([FIG1], INIT, FIG2, ProverConfig(max_depth=5))
    elapsed = time.perf_counter() - t0
    ok = p.found and p.length <= 5 and is_isomorphic(replay(p.steps, INIT), FIG2) and elapsed < 60
    report(1, ok, f"proof of length {getattr(p, 'length', None)} found in {elapsed:.3f}s, replay isomorphic to target")


def test_2_cnot_unitarity(report, tmp_path, capsys):
    t0 = time.perf_counter()
    out = tmp_path / "unitary.json"
    code = main(["zx", "prove-unitary", "cnot", "--out", str(out)])
    elapsed = time.perf_counter() - t0
    capsys.readouterr()
    found = code == 0 and json.loads(out.read_text())["found"]

    reference = ["S1_fuse_Z_3_3_1", "S1_fuse_X_3_3_1", "Bp_hopf_4_4", "S2_id_Z", "S2_id_X"]
    rules = standard_rules(4)
    g = encode(compose(cnot(), cnot()))
    valid = True
    for name in reference:
        ms = find_matches(rules.by_name(name), g)
        if not ms:
            valid = False
            break
        g = prune_isolated(apply_match(rules.by_name(name), g, ms[0]).result)
    valid = valid and is_isomorphic(g, encode(identity_wires(2)))
    ok = found and valid and elapsed < 30
    report(2, ok, f"prove-unitary cnot exit {code} in {elapsed:.3f}s; reference 5-lemma replay valid: {valid}")


def _normalized_close(a, b, tol):
    k = np.unravel_index(np.argmax(np.abs(a)), a.shape)
    if abs(a[k]) < tol or abs(b[k]) < tol:
        return False
    return float(np.max(np.abs(a / a[k] - b / b[k]))) <= tol


def test_3_zx_rule_soundness(report):
    checked = failed = 0
    worst = []
    for rule in standard_rules(4):
        for d in zx_lhs_hosts(rule):
            assert len(d.inputs) + len(d.outputs) <= 8
            h = encode(d)
            after = decode(prune_isolated(apply_match(rule, h, find_matches(rule, h)[0]).result), len(d.inputs))
            checked += 1
            if not _normalized_close(zx_matrix(d), zx_matrix(after), 1e-9):
                failed += 1
                worst.append(rule.name)
    report(3, failed == 0 and checked > 0, f"{checked} rule instances checked at 1e-9, {failed} unsound {worst[:5]}")


def test_4_canonicalization(report):
    rng = np.random.default_rng(2024)
    mismatches = small = 0
    for _ in range(1000):
        h = random_hypergraph(rng)
        key = canonical_form(h).key
        perms = [permuted(h, rng) for _ in range(10)]
        mismatches += sum(canonical_form(q).key != key for q in perms)
        if len(h.vertices) <= 8:
            small += 1
            # a permuted copy with one edge reversed is sometimes isomorphic, often not
            q = perms[0]
            edges = [list(e.incidence) for e in q.edges]
            if edges:
                i = int(rng.integers(0, len(edges)))
                edges[i] = edges[i][::-1]
            mutated = Hypergraph.from_edges(edges, vertices=q.vertices)
            for other in (perms[0], mutated):
                same_key = canonical_form(other).key == key
                if same_key != brute_force_isomorphic(h, other):
                    mismatches += 1
    report(4, mismatches == 0, f"1000 graphs x 10 permutations, {small} graphs with <= 8 vertices cross-checked, {mismatches} mismatches")


def test_5_concurrency_and_parallelism(report):
    valid = bad = 0
    for seed in range(200):
        rng = np.random.default_rng(seed)
        p1, p2 = random_rule(rng, "p1"), random_rule(rng, "p2")
        n = int(rng.integers(2, 6))
        host = Hypergraph.from_edges([[int(a), int(b)] for a, b in rng.integers(0, n, size=(int(rng.integers(2, 7)), 2))])
        par = compose_parallel(p1, p2)
        for m1 in find_matches(p1, host)[:6]:
            for m2 in find_matches(p2, host)[:6]:
                if set(m1.edges) & set(m2.edges):
                    continue
                two = apply_match(p2, apply_match(p1, host, m1).result, m2).result
                bind = binding_from_edges(par.lhs, [host.edge(x) for x in m1.edges + m2.edges])
                one = apply_match(par, host, Match(par.name, bind, m1.edges + m2.edges)).result
                valid += 1
                bad += not is_isomorphic(prune_isolated(one), prune_isolated(two))
        for ov in enumerate_overlaps(p1, p2, 2):
            try:
                comp = compose_concurrent(p1, p2, ov)
            except CompositionError:
                continue
            for m in find_matches(comp, host)[:6]:
                pair = two_step_via_overlap(p1, p2, ov, comp, host, m)
                valid += 1
                bad += pair is None or not is_isomorphic(prune_isolated(pair[0]), prune_isolated(pair[1]))
    report(5, bad == 0 and valid > 0, f"200 fixtures, {valid} valid composite applications, {bad} disagree with two-step")


def test_6_causal_oracle(report):
    rng = np.random.default_rng(6)
    host = Hypergraph.from_edges([[0, 1], [1, 2], [2, 0]])
    cases = [(FIG1, INIT)]
    while len(cases) < 5:
        # keep drawing until the rule has causal structure to check
        rule = random_rule(rng, f"r{len(cases)}")
        mw = evolve([rule], host, 3, max_states=5000)
        if causal_graph(mw).edges:
            cases.append((rule, host))
    bad = total = 0
    for rule, init in cases:
        mw = evolve([rule], init, 3, max_states=5000)
        got = set(causal_graph(mw).edges)
        want = replay_causal_edges([rule], mw)
        total += len(want)
        bad += got != want
    report(6, bad == 0, f"5 rules x 3 steps, {total} causal edges, {bad} rules disagree with path replay")


def test_7_decoy_suite(report, tmp_path, capsys):
    rules, instances = decoy_suite(10)
    depth = 13
    cfgs = (ProverConfig(strategy=Strategy.CAUSAL, max_depth=depth), ProverConfig(strategy=Strategy.BFS, max_depth=depth))
    rows = compare_strategies(rules, instances, cfgs)["instances"]
    at_most = sum(r["causal"]["expanded"] <= r["bfs"]["expanded"] for r in rows)
    fewer = sum(r["causal"]["expanded"] < r["bfs"]["expanded"] for r in rows)
    solved = all(r["causal"]["found"] and r["bfs"]["found"] for r in rows)

    out = tmp_path / "bench.json"
    code = main(["bench", "--seed", "0", "--instances", "2", "--decoys", "10", "--out", str(out)])
    capsys.readouterr()
    agg = json.loads(out.read_text())["suites"]["decoy"]["aggregate"]
    bench_ok = code == 0 and "proof_length_ratio" in agg and "expansion_ratio" in agg
    ok = len(rows) >= 10 and solved and at_most == len(rows) and fewer >= 8 and bench_ok
    report(
        7,
        ok,
        f"{len(rows)} decoy instances: causal <= bfs on {at_most}, strictly fewer on {fewer}; "
        f"bench report ok: {bench_ok}, speedup exponent {agg.get('speedup_exponent'):.2f} (reported only)",
    )


def test_8_determinism(report, tmp_path, capsys):
    def run(argv):
        out = tmp_path / "out.json"
        main(argv + ["--out", str(out)])
        capsys.readouterr()
        text = out.read_text()
        if text.lstrip().startswith("{"):
            text = json.dumps(strip_timing(json.loads(text)), sort_keys=True)
        return text

    commands = {
        "evolve": ["causal", "--rules", FIG1_JSON, "--init", "[[0,0],[0,0]]", "--steps", "4", "--format", "json"],
        "prove": ["prove", "--rules", FIG1_JSON, "--from", "[[0,0],[0,0]]", "--to", json.dumps([list(e.incidence) for e in FIG2.edges])],
        "bench": ["bench", "--seed", "7", "--instances", "4", "--decoys", "4"],
    }
    differ = [name for name, argv in commands.items() if run(argv + ["--workers", "1"]) != run(argv + ["--workers", "4"])]
    report(8, not differ, f"evolve/prove/bench identical across 1 and 4 workers; differing: {differ or 'none'}")
