import json

import pydot
import pytest

from mwcau.bench import strip_timing
from mwcau.cli import main
from mwcau.hypergraph import Hypergraph
from mwcau.multiway import evolve
from mwcau.rewrite import RewriteRule

FIG1 = '{"name":"fig1","lhs":[["x","y"],["x","z"]],"rhs":[["x","z"],["x","w"],["w","y"]]}'
INIT = "[[0,0],[0,0]]"
FIG2 = "[[0,1],[1,2],[2,0],[0,3],[3,4],[4,5],[5,0]]"


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def parse_dot(text):
    graphs = pydot.graph_from_dot_data(text)
    assert graphs, "DOT did not parse"
    return graphs[0]


def test_evolve_dot_matches_library(capsys):
    code, out, _ = run(capsys, "evolve", "--rules", FIG1, "--init", INIT, "--steps", "3")
    assert code == 0
    g = parse_dot(out)
    boxes = [n for n in g.get_nodes() if n.get_shape() == "box"]
    rule = RewriteRule.parse("fig1", [["x", "y"], ["x", "z"]], [["x", "z"], ["x", "w"], ["w", "y"]])
    assert len(boxes) == len(evolve([rule], Hypergraph.from_edges([[0, 0], [0, 0]]), 3).states)


def test_evolve_zero_steps_is_one_state(capsys):
    code, out, _ = run(capsys, "evolve", "--rules", FIG1, "--init", INIT, "--steps", "0")
    assert code == 0
    assert len(parse_dot(out).get_nodes()) == 1


def test_causal_exports(capsys, tmp_path):
    code, out, _ = run(capsys, "causal", "--rules", FIG1, "--init", INIT, "--steps", "3")
    assert code == 0
    edges = parse_dot(out).get_edges()
    assert any(e.get_style() == "dashed" and e.get_color() == "orange" for e in edges)
    path = tmp_path / "mw.json"
    assert run(capsys, "causal", "--rules", FIG1, "--init", INIT, "--steps", "3", "--format", "json", "--out", str(path))[0] == 0
    data = json.loads(path.read_text())
    assert data["causal_edges"] and data["events"] and data["states"]
    gml = tmp_path / "mw.graphml"
    assert run(capsys, "causal", "--rules", FIG1, "--init", INIT, "--steps", "2", "--format", "graphml", "--out", str(gml))[0] == 0
    assert "<graphml" in gml.read_text()


def test_malformed_json_is_an_input_error(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"lhs": [["x"]],\n "rhs": [}')
    code, _, err = run(capsys, "evolve", "--rules", str(bad), "--init", INIT, "--steps", "1")
    assert code == 1
    assert "bad.json:2:" in err
    assert run(capsys, "evolve", "--rules", str(tmp_path / "missing.json"), "--init", INIT, "--steps", "1")[0] == 1


def test_evolve_budget_writes_partial_output(capsys):
    code, out, _ = run(capsys, "evolve", "--rules", FIG1, "--init", INIT, "--steps", "6", "--max-states", "4")
    assert code == 2
    assert len([n for n in parse_dot(out).get_nodes() if n.get_shape() == "box"]) == 4


def test_prove_fig2_writes_json_and_dot(capsys, tmp_path):
    out = tmp_path / "proof.json"
    code, _, _ = run(capsys, "prove", "--rules", FIG1, "--from", INIT, "--to", FIG2, "--max-depth", "5", "--out", str(out))
    assert code == 0
    data = json.loads(out.read_text())
    assert data["found"] and data["length"] <= 5
    kinds = {n["kind"] for n in data["proof"]["nodes"]}
    assert kinds == {"axiom", "substitution_lemma", "hypothesis"}
    dot = parse_dot((tmp_path / "proof.dot").read_text())
    shapes = {n.get_shape() for n in dot.get_nodes()}
    assert {"box", "circle", "diamond"} <= shapes


def test_prove_trivial_and_unreachable(capsys):
    code, out, _ = run(capsys, "prove", "--rules", FIG1, "--from", INIT, "--to", "[[5,5],[5,5]]")
    assert code == 0 and json.loads(out)["length"] == 0
    grow = '{"lhs":[["x","y"]],"rhs":[["x","y"],["y","y"]]}'
    code, out, _ = run(capsys, "prove", "--rules", grow, "--from", "[[0,1]]", "--to", "[]", "--max-depth", "3")
    assert code == 3 and json.loads(out)["reason"] == "exhausted"
    code, _, _ = run(capsys, "prove", "--rules", FIG1, "--from", INIT, "--to", "[[0,1]]", "--max-depth", "30", "--max-expansions", "3")
    assert code == 2


def test_zx_commands(capsys, tmp_path):
    out = tmp_path / "u.json"
    assert run(capsys, "zx", "prove-unitary", "cnot", "--out", str(out))[0] == 0
    data = json.loads(out.read_text())
    assert data["rules"] == ["S1_fuse_Z_3_3_1", "S1_fuse_X_3_3_1", "Bp_hopf_4_4", "S2_id_Z", "S2_id_X"]
    parse_dot((tmp_path / "u.dot").read_text())

    wires = '{"spiders":[],"wires":[["a","b"],["c","d"]],"inputs":["a","c"],"outputs":["b","d"]}'
    code, text, _ = run(capsys, "zx", "simplify", wires)
    res = json.loads(text)
    assert code == 0 and res["rules"] == [] and len(res["diagram"]["wires"]) == 2

    code, _, err = run(capsys, "zx", "prove-equal", "--from", "cnot", "--to", "id1")
    assert code == 1 and "error" in err


def test_bench_report_and_empty_suite(capsys, tmp_path):
    out = tmp_path / "bench.json"
    assert run(capsys, "bench", "--seed", "3", "--instances", "2", "--decoys", "10", "--out", str(out))[0] == 0
    report = json.loads(out.read_text())
    decoy = report["suites"]["decoy"]
    assert decoy["aggregate"]["causal_at_most_expansions"] == 10
    assert all("proof_length" in r["causal"] for r in decoy["instances"])
    assert (tmp_path / "bench.txt").read_text().startswith("suite")

    empty = tmp_path / "empty.json"
    assert run(capsys, "bench", "--instances", "0", "--decoys", "0", "--out", str(empty))[0] == 0
    suites = json.loads(empty.read_text())["suites"]
    assert all(s == {"instances": [], "aggregate": {}} for s in suites.values())


def test_bench_is_deterministic(capsys, tmp_path):
    texts = []
    for i, workers in enumerate(("1", "1", "2")):
        path = tmp_path / f"b{i}.json"
        run(capsys, "bench", "--seed", "5", "--instances", "4", "--decoys", "3", "--workers", workers, "--out", str(path))
        texts.append(json.dumps(strip_timing(json.loads(path.read_text())), sort_keys=True))
    assert texts[0] == texts[1] == texts[2]


@pytest.mark.parametrize("argv", [["evolve", "--steps", "-1"], ["bench", "--workers", "0"]])
def test_bad_arguments_exit_nonzero(argv):
    with pytest.raises(SystemExit) as exc:
        main(argv + (["--rules", FIG1, "--init", INIT] if argv[0] == "evolve" else []))
    assert exc.value.code != 0
