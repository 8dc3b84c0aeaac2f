"""Command-line driver.

Exit codes: 0 success, 1 input error, 2 budget exhausted, 3 not found.
Set ``MWCAU_LOG`` (e.g. ``DEBUG``) to change the log level.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path
from typing import Any, Callable

from . import io
from .bench import format_table, run_bench
from .multiway import BudgetExceeded, causal_graph, evolve
from .prover import ProverConfig, Proof, Strategy, prove_reachability
from .zx import (
    SignatureMismatch,
    ZXDiagram,
    ZXError,
    cnot,
    identity_wires,
    prove_equal,
    prove_unitary,
    simplify,
    standard_rules,
)

log = logging.getLogger("mwcau")

EXIT_OK, EXIT_INPUT, EXIT_BUDGET, EXIT_NOT_FOUND = 0, 1, 2, 3

BUILTIN_GATES: dict[str, Callable[[], ZXDiagram]] = {
    "cnot": cnot,
    "id1": lambda: identity_wires(1),
    "id2": lambda: identity_wires(2),
}


def _load(arg: str) -> Any:
    """Inline JSON (starting with ``{`` or ``[``) or a path to a JSON file."""
    text = arg.lstrip()
    if text[:1] in "{[":
        try:
            return json.loads(text)
        except json.JSONDecodeError as exc:
            raise io.InputError(f"<inline>:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    try:
        return io.load_json(arg)
    except OSError as exc:
        raise io.InputError(f"cannot read {arg}: {exc.strerror}") from exc


def _load_diagram(arg: str) -> ZXDiagram:
    if arg in BUILTIN_GATES:
        return BUILTIN_GATES[arg]()
    return io.zx_from_json(_load(arg))


def _emit(text: str, out: str | None, suffix: str | None = None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    path = Path(out) if suffix is None else Path(out).with_suffix(suffix)
    path.write_text(text, encoding="utf-8")
    log.info("wrote %s", path)


def _export_multiway(mw, cg, fmt: str) -> str:
    if fmt == "dot":
        return io.multiway_to_dot(mw, cg)
    if fmt == "graphml":
        return io.multiway_to_graphml(mw, cg)
    return io.dump_json(io.multiway_to_json(mw, cg))


def _emit_proof(payload: dict, graph, args) -> None:
    """Proof JSON to ``--out`` (or stdout); with ``--out`` also a DOT file."""
    if args.format == "dot" and args.out is None:
        _emit(io.proof_to_dot(graph), None)
        return
    _emit(io.dump_json(payload), args.out)
    if args.out is not None and graph is not None:
        _emit(io.proof_to_dot(graph), args.out, ".dot")


def _stats(stats) -> dict:
    return stats.as_dict()


# -- commands ------------------------------------------------------------------


def cmd_evolve(args, with_causal: bool) -> int:
    rules = io.rules_from_json(_load(args.rules))
    init = io.graph_from_json(_load(args.init))
    status = EXIT_OK
    try:
        mw = evolve(rules, init, args.steps, max_states=args.max_states, workers=args.workers)
    except BudgetExceeded as exc:
        log.warning("%s; writing the partial graph", exc)
        mw, status = exc.partial, EXIT_BUDGET
    cg = causal_graph(mw) if with_causal else None
    _emit(_export_multiway(mw, cg, args.format), args.out)
    log.info("%d states, %d events", len(mw.states), len(mw.events))
    return status


def _proof_payload(res) -> dict:
    if isinstance(res, Proof):
        return {
            "found": True,
            "length": res.length,
            "rules": [s.rule.name for s in res.steps],
            "stats": _stats(res.stats),
            "proof": io.proof_to_json(res.graph),
        }
    return {"found": False, "reason": res.reason, "stats": _stats(res.stats)}


def _status(res) -> int:
    if res.found:
        return EXIT_OK
    return EXIT_NOT_FOUND if res.exhausted else EXIT_BUDGET


def cmd_prove(args) -> int:
    rules = io.rules_from_json(_load(args.rules))
    src = io.graph_from_json(_load(getattr(args, "from")))
    dst = io.graph_from_json(_load(args.to))
    cfg = ProverConfig(
        strategy=Strategy(args.strategy),
        max_depth=args.max_depth,
        max_expansions=args.max_expansions,
        lemma_generation=args.lemmas,
        bidirectional=args.bidirectional,
        workers=args.workers,
    )
    res = prove_reachability(rules, src, dst, cfg)
    _emit_proof(_proof_payload(res), res.graph if isinstance(res, Proof) else None, args)
    return _status(res)


def _zx_cfg(args) -> ProverConfig:
    return ProverConfig(
        strategy=Strategy(args.strategy),
        max_depth=args.max_depth,
        max_expansions=args.max_expansions,
        bidirectional=True,
        workers=args.workers,
    )


def cmd_zx(args) -> int:
    rules = standard_rules(args.max_arity)
    if args.zx_command == "simplify":
        res = simplify(_load_diagram(args.diagram), rules)
        payload = {
            "diagram": io.zx_to_json(res.diagram),
            "complete": res.complete,
            "rules": res.rules_used,
            "proof": io.proof_to_json(res.graph),
        }
        _emit_proof(payload, res.graph, args)
        return EXIT_OK
    if args.zx_command == "prove-equal":
        out = prove_equal(_load_diagram(getattr(args, "from")), _load_diagram(args.to), rules, _zx_cfg(args))
    else:
        out = prove_unitary(_load_diagram(args.gate), rules, _zx_cfg(args))
    _emit_proof(_proof_payload(out), out.graph if isinstance(out, Proof) else None, args)
    return _status(out)


def cmd_bench(args) -> int:
    report = run_bench(
        args.seed,
        n_random=args.instances,
        n_decoy=args.decoys,
        max_expansions=args.max_expansions,
        workers=args.workers,
    )
    _emit(io.dump_json(report), args.out)
    table = format_table(report)
    if args.out is not None:
        _emit(table + "\n", args.out, ".txt")
    sys.stderr.write(table + "\n")
    return EXIT_OK


# -- parser --------------------------------------------------------------------


def _positive(text: str) -> int:
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return n


def _non_negative(text: str) -> int:
    n = int(text)
    if n < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return n


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mwcau", description="Multiway rewriting, causal search and ZX proofs.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, formats=("dot", "graphml", "json"), default="json"):
        sp.add_argument("--out", help="output file (default: stdout)")
        sp.add_argument("--format", choices=formats, default=default)
        sp.add_argument("--workers", type=_positive, default=1)

    def search(sp, depth):
        sp.add_argument("--max-depth", type=_non_negative, default=depth)
        sp.add_argument("--max-expansions", type=_positive, default=20_000)
        sp.add_argument("--strategy", choices=[s.value for s in Strategy], default="causal")

    for name, helptext in (("evolve", "multiway evolution"), ("causal", "multiway evolution with causal edges")):
        sp = sub.add_parser(name, help=helptext)
        sp.add_argument("--rules", required=True, help="rule JSON file or inline JSON")
        sp.add_argument("--init", required=True, help="hypergraph JSON file or inline JSON")
        sp.add_argument("--steps", type=_non_negative, required=True)
        sp.add_argument("--max-states", type=_positive, default=100_000)
        common(sp, default="dot")

    sp = sub.add_parser("prove", help="prove that one hypergraph rewrites to another")
    sp.add_argument("--rules", required=True)
    sp.add_argument("--from", required=True)
    sp.add_argument("--to", required=True)
    sp.add_argument("--lemmas", action="store_true", help="add ranked critical-pair lemmas")
    sp.add_argument("--bidirectional", action="store_true")
    search(sp, 8)
    common(sp, ("dot", "json"))

    zx = sub.add_parser("zx", help="ZX-calculus diagrams")
    zsub = zx.add_subparsers(dest="zx_command", required=True)
    zs = zsub.add_parser("simplify")
    zs.add_argument("diagram", help="built-in gate name or ZX JSON")
    ze = zsub.add_parser("prove-equal")
    ze.add_argument("--from", required=True)
    ze.add_argument("--to", required=True)
    zu = zsub.add_parser("prove-unitary")
    zu.add_argument("gate", help="built-in gate name or ZX JSON")
    for z in (zs, ze, zu):
        z.add_argument("--max-arity", type=_positive, default=4)
        search(z, 12)
        common(z, ("dot", "json"))
    for z in (ze, zu):
        z.set_defaults(strategy="bfs")

    sp = sub.add_parser("bench", help="compare causal and breadth-first search")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--instances", type=_non_negative, default=10, help="random instances")
    sp.add_argument("--decoys", type=_non_negative, default=10, help="decoy-branch instances")
    sp.add_argument("--max-expansions", type=_positive, default=2000)
    sp.add_argument("--out")
    sp.add_argument("--workers", type=_positive, default=1)
    return p


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(
        level=os.environ.get("MWCAU_LOG", "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    args = build_parser().parse_args(argv)
    try:
        if args.command in ("evolve", "causal"):
            return cmd_evolve(args, args.command == "causal")
        if args.command == "prove":
            return cmd_prove(args)
        if args.command == "zx":
            return cmd_zx(args)
        return cmd_bench(args)
    except (io.InputError, SignatureMismatch, ZXError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT
    except ValueError as exc:  # invalid graphs or rules surfaced by the library
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
