"""Command-line front end: ``freeterm gen | analyze | minimize | simulate | check``.

Exit codes: 0 success (or property holds / not applicable), 1 property
fails, 2 input error, 3 size cap exceeded.
"""

from __future__ import annotations

import argparse
import json
import logging
import random
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import algebra, io, minimize, models
from .automaton import build_graph
from .distsim import (
    FtReadyPolicy,
    Network,
    RunSchedule,
    check_cf_correct,
    negative_complement,
    per_tuple_ready_run,
    random_partitioning,
    run,
    run_policy_aware,
    run_with_all_metadata,
)
from .distsim.checks import resolve_universe
from .errors import FreetermError, PropositionViolated, SizeCapExceeded
from .facts import Fact, parse_facts, parse_query
from .ft import all_ft_states, ft_report
from .verdict import PropVerdict

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_CAP = 0, 1, 2, 3

QUERY_HELP = """\
query expressions (prefix forms over facts):
  R(c)  a                        fact is present (bare names are nullary facts)
  (and e ...) (or e ...) (not e)
  (exists R)  exists_R           some fact of relation R
  (exists x e) (forall x e)      quantify over the active domain
  (count-ge K) (count-ge K R)    at least K facts (of relation R)
  (above {a,b} {c})              contains one of the listed sets
  (gt x 10) (lt x y) (eq x c)    comparisons on integers / constants
  (select x e)                   set-valued: all x satisfying e
"""


# --- output helpers --------------------------------------------------------------

def _text(obj, indent: int = 0) -> list[str]:
    pad = "  " * indent
    lines = []
    if isinstance(obj, dict):
        for k, v in obj.items():
            if isinstance(v, dict | list) and v and any(isinstance(x, dict | list) for x in
                                                         (v.values() if isinstance(v, dict) else v)):
                lines.append(f"{pad}{k}:")
                lines += _text(v, indent + 1)
            else:
                lines.append(f"{pad}{k}: {_flat(v)}")
    elif isinstance(obj, list):
        for v in obj:
            if isinstance(v, dict):
                lines.append(f"{pad}-")
                lines += _text(v, indent + 1)
            else:
                lines.append(f"{pad}- {_flat(v)}")
    else:
        lines.append(pad + _flat(obj))
    return lines


def _flat(v) -> str:
    if isinstance(v, list):
        return "[" + ", ".join(_flat(x) for x in v) + "]"
    if isinstance(v, dict):
        return "{" + ", ".join(f"{k}: {_flat(x)}" for k, x in v.items()) + "}"
    return json.dumps(v) if v is None or isinstance(v, bool) else str(v)


def emit(report: dict, fmt: str, out: str | None = None) -> None:
    text = json.dumps(report, sort_keys=True, indent=2) + "\n" if fmt == "json" else "\n".join(_text(report)) + "\n"
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def verdict_dict(v: PropVerdict, name_of=None) -> dict:
    d = v.to_dict()
    if name_of and isinstance(d.get("counterexample"), dict):
        ce = {}
        for k, x in d["counterexample"].items():
            if k == "state" and isinstance(x, int):
                x = name_of(x)
            elif k == "states" and isinstance(x, list):
                x = [name_of(s) if isinstance(s, int) else s for s in x]
            ce[k] = x
        d["counterexample"] = ce
    return d


# --- gen -------------------------------------------------------------------------

def _parse_edges(text: str) -> list[tuple]:
    edges = []
    for part in filter(None, (p.strip() for p in text.split(","))):
        a, sep, b = part.partition("-")
        if not sep:
            raise FreetermError(f"edge {part!r} should look like u-v")
        edges.append((_atom(a), _atom(b)))
    return edges


def _atom(text: str):
    text = text.strip()
    return int(text) if text.lstrip("-").isdigit() else text


def cmd_gen(args) -> int:
    kind = args.kind
    if kind == "fig1":
        kind = "fig1" + args.variant
    universe = parse_facts(args.universe) if args.universe else []
    expr = parse_query(args.query) if args.query else None
    merge = not args.no_merge_labels
    if kind in ("fig1a", "fig1b", "fig1c", "fig1d"):
        automaton, query = models.gen_fig1(kind[-1])
    elif kind == "powerset_union":
        automaton, query = models.gen_powerset_union(universe, query=expr and (lambda s: expr.evaluate(s)))
    elif kind == "grow_only_set":
        automaton, query = models.gen_grow_only_set(universe, with_merge=merge,
                                                    query=expr and (lambda s: expr.evaluate(s)))
    elif kind == "two_phase_set":
        automaton, query = models.gen_two_phase_set(universe, with_merge=args.merge_labels,
                                                    query=expr and (lambda ins, dels: expr.evaluate(ins - dels)))
    elif kind == "g_counter":
        automaton, query = models.gen_g_counter(args.replicas, args.cap, with_merge=merge, threshold=args.threshold)
    elif kind == "pn_counter":
        automaton, query = models.gen_pn_counter(args.replicas, args.cap, with_merge=args.merge_labels,
                                                 threshold=args.threshold)
    elif kind == "tc_fixpoint":
        edges = _parse_edges(args.edges or "")
        automaton, query = models.gen_tc_fixpoint(edges, _atom(args.source) if args.source else None,
                                                  _atom(args.target) if args.target else None, cycle=args.cycle)
    elif kind == "modular_counter":
        automaton, query = models.gen_modular_counter(args.modulus, decrement=args.decrement)
    elif kind == "cyclic_group":
        automaton, query = models.gen_cyclic_group(args.modulus)
    elif kind == "string_count":
        automaton, query = models.gen_string_count(max_len=args.max_len)
    else:
        raise FreetermError(f"unknown model kind {kind!r}")
    text = io.dumps(automaton, query)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        print(f"wrote {automaton.num_states} states, {automaton.num_labels} labels to {args.out}", file=sys.stderr)
    else:
        sys.stdout.write(text)
    return EXIT_OK


# --- analyze ------------------------------------------------------------------------

def analysis_report(automaton, query, bound: int = algebra.QUERY_COMMUTATIVITY_BOUND) -> dict:
    graph = build_graph(automaton)
    verdict = all_ft_states(graph, query)
    name = automaton.state_name
    report = ft_report(graph, query, verdict)
    report["num_states"] = automaton.num_states
    report["num_labels"] = automaton.num_labels
    alg = algebra.algebra_report(graph, query, verdict, bound)
    report["algebra"] = alg.to_dict(name)
    report["antichain"] = report["algebra"]["antichain"]
    report["inverse_curse"] = verdict_dict(algebra.check_inverse_curse(graph, query), name)
    if automaton.start is not None and bool((graph.depths([automaton.start]) >= 0).all()):
        same, reach = algebra.check_commutativity_ft_props(automaton, query, bound)
        report["commutativity"] = {same.name: verdict_dict(same, name), reach.name: verdict_dict(reach, name)}
    else:
        report["commutativity"] = None
    if automaton.meta.get("merge_labels"):
        report["notes"] = ["merge labels range over every state of the truncated space, reachable or not"]
    return report


def cmd_analyze(args) -> int:
    automaton, query = io.load(args.input)
    report = analysis_report(automaton, query, args.bound)
    if args.dot:
        ft = all_ft_states(build_graph(automaton), query).ft_states
        Path(args.dot).write_text(io.to_dot(automaton, query, highlight=ft), encoding="utf-8")
    emit(report, args.format, args.out)
    return EXIT_OK


# --- minimize ------------------------------------------------------------------------

def cmd_minimize(args) -> int:
    automaton, query = io.load(args.input)
    if args.collapse_only:
        small, squery, cmap = minimize.collapse_fixpoint(automaton, query, with_map=True)
        mapping = cmap.to_dict(automaton)
    else:
        small, squery = minimize.minimize_moore(automaton, query)
        mapping = _block_map(automaton, query, small, squery)
    equivalent, seq = minimize.check_equivalence(automaton, query, small, squery)
    io.save(args.out, small, squery)
    side = Path(str(args.out) + ".map.json") if not args.map_out else Path(args.map_out)
    side.write_text(json.dumps(mapping, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    if args.dot:
        ft = all_ft_states(build_graph(small), squery).ft_states
        Path(args.dot).write_text(io.to_dot(small, squery, highlight=ft), encoding="utf-8")
    report = {"states_before": automaton.num_states, "states_after": small.num_states,
              "equivalent": equivalent, "distinguishing_sequence": seq, "map": str(side)}
    emit(report, args.format)
    return EXIT_OK if equivalent else EXIT_FAIL


def _block_map(automaton, query, small, squery) -> dict:
    """Old state -> minimal state, found by walking both machines from their starts."""
    remap = [small.label_id(x) for x in automaton.labels]
    where = {automaton.start: small.start}
    todo = [automaton.start]
    while todo:
        s = todo.pop()
        for lab, t in enumerate(automaton.delta[s].tolist()):
            if t not in where:
                where[t] = int(small.delta[where[s], remap[lab]])
                todo.append(t)
    return {
        "old_to_new": {automaton.state_name(s): small.state_name(t) for s, t in sorted(where.items())},
        "dropped_unreachable": [automaton.state_name(s) for s in range(automaton.num_states) if s not in where],
        "states_before": automaton.num_states,
        "states_after": small.num_states,
    }


# --- check ------------------------------------------------------------------------

def _prop_verdict(prop: str, automaton, query, args) -> PropVerdict:
    graph = build_graph(automaton)
    if prop == "inflationary-monotone-implies-ft":
        if not algebra.is_acyclic(graph):
            return PropVerdict.not_applicable(prop, "no natural order on a cyclic graph")
        return algebra.check_extremal_states_ft(graph, algebra.natural_order(graph), query)
    if prop == "top-in-r-free-terminates":
        if not algebra.is_acyclic(graph):
            return PropVerdict.not_applicable(prop, "no natural order on a cyclic graph")
        return algebra.check_extremal_value_ft(graph, algebra.natural_order(graph), query)
    if prop == "inflationary-threshold-ft":
        if not algebra.is_acyclic(graph):
            return PropVerdict.not_applicable(prop, "no natural order on a cyclic graph")
        order = algebra.natural_order(graph)
        if not all(isinstance(v, bool) for v in query.domain) or not algebra.is_monotone_query(query, order):
            return PropVerdict.not_applicable(prop, "query is not a monotone Boolean (threshold) query")
        if True not in query.domain:
            return PropVerdict.not_applicable(prop, "query is constantly false")
        return algebra.check_threshold_ft(graph, order, algebra.monotone_as_threshold(graph, query))
    if prop == "acyclic-implies-threshold":
        return algebra.check_acyclic_threshold(graph, query)
    if prop == "semilattice-ft-same-value":
        return algebra.semilattice_same_value(graph, query)
    if prop == "fts-reachable":
        return algebra.semilattice_fts_reachable(graph, query)
    if prop == "inverse-curse":
        return algebra.check_inverse_curse(graph, query)
    if prop in ("commutative-same-ft-value", "commutative-always-reachable"):
        same, reach = algebra.check_commutativity_ft_props(automaton, query, args.bound)
        return same if prop == "commutative-same-ft-value" else reach
    if prop == "collapsed-fixpoint":
        return minimize.check_collapsed(automaton, query)
    if prop == "minimal-ft-acyclic":
        return minimize.check_minimal_ft_acyclicity(automaton, query)
    if prop == "equivalent":
        if not args.other:
            raise FreetermError("--prop equivalent needs --other FILE")
        other, oquery = io.load(args.other)
        ok, seq = minimize.check_equivalence(automaton, query, other, oquery)
        return PropVerdict(prop, True, ok, None if ok else {"sequence": seq},
                           "equivalent" if ok else "distinguished by a label sequence")
    raise AssertionError(prop)


PROPS = (
    "inflationary-monotone-implies-ft", "top-in-r-free-terminates", "inflationary-threshold-ft",
    "acyclic-implies-threshold", "semilattice-ft-same-value", "fts-reachable", "inverse-curse",
    "commutative-same-ft-value", "commutative-always-reachable", "collapsed-fixpoint", "minimal-ft-acyclic",
    "equivalent",
)


def cmd_check(args) -> int:
    automaton, query = io.load(args.input)
    try:
        verdict = _prop_verdict(args.prop, automaton, query, args)
    except PropositionViolated as exc:
        verdict = PropVerdict(args.prop, True, False, None, str(exc))
    except SizeCapExceeded:
        raise
    except FreetermError as exc:
        if args.prop == "equivalent":
            raise
        verdict = PropVerdict.not_applicable(args.prop, str(exc))
    emit(verdict_dict(verdict, automaton.state_name), args.format)
    return EXIT_OK if verdict.passed else EXIT_FAIL


# --- simulate -------------------------------------------------------------------------

def _load_json(path: str, what: str):
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise FreetermError(f"cannot read {what} file {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise FreetermError(f"malformed {what} file {path} at line {exc.lineno}: {exc.msg}") from None


def _network(spec: str) -> Network:
    shape, _, size = spec.partition(":")
    if size and shape in ("line", "ring", "complete"):
        return getattr(Network, shape)(int(size))
    return Network.from_json(_load_json(spec, "network"))


def _instance(spec: str) -> list[Fact]:
    if Path(spec).exists():
        doc = _load_json(spec, "instance")
        if not isinstance(doc, list):
            raise FreetermError("instance file must hold a JSON list of facts")
        return [Fact.from_json(x) for x in doc]
    return parse_facts(spec)


def _seed_job(args, network, query, instance, universe, seed):
    schedule = RunSchedule(seed=seed, max_steps=args.max_steps)
    if args.policy:
        policy = "all" if args.policy == "all" else _load_json(args.policy, "policy")
        trace = run_policy_aware(network, query, instance, policy, schedule, universe)
        full = resolve_universe(query, instance, universe)
        expected = sorted(str(f) for f in set(instance) | negative_complement(instance, full))
        row = {"final_is_expected": all(sorted(s) == expected for s in trace.final_states.values())}
    elif args.all_metadata:
        trace = run_with_all_metadata(network, query, instance, schedule, universe)
        row = {"all_injected_at": trace.first_event("coordinator"), "first_ready": trace.first_event("ready")}
    elif not query.boolean:
        trace, verdicts = per_tuple_ready_run(network, query, instance, universe, schedule=schedule)
        row = {"tuples": [v.to_dict() for v in verdicts]}
    else:
        policy = FtReadyPolicy(query, resolve_universe(query, instance, universe))
        parts = random_partitioning(network, instance, random.Random(seed))
        trace = run(network, parts, policy, schedule, instance)
        row = {}
    row.update({"seed": seed, "all_ready": trace.all_ready(), "any_ready": trace.any_ready(),
                "quiescence_step": trace.quiescence_step, "coordination": trace.coordination,
                "outputs": trace.to_dict()["outputs"]})
    return row, trace


def cmd_simulate(args) -> int:
    network = _network(args.network)
    instance = _instance(args.instance)
    query = parse_query(args.query)
    universe = parse_facts(args.universe) if args.universe else None
    seeds = [args.seed + i for i in range(args.seeds)]
    job = lambda s: _seed_job(args, network, query, instance, universe, s)  # noqa: E731
    if args.parallel_seeds > 1:
        with ThreadPoolExecutor(max_workers=args.parallel_seeds) as pool:
            results = list(pool.map(job, seeds))
    else:
        results = [job(s) for s in seeds]
    report = {"query": args.query, "instance": [str(f) for f in instance], "nodes": network.num_nodes,
              "runs": [r for r, _ in results]}
    status = EXIT_OK
    if query.boolean and not args.policy and not args.all_metadata:
        verdict = check_cf_correct(network, query, instance, universe, trials=0)
        report["predicted_ft"] = verdict.predicted_ft
        report["expected_value"] = verdict.to_dict()["value"]
        agree = [(r["all_ready"] if verdict.predicted_ft else not r["any_ready"]) for r, _ in results]
        report["agree"] = all(agree)
        status = EXIT_OK if all(agree) else EXIT_FAIL
    if args.trace_out:
        with open(args.trace_out, "w", encoding="utf-8") as fh:
            for _, trace in results:
                fh.write(trace.to_json() + "\n")
    emit(report, args.format, args.out)
    return status


# --- entry point -----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="freeterm", description="Free termination analysis of semiautomata.",
                                     epilog=QUERY_HELP, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("-v", "--verbose", action="store_true", help="log warnings and progress")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--format", choices=("json", "text"), default="json")
        p.add_argument("--seed", type=int, default=0, help="seed for every random choice")

    g = sub.add_parser("gen", help="generate a model automaton", epilog=QUERY_HELP,
                       formatter_class=argparse.RawDescriptionHelpFormatter)
    g.add_argument("kind", choices=("fig1",) + models.KINDS + ("modular_counter", "cyclic_group", "string_count"))
    g.add_argument("--variant", choices=tuple("abcd"), default="a")
    g.add_argument("--universe", help="comma-separated atoms, e.g. 'a,b,c' or 'R(a),S(c)'")
    g.add_argument("--query", help="query expression over the (visible) set")
    g.add_argument("--replicas", type=int, default=2)
    g.add_argument("--cap", type=int, default=3)
    g.add_argument("--threshold", type=int)
    g.add_argument("--no-merge-labels", action="store_true")
    g.add_argument("--merge-labels", action="store_true", help="add merge labels where they are off by default")
    g.add_argument("--edges", help="edge list for tc_fixpoint, e.g. '1-2,2-3'")
    g.add_argument("--source")
    g.add_argument("--target")
    g.add_argument("--cycle", action="store_true")
    g.add_argument("--modulus", type=int, default=6)
    g.add_argument("--decrement", action="store_true")
    g.add_argument("--max-len", type=int, default=3)
    g.add_argument("--out")
    common(g)
    g.set_defaults(func=cmd_gen)

    a = sub.add_parser("analyze", help="FT states, category, algebraic flags")
    a.add_argument("input")
    a.add_argument("--dot")
    a.add_argument("--out")
    a.add_argument("--bound", type=int, default=algebra.QUERY_COMMUTATIVITY_BOUND,
                   help="sequence length bound for query commutativity")
    common(a)
    a.set_defaults(func=cmd_analyze)

    m = sub.add_parser("minimize", help="minimize or collapse, keeping query behaviour")
    m.add_argument("input")
    m.add_argument("--out", required=True)
    m.add_argument("--map-out", help="sidecar state map (default: OUT.map.json)")
    m.add_argument("--collapse-only", action="store_true")
    m.add_argument("--dot")
    common(m)
    m.set_defaults(func=cmd_minimize)

    s = sub.add_parser("simulate", help="seeded flooding runs", epilog=QUERY_HELP,
                       formatter_class=argparse.RawDescriptionHelpFormatter)
    s.add_argument("--network", required=True, help="network JSON file, or line:N / ring:N / complete:N")
    s.add_argument("--instance", required=True, help="instance JSON file, or inline facts 'R(1),S(2)'")
    s.add_argument("--query", required=True, help="query expression or name such as exists_R")
    s.add_argument("--seeds", type=int, default=10)
    s.add_argument("--max-steps", type=int, default=200)
    s.add_argument("--universe", help="explicit fact universe for the bounded analysis")
    s.add_argument("--all-metadata", action="store_true")
    s.add_argument("--policy", help="distribution policy JSON file, or 'all'")
    s.add_argument("--parallel-seeds", type=int, default=1, metavar="K")
    s.add_argument("--trace-out", help="write one JSON trace per line")
    s.add_argument("--out")
    common(s)
    s.set_defaults(func=cmd_simulate)

    c = sub.add_parser("check", help="check one property; exit 0 when it holds or does not apply")
    c.add_argument("input")
    c.add_argument("--prop", required=True, choices=PROPS)
    c.add_argument("--other", help="second automaton for --prop equivalent")
    c.add_argument("--bound", type=int, default=algebra.QUERY_COMMUTATIVITY_BOUND)
    common(c)
    c.set_defaults(func=cmd_check)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR, format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except SizeCapExceeded as exc:
        print(f"size cap exceeded: {exc}", file=sys.stderr)
        return EXIT_CAP
    except FreetermError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except PropositionViolated as exc:
        print(f"property violated: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
