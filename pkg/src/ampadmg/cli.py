"""Command-line front end: one binary, one subcommand per operation.

Exit codes: 0 for success or an affirmative answer, 1 for a negative
answer (connected, rule not applicable, verification failures, no
feasible model), 2 for usage or input errors, 3 for internal failures.
Identical inputs and seeds produce identical output bytes.
"""

from __future__ import annotations

import argparse
import json
import sys
import traceback
from itertools import combinations
from pathlib import Path
from typing import Iterable, Iterator, Sequence

from .docalc import check_derivation, intervene, parse_derivation, rule_applicable
from .errors import AmpAdmgError, NoFeasibleModelError, ParseError
from .graph import Dialect, MixedGraph, parse, serialize
from .learner import (MAX_NODES_DEFAULT, atom_line, export_asp, learn,
                      parse_constraints, problem_with)
from .markov import (CiStatement, OrderedContext, amp_statements,
                     gaussian_oracle, ordered_local_statements,
                     ordered_pairwise_statements, separation_oracle,
                     verify_statements)
from .sem import CI_TOL, ci_test, implied_covariance, magnify, random_sem
from .separation import SeparationQuery, separated


def _load_graph(path: str) -> MixedGraph:
    return parse(Path(path).read_text())


def _resolve(g: MixedGraph, token: str) -> int:
    tok = token.strip()
    if tok.lstrip("-").isdigit():
        v = int(tok)
        if not 1 <= v <= g.n:
            raise ParseError(f"node {v} out of range 1..{g.n}")
        return v
    if g.node_names and tok in g.node_names:
        return g.node_names.index(tok) + 1
    raise ParseError(f"unknown node {tok!r}")


def _node_set(g: MixedGraph, raw: str | None) -> frozenset:
    """Comma-separated indices or labels; missing or empty means the empty set."""
    if raw is None:
        return frozenset()
    return frozenset(_resolve(g, tok) for tok in raw.split(",") if tok.strip())


def _names(g: MixedGraph, nodes: Iterable[int]) -> str:
    return ",".join(g.node_label(v) for v in sorted(nodes))


def _fmt_stmt(g: MixedGraph, s: CiStatement) -> str:
    body = f"{{{_names(g, s.x)}}} _||_ {{{_names(g, s.y)}}} | {{{_names(g, s.z)}}}"
    if s.regime:
        body += f" regime={g.node_label(s.regime)}"
    return body


def _all_queries(n: int) -> Iterator[tuple[int, int, frozenset]]:
    """Every disjoint singleton pair with every conditioning set."""
    for x, y in combinations(range(1, n + 1), 2):
        rest = [v for v in range(1, n + 1) if v != x and v != y]
        for pick in range(1 << len(rest)):
            yield x, y, frozenset(rest[i] for i in range(len(rest)) if pick >> i & 1)


# -- subcommands -----------------------------------------------------------


def _cmd_sep(args: argparse.Namespace) -> int:
    g = _load_graph(args.graph)
    q = SeparationQuery(_node_set(g, args.x), _node_set(g, args.y),
                        _node_set(g, args.z))
    verdict = separated(g, q, criterion=args.criterion)
    if args.format == "json":
        print(json.dumps({"criterion": args.criterion, "separated": verdict}))
    else:
        print("separated" if verdict else "connected")
    return 0 if verdict else 1


def _cmd_equiv_check(args: argparse.Namespace) -> int:
    g = _load_graph(args.graph)
    checked = 0
    for x, y, z in _all_queries(g.n):
        q = SeparationQuery({x}, {y}, z)
        verdicts = [separated(g, q, criterion=c) for c in (1, 2, 3, 4)]
        checked += 1
        if len(set(verdicts)) != 1:
            detail = " ".join(
                f"{c}:{'separated' if v else 'connected'}"
                for c, v in zip((1, 2, 3, 4), verdicts))
            print(f"disagreement: x={_names(g, [x])} y={_names(g, [y])} "
                  f"z={{{_names(g, z)}}}  {detail}")
            return 3
    print(f"{checked} queries, criteria 1-4 agree")
    return 0


def _cmd_magnify(args: argparse.Namespace) -> int:
    sys.stdout.write(serialize(magnify(_load_graph(args.graph))))
    return 0


def _cmd_intervene(args: argparse.Namespace) -> int:
    g = _load_graph(args.graph)
    sys.stdout.write(serialize(intervene(g, _node_set(g, args.x))))
    return 0


def _fmt_step(g: MixedGraph, rule: int, x, y, z, w) -> str:
    return (f"rule {rule} x={_names(g, x)} y={_names(g, y)} "
            f"z={_names(g, z)} w={_names(g, w)}")


def _cmd_rule(args: argparse.Namespace) -> int:
    g = _load_graph(args.graph)
    if args.script:
        steps = parse_derivation(Path(args.script).read_text(), g)
        report = check_derivation(g, steps)
        # Each output line stays parseable as a script line; the verdict
        # rides in a comment.
        for s, good in zip(steps, report.results):
            tag = "applicable" if good else "NOT applicable"
            print(f"{_fmt_step(g, s.rule, s.x, s.y, s.z, s.w)}  # {tag}")
        return 0 if report.ok else 1
    if not args.y:
        raise ParseError("--y is required with --rule")
    ok = rule_applicable(g, args.rule, _node_set(g, args.x), _node_set(g, args.y),
                         _node_set(g, args.z), _node_set(g, args.w))
    print("applicable" if ok else "not applicable")
    return 0 if ok else 1


_FLAVOUR_OF = {"amp-block": "block-recursive", "amp-local": "local",
               "amp-pairwise": "pairwise"}


def _statements_for(g: MixedGraph, prop: str) -> tuple[CiStatement, ...]:
    if prop == "ordered-local":
        return ordered_local_statements(OrderedContext(g, g.consistent_ordering()))
    if prop == "ordered-pairwise":
        return ordered_pairwise_statements(OrderedContext(g, g.consistent_ordering()))
    return amp_statements(g, _FLAVOUR_OF[prop])


def _cmd_markov_verify(args: argparse.Namespace) -> int:
    g = _load_graph(args.graph)
    stmts = _statements_for(g, args.property)
    if args.oracle == "graph":
        oracle = separation_oracle(g, criterion=args.criterion)
    else:
        sigma = implied_covariance(random_sem(g, seed=args.seed))
        oracle = gaussian_oracle(sigma, tol=args.tol)
    failing = verify_statements(stmts, oracle)
    print(f"{args.property}: {len(stmts)} statements, {len(failing)} failures")
    for s in failing:
        print(f"FAIL {_fmt_stmt(g, s)}")
    return 0 if not failing else 1


def _cmd_sem_check(args: argparse.Namespace) -> int:
    g = _load_graph(args.graph)
    sigma = implied_covariance(random_sem(g, seed=args.seed))
    seps = violations = 0
    for x, y, z in _all_queries(g.n):
        if not separated(g, SeparationQuery({x}, {y}, z), criterion=args.criterion):
            continue
        seps += 1
        if not ci_test(sigma, x, y, z, tol=args.tol):
            violations += 1
            print(f"VIOLATION {_fmt_stmt(g, CiStatement({x}, {y}, z))}")
    print(f"seed {args.seed}, tol {args.tol:g}: "
          f"{seps} separations checked, {violations} violations")
    return 0 if violations == 0 else 1


_DIALECTS = {"alt": (Dialect.ALTERNATIVE,), "orig": (Dialect.ORIGINAL,),
             "both": (Dialect.ALTERNATIVE, Dialect.ORIGINAL)}


def _load_problem(args: argparse.Namespace):
    p = parse_constraints(Path(args.constraints).read_text())
    return problem_with(p, dialects=_DIALECTS[args.dialect],
                        line_penalty=args.line_penalty,
                        arrow_penalty=args.arrow_penalty,
                        biarrow_penalty=args.biarrow_penalty)


def _cmd_learn(args: argparse.Namespace) -> int:
    p = _load_problem(args)
    try:
        result = learn(p, max_n=args.max_n)
    except NoFeasibleModelError:
        print("no feasible model")
        return 1
    if args.format == "json":
        print(json.dumps({"optimal_score": result.optimal_score,
                          "models": [atom_line(m) for m in result.models]}))
    else:
        print(f"optimal score: {result.optimal_score}")
        for m in result.models:
            print(atom_line(m))
    return 0


def _cmd_export_asp(args: argparse.Namespace) -> int:
    sys.stdout.write(export_asp(_load_problem(args)))
    return 0


# -- parser ----------------------------------------------------------------


def _add_learn_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--constraints", required=True, metavar="FILE",
                   help="constraint file (nodes/dep/indep/order/forbid/require)")
    p.add_argument("--dialect", choices=sorted(_DIALECTS), default="alt")
    p.add_argument("--line-penalty", type=int, default=1, metavar="K")
    p.add_argument("--arrow-penalty", type=int, default=1, metavar="K")
    p.add_argument("--biarrow-penalty", type=int, default=1, metavar="K")


def _build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="ampadmg",
        description="Mixed-graph separation, Markov statements, Gaussian "
                    "models, interventions and exact structure learning.")
    sub = top.add_subparsers(dest="command", required=True, metavar="command")

    def command(name: str, func, help_: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_, description=help_)
        p.set_defaults(func=func)
        return p

    def graph_command(name: str, func, help_: str) -> argparse.ArgumentParser:
        p = command(name, func, help_)
        p.add_argument("--graph", required=True, metavar="FILE",
                       help="graph file (nodes/arrow/line/biarrow)")
        return p

    p = graph_command("sep", _cmd_sep, "decide whether x and y are separated given z")
    p.add_argument("--criterion", type=int, choices=(1, 2, 3, 4), default=2)
    p.add_argument("--x", required=True, metavar="NODES",
                   help="comma-separated indices or labels")
    p.add_argument("--y", required=True, metavar="NODES")
    p.add_argument("--z", metavar="NODES")
    p.add_argument("--format", choices=("text", "json"), default="text")

    graph_command("equiv-check", _cmd_equiv_check,
                  "run all four criteria on every singleton query of a graph")

    graph_command("magnify", _cmd_magnify,
                  "print the graph with explicit noise nodes")

    p = graph_command("intervene", _cmd_intervene,
                      "print the graph after cutting the nodes in x")
    p.add_argument("--x", required=True, metavar="NODES")

    p = graph_command("rule", _cmd_rule,
                      "check rule premises, one step or a whole script")
    mode = p.add_mutually_exclusive_group(required=True)
    mode.add_argument("--rule", type=int, choices=(1, 2, 3))
    mode.add_argument("--script", metavar="FILE")
    p.add_argument("--x", metavar="NODES")
    p.add_argument("--y", metavar="NODES")
    p.add_argument("--z", metavar="NODES")
    p.add_argument("--w", metavar="NODES")

    p = graph_command("markov-verify", _cmd_markov_verify,
                      "generate Markov statements and verify them against an oracle")
    p.add_argument("--property", required=True,
                   choices=("ordered-local", "ordered-pairwise",
                            "amp-block", "amp-local", "amp-pairwise"))
    p.add_argument("--oracle", choices=("graph", "gaussian"), default="graph")
    p.add_argument("--criterion", type=int, choices=(1, 2, 3, 4), default=2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=CI_TOL)

    p = graph_command("sem-check", _cmd_sem_check,
                      "check separations against a random Gaussian model's "
                      "partial correlations")
    p.add_argument("--criterion", type=int, choices=(1, 2, 3, 4), default=2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=CI_TOL)

    p = command("learn", _cmd_learn,
                "list all penalty-minimal graphs satisfying weighted constraints")
    _add_learn_flags(p)
    p.add_argument("--max-n", type=int, default=MAX_NODES_DEFAULT)
    p.add_argument("--format", choices=("text", "json"), default="text")

    p = command("export-asp", _cmd_export_asp,
                "print the equivalent answer-set program for a learning problem")
    _add_learn_flags(p)

    return top


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (None, 0) else 2
    try:
        return args.func(args)
    except (AmpAdmgError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception:
        traceback.print_exc()
        return 3


def run() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    run()
