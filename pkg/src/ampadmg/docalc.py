"""Interventions and the three do-calculus rules for mixed graphs.

Intervening on a set x cuts every arrow into x.  In the alternative
dialect the lines at x are removed as well, but any two outside nodes that
were joined by a line path running entirely through x are first joined
directly, so the dependence carried by that path survives.  In the
original dialect the biarrows touching x are simply removed.

Rule premises are checked graphically: the graph is augmented with one
regime indicator per node of the rule's z (an arrow from the indicator
into its node), the intervention is applied, and the premise becomes a
walk-separation query.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

from .errors import MalformedScriptError, OverlappingSetsError
from .graph import MixedGraph, _bits
from .separation import SeparationQuery, connects_route


def intervene(g: MixedGraph, x: Iterable[int]) -> MixedGraph:
    """The graph after forcing the nodes in x from outside."""
    xm = g.node_mask(x)

    def outside(a, b):
        return not (xm >> (a - 1)) & 1 and not (xm >> (b - 1)) & 1

    arrows = frozenset((t, h) for t, h in g.arrows if not (xm >> (h - 1)) & 1)
    if g.biarrows:
        return MixedGraph(g.n, arrows,
                          biarrows=frozenset(e for e in g.biarrows if outside(*e)),
                          node_names=g.node_names)

    lines = {e for e in g.lines if outside(*e)}
    # Bridge line paths through x: for every line-connected block inside x,
    # join all outside nodes on its border pairwise.
    ne = g._adj[2]
    left = xm
    while left:
        seed = left & -left
        comp = seed
        frontier = seed
        border = 0
        while frontier:
            step = 0
            for v in _bits(frontier):
                step |= ne[v]
            border |= step & ~xm
            frontier = step & xm & ~comp
            comp |= frontier
        left &= ~comp
        outside_nodes = list(_bits(border))
        for i, a in enumerate(outside_nodes):
            for b in outside_nodes[i + 1:]:
                lines.add((a, b))
    return MixedGraph(g.n, arrows, frozenset(lines), node_names=g.node_names)


@dataclass(frozen=True)
class RegimeGraph:
    """A graph augmented with regime indicator nodes.

    ``regime_nodes`` pairs each augmented variable with its indicator;
    indicators occupy indices above the base graph's n.
    """

    graph: MixedGraph
    regime_nodes: tuple

    @cached_property
    def _f_of(self) -> dict:
        return dict(self.regime_nodes)

    def indicator(self, v: int) -> int:
        return self._f_of[v]

    @property
    def indicators(self) -> frozenset[int]:
        return frozenset(f for _v, f in self.regime_nodes)


def with_regime_nodes(g: MixedGraph, targets: Iterable[int]) -> RegimeGraph:
    """Add one indicator node per target, each pointing into its target."""
    targets = sorted(set(targets))
    g.node_mask(targets)  # range check
    n = g.n
    pairs = tuple((v, n + k + 1) for k, v in enumerate(targets))
    names = None
    if g.node_names:
        names = g.node_names + tuple(f"F_{g.node_names[v - 1]}" for v in targets)
    big = MixedGraph(n + len(targets),
                     frozenset(g.arrows) | {(f, v) for v, f in pairs},
                     g.lines, g.biarrows, names)
    return RegimeGraph(big, pairs)


def _disjoint(*sets):
    seen = set()
    for s in sets:
        for i in s:
            if i in seen:
                raise OverlappingSetsError(f"node {i} appears in two argument sets")
            seen.add(i)


def rule_applicable(g: MixedGraph, rule: int, x: Iterable[int], y: Iterable[int],
                    z: Iterable[int], w: Iterable[int]) -> bool:
    """Check the premise of do-calculus rule 1, 2 or 3.

    Rule 1 licenses dropping z from the conditioning set of
    ``p(y | do(x), z, w)``; rule 2 exchanges conditioning on z with
    intervening on it; rule 3 removes an intervention on z entirely.
    """
    if rule not in (1, 2, 3):
        raise ValueError(f"rule must be 1, 2 or 3, got {rule!r}")
    x, y, z, w = (frozenset(int(i) for i in s) for s in (x, y, z, w))
    if not y:
        raise ValueError("y must be non-empty")
    _disjoint(x, y, z, w)
    for s in (x, y, z, w):
        g.node_mask(s)  # range check
    if not z:
        return True  # empty z: the rewrite is the identity
    if rule == 1:
        return not connects_route(intervene(g, x), SeparationQuery(y, z, x | w))
    rg = with_regime_nodes(g, z)
    cut = intervene(rg.graph, x)
    cond = x | w | z if rule == 2 else x | w
    return not connects_route(cut, SeparationQuery(y, rg.indicators, cond))


@dataclass(frozen=True)
class RuleApplication:
    """One scripted do-calculus step."""

    rule: int
    x: frozenset
    y: frozenset
    z: frozenset
    w: frozenset


@dataclass(frozen=True)
class DerivationReport:
    """Outcome of replaying a derivation script."""

    results: tuple

    @property
    def ok(self) -> bool:
        return all(self.results)

    @property
    def first_failure(self):
        for i, good in enumerate(self.results):
            if not good:
                return i
        return None


_STEP_RE = re.compile(
    r"^rule\s+(?P<rule>\d+)\s+x=(?P<x>\S*)\s+y=(?P<y>\S*)\s+z=(?P<z>\S*)\s+w=(?P<w>\S*)$")


def parse_derivation(text: str, g: MixedGraph | None = None) -> tuple[RuleApplication, ...]:
    """Parse a derivation script: one ``rule <k> x=.. y=.. z=.. w=..`` per
    line, sets comma-separated (indices, or labels when the graph has them),
    empty allowed.  ``#`` starts a comment."""
    label_index = {}
    if g is not None and g.node_names:
        label_index = {s: i + 1 for i, s in enumerate(g.node_names)}

    def parse_set(raw: str, line_no: int) -> frozenset:
        if not raw:
            return frozenset()
        out = set()
        for tok in raw.split(","):
            if tok.lstrip("-").isdigit():
                out.add(int(tok))
            elif tok in label_index:
                out.add(label_index[tok])
            else:
                raise MalformedScriptError(f"line {line_no}: unknown node {tok!r}")
        return frozenset(out)

    steps = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _STEP_RE.match(line)
        if not m:
            raise MalformedScriptError(f"line {line_no}: expected "
                                       f"'rule <k> x=<set> y=<set> z=<set> w=<set>'")
        rule = int(m.group("rule"))
        if rule not in (1, 2, 3):
            raise MalformedScriptError(f"line {line_no}: rule must be 1, 2 or 3")
        steps.append(RuleApplication(
            rule,
            parse_set(m.group("x"), line_no),
            parse_set(m.group("y"), line_no),
            parse_set(m.group("z"), line_no),
            parse_set(m.group("w"), line_no),
        ))
    return tuple(steps)


def check_derivation(g: MixedGraph, steps: Sequence[RuleApplication]) -> DerivationReport:
    """Replay scripted rule applications against the graph."""
    results = tuple(
        rule_applicable(g, s.rule, s.x, s.y, s.z, s.w) for s in steps)
    return DerivationReport(results)
