"""Exact structure learning from weighted (in)dependence constraints.

Every candidate graph of the requested dialect(s) is enumerated and scored:
a violated hard dependence makes the candidate infeasible, a violated
independence adds its weight, and every edge adds a penalty.  The learner
returns all penalty-minimising graphs.  Constraints may name a regime
node, in which case they are checked in the graph obtained by intervening
on that node.

The same problem can be exported as a logic program whose answer sets are
the optimal graphs, for use with an ASP solver.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from itertools import product
from typing import Iterator

from .docalc import intervene
from .errors import (
    NodeOutOfRangeError,
    NoFeasibleModelError,
    ParseError,
    ProblemTooLargeError,
)
from .graph import Dialect, MixedGraph, set_index
from .separation import _route_connected

EDGE_KINDS = ("arrow", "line", "biarrow")

MAX_NODES_DEFAULT = 5


@dataclass(frozen=True)
class Constraint:
    """A weighted (in)dependence between two nodes.

    ``regime`` 0 is observational; a positive regime means the statement
    was observed under an intervention on that node.
    """

    kind: str  # "dep" or "indep"
    x: int
    y: int
    cond: frozenset = frozenset()
    regime: int = 0
    weight: int = 1

    def __post_init__(self):
        if self.kind not in ("dep", "indep"):
            raise ValueError(f"kind must be 'dep' or 'indep', got {self.kind!r}")
        object.__setattr__(self, "x", int(self.x))
        object.__setattr__(self, "y", int(self.y))
        object.__setattr__(self, "cond", frozenset(int(i) for i in self.cond))
        object.__setattr__(self, "regime", int(self.regime))
        if self.x == self.y:
            raise ValueError("constraint endpoints must differ")
        if self.x in self.cond or self.y in self.cond:
            raise ValueError("conditioning set must not contain an endpoint")
        # The regime node may coincide with an endpoint: "is y still tied to
        # the node we forced?" is a meaningful, and common, constraint.
        if not isinstance(self.weight, int) or self.weight < 0:
            raise ValueError("weight must be a non-negative integer")


@dataclass(frozen=True)
class LearnProblem:
    """Constraints plus search space description.

    ``forbidden`` and ``required`` hold ``(kind, a, b)`` edge priors;
    arrows are directional, lines and biarrows unordered.  ``ordering``,
    when given, forbids every arrow from a later to an earlier node.
    """

    n: int
    constraints: tuple = ()
    dialects: tuple = (Dialect.ALTERNATIVE,)
    line_penalty: int = 1
    arrow_penalty: int = 1
    biarrow_penalty: int = 1
    forbidden: frozenset = frozenset()
    required: frozenset = frozenset()
    ordering: tuple | None = None

    def __post_init__(self):
        object.__setattr__(self, "constraints", tuple(self.constraints))
        object.__setattr__(self, "dialects", tuple(self.dialects))
        if not self.dialects or any(not isinstance(d, Dialect) for d in self.dialects):
            raise ValueError("dialects must be a non-empty tuple of Dialect")
        for p in (self.line_penalty, self.arrow_penalty, self.biarrow_penalty):
            if not isinstance(p, int) or p < 0:
                raise ValueError("edge penalties must be non-negative integers")
        for c in self.constraints:
            for i in (c.x, c.y, *c.cond):
                self._check_node(i)
            if c.regime and not 1 <= c.regime <= self.n:
                raise NodeOutOfRangeError(f"regime {c.regime} out of range")
        norm = frozenset(self._norm_prior(p) for p in self.forbidden)
        object.__setattr__(self, "forbidden", norm)
        normr = frozenset(self._norm_prior(p) for p in self.required)
        object.__setattr__(self, "required", normr)
        clash = norm & normr
        if clash:
            raise ValueError(f"edge both forbidden and required: {sorted(clash)[0]}")
        if self.ordering is not None:
            order = tuple(int(i) for i in self.ordering)
            if sorted(order) != list(range(1, self.n + 1)):
                raise ValueError("ordering must list each node exactly once")
            object.__setattr__(self, "ordering", order)

    def _check_node(self, i):
        if not isinstance(i, int) or not 1 <= i <= self.n:
            raise NodeOutOfRangeError(f"node {i!r} out of range 1..{self.n}")

    def _norm_prior(self, prior):
        kind, a, b = prior
        if kind not in EDGE_KINDS:
            raise ValueError(f"unknown edge kind {kind!r}")
        a, b = int(a), int(b)
        self._check_node(a)
        self._check_node(b)
        if a == b:
            raise ValueError("prior edge endpoints must differ")
        if kind != "arrow" and a > b:
            a, b = b, a
        return (kind, a, b)


@dataclass(frozen=True)
class LearnResult:
    optimal_score: int
    models: tuple


def regime_graph(g: MixedGraph, i: int) -> MixedGraph:
    """The graph in which constraints of regime i are evaluated."""
    return intervene(g, [i])


def score(g: MixedGraph, p: LearnProblem) -> int | None:
    """Edge penalties plus violated independence weights, or None when a
    hard dependence fails."""
    seen: dict[int, MixedGraph] = {0: g}

    def graph_for(regime: int) -> MixedGraph:
        gr = seen.get(regime)
        if gr is None:
            gr = seen[regime] = regime_graph(g, regime)
        return gr

    for c in p.constraints:
        if c.kind == "dep":
            gr = graph_for(c.regime)
            if not _route_connected(gr._adj, gr.node_mask([c.x]),
                                    gr.node_mask([c.y]), gr.node_mask(c.cond)):
                return None
    total = (len(g.lines) * p.line_penalty
             + len(g.arrows) * p.arrow_penalty
             + len(g.biarrows) * p.biarrow_penalty)
    for c in p.constraints:
        if c.kind == "indep":
            gr = graph_for(c.regime)
            if _route_connected(gr._adj, gr.node_mask([c.x]),
                                gr.node_mask([c.y]), gr.node_mask(c.cond)):
                total += c.weight
    return total


def _pair_states(p: LearnProblem, dialect: Dialect, i: int, j: int):
    # Allowed (undirected?, arrow) states for the pair i < j under the priors.
    und_kind = "line" if dialect is Dialect.ALTERNATIVE else "biarrow"
    other_kind = "biarrow" if dialect is Dialect.ALTERNATIVE else "line"
    if (other_kind, i, j) in p.required:
        return []  # the required edge kind does not exist in this dialect
    und_options = [False, True]
    if (und_kind, i, j) in p.forbidden:
        und_options = [False]
    if (und_kind, i, j) in p.required:
        und_options = [True]
    arrow_options = [0, 1, -1]  # none, i -> j, j -> i
    if p.ordering is not None:
        pos = {v: k for k, v in enumerate(p.ordering)}
        arrow_options = [a for a in arrow_options
                         if a == 0 or (a == 1) == (pos[i] < pos[j])]
    if ("arrow", i, j) in p.forbidden:
        arrow_options = [a for a in arrow_options if a != 1]
    if ("arrow", j, i) in p.forbidden:
        arrow_options = [a for a in arrow_options if a != -1]
    if ("arrow", i, j) in p.required:
        arrow_options = [a for a in arrow_options if a == 1]
    if ("arrow", j, i) in p.required:
        arrow_options = [a for a in arrow_options if a == -1]
    return [(u, a) for u in und_options for a in arrow_options]


def _acyclic(n: int, arrows) -> bool:
    ch = [0] * (n + 1)
    for t, h in arrows:
        ch[t] |= 1 << (h - 1)
    placed = 0
    full = (1 << n) - 1
    while placed != full:
        progress = False
        for v in range(1, n + 1):
            bit = 1 << (v - 1)
            if placed & bit:
                continue
            blocked = False
            for t in range(1, n + 1):
                if ch[t] & bit and not placed & (1 << (t - 1)):
                    blocked = True
                    break
            if not blocked:
                placed |= bit
                progress = True
        if not progress:
            return False
    return True


def enumerate_graphs(n: int, dialect: Dialect,
                     p: LearnProblem | None = None) -> Iterator[MixedGraph]:
    """Every valid graph of the dialect over n nodes, priors respected.

    Deterministic order: pairs scan in lexicographic order and pair states
    in a fixed sequence, so repeated runs enumerate identically.
    """
    if p is None:
        p = LearnProblem(n)
    pairs = [(i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1)]
    state_lists = [_pair_states(p, dialect, i, j) for i, j in pairs]
    if any(not states for states in state_lists):
        return
    und_field = "lines" if dialect is Dialect.ALTERNATIVE else "biarrows"
    for combo in product(*state_lists):
        arrows = []
        und = []
        for (i, j), (u, a) in zip(pairs, combo):
            if u:
                und.append((i, j))
            if a == 1:
                arrows.append((i, j))
            elif a == -1:
                arrows.append((j, i))
        if not _acyclic(n, arrows):
            continue
        yield MixedGraph(n, frozenset(arrows), **{und_field: frozenset(und)})


def atom_line(g: MixedGraph) -> str:
    """One-line rendering of a graph as solver-style atoms: lines, then
    biarrows, then arrows, each sorted."""
    atoms = [f"line({a},{b})" for a, b in sorted(g.lines)]
    atoms += [f"biarrow({a},{b})" for a, b in sorted(g.biarrows)]
    atoms += [f"arrow({t},{h})" for t, h in sorted(g.arrows)]
    return " ".join(atoms)


def parse_atom_line(text: str, n: int) -> MixedGraph:
    """Inverse of :func:`atom_line` for graphs over n nodes."""
    arrows, lines, biarrows = set(), set(), set()
    for tok in text.split():
        m = _ATOM_RE.match(tok)
        if not m:
            raise ParseError(f"unrecognised atom {tok!r}")
        kind, a, b = m.group(1), int(m.group(2)), int(m.group(3))
        {"arrow": arrows, "line": lines, "biarrow": biarrows}[kind].add((a, b))
    return MixedGraph(n, frozenset(arrows), frozenset(lines), frozenset(biarrows))


_ATOM_RE = re.compile(r"^(arrow|line|biarrow)\((\d+),(\d+)\)$")


def learn(p: LearnProblem, max_n: int = MAX_NODES_DEFAULT) -> LearnResult:
    """Exhaustive search for all penalty-minimising graphs.

    Models found in several dialects are reported once; the result list is
    sorted by the atom-line rendering.
    """
    if p.n > max_n:
        raise ProblemTooLargeError(
            f"n={p.n} exceeds the exhaustive-search cap of {max_n}")
    best: int | None = None
    models: dict[MixedGraph, None] = {}
    for dialect in p.dialects:
        for g in enumerate_graphs(p.n, dialect, p):
            s = score(g, p)
            if s is None:
                continue
            if best is None or s < best:
                best = s
                models = {g: None}
            elif s == best:
                models[g] = None
    if best is None:
        raise NoFeasibleModelError("every candidate graph violates a dependence")
    ordered = sorted(models, key=atom_line)
    return LearnResult(best, tuple(ordered))


# -- constraint file format ---------------------------------------------------


def parse_constraints(text: str) -> LearnProblem:
    """Parse the constraint file format.

    ``nodes <n>`` first, then any of::

        dep <x> <y> {<comma-set or empty>} <regime> <weight>
        indep <x> <y> {<comma-set or empty>} <regime> <weight>
        order <i> <j> ...
        forbid <kind> <i> <j>
        require <kind> <i> <j>

    Weights are integers; fractional weights are rejected.
    """
    n = None
    constraints = []
    ordering = None
    forbidden = set()
    required = set()

    def want_int(tok, line_no, what):
        if not tok.lstrip("-").isdigit():
            raise ParseError(f"{what} must be an integer, got {tok!r}", line_no)
        return int(tok)

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        kw = tokens[0]
        if kw == "nodes":
            if n is not None:
                raise ParseError("duplicate nodes line", line_no)
            if len(tokens) != 2:
                raise ParseError("nodes line needs a count", line_no)
            n = want_int(tokens[1], line_no, "node count")
            continue
        if n is None:
            raise ParseError("first line must declare nodes", line_no)
        if kw in ("dep", "indep"):
            if len(tokens) != 6:
                raise ParseError(f"{kw} needs x y {{set}} regime weight", line_no)
            x = want_int(tokens[1], line_no, "x")
            y = want_int(tokens[2], line_no, "y")
            braced = tokens[3]
            if not (braced.startswith("{") and braced.endswith("}")):
                raise ParseError("conditioning set must be braced, e.g. {1,3} or {}",
                                 line_no)
            inner = braced[1:-1]
            cond = frozenset(want_int(t, line_no, "conditioning node")
                             for t in inner.split(",") if t)
            regime = want_int(tokens[4], line_no, "regime")
            weight = want_int(tokens[5], line_no, "weight")
            try:
                constraints.append(Constraint(kw, x, y, cond, regime, weight))
            except ValueError as exc:
                raise ParseError(str(exc), line_no) from None
        elif kw == "order":
            if ordering is not None:
                raise ParseError("duplicate order line", line_no)
            ordering = tuple(want_int(t, line_no, "order entry") for t in tokens[1:])
        elif kw in ("forbid", "require"):
            if len(tokens) != 4 or tokens[1] not in EDGE_KINDS:
                raise ParseError(f"{kw} needs an edge kind and two nodes", line_no)
            a = want_int(tokens[2], line_no, "node")
            b = want_int(tokens[3], line_no, "node")
            (forbidden if kw == "forbid" else required).add((tokens[1], a, b))
        else:
            raise ParseError(f"unrecognised line {line!r}", line_no)
    if n is None:
        raise ParseError("missing nodes line")
    try:
        return LearnProblem(n, tuple(constraints), forbidden=frozenset(forbidden),
                            required=frozenset(required), ordering=ordering)
    except ValueError as exc:
        raise ParseError(str(exc)) from None


def problem_with(p: LearnProblem, **changes) -> LearnProblem:
    """Convenience wrapper over dataclasses.replace for tweaking a parsed
    problem (dialects, penalties)."""
    return replace(p, **changes)


# -- ASP export ---------------------------------------------------------------

_ASP_BASE = """\
node(X) :- nodes(N), X=1..N.

{{ line(X,Y,0) }} :- node(X), node(Y), X != Y.
{{ arrow(X,Y,0) }} :- node(X), node(Y), X != Y.
line(X,Y,I) :- line(X,I,0), line(I,Y,0), node(I), X != Y, I > 0.
arrow(X,Y,I) :- arrow(X,Y,0), node(I), Y != I, I > 0.
line(X,Y,I) :- line(Y,X,I).
:- arrow(X,Y,I), arrow(Y,X,I).

ancestor(X,Y) :- arrow(X,Y,0).
ancestor(X,Y) :- ancestor(X,Z), ancestor(Z,Y).
:- ancestor(X,Y), arrow(Y,X,0).

inside_set(X,C) :- node(X), set(C), 2**(X-1) & C != 0.
outside_set(X,C) :- node(X), set(C), 2**(X-1) & C == 0.

end_line(X,Y,C,I) :- line(X,Y,I), outside_set(X,C).
end_head(X,Y,C,I) :- arrow(X,Y,I), outside_set(X,C).
end_tail(X,Y,C,I) :- arrow(Y,X,I), outside_set(X,C).

end_line(X,Y,C,I) :- end_line(X,Z,C,I), line(Z,Y,I), outside_set(Z,C).
end_line(X,Y,C,I) :- end_tail(X,Z,C,I), line(Z,Y,I), outside_set(Z,C).
end_head(X,Y,C,I) :- end_line(X,Z,C,I), arrow(Z,Y,I), outside_set(Z,C).
end_head(X,Y,C,I) :- end_head(X,Z,C,I), arrow(Z,Y,I), outside_set(Z,C).
end_head(X,Y,C,I) :- end_tail(X,Z,C,I), arrow(Z,Y,I), outside_set(Z,C).
end_tail(X,Y,C,I) :- end_tail(X,Z,C,I), arrow(Y,Z,I), outside_set(Z,C).

end_line(X,Y,C,I) :- end_head(X,Z,C,I), line(Z,Y,I), inside_set(Z,C).
end_tail(X,Y,C,I) :- end_line(X,Z,C,I), arrow(Y,Z,I), inside_set(Z,C).
end_tail(X,Y,C,I) :- end_head(X,Z,C,I), arrow(Y,Z,I), inside_set(Z,C).

con(X,Y,C,I) :- end_line(X,Y,C,I), X != Y, outside_set(Y,C).
con(X,Y,C,I) :- end_head(X,Y,C,I), X != Y, outside_set(Y,C).
con(X,Y,C,I) :- end_tail(X,Y,C,I), X != Y, outside_set(Y,C).
con(X,Y,C,I) :- con(Y,X,C,I).

:- dep(X,Y,C,I,W), not con(X,Y,C,I).

:~ indep(X,Y,C,I,W), con(X,Y,C,I). [W,X,Y,C,I]

:~ line(X,Y,0), X < Y. [{lp},X,Y,1]
:~ arrow(X,Y,0). [{ap},X,Y,2]

#show.
#show line(X,Y) : line(X,Y,0), X < Y.
#show arrow(X,Y) : arrow(X,Y,0).
"""

_ASP_BIARROW = """\
{{ biarrow(X,Y,0) }} :- node(X), node(Y), X != Y.
:- biarrow(X,Y,0), line(Z,W,0).
biarrow(X,Y,I) :- biarrow(X,Y,0), node(I), X != I, Y != I, I > 0.
biarrow(X,Y,I) :- biarrow(Y,X,I).

end_head(X,Y,C,I) :- biarrow(X,Y,I), outside_set(X,C).
end_head(X,Y,C,I) :- end_tail(X,Z,C,I), biarrow(Z,Y,I), outside_set(Z,C).
end_head(X,Y,C,I) :- end_head(X,Z,C,I), biarrow(Z,Y,I), inside_set(Z,C).

:~ biarrow(X,Y,0), X < Y. [{bp},X,Y,3]

#show biarrow(X,Y) : biarrow(X,Y,0), X < Y.
"""


def export_asp(p: LearnProblem) -> str:
    """Render the problem as a logic program for an ASP solver.

    The program enumerates candidate graphs, reproduces the walk
    reachability fixpoint as ``end_*`` rules, rejects models that violate a
    ``dep`` atom and weighs violated ``indep`` atoms plus edges.  Output is
    byte-stable for a given problem.
    """
    out = [_ASP_BASE.format(lp=p.line_penalty, ap=p.arrow_penalty)]
    if Dialect.ORIGINAL in p.dialects:
        out.append(_ASP_BIARROW.format(bp=p.biarrow_penalty))
        if Dialect.ALTERNATIVE not in p.dialects:
            out.append(":- line(X,Y,0).\n")
    if p.ordering is not None:
        pos = {v: k for k, v in enumerate(p.ordering)}
        bans = sorted((t, h) for t in range(1, p.n + 1) for h in range(1, p.n + 1)
                      if t != h and pos[t] > pos[h])
        out.append("".join(f":- arrow({t},{h},0).\n" for t, h in bans))
    prior_atoms = []
    for kind, a, b in sorted(p.forbidden):
        prior_atoms.append(f":- {kind}({a},{b},0).\n")
    for kind, a, b in sorted(p.required):
        prior_atoms.append(f":- not {kind}({a},{b},0).\n")
    if prior_atoms:
        out.append("".join(prior_atoms))
    facts = [f"nodes({p.n}).", f"set(0..{(1 << p.n) - 1})."]
    for c in p.constraints:
        facts.append(f"{c.kind}({c.x},{c.y},{set_index(c.cond)},"
                     f"{c.regime},{c.weight}).")
    out.append("\n".join(facts) + "\n")
    return "\n".join(out)
