"""Mixed graphs over nodes 1..n with directed, undirected and bidirected edges.

Two dialects are supported.  An *alternative* graph mixes arrows with
undirected edges (lines); an *original* graph mixes arrows with bidirected
edges (biarrows).  Lines and biarrows never occur together.  The directed
part is always acyclic and antisymmetric, and a pair of nodes carries at
most two edges (an arrow plus a line or biarrow).

Node sets are plain ``frozenset`` objects at the API surface.  The canonical
integer encoding (node ``i`` occupies bit ``i - 1``) used by the constraint
formats is exposed through :func:`set_index` and :func:`set_members`.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator

from .errors import (
    DirectedCycleError,
    DoubleArrowError,
    DoubleEdgeError,
    LineBiarrowMixError,
    NodeOutOfRangeError,
    ParseError,
    SelfEdgeError,
)


class Dialect(enum.Enum):
    ALTERNATIVE = "alternative"  # arrows + lines
    ORIGINAL = "original"        # arrows + biarrows


def set_index(members: Iterable[int]) -> int:
    """Canonical integer index of a node set (node i occupies bit i - 1)."""
    index = 0
    for i in members:
        if i < 1:
            raise NodeOutOfRangeError(f"node {i} out of range")
        index |= 1 << (i - 1)
    return index


def set_members(index: int, n: int) -> frozenset[int]:
    """Inverse of :func:`set_index` for sets over nodes 1..n."""
    if index < 0 or index >> n:
        raise NodeOutOfRangeError(f"set index {index} out of range for n={n}")
    return frozenset(_bits(index))


def _bits(mask: int) -> Iterator[int]:
    # Yields the 1-based node ids packed into a bitmask.
    while mask:
        low = mask & -mask
        yield low.bit_length()
        mask ^= low


def _norm_pair(edge) -> tuple[int, int]:
    a, b = edge
    a, b = int(a), int(b)
    return (a, b) if a <= b else (b, a)


@dataclass(frozen=True)
class MixedGraph:
    """An immutable mixed graph.

    Parameters
    ----------
    n:
        Number of nodes; the nodes are the integers ``1..n``.
    arrows:
        Directed edges as ``(tail, head)`` pairs.
    lines:
        Undirected edges as unordered pairs.
    biarrows:
        Bidirected edges as unordered pairs.
    node_names:
        Optional display labels, one per node.  Labels are presentation
        only: they do not take part in equality or hashing.
    """

    n: int
    arrows: frozenset = frozenset()
    lines: frozenset = frozenset()
    biarrows: frozenset = frozenset()
    node_names: tuple | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "arrows",
                           frozenset((int(t), int(h)) for t, h in self.arrows))
        object.__setattr__(self, "lines",
                           frozenset(_norm_pair(e) for e in self.lines))
        object.__setattr__(self, "biarrows",
                           frozenset(_norm_pair(e) for e in self.biarrows))
        if self.node_names is not None:
            names = tuple(str(s) for s in self.node_names)
            if len(names) != self.n or len(set(names)) != self.n:
                raise ValueError("node_names must be %d distinct labels" % self.n)
            object.__setattr__(self, "node_names", names)
        self.validate()

    # -- validation ------------------------------------------------------

    def validate(self) -> None:
        """Check every structural invariant, raising on the first violation."""
        if not isinstance(self.n, int) or self.n < 0:
            raise NodeOutOfRangeError(f"invalid node count {self.n!r}")
        for t, h in self.arrows:
            self._check_node(t)
            self._check_node(h)
            if t == h:
                raise SelfEdgeError(f"arrow {t} -> {h}")
            if (h, t) in self.arrows:
                raise DoubleArrowError(f"both {t} -> {h} and {h} -> {t}")
        for kind, pairs in (("line", self.lines), ("biarrow", self.biarrows)):
            for a, b in pairs:
                self._check_node(a)
                self._check_node(b)
                if a == b:
                    raise SelfEdgeError(f"{kind} {a} - {b}")
        conflict = self.lines & self.biarrows
        if conflict:
            a, b = min(conflict)
            raise DoubleEdgeError(f"pair {a},{b} carries both a line and a biarrow")
        if self.lines and self.biarrows:
            raise LineBiarrowMixError("lines and biarrows in the same graph")
        cycle = self._find_cycle()
        if cycle is not None:
            raise DirectedCycleError(cycle)

    def _check_node(self, i) -> None:
        if not isinstance(i, int) or not 1 <= i <= self.n:
            raise NodeOutOfRangeError(f"node {i!r} out of range 1..{self.n}")

    def _find_cycle(self):
        children: dict[int, list[int]] = {}
        for t, h in self.arrows:
            children.setdefault(t, []).append(h)
        WHITE, GREY, BLACK = 0, 1, 2
        colour = {}
        for start in children:
            if colour.get(start, WHITE) != WHITE:
                continue
            path = [start]
            it_stack = [iter(children.get(start, ()))]
            colour[start] = GREY
            while path:
                for w in it_stack[-1]:
                    c = colour.get(w, WHITE)
                    if c == GREY:
                        return path[path.index(w):] + [w]
                    if c == WHITE:
                        colour[w] = GREY
                        path.append(w)
                        it_stack.append(iter(children.get(w, ())))
                        break
                else:
                    colour[path.pop()] = BLACK
                    it_stack.pop()
        return None

    # -- basic structure -------------------------------------------------

    @property
    def dialect(self) -> Dialect:
        return Dialect.ORIGINAL if self.biarrows else Dialect.ALTERNATIVE

    @cached_property
    def full_mask(self) -> int:
        return (1 << self.n) - 1

    @cached_property
    def _adj(self):
        # Per-node adjacency bitmasks: parents, children, line and biarrow
        # neighbours.  Index 0 is unused so nodes index directly.
        pa = [0] * (self.n + 1)
        ch = [0] * (self.n + 1)
        ne = [0] * (self.n + 1)
        bi = [0] * (self.n + 1)
        for t, h in self.arrows:
            pa[h] |= 1 << (t - 1)
            ch[t] |= 1 << (h - 1)
        for a, b in self.lines:
            ne[a] |= 1 << (b - 1)
            ne[b] |= 1 << (a - 1)
        for a, b in self.biarrows:
            bi[a] |= 1 << (b - 1)
            bi[b] |= 1 << (a - 1)
        return pa, ch, ne, bi

    @cached_property
    def _an_cache(self) -> dict:
        return {}

    def node_mask(self, nodes: Iterable[int]) -> int:
        mask = 0
        for i in nodes:
            self._check_node(i)
            mask |= 1 << (i - 1)
        return mask

    def mask_nodes(self, mask: int) -> frozenset[int]:
        return frozenset(_bits(mask))

    def _spread(self, step, seed: int) -> int:
        # Union of `seed` with everything reachable through per-node masks.
        cur = seed
        frontier = seed
        while frontier:
            add = 0
            for v in _bits(frontier):
                add |= step[v]
            frontier = add & ~cur
            cur |= add
        return cur

    def _an_mask(self, mask: int) -> int:
        cache = self._an_cache
        hit = cache.get(mask)
        if hit is None:
            hit = cache[mask] = self._spread(self._adj[0], mask)
        return hit

    def _de_mask(self, mask: int) -> int:
        return self._spread(self._adj[1], mask)

    def _sde_mask(self, mask: int) -> int:
        pa, ch, ne, bi = self._adj
        step = [ch[v] | ne[v] for v in range(self.n + 1)]
        return self._spread(step, mask)

    def _cc_mask(self, mask: int) -> int:
        return self._spread(self._adj[2], mask)

    # -- node relations ----------------------------------------------------

    def parents(self, nodes: Iterable[int]) -> frozenset[int]:
        """Tails of arrows pointing into the set."""
        mask = self.node_mask(nodes)
        pa = self._adj[0]
        out = 0
        for v in _bits(mask):
            out |= pa[v]
        return self.mask_nodes(out)

    def children(self, nodes: Iterable[int]) -> frozenset[int]:
        """Heads of arrows leaving the set."""
        mask = self.node_mask(nodes)
        ch = self._adj[1]
        out = 0
        for v in _bits(mask):
            out |= ch[v]
        return self.mask_nodes(out)

    def neighbours(self, nodes: Iterable[int]) -> frozenset[int]:
        """Nodes joined to the set by a line."""
        mask = self.node_mask(nodes)
        ne = self._adj[2]
        out = 0
        for v in _bits(mask):
            out |= ne[v]
        return self.mask_nodes(out)

    def ancestors(self, nodes: Iterable[int]) -> frozenset[int]:
        """Reflexive transitive closure of parent steps."""
        return self.mask_nodes(self._an_mask(self.node_mask(nodes)))

    def descendants(self, nodes: Iterable[int]) -> frozenset[int]:
        """Reflexive transitive closure of child steps."""
        return self.mask_nodes(self._de_mask(self.node_mask(nodes)))

    def semidescendants(self, nodes: Iterable[int]) -> frozenset[int]:
        """Reflexive closure of steps that follow an arrow or a line forward."""
        return self.mask_nodes(self._sde_mask(self.node_mask(nodes)))

    def non_semidescendants(self, nodes: Iterable[int]) -> frozenset[int]:
        """Complement of :meth:`semidescendants` in the node set."""
        return self.mask_nodes(self.full_mask & ~self._sde_mask(self.node_mask(nodes)))

    def connectivity_component(self, nodes: Iterable[int]) -> frozenset[int]:
        """Reflexive transitive closure of line steps."""
        return self.mask_nodes(self._cc_mask(self.node_mask(nodes)))

    def connectivity_components(self) -> tuple[frozenset[int], ...]:
        """Partition of the nodes into line-connected components."""
        seen = 0
        parts = []
        for v in range(1, self.n + 1):
            bit = 1 << (v - 1)
            if seen & bit:
                continue
            comp = self._cc_mask(bit)
            seen |= comp
            parts.append(self.mask_nodes(comp))
        return tuple(parts)

    # -- derived graphs ----------------------------------------------------

    def induced_subgraph(self, nodes: Iterable[int]) -> "MixedGraph":
        """Keep exactly the edges with both endpoints in ``nodes``."""
        mask = self.node_mask(nodes)

        def keep(a, b):
            return (mask >> (a - 1)) & 1 and (mask >> (b - 1)) & 1

        return MixedGraph(
            self.n,
            frozenset(e for e in self.arrows if keep(*e)),
            frozenset(e for e in self.lines if keep(*e)),
            frozenset(e for e in self.biarrows if keep(*e)),
            self.node_names,
        )

    def undirected_skeleton(self) -> "MixedGraph":
        """The graph restricted to its lines."""
        return MixedGraph(self.n, lines=self.lines, node_names=self.node_names)

    def consistent_ordering(self) -> tuple[int, ...]:
        """A node ordering that never places a strict ancestor later.

        Deterministic: among the available nodes the smallest index is
        placed first.
        """
        pa = self._adj[0]
        placed = 0
        order = []
        for _ in range(self.n):
            for v in range(1, self.n + 1):
                bit = 1 << (v - 1)
                if placed & bit:
                    continue
                if pa[v] & ~placed:
                    continue
                order.append(v)
                placed |= bit
                break
        return tuple(order)

    def is_amp_cg(self) -> bool:
        """True when the graph is a chain graph: at most one edge per pair
        and no cycle of forward arrow/line steps that uses an arrow."""
        if self.biarrows:
            return False
        for a, b in self.lines:
            if (a, b) in self.arrows or (b, a) in self.arrows:
                return False
        for t, h in self.arrows:
            if (self._sde_mask(1 << (h - 1)) >> (t - 1)) & 1:
                return False
        return True

    # -- presentation ------------------------------------------------------

    def node_label(self, i: int) -> str:
        self._check_node(i)
        return self.node_names[i - 1] if self.node_names else str(i)

    def __repr__(self):
        parts = [f"MixedGraph(n={self.n}"]
        if self.arrows:
            parts.append(f"arrows={sorted(self.arrows)}")
        if self.lines:
            parts.append(f"lines={sorted(self.lines)}")
        if self.biarrows:
            parts.append(f"biarrows={sorted(self.biarrows)}")
        return ", ".join(parts) + ")"


_RELATIONS = {
    "Pa": MixedGraph.parents,
    "Ch": MixedGraph.children,
    "Ne": MixedGraph.neighbours,
    "An": MixedGraph.ancestors,
    "De": MixedGraph.descendants,
    "de": MixedGraph.semidescendants,
    "Nd": MixedGraph.non_semidescendants,
    "Cc": MixedGraph.connectivity_component,
}


def relation(g: MixedGraph, kind: str, nodes: Iterable[int]) -> frozenset[int]:
    """Dispatch to a node relation by name.

    ``kind`` is one of ``Pa``, ``Ch``, ``Ne``, ``An``, ``De``, ``de``,
    ``Nd``, ``Cc``.  Note that ``De`` (descendants through arrows only)
    and ``de`` (semidescendants, arrows or lines) differ.
    """
    try:
        fn = _RELATIONS[kind]
    except KeyError:
        raise ValueError(f"unknown relation kind {kind!r}") from None
    return fn(g, nodes)


# -- text format -----------------------------------------------------------


def serialize(g: MixedGraph) -> str:
    """Render a graph in the line-oriented text format.

    The output starts with a ``nodes`` line followed by one line per edge:
    arrows sorted by (tail, head), then lines, then biarrows.  When the
    graph carries labels the output uses them; otherwise 1-based indices.
    """
    tok = g.node_label
    out = []
    if g.node_names:
        out.append("nodes " + " ".join(g.node_names))
    else:
        out.append(f"nodes {g.n}")
    for t, h in sorted(g.arrows):
        out.append(f"arrow {tok(t)} {tok(h)}")
    for a, b in sorted(g.lines):
        out.append(f"line {tok(a)} {tok(b)}")
    for a, b in sorted(g.biarrows):
        out.append(f"biarrow {tok(a)} {tok(b)}")
    return "\n".join(out) + "\n"


def parse(text: str) -> MixedGraph:
    """Parse the text format produced by :func:`serialize`.

    ``#`` starts a comment.  The ``nodes`` line is either a node count or a
    list of distinct non-numeric labels; labels map to indices in the order
    they are declared.  Edge lines accept indices or declared labels.
    """
    n = None
    names: tuple | None = None
    index: dict[str, int] = {}
    arrows, lines, biarrows = set(), set(), set()

    def node(tokens, which, line_no):
        raw = tokens[which]
        if raw.lstrip("-").isdigit():
            return int(raw)
        if raw not in index:
            raise ParseError(f"unknown node label {raw!r}", line_no)
        return index[raw]

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        kw = tokens[0]
        if kw == "nodes":
            if n is not None:
                raise ParseError("duplicate nodes line", line_no)
            rest = tokens[1:]
            if not rest:
                raise ParseError("nodes line needs a count or labels", line_no)
            if len(rest) == 1 and rest[0].isdigit():
                n = int(rest[0])
            else:
                for lbl in rest:
                    if lbl.lstrip("-").isdigit():
                        raise ParseError(
                            f"label {lbl!r} is numeric; use a node count instead",
                            line_no)
                names = tuple(rest)
                if len(set(names)) != len(names):
                    raise ParseError("duplicate node label", line_no)
                n = len(names)
                index = {lbl: i + 1 for i, lbl in enumerate(names)}
            continue
        if n is None:
            raise ParseError("first line must declare nodes", line_no)
        if kw not in ("arrow", "line", "biarrow") or len(tokens) != 3:
            raise ParseError(f"unrecognised line {line!r}", line_no)
        a = node(tokens, 1, line_no)
        b = node(tokens, 2, line_no)
        if kw == "arrow":
            arrows.add((a, b))
        elif kw == "line":
            lines.add((a, b))
        else:
            biarrows.add((a, b))
    if n is None:
        raise ParseError("missing nodes line")
    return MixedGraph(n, frozenset(arrows), frozenset(lines),
                      frozenset(biarrows), names)
