"""Separation in mixed graphs, decided four equivalent ways.

A node C strictly inside a walk is a *collider* when one side points an
arrowhead into C and the other side meets C with an arrowhead or a line
(``A -> C <- B``, ``A -> C - B`` or, with biarrows, head-to-head).  Meeting
C through a tail, or through lines on both sides, makes it a non-collider.

The four decision procedures:

1. simple paths; colliders must be ancestors of Z, non-colliders must
   avoid Z except that a line-line non-collider with a parent outside Z
   may be conditioned on;
2. walks that may revisit nodes; colliders must be in Z, non-colliders
   must avoid Z, no exceptions -- decided by a reachability fixpoint over
   (node, end mark) states;
3. reachability in the augmented graph of the extended subgraph over
   x + y + z;
4. as 3 but with the undirected part marginalised onto the ancestor set.

Criterion 2 also accepts graphs with bidirected edges; the others reject
them.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, NamedTuple

from .errors import MalformedQueryError, UnsupportedDialectError
from .graph import MixedGraph, _bits

# End marks: how a walk most recently arrived at a node.
END_LINE, END_HEAD, END_TAIL = 0, 1, 2


class WalkState(NamedTuple):
    """A node together with the mark of the walk's last step into it."""

    node: int
    end_mark: int


@dataclass(frozen=True)
class SeparationQuery:
    """Disjoint node sets x, y (non-empty) and a conditioning set z."""

    x: frozenset
    y: frozenset
    z: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "x", frozenset(int(i) for i in self.x))
        object.__setattr__(self, "y", frozenset(int(i) for i in self.y))
        object.__setattr__(self, "z", frozenset(int(i) for i in self.z))
        if not self.x or not self.y:
            raise MalformedQueryError("x and y must be non-empty")
        if self.x & self.y or self.x & self.z or self.y & self.z:
            raise MalformedQueryError("x, y and z must be pairwise disjoint")


def _query_masks(g: MixedGraph, q: SeparationQuery):
    return g.node_mask(q.x), g.node_mask(q.y), g.node_mask(q.z)


def _reject_biarrows(g: MixedGraph, what: str):
    if g.biarrows:
        raise UnsupportedDialectError(f"{what} is not defined for bidirected edges")


# -- criterion 2: the walk automaton ----------------------------------------


def connects_route(g: MixedGraph, q: SeparationQuery) -> bool:
    """True when some walk from x to y is open given z.

    Walks may revisit nodes, so reachability over ``(node, end mark)``
    states decides the question: colliders are passable exactly inside z,
    non-colliders exactly outside z.
    """
    xm, ym, zm = _query_masks(g, q)
    return _route_connected(g._adj, xm, ym, zm)


def _route_connected(adj, xm: int, ym: int, zm: int) -> bool:
    pa, ch, ne, bi = adj
    seen = [0, 0, 0]  # reached nodes per end mark
    queue = []

    def push(targets: int, mark: int) -> bool:
        if targets & ym:
            return True
        fresh = targets & ~seen[mark]
        if fresh:
            seen[mark] |= fresh
            for w in _bits(fresh):
                queue.append((w, mark))
        return False

    for s in _bits(xm):
        # Endpoints carry no collider status; every first step is allowed.
        if push(ne[s], END_LINE):
            return True
        if push(ch[s] | bi[s], END_HEAD):
            return True
        if push(pa[s], END_TAIL):
            return True

    i = 0
    while i < len(queue):
        v, mark = queue[i]
        i += 1
        in_z = (zm >> (v - 1)) & 1
        # Leaving through a line: collider iff we arrived through a head.
        if in_z if mark == END_HEAD else not in_z:
            if push(ne[v], END_LINE):
                return True
        # Leaving along an arrow (tail at v): always a non-collider.
        if not in_z:
            if push(ch[v], END_HEAD):
                return True
        # Leaving against an arrow (head at v): collider unless we arrived
        # through a tail.
        if not in_z if mark == END_TAIL else in_z:
            if push(pa[v], END_TAIL):
                return True
        # Leaving through a biarrow (head at v): collider iff we arrived
        # through a head; a line arrival cannot occur in a valid graph.
        if bi[v]:
            if (in_z if mark == END_HEAD else (not in_z and mark == END_TAIL)):
                if push(bi[v], END_HEAD):
                    return True
    return False


# -- criterion 1: simple paths ----------------------------------------------


def connects_path(g: MixedGraph, q: SeparationQuery) -> bool:
    """True when some simple path from x to y is open given z.

    Colliders must be ancestors of z; a non-collider must avoid z unless
    both its path edges are lines and it keeps a parent outside z.
    Intended as the small-n oracle for :func:`connects_route`.
    """
    _reject_biarrows(g, "path separation")
    xm, ym, zm = _query_masks(g, q)
    return _path_connected(g._adj, xm, ym, zm, g._an_mask(zm))


def _path_connected(adj, xm: int, ym: int, dtm: int, anm: int) -> bool:
    # dtm: the effective conditioning mask; anm: its ancestral closure,
    # which is where colliders are passable.
    pa, ch, ne, _bi = adj
    stack = []

    def start(s: int) -> bool:
        sb = 1 << (s - 1)
        for targets, mark in ((ne[s], END_LINE), (ch[s], END_HEAD), (pa[s], END_TAIL)):
            if targets & ym:
                return True
            for w in _bits(targets & ~sb):
                stack.append((w, mark, sb | (1 << (w - 1))))
        return False

    for s in _bits(xm):
        if start(s):
            return True

    while stack:
        v, mark, vis = stack.pop()
        vb = 1 << (v - 1)
        in_dt = dtm & vb
        passes_collider = anm & vb
        # line out of v
        if (passes_collider if mark == END_HEAD
                else (not in_dt or (mark == END_LINE and pa[v] & ~dtm))):
            targets = ne[v]
            if targets & ym:
                return True
            for w in _bits(targets & ~vis):
                stack.append((w, END_LINE, vis | (1 << (w - 1))))
        # arrow out of v
        if not in_dt:
            targets = ch[v]
            if targets & ym:
                return True
            for w in _bits(targets & ~vis):
                stack.append((w, END_HEAD, vis | (1 << (w - 1))))
        # against an arrow into v
        if (not in_dt) if mark == END_TAIL else passes_collider:
            targets = pa[v]
            if targets & ym:
                return True
            for w in _bits(targets & ~vis):
                stack.append((w, END_TAIL, vis | (1 << (w - 1))))
    return False


# -- subgraph constructions ---------------------------------------------------


def extended_node_set(g: MixedGraph, nodes: Iterable[int]) -> frozenset[int]:
    """Nodes of the extended subgraph: the line components of the
    ancestral closure of ``nodes``."""
    return g.mask_nodes(g._cc_mask(g._an_mask(g.node_mask(nodes))))


def extended_subgraph(g: MixedGraph, nodes: Iterable[int]) -> MixedGraph:
    """Arrows and lines inside the ancestral closure of ``nodes`` plus all
    lines inside that closure's line components."""
    _reject_biarrows(g, "extended subgraph")
    anm = g._an_mask(g.node_mask(nodes))
    ccm = g._cc_mask(anm)

    def inside(mask, a, b):
        return (mask >> (a - 1)) & 1 and (mask >> (b - 1)) & 1

    return MixedGraph(
        g.n,
        frozenset(e for e in g.arrows if inside(anm, *e)),
        frozenset(e for e in g.lines if inside(ccm, *e)),
        node_names=g.node_names,
    )


def _extended_masks(g: MixedGraph, smask: int):
    pa, ch, ne, _bi = g._adj
    anm = g._an_mask(smask)
    ccm = g._cc_mask(anm)
    pa_e = [0] * (g.n + 1)
    ch_e = [0] * (g.n + 1)
    ne_e = [0] * (g.n + 1)
    for v in _bits(anm):
        pa_e[v] = pa[v] & anm
        ch_e[v] = ch[v] & anm
    for v in _bits(ccm):
        ne_e[v] = ne[v] & ccm
    return pa_e, ch_e, ne_e, anm, ccm


def augmented_graph(g: MixedGraph) -> MixedGraph:
    """The undirected graph joining every collider-connected pair.

    Two distinct nodes are joined when they are adjacent, when they both
    point a head-or-line at a common node with at least one arrowhead
    (``A -> C <- B`` or ``A -> C - B``), or when they point arrows at the
    two ends of a line (``A -> C - D <- B``).
    """
    _reject_biarrows(g, "augmented graph")
    pa, ch, ne, _bi = g._adj
    aug = _augmented_masks(pa, ch, ne, g.n)
    pairs = frozenset((a, b) for a in range(1, g.n + 1)
                      for b in _bits(aug[a]) if a < b)
    return MixedGraph(g.n, lines=pairs, node_names=g.node_names)


def _augmented_masks(pa, ch, ne, n: int):
    aug = [0] * (n + 1)
    for v in range(1, n + 1):
        vb = 1 << (v - 1)
        aug[v] |= pa[v] | ch[v] | ne[v]
        heads = pa[v]
        if heads:
            soft = pa[v] | ne[v]
            for a in _bits(heads):
                aug[a] |= soft & ~(1 << (a - 1))
            for b in _bits(soft):
                aug[b] |= heads & ~(1 << (b - 1))
        for d in _bits(ne[v] & ~((vb << 1) - 1)):  # each line once, v < d
            pc = pa[v] & ~(1 << (d - 1))
            pd = pa[d] & ~vb
            for a in _bits(pc):
                aug[a] |= pd & ~(1 << (a - 1))
            for b in _bits(pd):
                aug[b] |= pc & ~(1 << (b - 1))
    return aug


def marginal_graph(h: MixedGraph, nodes: Iterable[int]) -> MixedGraph:
    """Marginalise an undirected graph onto ``nodes``.

    Two kept nodes are joined when they are joined in ``h`` or connected
    by a path running entirely through dropped nodes.
    """
    if h.arrows or h.biarrows:
        raise UnsupportedDialectError("marginal graph expects an undirected graph")
    xm = h.node_mask(nodes)
    ne_m = _marginal_masks(h._adj[2], h.n, xm)
    pairs = frozenset((a, b) for a in range(1, h.n + 1)
                      for b in _bits(ne_m[a]) if a < b)
    return MixedGraph(h.n, lines=pairs, node_names=h.node_names)


def _marginal_masks(ne, n: int, xm: int):
    out = [0] * (n + 1)
    for v in _bits(xm):
        out[v] = ne[v] & xm
    hidden = 0
    for v in range(1, n + 1):
        vb = 1 << (v - 1)
        if vb & (xm | hidden) or not ne[v]:
            continue
        # Flood the component of dropped nodes containing v, collecting the
        # kept nodes on its border; every border pair becomes an edge.
        comp = vb
        frontier = vb
        border = 0
        while frontier:
            step = 0
            for u in _bits(frontier):
                step |= ne[u]
            border |= step & xm
            frontier = step & ~xm & ~comp
            comp |= frontier
        hidden |= comp
        for a in _bits(border):
            out[a] |= border & ~(1 << (a - 1))
    return out


def _ug_reachable(adj, xm: int, ym: int, zm: int) -> bool:
    frontier = xm
    seen = xm
    while frontier:
        step = 0
        for v in _bits(frontier):
            step |= adj[v]
        if step & ym:
            return True
        frontier = step & ~seen & ~zm
        seen |= frontier
    return False


# -- the four-way dispatcher --------------------------------------------------


def separated(g: MixedGraph, q: SeparationQuery, criterion: int = 2) -> bool:
    """Decide whether x and y are separated given z.

    All four criteria agree on valid graphs; criterion 2 is the engine of
    choice and the only one defined for bidirected edges.
    """
    if criterion == 2:
        return not connects_route(g, q)
    if criterion == 1:
        return not connects_path(g, q)
    if criterion not in (3, 4):
        raise ValueError(f"criterion must be 1..4, got {criterion!r}")
    _reject_biarrows(g, f"criterion {criterion}")
    xm, ym, zm = _query_masks(g, q)
    pa_e, ch_e, ne_e, anm, _ccm = _extended_masks(g, xm | ym | zm)
    if criterion == 4:
        ne_e = _marginal_masks(ne_e, g.n, anm)
    aug = _augmented_masks(pa_e, ch_e, ne_e, g.n)
    return not _ug_reachable(aug, xm, ym, zm)


def separated_with_determinism(
    g: MixedGraph,
    q: SeparationQuery,
    det: Callable[[frozenset], frozenset],
) -> bool:
    """Path separation where conditioning extends to everything z determines.

    ``det`` maps a node set to the set it functionally determines; it must
    be extensive (``z <= det(z)``).  Colliders must be ancestors of
    ``det(z)``, non-colliders must avoid it up to the usual line-line
    escape.
    """
    _reject_biarrows(g, "path separation")
    xm, ym, zm = _query_masks(g, q)
    dt = det(q.z)
    dtm = g.node_mask(dt)
    if zm & ~dtm:
        raise ValueError("det must be extensive: z not contained in det(z)")
    return not _path_connected(g._adj, xm, ym, dtm, g._an_mask(dtm))
