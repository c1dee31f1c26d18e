"""Conditional-independence statement generators and verification.

Three families of generators turn a graph into the finite statement set of
a Markov property:

* ordered local / ordered pairwise, driven by a node ordering and the
  ancestral subsets it admits;
* chain-graph properties (block-recursive, local, pairwise) for graphs
  with at most one edge per pair and no semidirected cycle.

Statements can be verified against any oracle, graphical or Gaussian.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from .errors import (
    InconsistentOrderingError,
    MalformedQueryError,
    NodeNotInSetError,
    NotAnAmpCgError,
)
from .graph import MixedGraph, _bits
from .separation import (
    SeparationQuery,
    _augmented_masks,
    _extended_masks,
    _ug_reachable,
    extended_subgraph,
)

OBSERVATIONAL = 0

AMP_FLAVOURS = ("block-recursive", "local", "pairwise")


@dataclass(frozen=True)
class CiStatement:
    """x independent of y given z, in regime 0 (observational) or under an
    intervention on node ``regime``."""

    x: frozenset
    y: frozenset
    z: frozenset = frozenset()
    regime: int = OBSERVATIONAL

    def __post_init__(self):
        object.__setattr__(self, "x", frozenset(int(i) for i in self.x))
        object.__setattr__(self, "y", frozenset(int(i) for i in self.y))
        object.__setattr__(self, "z", frozenset(int(i) for i in self.z))
        if not self.x or not self.y:
            raise MalformedQueryError("x and y must be non-empty")
        if self.x & self.y or self.x & self.z or self.y & self.z:
            raise MalformedQueryError("x, y and z must be pairwise disjoint")

    def canonical(self) -> "CiStatement":
        """Swap x and y into a fixed order so symmetric duplicates collapse."""
        if tuple(sorted(self.y)) < tuple(sorted(self.x)):
            return CiStatement(self.y, self.x, self.z, self.regime)
        return self

    def sort_key(self):
        return (tuple(sorted(self.x)), tuple(sorted(self.y)),
                tuple(sorted(self.z)), self.regime)


def _finish(stmts: Iterable[CiStatement]) -> tuple[CiStatement, ...]:
    return tuple(sorted({s.canonical() for s in stmts}, key=CiStatement.sort_key))


@dataclass(frozen=True)
class OrderedContext:
    """A graph together with a node ordering no arrow contradicts."""

    graph: MixedGraph
    ordering: tuple

    def __post_init__(self):
        g = self.graph
        order = tuple(int(i) for i in self.ordering)
        object.__setattr__(self, "ordering", order)
        if sorted(order) != list(range(1, g.n + 1)):
            raise InconsistentOrderingError("ordering must list each node once")
        pos = {v: k for k, v in enumerate(order)}
        for t, h in g.arrows:
            if pos[t] > pos[h]:
                raise InconsistentOrderingError(
                    f"arrow {t} -> {h} contradicts the ordering")


def markov_blanket(g: MixedGraph, s: Iterable[int], b: int) -> frozenset[int]:
    """The blanket of b inside the extended subgraph over s: children,
    neighbours of b and its children, and parents of all of those."""
    s = frozenset(int(i) for i in s)
    b = int(b)
    if b not in s:
        raise NodeNotInSetError(f"node {b} is not in the target set")
    ext = extended_subgraph(g, s)
    return _blanket_on(ext, b)


def _blanket_on(ext: MixedGraph, b: int) -> frozenset[int]:
    pa, ch, ne, _bi = ext._adj
    bb = 1 << (b - 1)
    chm = ch[b]
    nem = 0
    for v in _bits(bb | chm):
        nem |= ne[v]
    pam = 0
    for v in _bits(bb | chm | nem):
        pam |= pa[v]
    return ext.mask_nodes((chm | nem | pam) & ~bb)


def _ancestral_supersets(g: MixedGraph, ordering):
    # Yields (S, members) for every ancestral S that is contained in some
    # prefix of the ordering and contains the prefix's last node.
    for k, a in enumerate(ordering):
        pre = ordering[:k]
        ab = 1 << (a - 1)
        for pick in range(1 << k):
            sm = ab
            for j in range(k):
                if pick >> j & 1:
                    sm |= 1 << (pre[j] - 1)
            if g._an_mask(sm) == sm:
                yield sm


def ordered_local_statements(ctx: OrderedContext) -> tuple[CiStatement, ...]:
    """Each member of each admissible ancestral set, screened off by its
    blanket in the extended subgraph.

    A blanket can reach outside the set through a chain of undirected
    edges; conditioning on such a node brings arrows into play that the
    extended subgraph over the set does not contain, and the screened
    statement need not be a separation.  Those members are skipped.
    """
    g = ctx.graph
    out = []
    for sm in _ancestral_supersets(g, ctx.ordering):
        ext_adj = _extended_masks(g, sm)[:3]
        for b in _bits(sm):
            mb = _blanket_mask(ext_adj, b)
            if mb & ~sm:
                continue
            ym = sm & ~mb & ~(1 << (b - 1))
            if ym:
                out.append(CiStatement(frozenset([b]), g.mask_nodes(ym),
                                       g.mask_nodes(mb)))
    return _finish(out)


def _blanket_mask(adj3, b: int) -> int:
    pa, ch, ne = adj3
    bb = 1 << (b - 1)
    chm = ch[b]
    nem = 0
    for v in _bits(bb | chm):
        nem |= ne[v]
    pam = 0
    for v in _bits(bb | chm | nem):
        pam |= pa[v]
    return (chm | nem | pam) & ~bb


def ordered_pairwise_statements(ctx: OrderedContext) -> tuple[CiStatement, ...]:
    """Each non-augmented-adjacent pair inside an admissible ancestral set,
    given all other nodes of the extended subgraph.

    Only sets that are also closed under connectivity components qualify:
    for those the extended subgraph adds no outside nodes, so conditioning
    on its remainder yields a separation.  A set that is not closed is
    covered by its closure, which is itself ancestral and enumerated.
    """
    g = ctx.graph
    out = []
    for sm in _ancestral_supersets(g, ctx.ordering):
        pa_e, ch_e, ne_e, _anm, ccm = _extended_masks(g, sm)
        if ccm != sm:
            continue
        aug = _augmented_masks(pa_e, ch_e, ne_e, g.n)
        members = list(_bits(sm))
        for i, b in enumerate(members):
            for c in members[i + 1:]:
                if (aug[b] >> (c - 1)) & 1:
                    continue
                zm = ccm & ~(1 << (b - 1)) & ~(1 << (c - 1))
                out.append(CiStatement(frozenset([b]), frozenset([c]),
                                       g.mask_nodes(zm)))
    return _finish(out)


def _submasks(mask: int):
    # All submasks of `mask`, including 0 and mask itself.
    s = mask
    while True:
        yield s
        if s == 0:
            return
        s = (s - 1) & mask


def amp_statements(g: MixedGraph, flavour: str) -> tuple[CiStatement, ...]:
    """Chain-graph Markov statements of the requested flavour:
    ``block-recursive``, ``local`` or ``pairwise``."""
    if flavour not in AMP_FLAVOURS:
        raise ValueError(f"flavour must be one of {AMP_FLAVOURS}, got {flavour!r}")
    if not g.is_amp_cg():
        raise NotAnAmpCgError("graph has double edges, biarrows or a "
                              "semidirected cycle")
    out = []
    for comp in g.connectivity_components():
        cm = g.node_mask(comp)
        ndm = g.full_mask & ~g._sde_mask(cm)
        if flavour == "block-recursive":
            out.extend(_block_recursive(g, cm))
        elif flavour == "local":
            out.extend(_local(g, cm, ndm))
        else:
            out.extend(_pairwise(g, cm, ndm))
    return _finish(out)


def _pa_mask(g, mask):
    pa = g._adj[0]
    out = 0
    for v in _bits(mask):
        out |= pa[v]
    return out


def _block_recursive(g, cm):
    # Every non-empty block of the component against its non-semidescendants
    # given its parents; plus every separation of the component's undirected
    # graph, shifted by the component's parents.
    for dm in _submasks(cm):
        if not dm:
            continue
        pam = _pa_mask(g, dm)
        ym = (g.full_mask & ~g._sde_mask(dm)) & ~pam
        if ym:
            yield CiStatement(g.mask_nodes(dm), g.mask_nodes(ym), g.mask_nodes(pam))
    pac = _pa_mask(g, cm)
    ne = g._adj[2]
    comp_adj = [ne[v] & cm for v in range(g.n + 1)]
    for xm in _submasks(cm):
        if not xm:
            continue
        rest = cm & ~xm
        for ym in _submasks(rest):
            if not ym or (ym & -ym) < (xm & -xm):
                continue  # canonical: smallest node lives in x
            for zm in _submasks(rest & ~ym):
                if not _ug_reachable(comp_adj, xm, ym, zm):
                    yield CiStatement(g.mask_nodes(xm), g.mask_nodes(ym),
                                      g.mask_nodes(zm | pac))


def _local(g, cm, ndm):
    ne = g._adj[2]
    for a in _bits(cm):
        ab = 1 << (a - 1)
        nea = ne[a]
        ym = cm & ~ab & ~nea
        if ym:
            yield CiStatement(frozenset([a]), g.mask_nodes(ym),
                              g.mask_nodes(ndm | nea))
        for sm in _submasks(cm & ~ab):
            pam = _pa_mask(g, ab | sm)
            ym2 = ndm & ~pam
            if ym2:
                yield CiStatement(frozenset([a]), g.mask_nodes(ym2),
                                  g.mask_nodes(sm | pam))


def _pairwise(g, cm, ndm):
    ne = g._adj[2]
    for a in _bits(cm):
        ab = 1 << (a - 1)
        for b in _bits(cm & ~ab & ~ne[a]):
            zm = (ndm | cm) & ~ab & ~(1 << (b - 1))
            yield CiStatement(frozenset([a]), frozenset([b]), g.mask_nodes(zm))
        for sm in _submasks(cm & ~ab):
            pam = _pa_mask(g, ab | sm)
            for b in _bits(ndm & ~pam):
                zm = sm | (ndm & ~(1 << (b - 1)))
                yield CiStatement(frozenset([a]), frozenset([b]), g.mask_nodes(zm))


# -- verification -------------------------------------------------------------


def separation_oracle(g: MixedGraph, criterion: int = 2) -> Callable[[CiStatement], bool]:
    """Oracle that decides statements by graphical separation, applying the
    statement's regime intervention first when one is set."""
    from .docalc import intervene
    from .separation import separated

    cache: dict[int, MixedGraph] = {OBSERVATIONAL: g}

    def oracle(stmt: CiStatement) -> bool:
        gr = cache.get(stmt.regime)
        if gr is None:
            gr = cache[stmt.regime] = intervene(g, [stmt.regime])
        return separated(gr, SeparationQuery(stmt.x, stmt.y, stmt.z), criterion)

    return oracle


def gaussian_oracle(sigma, tol: float = 1e-7) -> Callable[[CiStatement], bool]:
    """Oracle that decides observational statements by vanishing partial
    correlations; for a Gaussian, a block is independent exactly when every
    cross pair is."""
    from .sem import ci_test

    def oracle(stmt: CiStatement) -> bool:
        if stmt.regime != OBSERVATIONAL:
            raise ValueError("gaussian oracle only handles observational statements")
        return all(ci_test(sigma, a, b, stmt.z, tol)
                   for a in stmt.x for b in stmt.y)

    return oracle


def verify_statements(stmts: Sequence[CiStatement],
                      oracle: Callable[[CiStatement], bool]) -> tuple[CiStatement, ...]:
    """Evaluate every statement; return the failing ones in input order."""
    return tuple(s for s in stmts if not oracle(s))
