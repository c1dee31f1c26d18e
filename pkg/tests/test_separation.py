import random
from itertools import combinations

import pytest
from hypothesis import given, settings, strategies as st

from ampadmg import (
    Dialect,
    MalformedQueryError,
    MixedGraph,
    SeparationQuery,
    UnsupportedDialectError,
    augmented_graph,
    connects_path,
    connects_route,
    enumerate_graphs,
    extended_node_set,
    extended_subgraph,
    marginal_graph,
    separated,
    separated_with_determinism,
)
from conftest import random_graph, singleton_queries


# -- brute-force oracles ------------------------------------------------------
#
# Independent re-implementations over explicit edge lists.  The library works
# on bitmask automata; these work on simple-path and bounded-walk enumeration,
# so agreement is meaningful evidence.


def _edges(g):
    return ([(t, h, "arrow") for t, h in g.arrows]
            + [(a, b, "line") for a, b in g.lines]
            + [(a, b, "biarrow") for a, b in g.biarrows])


def _mark_at(edge, v):
    # How the edge reads at endpoint v: the mark a walk carries on arrival.
    a, b, kind = edge
    if kind == "line":
        return "line"
    if kind == "biarrow":
        return "head"
    return "head" if v == b else "tail"


def _is_collider(arrive, depart):
    return "tail" not in (arrive, depart) and not (arrive == depart == "line")


def oracle_ancestors(g, s):
    out = set(s)
    changed = True
    while changed:
        changed = False
        for t, h in g.arrows:
            if h in out and t not in out:
                out.add(t)
                changed = True
    return out


def oracle_path_connected(g, x, y, z):
    """Criterion-1 verdict by exhaustive simple-path enumeration."""
    z = set(z)
    anz = oracle_ancestors(g, z)
    edges = _edges(g)
    parents = {v: {t for t, h in g.arrows if h == v} for v in range(1, g.n + 1)}

    def search(node, arrive, visited):
        for e in edges:
            if node not in (e[0], e[1]):
                continue
            nxt = e[1] if node == e[0] else e[0]
            if nxt in visited:
                continue
            depart = _mark_at(e, node)
            if _is_collider(arrive, depart):
                if node not in anz:
                    continue
            elif node in z and not (arrive == depart == "line"
                                    and parents[node] - z):
                continue
            if nxt in y:
                return True
            if search(nxt, _mark_at(e, nxt), visited | {nxt}):
                return True
        return False

    for s in x:
        for e in edges:
            if s not in (e[0], e[1]):
                continue
            nxt = e[1] if s == e[0] else e[0]
            if nxt in y:
                return True
            if nxt not in x and search(nxt, _mark_at(e, nxt), {s, nxt}):
                return True
    return False


def oracle_route_connected(g, x, y, z, max_edges=None):
    """Criterion-2 verdict by walk enumeration truncated at 2n edges; a
    connecting route always has a witness no longer than that."""
    z = set(z)
    edges = _edges(g)
    limit = max_edges if max_edges is not None else 2 * g.n

    def search(node, arrive, used):
        if used >= limit:
            return False
        for e in edges:
            if node not in (e[0], e[1]):
                continue
            nxt = e[1] if node == e[0] else e[0]
            depart = _mark_at(e, node)
            if _is_collider(arrive, depart) != (node in z):
                continue
            if nxt in y:
                return True
            if search(nxt, _mark_at(e, nxt), used + 1):
                return True
        return False

    for s in x:
        for e in edges:
            if s not in (e[0], e[1]):
                continue
            nxt = e[1] if s == e[0] else e[0]
            if nxt in y:
                return True
            if search(nxt, _mark_at(e, nxt), 1):
                return True
    return False


# -- queries ------------------------------------------------------------------


def test_query_validation():
    SeparationQuery({1}, {2}, {3})
    with pytest.raises(MalformedQueryError):
        SeparationQuery(frozenset(), {2}, frozenset())
    with pytest.raises(MalformedQueryError):
        SeparationQuery({1}, frozenset(), frozenset())
    with pytest.raises(MalformedQueryError):
        SeparationQuery({1}, {1, 2}, frozenset())
    with pytest.raises(MalformedQueryError):
        SeparationQuery({1}, {2}, {2, 3})


# -- route engine -------------------------------------------------------------


def test_route_examples(double_edge3, ident_alt):
    assert connects_route(double_edge3, SeparationQuery({1}, {3}, frozenset()))
    assert connects_route(double_edge3, SeparationQuery({1}, {3}, {2}))
    assert not connects_route(MixedGraph(3), SeparationQuery({1}, {3}, {2}))
    assert connects_route(ident_alt, SeparationQuery({1}, {2}, {3}))


def test_route_matches_walk_oracle_exhaustive_n3():
    for dialect in (Dialect.ALTERNATIVE, Dialect.ORIGINAL):
        for g in enumerate_graphs(3, dialect):
            for x, y, z in singleton_queries(3):
                q = SeparationQuery({x}, {y}, z)
                assert connects_route(g, q) == oracle_route_connected(
                    g, {x}, {y}, z), (g, x, y, z)


def test_route_matches_walk_oracle_random_n4():
    rng = random.Random(41)
    for _ in range(40):
        g = random_graph(rng, 4, biarrow_ok=True)
        for x, y, z in singleton_queries(4):
            q = SeparationQuery({x}, {y}, z)
            assert connects_route(g, q) == oracle_route_connected(
                g, {x}, {y}, z), (g, x, y, z)


# -- path engine --------------------------------------------------------------


def test_path_examples(double_edge3):
    assert connects_path(double_edge3, SeparationQuery({1}, {3}, {2}))
    assert connects_path(MixedGraph(2, arrows={(1, 2)}),
                         SeparationQuery({1}, {2}, frozenset()))
    collider = MixedGraph(3, arrows={(1, 3), (2, 3)})
    assert not connects_path(collider, SeparationQuery({1}, {2}, frozenset()))
    assert connects_path(collider, SeparationQuery({1}, {2}, {3}))


def test_path_matches_path_oracle_exhaustive_n3():
    for g in enumerate_graphs(3, Dialect.ALTERNATIVE):
        for x, y, z in singleton_queries(3):
            q = SeparationQuery({x}, {y}, z)
            assert connects_path(g, q) == oracle_path_connected(
                g, {x}, {y}, z), (g, x, y, z)


def test_path_matches_path_oracle_random_n5():
    rng = random.Random(42)
    for _ in range(60):
        g = random_graph(rng, 5)
        for x, y, z in singleton_queries(5):
            q = SeparationQuery({x}, {y}, z)
            assert connects_path(g, q) == oracle_path_connected(
                g, {x}, {y}, z), (g, x, y, z)


def test_path_rejects_biarrows(ident_orig):
    with pytest.raises(UnsupportedDialectError):
        connects_path(ident_orig, SeparationQuery({1}, {2}, frozenset()))


# -- graph constructions --------------------------------------------------------


def test_extended_subgraph(mixed6):
    ext = extended_subgraph(mixed6, {1, 2, 4})
    assert ext.arrows == {(1, 2), (1, 4), (2, 4)}
    assert ext.lines == {(3, 4), (3, 5), (4, 6), (5, 6)}
    assert extended_node_set(mixed6, {1, 2, 4}) == {1, 2, 3, 4, 5, 6}
    assert extended_subgraph(mixed6, range(1, 7)) == mixed6
    assert extended_subgraph(mixed6, frozenset()) == MixedGraph(6)


def test_augmented_graph():
    g = MixedGraph(3, arrows={(1, 3)}, lines={(2, 3)})
    assert augmented_graph(g).lines == {(1, 2), (1, 3), (2, 3)}
    g = MixedGraph(4, arrows={(1, 3), (2, 4)}, lines={(3, 4)})
    assert (1, 2) in augmented_graph(g).lines
    assert augmented_graph(MixedGraph(3)) == MixedGraph(3)


def test_augmented_contains_skeleton(mixed6):
    aug = augmented_graph(mixed6)
    for t, h in mixed6.arrows:
        assert (min(t, h), max(t, h)) in aug.lines
    assert mixed6.lines <= aug.lines


def test_marginal_graph(mixed6):
    chain = MixedGraph(3, lines={(1, 2), (2, 3)})
    assert marginal_graph(chain, {1, 3}).lines == {(1, 3)}
    assert marginal_graph(chain, {1, 2, 3}) == chain
    skel = mixed6.undirected_skeleton()
    assert marginal_graph(skel, {3, 5, 6}).lines == {(3, 5), (3, 6), (5, 6)}


def test_marginal_rejects_directed_input(mixed6):
    with pytest.raises(ValueError):
        marginal_graph(mixed6, {1, 2})


# -- separated ----------------------------------------------------------------


def test_chain_lines_never_separated(chain_lines4):
    for criterion in (1, 2, 3, 4):
        for zpick in range(4):
            z = {v for i, v in enumerate((2, 3)) if zpick >> i & 1}
            q = SeparationQuery({1}, {4}, z)
            assert not separated(chain_lines4, q, criterion=criterion)


def test_single_arrow_connected():
    g = MixedGraph(2, arrows={(1, 2)})
    for criterion in (1, 2, 3, 4):
        assert not separated(g, SeparationQuery({1}, {2}, frozenset()),
                             criterion=criterion)


def test_criteria_reject_biarrows(ident_orig):
    q = SeparationQuery({1}, {2}, frozenset())
    for criterion in (1, 3, 4):
        with pytest.raises(UnsupportedDialectError):
            separated(ident_orig, q, criterion=criterion)
    separated(ident_orig, q, criterion=2)


def test_unknown_criterion(double_edge3):
    with pytest.raises(ValueError):
        separated(double_edge3, SeparationQuery({1}, {3}, frozenset()),
                  criterion=5)


@given(st.integers(0, 10**6))
@settings(max_examples=60, deadline=None)
def test_criteria_agree_on_random_graphs(seed):
    rng = random.Random(seed)
    g = random_graph(rng, rng.randint(2, 5))
    x, y, z = rng.choice(list(singleton_queries(g.n)))
    q = SeparationQuery({x}, {y}, z)
    verdicts = {separated(g, q, criterion=c) for c in (1, 2, 3, 4)}
    assert len(verdicts) == 1


@given(st.integers(0, 10**6))
@settings(max_examples=40, deadline=None)
def test_separated_is_symmetric(seed):
    rng = random.Random(seed)
    g = random_graph(rng, rng.randint(2, 5), biarrow_ok=True)
    x, y, z = rng.choice(list(singleton_queries(g.n)))
    a = separated(g, SeparationQuery({x}, {y}, z))
    b = separated(g, SeparationQuery({y}, {x}, z))
    assert a == b


# -- separation under determinism ----------------------------------------------


def test_identity_closure_matches_plain_criterion():
    rng = random.Random(7)
    identity = frozenset
    for _ in range(200):
        g = random_graph(rng, rng.randint(2, 5))
        x, y, z = rng.choice(list(singleton_queries(g.n)))
        q = SeparationQuery({x}, {y}, z)
        assert (separated_with_determinism(g, q, identity)
                == separated(g, q, criterion=1))


def test_shrinking_closure_rejected(double_edge3):
    q = SeparationQuery({1}, {3}, {2})
    with pytest.raises(ValueError):
        separated_with_determinism(double_edge3, q, lambda z: frozenset())
