import math

import pytest
from hypothesis import given, settings, strategies as st

from stsptwpd.graph import (
    CapacityError,
    Graph,
    UNREACHABLE,
    is_strongly_connected,
    longest_simple_path,
    metric_closure,
    path_length,
    reconstruct_path,
    shortest_paths,
)
from stsptwpd.instance import generate_instance

from oracles import arc_list, bellman_ford, brute_longest


@pytest.fixture
def tri():
    return Graph.from_arcs(range(3), [(0, 1, 3.0), (1, 2, 4.0), (0, 2, 10.0), (2, 0, 5.0)])


def test_dijkstra_prefers_two_hop_path(tri):
    tree = shortest_paths(tri, 0)
    assert tree[2][0] == 7.0
    assert reconstruct_path(tri, tree, 2) == [0, 1]
    assert tree[0] == (0.0, None)


def test_dijkstra_rejects_unknown_source(tri):
    with pytest.raises(ValueError):
        shortest_paths(tri, 9)


def test_unreachable_marker():
    g = Graph.from_arcs(range(3), [(0, 1, 1.0), (1, 0, 1.0), (2, 0, 1.0)])
    tree = shortest_paths(g, 0)
    assert tree[2] == (UNREACHABLE, None)
    assert reconstruct_path(g, tree, 2) is None


@pytest.mark.parametrize("seed", range(5))
def test_dijkstra_matches_bellman_ford(seed):
    g = generate_instance(6, seed).graph
    for src in g.nodes:
        ref = bellman_ford(g.nodes, arc_list(g), src)
        got = shortest_paths(g, src)
        for v in g.nodes:
            assert got[v][0] == pytest.approx(ref[v], abs=1e-9)


def test_avoid_blocks_transit_only():
    g = Graph.from_arcs(range(3), [(1, 0, 1.0), (0, 2, 1.0), (1, 2, 5.0), (2, 1, 1.0), (0, 1, 1.0)])
    assert shortest_paths(g, 1)[2][0] == 2.0
    blocked = shortest_paths(g, 1, avoid=[0])
    assert blocked[2][0] == 5.0
    assert blocked[0][0] == 1.0  # an avoided node can still be reached


def test_longest_triangle(tri):
    assert longest_simple_path(tri, 0, [2]) == {2: 10.0}


def test_longest_single_arc():
    g = Graph.from_arcs(range(2), [(0, 1, 5.0), (1, 0, 5.0)])
    assert longest_simple_path(g, 0, [1])[1] == 5.0 == shortest_paths(g, 0)[1][0]


@pytest.mark.parametrize("seed", range(4))
def test_longest_matches_enumeration(seed):
    g = generate_instance(7, seed).graph
    ref = brute_longest(g.nodes, arc_list(g), 0)
    got = longest_simple_path(g, 0)
    for v in g.nodes:
        assert got[v] == pytest.approx(ref[v], abs=1e-9)


def test_longest_cap():
    g = Graph.from_arcs(range(5), [(i, (i + 1) % 5, 1.0) for i in range(5)])
    with pytest.raises(CapacityError, match="max_nodes"):
        longest_simple_path(g, 0, max_nodes=4)
    assert longest_simple_path(g, 0, max_nodes=5)[4] == 4.0


def test_closure_triangle(tri):
    c = metric_closure(tri, [0, 2])
    assert c[(0, 2)].distance == 7.0 and c[(0, 2)].arcs == (0, 1)
    assert c[(0, 0)].distance == 0.0 and c[(0, 0)].arcs == ()
    assert c[(2, 2)].arcs == ()


def test_closure_unknown_node(tri):
    with pytest.raises(ValueError):
        metric_closure(tri, [0, 7])


@pytest.mark.parametrize("seed", range(3))
def test_closure_matches_per_source(seed):
    g = generate_instance(8, seed).graph
    c = metric_closure(g, g.nodes)
    for u in g.nodes:
        tree = shortest_paths(g, u)
        for v in g.nodes:
            assert c[(u, v)].distance == tree[v][0]


@pytest.mark.parametrize("seed", range(3))
def test_closure_properties(seed):
    g = generate_instance(9, seed).graph
    c = metric_closure(g, g.nodes)
    longest = {u: longest_simple_path(g, u) for u in g.nodes}
    for (u, v), e in c.items():
        # path sums reproduce the distance bit for bit
        assert path_length(g, e.arcs) == e.distance
        assert longest[u][v] >= e.distance
        for w in g.nodes:
            assert e.distance <= c[(u, w)].distance + c[(w, v)].distance + 1e-9


def test_graph_invariants():
    with pytest.raises(ValueError, match="duplicate"):
        Graph.from_arcs(range(2), [(0, 1, 1.0), (0, 1, 2.0), (1, 0, 1.0)])
    with pytest.raises(ValueError, match="non-positive"):
        Graph.from_arcs(range(2), [(0, 1, 0.0), (1, 0, 1.0)])
    with pytest.raises(ValueError, match="depot"):
        Graph.from_arcs([1, 2], [(1, 2, 1.0)])
    with pytest.raises(ValueError, match="depot"):
        Graph.from_arcs(range(2), [(1, 0, 1.0)])


def test_strong_connectivity_check():
    assert not is_strongly_connected(Graph.from_arcs(range(3), [(0, 1, 1.0), (1, 0, 1.0), (1, 2, 1.0)]))
    assert is_strongly_connected(Graph.from_arcs(range(3), [(0, 1, 1.0), (1, 2, 1.0), (2, 0, 1.0)]))


@st.composite
def digraphs(draw):
    n = draw(st.integers(2, 6))
    pairs = [(i, j) for i in range(n) for j in range(n) if i != j]
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True, min_size=1))
    chosen = sorted(set(chosen) | {(0, 1), (1, 0)})
    lengths = draw(st.lists(st.integers(1, 20), min_size=len(chosen), max_size=len(chosen)))
    return Graph.from_arcs(range(n), [(i, j, float(l)) for (i, j), l in zip(chosen, lengths)])


@settings(max_examples=60, deadline=None)
@given(digraphs())
def test_random_graphs_against_oracles(g):
    src = 0
    ref = bellman_ford(g.nodes, arc_list(g), src)
    got = shortest_paths(g, src)
    lng = longest_simple_path(g, src)
    brute = brute_longest(g.nodes, arc_list(g), src)
    for v in g.nodes:
        assert got[v][0] == ref[v]
        assert lng[v] == brute[v]
        if math.isfinite(ref[v]):
            assert lng[v] >= got[v][0]
