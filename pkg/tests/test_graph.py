import itertools

import pytest
from hypothesis import given, settings, strategies as st

from cliquesplit.errors import AllCliquesOverflow, ConfigError, UncoveredNode
from cliquesplit.graph import (
    CliqueKind,
    Graph,
    build_clique_index,
    check_assumptions,
    custom_cliques,
    enumerate_cliques,
    erdos_renyi,
    read_graph,
    write_graph,
)

from conftest import complete_graph, path_graph


def brute_maximal(g):
    # every complete subset not contained in a larger complete subset
    comp = [frozenset(s) for r in range(1, g.n + 1)
            for s in itertools.combinations(range(g.n), r) if g.is_complete_on(s)]
    return {tuple(sorted(c)) for c in comp if not any(c < o for o in comp)}


@st.composite
def small_graphs(draw, max_n=8):
    n = draw(st.integers(1, max_n))
    pairs = list(itertools.combinations(range(n), 2))
    keep = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    return Graph.from_edges(n, [pr for pr, k in zip(pairs, keep) if k])


# -- Graph --------------------------------------------------------------------


def test_edges_are_normalized():
    g = Graph.from_edges(3, [(1, 0), (0, 1), (2, 1)])
    assert g.edges == frozenset({(0, 1), (1, 2)})


def test_self_loop_rejected():
    with pytest.raises(ValueError):
        Graph.from_edges(2, [(1, 1)])


def test_out_of_range_rejected():
    with pytest.raises(ValueError):
        Graph.from_edges(2, [(0, 2)])


def test_neighbor_set_contains_self():
    g = path_graph(3)
    assert g.neighbor_set(1) == {0, 1, 2}
    assert g.neighbor_set(0) == {0, 1}
    assert g.adjacent(0) == {1}


def test_components_and_laplacian():
    g = Graph.from_edges(4, [(0, 1), (2, 3)])
    assert g.components() == [[0, 1], [2, 3]]
    assert not g.is_connected()
    lap = g.laplacian()
    assert (lap.sum(axis=1) == 0).all()
    assert lap[0, 0] == 1 and lap[0, 1] == -1


def test_erdos_renyi_deterministic_and_connected():
    a = erdos_renyi(30, 0.2, 7, connected=True)
    b = erdos_renyi(30, 0.2, 7, connected=True)
    assert a == b
    assert a.is_connected()


def test_graph_file_roundtrip(tmp_path):
    g = erdos_renyi(12, 0.3, 1)
    path = tmp_path / "g.txt"
    write_graph(g, path)
    text = path.read_text().splitlines()
    assert text[0] == "n 12"
    assert min(int(t) for line in text[1:] for t in line.split()) >= 1
    assert read_graph(path) == g


def test_graph_file_comments_and_errors(tmp_path):
    path = tmp_path / "g.txt"
    path.write_text("# a path\nn 3\n1 2  # first edge\n\n2 3\n")
    assert read_graph(path) == path_graph(3)
    path.write_text("n 3\n1 4\n")
    with pytest.raises(ConfigError):
        read_graph(path)
    path.write_text("1 2\n")
    with pytest.raises(ConfigError):
        read_graph(path)


# -- clique enumeration -------------------------------------------------------


def test_path_edge_cliques():
    cs = enumerate_cliques(path_graph(3), "edge")
    assert cs.cliques == ((0, 1), (1, 2))
    assert cs.kind is CliqueKind.EDGE


def test_single_node_maximal():
    assert enumerate_cliques(Graph(1), "maximal").cliques == ((0,),)


def test_triangle_all_cliques():
    cs = enumerate_cliques(complete_graph(3), "all", cap=7)
    assert cs.cliques == ((0,), (1,), (2,), (0, 1), (0, 2), (1, 2), (0, 1, 2))


def test_all_cliques_overflow():
    with pytest.raises(AllCliquesOverflow):
        enumerate_cliques(complete_graph(3), "all", cap=6)
    with pytest.raises(AllCliquesOverflow):
        enumerate_cliques(complete_graph(12), "all", cap=1000)


def test_isolated_nodes_are_maximal_cliques():
    g = Graph.from_edges(4, [(0, 1)])
    assert enumerate_cliques(g, "maximal").cliques == ((2,), (3,), (0, 1))


@settings(max_examples=60, deadline=None)
@given(small_graphs())
def test_maximal_matches_brute_force(g):
    cs = enumerate_cliques(g, "maximal")
    assert set(cs.cliques) == brute_maximal(g)
    assert len(cs.cliques) == len(set(cs.cliques))
    for a, b in itertools.permutations(cs.cliques, 2):
        assert not set(a) <= set(b)


@settings(max_examples=40, deadline=None)
@given(small_graphs(max_n=7))
def test_all_cliques_are_every_complete_subset(g):
    cs = enumerate_cliques(g, "all")
    expected = {s for r in range(1, g.n + 1) for s in itertools.combinations(range(g.n), r)
                if g.is_complete_on(s)}
    assert set(cs.cliques) == expected
    keys = [(len(c), c) for c in cs.cliques]
    assert keys == sorted(keys)


def test_custom_cliques_validated():
    g = path_graph(3)
    assert custom_cliques(g, [(2, 1), (0,)]).cliques == ((0,), (1, 2))
    with pytest.raises(ValueError):
        custom_cliques(g, [(0, 2)])


# -- clique index and assumptions ---------------------------------------------


def test_example1_index(example1):
    g, ci = example1
    assert ci.per_node == ((0,), (0, 1), (1,))
    assert list(ci.counts) == [1, 2, 1]
    assert ci.per_pair == {(0, 1): [0], (1, 2): [1]}


def test_complete_graph_index():
    g = complete_graph(3)
    ci = build_clique_index(g, enumerate_cliques(g, "maximal"))
    assert ci.per_node == ((0,), (0,), (0,))


def test_uncovered_node_reports_one_based_label():
    g = Graph.from_edges(3, [(0, 1)])
    with pytest.raises(UncoveredNode, match="3"):
        build_clique_index(g, enumerate_cliques(g, "edge"))
    ci = build_clique_index(g, enumerate_cliques(g, "edge"), require_cover=False)
    assert not check_assumptions(ci, g).assumption1


def test_union_of_cliques_within_neighborhood():
    g = erdos_renyi(15, 0.4, 3)
    ci = build_clique_index(g, enumerate_cliques(g, "maximal"))
    for i in range(g.n):
        union = set().union(*(ci.cliques[l] for l in ci.per_node[i]))
        assert union <= g.neighbor_set(i)


def test_per_pair_nonempty_exactly_for_edges():
    g = erdos_renyi(10, 0.4, 0)
    ci = build_clique_index(g, enumerate_cliques(g, "maximal"))
    for i, j in itertools.combinations(range(g.n), 2):
        shared = set(ci.per_node[i]) & set(ci.per_node[j])
        assert bool(shared) == g.has_edge(i, j)
        if g.has_edge(i, j):
            assert ci.per_pair[(i, j)] == sorted(shared)


def test_example1_assumptions(example1):
    g, ci = example1
    assert check_assumptions(ci, g).all()


@pytest.mark.parametrize("kind", ["maximal", "edge", "all"])
def test_standard_families_satisfy_assumption2(kind):
    for seed in range(50):
        g = erdos_renyi(9, 0.4, seed, connected=True)
        rep = check_assumptions(build_clique_index(g, enumerate_cliques(g, kind)), g)
        assert rep.assumption1 and rep.assumption2


def test_assumption2_fails_for_partial_family():
    g = complete_graph(3)
    ci = build_clique_index(g, custom_cliques(g, [(0, 1), (1, 2)]))
    assert not check_assumptions(ci, g).assumption2
