import itertools
import sys

import numpy as np
import pytest

from cliquesplit import oracles as orc
from cliquesplit.graph import Graph, build_clique_index, enumerate_cliques, erdos_renyi
from cliquesplit.problem import assemble_problem, consensus_constraints


def path_graph(n):
    return Graph.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def complete_graph(n):
    return Graph.from_edges(n, itertools.combinations(range(n), 2))


def clique_index(g, kind="maximal"):
    return build_clique_index(g, enumerate_cliques(g, kind))


def consensus_quadratic(g, kind="maximal", m=1, seed=0, scale=(1.0, 2.0), node_g=None):
    """Strongly convex consensus problem with node costs ``a_i/2 ||x - c_i||^2``."""
    rng = np.random.default_rng(seed)
    ci = clique_index(g, kind)
    node_f = []
    for _ in range(g.n):
        a = rng.uniform(*scale)
        node_f.append(orc.Quadratic(np.sqrt(a), np.sqrt(a) * rng.normal(size=m)))
    return assemble_problem(g, ci, m, node_f=node_f, node_g=node_g,
                            clique_g=consensus_constraints(ci, m))


def consensus_lasso_small(g, m, seed, lam=0.05, kind="maximal"):
    rng = np.random.default_rng(seed)
    ci = clique_index(g, kind)
    node_f = [orc.Quadratic(np.eye(m) + 0.3 * rng.normal(size=(m, m)), rng.normal(size=m))
              for _ in range(g.n)]
    return assemble_problem(g, ci, m, node_f=node_f, node_g=[orc.L1Norm(lam)] * g.n,
                            clique_g=consensus_constraints(ci, m))


@pytest.fixture
def example1():
    """Path 1-2-3 with edge cliques C_1 = {1,2}, C_2 = {2,3} (0-based here)."""
    g = path_graph(3)
    return g, clique_index(g, "edge")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_connected(n, p, seed):
    return erdos_renyi(n, p, seed, connected=True)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
