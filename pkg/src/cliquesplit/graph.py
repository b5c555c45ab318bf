"""
Undirected graphs, clique enumeration and the clique index sets.

Nodes are 0-based in the Python API. Files and the command line use 1-based
labels; conversion happens in :func:`read_graph` / :func:`write_graph`.
"""

from __future__ import annotations

import enum
import itertools
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import AllCliquesOverflow, ConfigError, UncoveredNode

DEFAULT_ALL_CAP = 10_000


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph on nodes ``0..n-1``.

    Edges are stored once as ordered pairs ``(i, j)`` with ``i < j``.
    """

    n: int
    edges: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("graph needs at least one node")
        norm = set()
        for i, j in self.edges:
            i, j = int(i), int(j)
            if i == j:
                raise ValueError(f"self-loop at node {i}")
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise ValueError(f"edge ({i}, {j}) out of range for n={self.n}")
            norm.add((min(i, j), max(i, j)))
        object.__setattr__(self, "edges", frozenset(norm))
        adj = [set() for _ in range(self.n)]
        for i, j in norm:
            adj[i].add(j)
            adj[j].add(i)
        object.__setattr__(self, "_adj", tuple(frozenset(a) for a in adj))

    @classmethod
    def from_edges(cls, n, edges):
        return cls(n, frozenset(edges))

    @classmethod
    def from_cliques(cls, n, cliques):
        """Smallest graph in which every given node set is complete."""
        edges = set()
        for c in cliques:
            edges.update(itertools.combinations(sorted(c), 2))
        return cls(n, frozenset(edges))

    def adjacent(self, i):
        """Neighbors of ``i``, excluding ``i`` itself."""
        return self._adj[i]

    def neighbor_set(self, i):
        """Closed neighborhood N_i (always contains ``i``)."""
        return self._adj[i] | {i}

    def degree(self, i):
        return len(self._adj[i])

    def degrees(self):
        return np.array([len(a) for a in self._adj], dtype=int)

    def has_edge(self, i, j):
        return j in self._adj[i]

    def is_complete_on(self, nodes):
        nodes = list(nodes)
        return all(self.has_edge(a, b) for a, b in itertools.combinations(nodes, 2))

    def components(self):
        seen = [False] * self.n
        comps = []
        for s in range(self.n):
            if seen[s]:
                continue
            seen[s] = True
            comp, queue = [], deque([s])
            while queue:
                u = queue.popleft()
                comp.append(u)
                for v in sorted(self._adj[u]):
                    if not seen[v]:
                        seen[v] = True
                        queue.append(v)
            comps.append(sorted(comp))
        return comps

    def is_connected(self):
        return len(self.components()) == 1

    def laplacian(self):
        lap = np.diag(self.degrees().astype(float))
        for i, j in self.edges:
            lap[i, j] = lap[j, i] = -1.0
        return lap

    def adjacency(self):
        a = np.zeros((self.n, self.n))
        for i, j in self.edges:
            a[i, j] = a[j, i] = 1.0
        return a


def erdos_renyi(n, p, seed, connected=False, max_tries=10_000):
    """Sample G(n, p) from an explicit seed.

    With ``connected=True`` samples are rejected until connected; the same
    generator stream is reused so the result depends only on ``seed``.
    """
    rng = np.random.default_rng(seed)
    pairs = list(itertools.combinations(range(n), 2))
    for _ in range(max_tries):
        keep = rng.random(len(pairs)) < p
        g = Graph(n, frozenset(pr for pr, k in zip(pairs, keep) if k))
        if not connected or g.is_connected():
            return g
    raise RuntimeError(f"no connected G({n}, {p}) sample after {max_tries} tries")


def read_graph(path):
    """Read the edge-list format: a ``n <count>`` header, then ``i j`` lines (1-based)."""
    n = None
    edges = []
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if n is None:
            if len(parts) != 2 or parts[0] != "n":
                raise ConfigError(f"{path}:{lineno}: expected header 'n <count>'")
            n = int(parts[1])
            continue
        if len(parts) != 2:
            raise ConfigError(f"{path}:{lineno}: expected 'i j'")
        i, j = int(parts[0]), int(parts[1])
        if not (1 <= i <= n and 1 <= j <= n):
            raise ConfigError(f"{path}:{lineno}: node label out of range 1..{n}")
        edges.append((i - 1, j - 1))
    if n is None:
        raise ConfigError(f"{path}: empty graph file")
    return Graph(n, frozenset(edges))


def write_graph(g, path):
    lines = [f"n {g.n}"]
    lines += [f"{i + 1} {j + 1}" for i, j in sorted(g.edges)]
    Path(path).write_text("\n".join(lines) + "\n")


class CliqueKind(str, enum.Enum):
    ALL = "all"
    MAXIMAL = "maximal"
    EDGE = "edge"
    CUSTOM = "custom"


@dataclass(frozen=True)
class CliqueSet:
    cliques: tuple
    kind: CliqueKind

    def __len__(self):
        return len(self.cliques)

    def __iter__(self):
        return iter(self.cliques)

    def __getitem__(self, l):
        return self.cliques[l]


def _bron_kerbosch(g):
    # Iterative Bron-Kerbosch with Tomita pivoting.
    found = []
    stack = [(frozenset(), frozenset(range(g.n)), frozenset())]
    while stack:
        r, p, x = stack.pop()
        if not p and not x:
            found.append(tuple(sorted(r)))
            continue
        pivot = max(p | x, key=lambda u: (len(p & g.adjacent(u)), -u))
        for v in sorted(p - g.adjacent(pivot)):
            nv = g.adjacent(v)
            stack.append((r | {v}, p & nv, x & nv))
            p = p - {v}
            x = x | {v}
    return found


def _sort_cliques(cliques):
    # by size, then lexicographically by sorted members
    return tuple(sorted(set(tuple(sorted(c)) for c in cliques), key=lambda c: (len(c), c)))


def enumerate_cliques(g, kind, cap=DEFAULT_ALL_CAP):
    """Enumerate cliques of ``g`` of the given kind, ordered by size then lexicographically.

    Parameters
    ----------
    g : Graph
    kind : CliqueKind or str
        ``"maximal"``, ``"edge"`` or ``"all"``.
    cap : int
        Upper limit on the number of cliques for ``kind="all"``.

    Raises
    ------
    AllCliquesOverflow
        If ``kind="all"`` would produce more than ``cap`` cliques.
    """
    kind = CliqueKind(kind)
    if kind is CliqueKind.EDGE:
        return CliqueSet(_sort_cliques(g.edges), kind)
    maximal = _bron_kerbosch(g)
    if kind is CliqueKind.MAXIMAL:
        return CliqueSet(_sort_cliques(maximal), kind)
    if kind is CliqueKind.ALL:
        subsets = set()
        for c in maximal:
            if 2 ** len(c) - 1 > cap:
                raise AllCliquesOverflow(f"a maximal clique of size {len(c)} exceeds cap {cap}")
            for r in range(1, len(c) + 1):
                subsets.update(itertools.combinations(c, r))
            if len(subsets) > cap:
                raise AllCliquesOverflow(f"more than {cap} cliques")
        return CliqueSet(_sort_cliques(subsets), kind)
    raise ValueError("use custom_cliques() for user-supplied clique families")


def custom_cliques(g, cliques):
    """Validate a user-supplied clique family (0-based node sets)."""
    out = _sort_cliques(cliques)
    for c in out:
        if not c:
            raise ValueError("empty clique")
        if not g.is_complete_on(c):
            raise ValueError(f"{[v + 1 for v in c]} is not a clique of the graph")
    return CliqueSet(out, CliqueKind.CUSTOM)


@dataclass(frozen=True)
class CliqueIndex:
    """Index sets derived from a clique family.

    ``per_node[i]`` lists the indices of cliques containing node ``i``;
    ``per_pair[(i, j)]`` (``i < j``, edges only) is their intersection.
    """

    n: int
    cliques: tuple
    per_node: tuple
    per_pair: dict

    @property
    def counts(self):
        """|Q^i| for every node, as an int array."""
        return np.array([len(q) for q in self.per_node], dtype=int)

    def shared(self, i, j):
        if i == j:
            return self.per_node[i]
        return sorted(set(self.per_node[i]) & set(self.per_node[j]))


def build_clique_index(g, cs, require_cover=True):
    """Compute Q^i for every node and Q^ij for every edge.

    Raises
    ------
    UncoveredNode
        If ``require_cover`` and some node lies in no clique.
    """
    cliques = tuple(cs.cliques) if isinstance(cs, CliqueSet) else _sort_cliques(cs)
    per_node = [[] for _ in range(g.n)]
    for l, c in enumerate(cliques):
        for v in c:
            per_node[v].append(l)
    if require_cover:
        for i, q in enumerate(per_node):
            if not q:
                raise UncoveredNode(i)
    per_pair = {}
    for i, j in sorted(g.edges):
        per_pair[(i, j)] = sorted(set(per_node[i]) & set(per_node[j]))
    return CliqueIndex(g.n, cliques, tuple(tuple(q) for q in per_node), per_pair)


@dataclass(frozen=True)
class AssumptionReport:
    assumption1: bool
    assumption2: bool
    connected: bool

    def all(self):
        return self.assumption1 and self.assumption2 and self.connected


def check_assumptions(ci, g):
    """Diagnose node coverage, the edge/shared-clique equivalence and connectivity."""
    a1 = all(len(q) > 0 for q in ci.per_node)
    a2 = True
    for i in range(g.n):
        qi = set(ci.per_node[i])
        for j in range(i + 1, g.n):
            if bool(qi & set(ci.per_node[j])) != g.has_edge(i, j):
                a2 = False
                break
        if not a2:
            break
    return AssumptionReport(a1, a2, g.is_connected())
