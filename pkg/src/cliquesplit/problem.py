"""
Clique-wise coupled problems: per-clique and per-node oracle bindings.

The stacked evaluators on :class:`ProblemSpec` (``node_grad``, ``node_prox``,
``clique_prox`` ...) loop over the bound oracles, with vectorized paths for
homogeneous bindings (all quadratic, all l1, all consensus sets, all
halfspaces, ...).
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from . import oracles as orc
from .cd import BlockMetric, CdMatrix
from .errors import DimensionMismatch
from .graph import CliqueIndex, CliqueSet, build_clique_index


def _bind(spec, count, what):
    if spec is None:
        return [None] * count
    if isinstance(spec, dict):
        out = [None] * count
        for k, v in spec.items():
            if not 0 <= k < count:
                raise DimensionMismatch(f"{what} index {k} out of range")
            out[k] = v
        return out
    spec = list(spec)
    if len(spec) != count:
        raise DimensionMismatch(f"expected {count} {what} oracles, got {len(spec)}")
    return spec


def _all(items, cls):
    return len(items) > 0 and all(isinstance(o, cls) for o in items)


class ProblemSpec:
    """A validated instance of the clique-wise coupled problem.

    Use :func:`assemble_problem` rather than calling this directly.
    """

    def __init__(self, graph, clique_index, cd, node_f, node_g, clique_f, clique_g,
                 attested_optimal=True, name=""):
        self.graph = graph
        self.clique_index = clique_index
        self.cd = cd
        self.metric = BlockMetric(cd)
        self.node_f, self.node_g = node_f, node_g
        self.clique_f, self.clique_g = clique_f, clique_g
        self.attested_optimal = attested_optimal
        self.name = name
        self._validate()
        self._prepare()

    # -- validation and constants -----------------------------------------

    def _validate(self):
        cd = self.cd
        for i in range(cd.n):
            for o in (self.node_f[i], self.node_g[i]):
                if o is not None and o.dim is not None and o.dim != cd.node_dims[i]:
                    raise DimensionMismatch(f"node {i + 1}: oracle dim {o.dim} != {cd.node_dims[i]}")
        for l in range(len(cd.cliques)):
            for o in (self.clique_f[l], self.clique_g[l]):
                if o is not None and o.dim is not None and o.dim != cd.clique_dims[l]:
                    raise DimensionMismatch(f"clique {l + 1}: oracle dim {o.dim} != {cd.clique_dims[l]}")

    @property
    def n(self):
        return self.cd.n

    @property
    def node_lipschitz(self):
        return np.array([0.0 if f is None else f.lipschitz for f in self.node_f])

    @property
    def node_strong_convexity(self):
        return np.array([0.0 if f is None else f.strong_convexity for f in self.node_f])

    @property
    def clique_lipschitz(self):
        return np.array([0.0 if f is None else f.lipschitz for f in self.clique_f])

    @property
    def L_max(self):
        return float(self.clique_lipschitz.max(initial=0.0))

    @property
    def L_hat_max(self):
        return float(self.node_lipschitz.max(initial=0.0))

    @property
    def cddys_denominator(self):
        """``max_l L_l + max_i L_i / |Q^i|``; steps below ``2/denominator`` converge."""
        return self.L_max + float((self.node_lipschitz / self.cd.node_counts).max(initial=0.0))

    @property
    def vm_denominator(self):
        """``max_l max_{j in C_l} |Q^j| L_l + max_i L_i`` for the block-metric variant."""
        counts = self.cd.node_counts
        per_clique = [max(counts[j] for j in c) * L for c, L in zip(self.cd.cliques, self.clique_lipschitz)]
        return float(max(per_clique, default=0.0)) + self.L_hat_max

    @property
    def is_consensus(self):
        return _all(self.clique_g, orc.ConsensusSet)

    @property
    def has_node_prox(self):
        return any(g is not None and not isinstance(g, orc.ZeroProx) for g in self.node_g)

    @property
    def has_clique_smooth(self):
        return any(f is not None and not isinstance(f, orc.ZeroSmooth) for f in self.clique_f)

    # -- precomputed fast paths ----------------------------------------------

    def _prepare(self):
        cd = self.cd
        nf = [f for f in self.node_f if f is not None]
        self._node_quad = None
        if len(nf) == cd.n and _all(nf, orc.Quadratic):
            self._node_quad = (
                sp.block_diag([f.hessian for f in nf], format="csr"),
                np.concatenate([f.linear for f in nf]),
                sp.block_diag([f.A for f in nf], format="csr"),
                np.concatenate([f.b for f in nf]),
            )
        ng = [g for g in self.node_g if g is not None and not isinstance(g, orc.ZeroProx)]
        self._node_prox_kind = "loop"
        if not ng:
            self._node_prox_kind = "zero"
        elif len(ng) == cd.n and _all(ng, orc.L1Norm):
            self._node_prox_kind = "l1"
            self._l1_levels = np.array([g.lam for g in ng])[cd.coord_node]
        elif len(ng) == cd.n and _all(ng, orc.NonNegative):
            self._node_prox_kind = "nonneg"

        cg = [g for g in self.clique_g if g is not None and not isinstance(g, orc.ZeroProx)]
        self._clique_prox_kind = "loop"
        if not cg:
            self._clique_prox_kind = "zero"
        elif self.is_consensus:
            self._clique_prox_kind = "consensus"
            comp = cd.gather - cd.node_offsets[cd.lifted_node]
            width = int(cd.node_dims.max())
            _, self._cons_key = np.unique(cd.lifted_clique * width + comp, return_inverse=True)
        elif len(cg) == len(cd.cliques) and _all(self.clique_g, orc.HalfSpace):
            self._clique_prox_kind = "halfspace"
            self._hs_normal = np.concatenate([g.normal for g in self.clique_g])
            self._hs_offset = np.array([g.offset for g in self.clique_g])
        self._clique_smooth = [(l, f) for l, f in enumerate(self.clique_f)
                               if f is not None and not isinstance(f, orc.ZeroSmooth)]
        self._clique_quad = None
        if self._clique_smooth and _all(self.clique_f, orc.Quadratic):
            self._clique_quad = (
                sp.block_diag([f.hessian for f in self.clique_f], format="csr"),
                np.concatenate([f.linear for f in self.clique_f]),
                sp.block_diag([f.A for f in self.clique_f], format="csr"),
                np.concatenate([f.b for f in self.clique_f]),
            )
        self._node_values = [(i, g) for i, g in enumerate(self.node_g)
                             if g is not None and not g.is_indicator and not isinstance(g, orc.ZeroProx)]
        self._clique_values = [(l, g) for l, g in enumerate(self.clique_g)
                               if g is not None and not g.is_indicator and not isinstance(g, orc.ZeroProx)]

    # -- node-level evaluators -----------------------------------------------

    def node_grad(self, x):
        x = np.asarray(x, dtype=float)
        if self._node_quad is not None:
            hess, lin, _, _ = self._node_quad
            return hess @ x - lin
        out = np.zeros(self.cd.d)
        for i, f in enumerate(self.node_f):
            if f is not None:
                s = self.cd.node_slice(i)
                out[s] = f.grad(x[s])
        return out

    def node_smooth_value(self, x):
        x = np.asarray(x, dtype=float)
        if self._node_quad is not None:
            _, _, a, b = self._node_quad
            r = a @ x - b
            return 0.5 * float(r @ r)
        return sum(f.value(x[self.cd.node_slice(i)]) for i, f in enumerate(self.node_f) if f is not None)

    def node_prox(self, v, node_steps):
        """Apply ``prox_{s_i g_i}`` blockwise; ``node_steps`` holds one step per node."""
        v = np.asarray(v, dtype=float)
        kind = self._node_prox_kind
        if kind == "zero":
            return v.copy()
        if kind == "nonneg":
            return np.maximum(v, 0.0)
        steps = np.broadcast_to(np.asarray(node_steps, dtype=float), (self.cd.n,))
        if kind == "l1":
            level = self._l1_levels * steps[self.cd.coord_node]
            return np.sign(v) * np.maximum(np.abs(v) - level, 0.0)
        out = v.copy()
        for i, g in enumerate(self.node_g):
            if g is not None:
                s = self.cd.node_slice(i)
                out[s] = g.prox(v[s], steps[i])
        return out

    def node_nonsmooth_value(self, x):
        x = np.asarray(x, dtype=float)
        if self._node_prox_kind == "l1":
            return float(self._l1_levels @ np.abs(x))
        return sum(g.value(x[self.cd.node_slice(i)]) for i, g in self._node_values)

    # -- clique-level evaluators ---------------------------------------------

    def clique_grad(self, y):
        y = np.asarray(y, dtype=float)
        if self._clique_quad is not None:
            hess, lin, _, _ = self._clique_quad
            return hess @ y - lin
        out = np.zeros(self.cd.d_hat)
        for l, f in self._clique_smooth:
            s = self.cd.clique_slice(l)
            out[s] = f.grad(y[s])
        return out

    def clique_smooth_value(self, y):
        y = np.asarray(y, dtype=float)
        if self._clique_quad is not None:
            _, _, a, b = self._clique_quad
            r = a @ y - b
            return 0.5 * float(r @ r)
        return sum(f.value(y[self.cd.clique_slice(l)]) for l, f in self._clique_smooth)

    def clique_prox(self, y, step, weights=None):
        """Blockwise ``prox_{step g_l}`` under diagonal metric ``weights`` (lifted length)."""
        y = np.asarray(y, dtype=float)
        kind = self._clique_prox_kind
        if kind == "zero":
            return y.copy()
        w = np.ones(self.cd.d_hat) if weights is None else np.asarray(weights, dtype=float)
        if kind == "consensus":
            key = self._cons_key
            theta = np.bincount(key, weights=w * y) / np.bincount(key, weights=w)
            return theta[key]
        if kind == "halfspace":
            lc, a = self.cd.lifted_clique, self._hs_normal
            winv_a = a / w
            excess = np.bincount(lc, weights=a * y, minlength=len(self._hs_offset)) - self._hs_offset
            scale = np.maximum(excess, 0.0) / np.bincount(lc, weights=a * winv_a, minlength=len(self._hs_offset))
            return y - scale[lc] * winv_a
        out = y.copy()
        for l, g in enumerate(self.clique_g):
            if g is not None:
                s = self.cd.clique_slice(l)
                out[s] = g.prox(y[s], step, w[s])
        return out

    def clique_nonsmooth_value(self, y):
        y = np.asarray(y, dtype=float)
        return sum(g.value(y[self.cd.clique_slice(l)]) for l, g in self._clique_values)

    # -- whole problem -------------------------------------------------------

    def objective(self, x):
        """Sum of all finite terms; indicator terms are reported by :meth:`feasibility`."""
        y = self.cd.lift(x)
        return (self.node_smooth_value(x) + self.node_nonsmooth_value(x)
                + self.clique_smooth_value(y) + self.clique_nonsmooth_value(y))

    def feasibility(self, x):
        """Largest constraint violation among node and clique indicators."""
        x = np.asarray(x, dtype=float)
        y = self.cd.lift(x)
        node = max((g.violation(x[self.cd.node_slice(i)]) for i, g in enumerate(self.node_g)
                    if g is not None and g.is_indicator), default=0.0)
        clique = max((g.violation(y[self.cd.clique_slice(l)]) for l, g in enumerate(self.clique_g)
                      if g is not None and g.is_indicator), default=0.0)
        return {"node": float(node), "clique": float(clique)}


def assemble_problem(graph, cliques, node_dims=1, node_f=None, node_g=None,
                     clique_f=None, clique_g=None, attested_optimal=True, name=""):
    """Bind oracles to a graph and clique family.

    Parameters
    ----------
    graph : graph.Graph
    cliques : graph.CliqueSet or graph.CliqueIndex
    node_dims : int or sequence of int
    node_f, node_g, clique_f, clique_g : list or dict, optional
        One oracle per node / clique (``None`` entries allowed), or a dict
        from index to oracle. Missing oracles are identically zero.
    attested_optimal : bool
        Caller's statement that the problem has an optimal solution; this
        cannot be checked in general.

    Raises
    ------
    UncoveredNode
        If some node lies in no clique.
    DimensionMismatch
        If an oracle's dimension disagrees with its block.
    """
    if isinstance(cliques, CliqueIndex):
        ci = cliques
    elif isinstance(cliques, CliqueSet):
        ci = build_clique_index(graph, cliques)
    else:
        raise TypeError("cliques must be a CliqueSet or CliqueIndex")
    cd = CdMatrix(ci, node_dims)
    q = len(ci.cliques)
    return ProblemSpec(
        graph, ci, cd,
        _bind(node_f, cd.n, "node"), _bind(node_g, cd.n, "node"),
        _bind(clique_f, q, "clique"), _bind(clique_g, q, "clique"),
        attested_optimal=attested_optimal, name=name,
    )


def consensus_constraints(ci, m=1):
    """One consensus-set indicator per clique."""
    return [orc.ConsensusSet(len(c), m) for c in ci.cliques]
