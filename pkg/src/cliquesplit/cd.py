"""
Clique-wise duplication operators.

The duplication matrix ``D`` stacks, for each clique, a copy of the node
variables in that clique. It is never formed in the main path: lifting is a
gather and its adjoint a scatter-add, both driven by one index array.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionMismatch

IDENTITY_TOL = 1e-12


class CdMatrix:
    """Duplication operator for a clique index and per-node dimensions.

    Parameters
    ----------
    clique_index : graph.CliqueIndex
        Must cover every node.
    node_dims : int or sequence of int
        Dimension of each node variable. An int means the same for all nodes.
    """

    def __init__(self, clique_index, node_dims=1):
        n = clique_index.n
        if np.isscalar(node_dims):
            node_dims = [int(node_dims)] * n
        node_dims = np.asarray(node_dims, dtype=int)
        if node_dims.shape != (n,) or np.any(node_dims < 1):
            raise DimensionMismatch("node_dims must be n positive integers")
        self.clique_index = clique_index
        self.cliques = clique_index.cliques
        self.n = n
        self.node_dims = node_dims
        self.node_offsets = np.concatenate([[0], np.cumsum(node_dims)])
        self.d = int(self.node_offsets[-1])
        self.clique_dims = np.array([node_dims[list(c)].sum() for c in self.cliques], dtype=int)
        self.clique_offsets = np.concatenate([[0], np.cumsum(self.clique_dims)])
        self.d_hat = int(self.clique_offsets[-1])

        gather = []
        for c in self.cliques:
            for j in c:
                gather.extend(range(self.node_offsets[j], self.node_offsets[j + 1]))
        self.gather = np.asarray(gather, dtype=np.intp)
        # node that owns each node-space coordinate, and each lifted coordinate
        self.coord_node = np.repeat(np.arange(n), node_dims)
        self.lifted_node = self.coord_node[self.gather]
        self.lifted_clique = np.repeat(np.arange(len(self.cliques)), self.clique_dims)

        self.node_counts = clique_index.counts
        # diagonal of D^T D, one entry per node-space coordinate
        self.gram_diag = np.bincount(self.gather, minlength=self.d).astype(float)
        if np.any(self.gram_diag == 0):
            raise DimensionMismatch("every node must belong to a clique")

    @property
    def uniform_dim(self):
        """Common node dimension, or None when nodes differ."""
        m = self.node_dims[0]
        return int(m) if np.all(self.node_dims == m) else None

    def node_slice(self, i):
        return slice(self.node_offsets[i], self.node_offsets[i + 1])

    def clique_slice(self, l):
        return slice(self.clique_offsets[l], self.clique_offsets[l + 1])

    def _check(self, v, size, what):
        v = np.asarray(v, dtype=float)
        if v.shape != (size,):
            raise DimensionMismatch(f"{what} has shape {v.shape}, expected ({size},)")
        return v

    def lift(self, x):
        """``D x``: the per-clique copies of ``x``."""
        return self._check(x, self.d, "node vector")[self.gather]

    def adjoint(self, y):
        """``D^T y``: sum of every clique's copy of each node block."""
        y = self._check(y, self.d_hat, "lifted vector")
        return np.bincount(self.gather, weights=y, minlength=self.d)

    def restrict_ls(self, y):
        """Least-squares solution of ``D x = y``, i.e. the average of the copies."""
        return self.adjoint(y) / self.gram_diag

    def project_im_d(self, y):
        return self.lift(self.restrict_ls(y))

    def lift_many(self, x):
        """Lift a matrix whose rows index node coordinates."""
        return np.asarray(x)[self.gather]

    def dense(self):
        """Materialized ``D`` (debugging and tests only)."""
        mat = np.zeros((self.d_hat, self.d))
        mat[np.arange(self.d_hat), self.gather] = 1.0
        return mat


class BlockMetric:
    """The diagonal metric ``Q = blk-diag(Q_l)`` with ``Q_l`` weighting node ``j`` by ``1/|Q^j|``."""

    def __init__(self, cd):
        self.cd = cd
        self.weights = 1.0 / cd.gram_diag[cd.gather]

    def block(self, l):
        return self.weights[self.cd.clique_slice(l)]

    def dense(self):
        return np.diag(self.weights)


def metric_identities_check(cd, q, tol=IDENTITY_TOL):
    """Check ``D^T Q D = I``, ``D^T Q = (D^T D)^{-1} D^T`` and ``Q D = D (D^T D)^{-1}``.

    Each identity is probed on every canonical basis vector of its domain.
    """
    w = np.asarray(q.weights if isinstance(q, BlockMetric) else q, dtype=float)
    if w.shape != (cd.d_hat,):
        return False
    eye_d = np.eye(cd.d)
    lifted = eye_d[cd.gather]                          # D
    dtqd = _adjoint_cols(cd, w[:, None] * lifted)      # D^T Q D
    ok = np.max(np.abs(dtqd - eye_d)) <= tol
    eye_h = np.eye(cd.d_hat)
    left = _adjoint_cols(cd, w[:, None] * eye_h)       # D^T Q
    right = _adjoint_cols(cd, eye_h) / cd.gram_diag[:, None]
    ok = ok and np.max(np.abs(left - right)) <= tol
    qd = w[:, None] * lifted
    d_ginv = lifted / cd.gram_diag[None, :]
    ok = ok and np.max(np.abs(qd - d_ginv)) <= tol
    return bool(ok)


def _adjoint_cols(cd, mat):
    out = np.zeros((cd.d, mat.shape[1]))
    np.add.at(out, cd.gather, mat)
    return out


def prox_lifted_node_separable(cd, prox_g_hat, alpha, y, metric="identity", return_nodes=False):
    """Prox of ``delta_Im(D) + sum_i g_i(restrict_ls(.)_i)`` at ``y``.

    Parameters
    ----------
    prox_g_hat : callable
        ``prox_g_hat(v, node_steps)`` applies each node's prox with its own
        step to the stacked node vector ``v``; ``None`` means every node
        function is zero.
    metric : {"identity", "Q"}
        Under the identity metric node ``i`` uses step ``alpha/|Q^i|``; under
        the block metric the step is ``alpha`` for every node.
    return_nodes : bool
        Also return the un-lifted node vector.
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    v = cd.restrict_ls(y)
    if metric == "identity":
        steps = alpha / cd.node_counts
    elif metric in ("Q", "q"):
        steps = np.full(cd.n, float(alpha))
    else:
        raise ValueError(f"unknown metric {metric!r}")
    x = v if prox_g_hat is None else np.asarray(prox_g_hat(v, steps), dtype=float)
    lifted = cd.lift(x)
    return (lifted, x) if return_nodes else lifted


def grad_lifted(cd, grad_f_hat, y):
    """Gradient in ``y`` of ``sum_i f_i(restrict_ls(y)_i)``.

    Equals ``D (D^T D)^{-1} grad f(x)`` at ``x = restrict_ls(y)``.
    """
    x = cd.restrict_ls(y)
    if grad_f_hat is None:
        return np.zeros(cd.d_hat)
    return cd.lift(np.asarray(grad_f_hat(x), dtype=float) / cd.gram_diag)
