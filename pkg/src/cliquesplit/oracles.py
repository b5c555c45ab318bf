"""
Smooth and proximable function oracles.

Every proximal oracle accepts an optional vector of positive diagonal metric
weights ``w`` and returns ``argmin_u g(u) + ||x - u||_W^2 / (2 step)`` with
``W = diag(w)``. Indicator oracles ignore the step.
"""

from __future__ import annotations

import numpy as np

FEAS_TOL = 1e-9


def _weights(w, size):
    if w is None:
        return np.ones(size)
    w = np.broadcast_to(np.asarray(w, dtype=float), (size,))
    if np.any(w <= 0):
        raise ValueError("metric weights must be positive")
    return w


class SmoothOracle:
    """Differentiable convex function with known smoothness constants."""

    dim = None
    lipschitz = 0.0
    strong_convexity = 0.0

    def value(self, x):
        raise NotImplementedError

    def grad(self, x):
        raise NotImplementedError


class ZeroSmooth(SmoothOracle):
    def __init__(self, dim):
        self.dim = int(dim)

    def value(self, x):
        return 0.0

    def grad(self, x):
        return np.zeros(self.dim)


class Quadratic(SmoothOracle):
    """``f(x) = ||A x - b||^2 / 2``.

    ``A`` may be a matrix or a scalar, the latter meaning ``A = s I``.
    """

    def __init__(self, A, b):
        b = np.atleast_1d(np.asarray(b, dtype=float))
        if np.isscalar(A) or np.ndim(A) == 0:
            A = float(A) * np.eye(b.size)
        A = np.atleast_2d(np.asarray(A, dtype=float))
        if A.shape[0] != b.size:
            raise ValueError(f"A has {A.shape[0]} rows but b has {b.size} entries")
        self.A, self.b = A, b
        self.dim = A.shape[1]
        self.hessian = A.T @ A
        self.linear = A.T @ b
        self.const = 0.5 * float(b @ b)
        eig = np.linalg.eigvalsh(self.hessian)
        self.lipschitz = float(eig[-1])
        self.strong_convexity = float(max(eig[0], 0.0)) if A.shape[0] >= A.shape[1] else 0.0

    def value(self, x):
        r = self.A @ np.asarray(x, dtype=float) - self.b
        return 0.5 * float(r @ r)

    def grad(self, x):
        return self.hessian @ np.asarray(x, dtype=float) - self.linear


def quadratic_oracle(A, b):
    return Quadratic(A, b)


def clique_mean_quadratic(weight, size, target, m=1):
    """``(weight/2) || mean_j x_j - target ||^2`` over ``size`` node blocks of dimension ``m``."""
    target = np.broadcast_to(np.asarray(target, dtype=float), (m,))
    row = np.kron(np.ones((1, size)), np.eye(m)) / size
    s = np.sqrt(weight)
    return Quadratic(s * row, s * target)


class ProxOracle:
    """Proper closed convex function accessed through its proximal map."""

    is_indicator = False
    dim = None

    def prox(self, x, step, weights=None):
        raise NotImplementedError

    def value(self, x):
        """Function value; indicators report 0 and expose :meth:`violation`."""
        return 0.0

    def violation(self, x):
        return 0.0


class ZeroProx(ProxOracle):
    def __init__(self, dim=None):
        self.dim = dim

    def prox(self, x, step, weights=None):
        return np.array(x, dtype=float)


class L1Norm(ProxOracle):
    """``lam * ||x||_1``; soft-thresholding at ``lam * step / w``."""

    def __init__(self, lam, dim=None):
        if lam < 0:
            raise ValueError("lam must be nonnegative")
        self.lam = float(lam)
        self.dim = dim

    def prox(self, x, step, weights=None):
        x = np.asarray(x, dtype=float)
        level = self.lam * step / _weights(weights, x.size)
        return np.sign(x) * np.maximum(np.abs(x) - level, 0.0)

    def value(self, x):
        return self.lam * float(np.abs(x).sum())


def l1_oracle(lam, dim=None):
    return L1Norm(lam, dim)


class NonNegative(ProxOracle):
    is_indicator = True

    def __init__(self, dim=None):
        self.dim = dim

    def prox(self, x, step=None, weights=None):
        return np.maximum(np.asarray(x, dtype=float), 0.0)

    def violation(self, x):
        return float(np.max(np.maximum(-np.asarray(x, dtype=float), 0.0), initial=0.0))


def nonneg_indicator(dim=None):
    return NonNegative(dim)


class ConsensusSet(ProxOracle):
    """Indicator of ``{x_C : x_C = 1 (x) theta}`` for ``size`` blocks of dimension ``m``.

    The metric projection replaces every block by the weighted mean of the
    blocks, componentwise.
    """

    is_indicator = True

    def __init__(self, size, m=1):
        self.size, self.m = int(size), int(m)
        self.dim = self.size * self.m

    def prox(self, x, step=None, weights=None):
        x = np.asarray(x, dtype=float).reshape(self.size, self.m)
        w = _weights(weights, self.dim).reshape(self.size, self.m)
        theta = (w * x).sum(axis=0) / w.sum(axis=0)
        return np.tile(theta, self.size)

    def violation(self, x):
        x = np.asarray(x, dtype=float).reshape(self.size, self.m)
        return float(np.max(np.abs(x - x.mean(axis=0))))


def consensus_indicator(clique_size, m=1):
    return ConsensusSet(clique_size, m)


class HalfSpace(ProxOracle):
    """Indicator of ``{x : a^T x <= offset}``. An infinite offset never binds."""

    is_indicator = True

    def __init__(self, normal, offset):
        self.normal = np.atleast_1d(np.asarray(normal, dtype=float))
        if not np.any(self.normal):
            raise ValueError("normal must be nonzero")
        self.offset = float(offset)
        self.dim = self.normal.size

    def prox(self, x, step=None, weights=None):
        x = np.asarray(x, dtype=float)
        excess = self.normal @ x - self.offset
        if excess <= 0:
            return x.copy()
        winv_a = self.normal / _weights(weights, x.size)
        return x - (excess / (self.normal @ winv_a)) * winv_a

    def violation(self, x):
        return float(max(self.normal @ np.asarray(x, dtype=float) - self.offset, 0.0))


def halfspace_indicator(normal, offset):
    return HalfSpace(normal, offset)
