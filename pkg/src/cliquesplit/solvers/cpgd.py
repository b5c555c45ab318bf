"""
Clique-based projected gradient descent and its accelerated variant.

The clique-based projection averages, at every node, the ``Q_l``-metric
projections of its cliques::

    T(x) = (D^T D)^{-1} D^T P^Q(D x),     P^Q = prod_l P^{Q_l}_{D_l}

It is the gradient step ``T = I - grad V`` of the 1-smooth penalty
``V(x) = 1/2 sum_l ||x_{C_l} - P_{D_l}(x_{C_l})||^2_{Q_l}``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import BadSchedule, NonzeroGhat
from .report import Recorder


def clique_projection_T(p, x, depth=1):
    """``T^depth(x)`` for the clique constraint sets of problem ``p``."""
    cd, w = p.cd, p.metric.weights
    x = np.asarray(x, dtype=float)
    for _ in range(depth):
        x = cd.restrict_ls(p.clique_prox(cd.lift(x), 1.0, w))
    return x


def penalty_V(p, x):
    """``V(x) = 1/2 sum_l ||x_{C_l} - P_{D_l}(x_{C_l})||^2_{Q_l}``."""
    cd, w = p.cd, p.metric.weights
    y = cd.lift(np.asarray(x, dtype=float))
    r = y - p.clique_prox(y, 1.0, w)
    return 0.5 * float(r @ (w * r))


def grad_V(p, x):
    return np.asarray(x, dtype=float) - clique_projection_T(p, x)


@dataclass(frozen=True)
class Constant:
    alpha: float

    def __call__(self, k):
        return self.alpha


@dataclass(frozen=True)
class Diminishing:
    """``lambda^k = c / k``."""

    c: float

    def __call__(self, k):
        return self.c / k


@dataclass
class CpgdState:
    x_curr: np.ndarray
    x_hat: np.ndarray
    x_prev: np.ndarray
    sigma: float
    k: int


def sigma_sequence(count):
    """``sigma^0 .. sigma^{count-1}`` of the Nesterov recursion."""
    s = [1.0]
    while len(s) < count:
        s.append(0.5 * (1.0 + np.sqrt(1.0 + 4.0 * s[-1] ** 2)))
    return np.array(s[:count])


def _check_problem(p):
    if p.has_node_prox:
        raise NonzeroGhat("clique projected gradient needs zero node nonsmooth terms")
    if p.has_clique_smooth or any(g is not None and not g.is_indicator for g in p.clique_g):
        raise ValueError("clique projected gradient needs indicator clique terms and no clique costs")


def _check_constant(p, alpha):
    if not alpha > 0:
        raise BadSchedule("step must be positive")
    lhat = p.L_hat_max
    if lhat > 0 and alpha > 1.0 / lhat * (1 + 1e-12):
        raise BadSchedule(f"constant step {alpha} exceeds 1/L = {1.0 / lhat}")


def _J(p, x, alpha):
    return p.node_smooth_value(x) + penalty_V(p, x) / alpha


def cpgd_solve(p, schedule, iters=1000, depth=1, x0=None, reference=None, callbacks=(),
               record_trajectory=False, tol=None):
    """``x^{k+1} = T^depth(x^k - lambda^k grad f(x^k))``.

    Parameters
    ----------
    schedule : Constant or Diminishing
        A constant step must satisfy ``alpha <= 1/L``. With a constant step
        the report also carries ``extra["J"]``, the penalized objective
        ``f(x^k) + V(x^k)/alpha``.

    Raises
    ------
    BadSchedule
    NonzeroGhat
    """
    _check_problem(p)
    if isinstance(schedule, Constant):
        _check_constant(p, schedule.alpha)
    elif isinstance(schedule, Diminishing):
        if not schedule.c > 0:
            raise BadSchedule("diminishing schedule needs c > 0")
    else:
        raise BadSchedule(f"unsupported schedule {schedule!r}")
    if depth < 1:
        raise BadSchedule("projection depth must be at least 1")
    x = np.zeros(p.cd.d) if x0 is None else np.asarray(x0, dtype=float)
    rec = Recorder("cpgd", p.objective, reference, callbacks, record_trajectory, tol,
                   params={"schedule": repr(schedule), "depth": depth, "iters": iters})
    js = [] if isinstance(schedule, Constant) else None
    state = None
    for k in range(1, iters + 1):
        x_new = clique_projection_T(p, x - schedule(k) * p.node_grad(x), depth)
        state = CpgdState(x_new, x_new, x, 1.0, k)
        x = x_new
        if js is not None:
            js.append(_J(p, x, schedule.alpha))
        if rec.record(k, x, state):
            break
    rep = rec.finish(x, state)
    if js is not None:
        rep.extra["J"] = js
    return rep


def acpgd_solve(p, alpha, iters=1000, x0=None, reference=None, callbacks=(),
                record_trajectory=False, tol=None):
    """Accelerated clique-based projected gradient with a constant step.

    ``x^{k+1} = T(xh^k - alpha grad f(xh^k))`` and
    ``xh^{k+1} = x^{k+1} + ((sigma^k - 1)/sigma^{k+1}) (x^{k+1} - x^k)``,
    ``sigma^0 = 1``. The report carries ``extra["J"]``.
    """
    _check_problem(p)
    alpha = float(alpha)
    _check_constant(p, alpha)
    x = np.zeros(p.cd.d) if x0 is None else np.asarray(x0, dtype=float)
    x_hat, sigma = x.copy(), 1.0
    rec = Recorder("acpgd", p.objective, reference, callbacks, record_trajectory, tol,
                   params={"alpha": alpha, "iters": iters})
    js, state = [], None
    for k in range(1, iters + 1):
        x_new = clique_projection_T(p, x_hat - alpha * p.node_grad(x_hat))
        sigma_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * sigma * sigma))
        x_hat = x_new + ((sigma - 1.0) / sigma_next) * (x_new - x)
        state = CpgdState(x_new, x_hat, x, sigma_next, k)
        x, sigma = x_new, sigma_next
        js.append(_J(p, x, alpha))
        if rec.record(k, x, state):
            break
    rep = rec.finish(x, state)
    rep.extra["J"] = js
    return rep
