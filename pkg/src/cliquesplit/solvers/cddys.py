"""
Clique-based distributed Davis-Yin splitting.

Both variants run DYS on the lifted problem: ``h`` is the node-wise
nonsmooth part restricted to ``Im(D)``, ``g`` the clique-wise nonsmooth
part and ``f`` the clique-wise smooth part plus the lifted node costs.
"""

from __future__ import annotations

import numpy as np

from .dys import dys_step, init_state
from .report import Recorder

AUTO_SAFETY = 0.999


def step_bound(p, variable_metric=False):
    """Largest admissible step (exclusive); ``inf`` when every smooth term vanishes."""
    den = p.vm_denominator if variable_metric else p.cddys_denominator
    return 2.0 / den if den > 0 else np.inf


def resolve_alpha(p, alpha, variable_metric=False):
    if alpha is None or alpha == "auto":
        bound = step_bound(p, variable_metric)
        return AUTO_SAFETY * bound if np.isfinite(bound) else 1.0
    return float(alpha)


def _operators(p, variable_metric):
    cd = p.cd
    if variable_metric:
        metric = p.metric.weights
        node_steps = lambda a: np.full(cd.n, a)
        clique_weights = metric
    else:
        metric = None
        node_steps = lambda a: a / cd.node_counts
        clique_weights = None

    def h_prox(z, a):
        x = p.node_prox(cd.restrict_ls(z), node_steps(a))
        return cd.lift(x), x

    def f_grad(y_half, x):
        # Euclidean gradient of the lifted smooth part, D (D^T D)^{-1} grad f(x)
        # for the node terms; the engine applies M^{-1}
        g_node = cd.lift(p.node_grad(x) / cd.gram_diag)
        if p.has_clique_smooth:
            return p.clique_grad(y_half) + g_node
        return g_node

    def g_prox(v, a):
        return p.clique_prox(v, a, clique_weights)

    return metric, h_prox, f_grad, g_prox


def _initial_state(p, alpha, variable_metric, x0, z0, lipschitz):
    cd = p.cd
    metric, h_prox, f_grad, _ = _operators(p, variable_metric)
    if z0 is not None:
        return init_state(z0, alpha, metric, lipschitz)
    x0 = np.zeros(cd.d) if x0 is None else np.asarray(x0, dtype=float)
    # z^1 = y^{1/2} - alpha M^{-1} grad f(y^{1/2}) with y^{1/2} = D x^0
    y_half = cd.lift(x0)
    grad = f_grad(y_half, x0)
    if metric is not None:
        grad = grad / metric
    return init_state(y_half - alpha * grad, alpha, metric, lipschitz, y_half=y_half, aux=x0)


def _run(name, p, alpha, iters, variable_metric, x0, z0, reference, callbacks,
         record_trajectory, tol, monitor, check_step_bound):
    alpha = resolve_alpha(p, alpha, variable_metric)
    den = p.vm_denominator if variable_metric else p.cddys_denominator
    state = _initial_state(p, alpha, variable_metric, x0, z0, den if check_step_bound else None)
    _, h_prox, f_grad, g_prox = _operators(p, variable_metric)
    rec = Recorder(name, p.objective, reference, callbacks, record_trajectory, tol,
                   params={"alpha": alpha, "iters": iters})
    if monitor is not None:
        monitor.start(state)
    x = None
    for k in range(1, iters + 1):
        prev = state
        state = dys_step(state, h_prox, g_prox, f_grad)
        x = state.aux                    # x^k = prox(restrict(z^k))
        if monitor is not None:
            monitor.observe(prev, state)
        if rec.record(k, x, state):
            break
    report = rec.finish(x if x is not None else np.zeros(p.cd.d), state)
    if monitor is not None:
        report.lyapunov = list(monitor.values)
    return report


def cddys_solve(p, alpha="auto", iters=1000, x0=None, z0=None, reference=None, callbacks=(),
                record_trajectory=False, tol=None, monitor=None, check_step_bound=True):
    """CD-DYS in the Euclidean metric.

    Node ``i`` applies its prox with step ``alpha/|Q^i|`` to the average of
    its clique copies; each clique receives the ``1/|Q^j|`` share of every
    member's node gradient.

    Parameters
    ----------
    p : ProblemSpec
    alpha : float or "auto"
        ``"auto"`` is 0.999 times the bound ``2/(max L_l + max L_i/|Q^i|)``.
    x0, z0 : ndarray, optional
        Initial node vector (default zero) or an explicit lifted ``z^1``.
        From ``x0`` the run starts at ``z^1 = y - alpha grad f(y)``, ``y = D x0``.
    reference : Reference, optional
    callbacks : sequence of callables ``cb(k, x, state)``
    monitor : LyapunovMonitor, optional

    Raises
    ------
    StepSizeOutOfRange
        If ``alpha`` is not below the convergence bound and
        ``check_step_bound`` is set.
    """
    return _run("cddys", p, alpha, iters, False, x0, z0, reference, callbacks,
                record_trajectory, tol, monitor, check_step_bound)


def cddys_vm_solve(p, alpha="auto", iters=1000, x0=None, z0=None, reference=None, callbacks=(),
                   record_trajectory=False, tol=None, monitor=None, check_step_bound=True):
    """CD-DYS in the block metric ``Q``.

    Node prox steps are ``alpha`` unscaled, clique proxes use ``Q_l`` and the
    node gradients enter unsplit. The admissible steps are
    ``(0, 2/(max_l max_{j in C_l} |Q^j| L_l + max_i L_i))``.
    """
    return _run("cddys_vm", p, alpha, iters, True, x0, z0, reference, callbacks,
                record_trajectory, tol, monitor, check_step_bound)


def dys_fixed_point(p, alpha, iters=100_000, variable_metric=True, x0=None):
    """Run the lifted iteration without recording and return the final state.

    Used to obtain ``(z*, y*)`` for Lyapunov monitoring.
    """
    alpha = resolve_alpha(p, alpha, variable_metric)
    state = _initial_state(p, alpha, variable_metric, x0, None, None)
    _, h_prox, f_grad, g_prox = _operators(p, variable_metric)
    for _ in range(iters):
        state = dys_step(state, h_prox, g_prox, f_grad)
    return state


def lifted_gradient(p, y):
    """Euclidean gradient of the lifted smooth part at ``y`` (``y`` in ``Im(D)``)."""
    cd = p.cd
    g = cd.lift(p.node_grad(cd.restrict_ls(y)) / cd.gram_diag)
    if p.has_clique_smooth:
        g = g + p.clique_grad(y)
    return g
