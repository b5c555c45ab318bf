"""
Davis-Yin three-operator splitting, optionally in a diagonal metric ``M``.

One iteration from ``z``::

    y_half = prox^M_{alpha h}(z)
    y      = prox^M_{alpha g}(2 y_half - z - alpha M^{-1} grad f(y_half))
    z      = z + y - y_half
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from ..errors import NonFiniteIterate, StepSizeOutOfRange


@dataclass(frozen=True)
class DysState:
    """Iterates of one DYS run.

    ``metric`` holds the diagonal of ``M`` (None for the identity). ``aux``
    is whatever the ``h`` prox returned alongside ``y_half``; the clique
    solvers keep the node vector there.
    """

    z: np.ndarray
    y_half: np.ndarray
    y: np.ndarray
    k: int
    alpha: float
    metric: np.ndarray | None = None
    aux: object = None


def check_step(alpha, lipschitz=None):
    """Require ``alpha`` in ``(0, 2/L)``; ``L = 0`` allows any positive step."""
    alpha = float(alpha)
    if not alpha > 0 or not np.isfinite(alpha):
        raise StepSizeOutOfRange(f"step {alpha} must be positive and finite")
    if lipschitz is not None and lipschitz > 0 and alpha >= 2.0 / lipschitz:
        raise StepSizeOutOfRange(f"step {alpha} not below 2/L = {2.0 / lipschitz}")
    return alpha


def init_state(z, alpha, metric=None, lipschitz=None, y_half=None, aux=None):
    alpha = check_step(alpha, lipschitz)
    z = np.array(z, dtype=float)
    yh = z.copy() if y_half is None else np.array(y_half, dtype=float)
    m = None if metric is None else np.asarray(metric, dtype=float)
    return DysState(z=z, y_half=yh, y=yh.copy(), k=1, alpha=alpha, metric=m, aux=aux)


def _split(out):
    return out if isinstance(out, tuple) else (out, None)


def dys_step(state, h_prox, g_prox, f_grad, metric=None):
    """One DYS iteration.

    Parameters
    ----------
    h_prox, g_prox : callable
        ``prox(v, alpha)`` in the metric ``M``. ``h_prox`` may return
        ``(y_half, aux)``; ``aux`` is then passed on to ``f_grad``.
    f_grad : callable
        Euclidean gradient of the smooth part, ``f_grad(y)`` or
        ``f_grad(y, aux)`` when ``h_prox`` returns auxiliary data.
    metric : ndarray, optional
        Diagonal of ``M``; defaults to ``state.metric``.
    """
    m = state.metric if metric is None else np.asarray(metric, dtype=float)
    a = state.alpha
    y_half, aux = _split(h_prox(state.z, a))
    grad = f_grad(y_half) if aux is None else f_grad(y_half, aux)
    if m is not None:
        grad = grad / m
    y = g_prox(2.0 * y_half - state.z - a * grad, a)
    z = state.z + y - y_half
    if not np.all(np.isfinite(z)):
        raise NonFiniteIterate(f"non-finite DYS iterate at k={state.k}")
    return replace(state, z=z, y_half=y_half, y=y, k=state.k + 1, metric=m, aux=aux)


def zeta(state_or_y, alpha, grad, metric=None):
    """``zeta(y) = y - alpha M^{-1} grad f(y)`` given the gradient at ``y``."""
    g = grad if metric is None else grad / metric
    return state_or_y - alpha * g
