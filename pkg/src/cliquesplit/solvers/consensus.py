"""
Decentralized consensus methods driven by a mixing matrix.

The mixing matrix acts on stacked node vectors as ``W kron I_m``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DimensionMismatch, NonzeroGhat, NotConsensusProblem
from .dys import check_step
from .report import Recorder


@dataclass
class NidsState:
    w: np.ndarray
    x_prev: np.ndarray
    x_curr: np.ndarray
    grad_prev: np.ndarray
    mixing: object
    k: int


def _check_mixing(p, mixing):
    if mixing.n != p.n:
        raise DimensionMismatch(f"mixing matrix is {mixing.n}x{mixing.n}, problem has {p.n} nodes")
    if p.cd.uniform_dim is None:
        raise DimensionMismatch("mixing requires equal node dimensions")


def _require_zero_ghat(p):
    if p.has_node_prox:
        raise NonzeroGhat("this method needs every node-wise nonsmooth term to be zero")


def nids_solve(p, mixing, alpha, iters=1000, x0=None, reference=None, callbacks=(),
               record_trajectory=False, tol=None):
    """NIDS with mixing matrix ``W``.

    ``w^1 = x^0 - alpha grad f(x^0)``, ``x^k = prox_{alpha g}(w^k)`` and
    ``w^{k+1} = w^k - x^k + W(2x^k - x^{k-1} + alpha grad f(x^{k-1}) - alpha grad f(x^k))``.

    Raises
    ------
    NotConsensusProblem
        Unless every clique term is a consensus constraint and no clique
        carries a smooth cost.
    """
    if not p.is_consensus or p.has_clique_smooth:
        raise NotConsensusProblem("NIDS needs consensus clique constraints and no clique costs")
    _check_mixing(p, mixing)
    alpha = check_step(alpha)
    steps = np.full(p.n, alpha)
    x_prev = np.zeros(p.cd.d) if x0 is None else np.asarray(x0, dtype=float)
    g_prev = p.node_grad(x_prev)
    w = x_prev - alpha * g_prev
    x = p.node_prox(w, steps)
    rec = Recorder("nids", p.objective, reference, callbacks, record_trajectory, tol,
                   params={"alpha": alpha, "iters": iters, "mixing": mixing.provenance.value})
    state = NidsState(w, x_prev, x, g_prev, mixing, 1)
    for k in range(1, iters + 1):
        state = NidsState(w, x_prev, x, g_prev, mixing, k)
        if rec.record(k, x, state) or k == iters:
            break
        g = p.node_grad(x)
        w = w - x + mixing.apply(2.0 * x - x_prev + alpha * g_prev - alpha * g)
        x_prev, g_prev = x, g
        x = p.node_prox(w, steps)
    return rec.finish(x, state)


def _diffusion(name, p, mixing, alpha, iters, x0, reference, callbacks, record_trajectory, tol,
               correction):
    # v^{k+1} = x^k - alpha grad f(x^k);  x^{k+1} = W(v^{k+1} + c (x^k - v^k))
    # with c = 1 (exact diffusion) or c = 0 (diffusion)
    _require_zero_ghat(p)
    _check_mixing(p, mixing)
    alpha = check_step(alpha)
    x = np.zeros(p.cd.d) if x0 is None else np.asarray(x0, dtype=float)
    v = x - alpha * p.node_grad(x)
    # exact diffusion starts at x^1 = v^1, which makes it coincide with NIDS
    x = v.copy() if correction else mixing.apply(v)
    rec = Recorder(name, p.objective, reference, callbacks, record_trajectory, tol,
                   params={"alpha": alpha, "iters": iters, "mixing": mixing.provenance.value})
    for k in range(1, iters + 1):
        if rec.record(k, x) or k == iters:
            break
        v_next = x - alpha * p.node_grad(x)
        if correction:
            x = mixing.apply(v_next + x - v)
        else:
            x = mixing.apply(v_next)
        v = v_next
    return rec.finish(x)


def exact_diffusion_solve(p, mixing, alpha, iters=1000, x0=None, reference=None, callbacks=(),
                          record_trajectory=False, tol=None):
    """Exact diffusion; identical to NIDS when every node nonsmooth term is zero.

    Raises
    ------
    NonzeroGhat
    """
    return _diffusion("exact_diffusion", p, mixing, alpha, iters, x0, reference, callbacks,
                      record_trajectory, tol, correction=True)


def diffusion_solve(p, mixing, alpha, iters=1000, x0=None, reference=None, callbacks=(),
                    record_trajectory=False, tol=None):
    """Diffusion ``x^{k+1} = W(x^k - alpha grad f(x^k))``.

    Exact diffusion with the correction term dropped. With a constant step
    it converges only to a neighborhood of the optimum.

    Raises
    ------
    NonzeroGhat
    """
    return _diffusion("diffusion", p, mixing, alpha, iters, x0, reference, callbacks,
                      record_trajectory, tol, correction=False)
