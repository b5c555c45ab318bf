"""
Linear-rate certificate for strongly convex DYS runs and a runtime monitor.

With ``beta = min(1/(alpha L), mu)`` and ``nu`` in
``(0, (beta/2)(alpha - alpha^2 L/(2 eps)))``, the quantity

    Lambda^k = ||z^k - z*||^2 + nu ||zeta(y^{k-1/2}) - zeta(y*)||^2,
    zeta(y) = y - alpha M^{-1} grad f(y),

contracts as ``Lambda^{k+1} <= (1 - C) Lambda^k`` with
``C = min(kappa/48, kappa/(12 alpha), nu/(nu + 9))`` and
``kappa = beta (alpha - alpha^2 L/(2 eps)) - 2 nu``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidRateInputs, MissingReference, NotConsensusProblem

DEFAULT_EPSILON = 0.5
FLOAT_SLACK = 1e-12


@dataclass(frozen=True)
class RateCertificate:
    L: float
    mu: float
    varepsilon: float
    alpha: float
    beta: float
    nu: float
    nu_upper: float
    kappa: float
    C: float

    def as_dict(self):
        return {k: float(getattr(self, k)) for k in
                ("L", "mu", "varepsilon", "alpha", "beta", "nu", "nu_upper", "kappa", "C")}


def rate_certificate(L, mu, varepsilon=DEFAULT_EPSILON, alpha=None, nu=None):
    """Compute the contraction constants.

    ``nu`` defaults to half of its upper bound.

    Raises
    ------
    InvalidRateInputs
        If ``L <= 0``, ``mu <= 0``, ``varepsilon`` outside ``(0, 1)``,
        ``alpha`` outside ``(0, 2 varepsilon/L)``, ``nu`` outside its
        interval, or ``kappa <= 0``.
    """
    if alpha is None:
        raise InvalidRateInputs("alpha is required")
    L, mu, eps, alpha = float(L), float(mu), float(varepsilon), float(alpha)
    if not L > 0 or not mu > 0:
        raise InvalidRateInputs("L and mu must be positive")
    if not 0 < eps < 1:
        raise InvalidRateInputs(f"varepsilon={eps} not in (0, 1)")
    if not 0 < alpha < 2 * eps / L:
        raise InvalidRateInputs(f"alpha={alpha} not in (0, {2 * eps / L})")
    beta = min(1.0 / (alpha * L), mu)
    gain = alpha - alpha * alpha * L / (2 * eps)
    upper = 0.5 * beta * gain
    if nu is None:
        nu = 0.5 * upper
    nu = float(nu)
    if not 0 < nu < upper:
        raise InvalidRateInputs(f"nu={nu} not in (0, {upper})")
    kappa = beta * gain - 2 * nu
    if not kappa > 0:
        raise InvalidRateInputs(f"kappa={kappa} is not positive")
    C = min(kappa / 48.0, kappa / (12.0 * alpha), nu / (nu + 9.0))
    return RateCertificate(L, mu, eps, alpha, beta, nu, upper, kappa, C)


def consensus_rate_inputs(p):
    """``(L, mu)`` for a consensus problem: ``max L_i`` and ``min mu_i / max |Q^i|``.

    Raises NotConsensusProblem otherwise: the contraction is only certified
    when the clique terms are consensus indicators.
    """
    if not p.is_consensus or p.has_clique_smooth:
        raise NotConsensusProblem("the rate certificate needs a consensus problem")
    return p.L_hat_max, float(p.node_strong_convexity.min() / p.cd.node_counts.max())


class LyapunovMonitor:
    """Per-iteration check of ``Lambda^{k+1} <= (1 - C) Lambda^k + slack``.

    Parameters
    ----------
    cert : RateCertificate
    z_star, y_star : ndarray
        Fixed point of the run, typically from a long reference run.
    f_grad : callable
        Euclidean gradient of the smooth part in the lifted space.
    metric : ndarray, optional
        Diagonal of ``M``; ``None`` is the identity.
    norm : {"metric", "euclidean"}
        Norm used in ``Lambda``.

    Raises
    ------
    MissingReference
        If no reference point is supplied.
    """

    def __init__(self, cert, z_star, y_star, f_grad, metric=None, norm="metric", slack=FLOAT_SLACK):
        if z_star is None or y_star is None:
            raise MissingReference("Lyapunov monitoring needs a reference fixed point")
        self.cert = cert
        self.metric = None if metric is None else np.asarray(metric, dtype=float)
        self.f_grad = f_grad
        if norm not in ("metric", "euclidean"):
            raise ValueError(f"unknown norm {norm!r}")
        self.weights = self.metric if (norm == "metric" and self.metric is not None) else None
        self.slack = slack
        self.z_star = np.asarray(z_star, dtype=float)
        self.zeta_star = self.zeta(np.asarray(y_star, dtype=float))
        self.values, self.flags = [], []

    def zeta(self, y):
        g = self.f_grad(y)
        if self.metric is not None:
            g = g / self.metric
        return y - self.cert.alpha * g

    def _sq(self, v):
        return float(v @ v) if self.weights is None else float(v @ (self.weights * v))

    def value(self, state):
        return self._sq(state.z - self.z_star) + self.cert.nu * self._sq(self.zeta(state.y_half) - self.zeta_star)

    def start(self, state):
        self.values, self.flags = [self.value(state)], []

    def observe(self, prev, state):
        lam = self.value(state)
        self.flags.append(lam <= (1.0 - self.cert.C) * self.values[-1] + self.slack)
        self.values.append(lam)
        return self.flags[-1]

    @property
    def pass_fraction(self):
        return float(np.mean(self.flags)) if self.flags else 1.0


def envelope_check(errors, C, window=10):
    """Check ``e_k <= c (1 - C)^{k/2}`` for all ``k``.

    ``c`` is fitted on the first ``window`` iterates as the smallest constant
    satisfying the bound there. Returns ``(ok, c)``.
    """
    e = np.asarray(errors, dtype=float)
    k = np.arange(1, e.size + 1)
    env = (1.0 - C) ** (k / 2.0)
    c = float(np.max(e[:window] / env[:window]))
    return bool(np.all(e <= c * env * (1 + 1e-12))), c
