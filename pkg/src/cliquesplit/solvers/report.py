"""
Per-iteration recording shared by every solver.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from ..errors import NonFiniteIterate


@dataclass(frozen=True)
class Reference:
    """Known optimum used for residuals: a node vector, an objective value, or both."""

    x: np.ndarray | None = None
    objective: float | None = None


@dataclass
class ConvergenceReport:
    """Traces of one solver run.

    Entry ``k-1`` of every list describes the iterate ``x^k`` (``k = 1..iters``).
    ``residual`` is ``|F(x^k) - F*| / |F*|`` when the reference carries an
    objective value, else ``||x^k - x*||`` when it carries a point, else NaN.
    """

    solver: str
    objective: list = field(default_factory=list)
    residual: list = field(default_factory=list)
    wallclock_us: list = field(default_factory=list)
    lyapunov: list | None = None
    extra: dict = field(default_factory=dict)
    trajectory: list | None = None
    x: np.ndarray | None = None
    final_state: object = None
    termination: str = "max_iters"
    params: dict = field(default_factory=dict)

    @property
    def iterations(self):
        return len(self.objective)

    def first_below(self, tol):
        """Smallest ``k`` with ``residual <= tol``, or None."""
        r = np.asarray(self.residual)
        hit = np.flatnonzero(r <= tol)
        return int(hit[0]) + 1 if hit.size else None


def relative_residual(value, ref_value):
    if ref_value == 0:
        return abs(value)
    return abs(value - ref_value) / abs(ref_value)


class Recorder:
    """Collects traces, runs callbacks and decides early stopping.

    A callback is called as ``cb(k, x, state)``; returning ``False`` stops
    the run with termination ``"callback"``.
    """

    def __init__(self, name, objective_fn, reference=None, callbacks=(),
                 record_trajectory=False, tol=None, params=None):
        self.report = ConvergenceReport(solver=name, params=dict(params or {}))
        if record_trajectory:
            self.report.trajectory = []
        self.objective_fn = objective_fn
        self.reference = reference
        self.callbacks = list(callbacks or ())
        self.tol = tol
        self._t = time.perf_counter_ns()

    def record(self, k, x, state=None):
        """Record ``x^k``; returns True when the run should stop."""
        now = time.perf_counter_ns()
        rep = self.report
        if not np.all(np.isfinite(x)):
            raise NonFiniteIterate(f"{rep.solver}: non-finite iterate at k={k}")
        f = float(self.objective_fn(x))
        ref = self.reference
        if ref is not None and ref.objective is not None:
            res = relative_residual(f, ref.objective)
        elif ref is not None and ref.x is not None:
            res = float(np.linalg.norm(x - ref.x))
        else:
            res = float("nan")
        rep.objective.append(f)
        rep.residual.append(res)
        rep.wallclock_us.append((now - self._t) / 1000.0)
        if rep.trajectory is not None:
            rep.trajectory.append(np.array(x, copy=True))
        stop = False
        for cb in self.callbacks:
            if cb(k, x, state) is False:
                rep.termination = "callback"
                stop = True
        if self.tol is not None and res <= self.tol:
            rep.termination = "tolerance"
            stop = True
        self._t = time.perf_counter_ns()
        return stop

    def finish(self, x, state=None):
        self.report.x = np.array(x, copy=True)
        self.report.final_state = state
        return self.report
