"""
Reference optima for residual reporting, cross-validated between methods.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass

import numpy as np
from scipy import linalg, optimize

from .. import oracles as orc
from ..errors import OracleDisagreement
from ..solvers.report import Reference

AGREEMENT_TOL = 1e-6
BRUTE_MAX_DIM = 20
BRUTE_MAX_CONSTRAINTS = 20


class ReferenceMethod(str, enum.Enum):
    LONG_RUN = "long_run"
    BRUTE_QP = "brute_qp"
    CENTRALIZED = "centralized"
    SCIPY = "scipy"


@dataclass(frozen=True)
class ReferenceSolution:
    x: np.ndarray
    objective: float
    method: str

    def as_reference(self):
        return Reference(x=self.x, objective=self.objective)


# -- quadratic model of a problem ------------------------------------------


def quadratic_model(p):
    """``(H, c)`` with smooth part ``x^T H x / 2 - c^T x + const``.

    Raises ValueError unless every smooth term is a :class:`Quadratic`.
    """
    cd = p.cd
    H = np.zeros((cd.d, cd.d))
    c = np.zeros(cd.d)
    for i, f in enumerate(p.node_f):
        if f is None or isinstance(f, orc.ZeroSmooth):
            continue
        if not isinstance(f, orc.Quadratic):
            raise ValueError("quadratic model needs quadratic node costs")
        s = cd.node_slice(i)
        H[s, s] += f.hessian
        c[s] += f.linear
    for l, f in enumerate(p.clique_f):
        if f is None or isinstance(f, orc.ZeroSmooth):
            continue
        if not isinstance(f, orc.Quadratic):
            raise ValueError("quadratic model needs quadratic clique costs")
        idx = cd.gather[cd.clique_slice(l)]
        H[np.ix_(idx, idx)] += f.hessian
        np.add.at(c, idx, f.linear)
    return H, c


def linear_constraints(p):
    """Affine description of every indicator: ``(A_in, b_in, A_eq)`` with
    ``A_in x <= b_in`` and ``A_eq x = 0``.

    Raises ValueError for a nonsmooth term that is not an indicator of the
    supported kinds.
    """
    cd = p.cd
    rows_in, rhs_in, rows_eq = [], [], []
    for i, g in enumerate(p.node_g):
        if g is None or isinstance(g, orc.ZeroProx):
            continue
        if not isinstance(g, orc.NonNegative):
            raise ValueError(f"unsupported node term {type(g).__name__}")
        for j in range(cd.node_offsets[i], cd.node_offsets[i + 1]):
            r = np.zeros(cd.d)
            r[j] = -1.0
            rows_in.append(r)
            rhs_in.append(0.0)
    for l, g in enumerate(p.clique_g):
        if g is None or isinstance(g, orc.ZeroProx):
            continue
        idx = cd.gather[cd.clique_slice(l)]
        if isinstance(g, orc.HalfSpace):
            if np.isfinite(g.offset):
                r = np.zeros(cd.d)
                np.add.at(r, idx, g.normal)
                rows_in.append(r)
                rhs_in.append(g.offset)
        elif isinstance(g, orc.ConsensusSet):
            blocks = idx.reshape(g.size, g.m)
            for a in range(1, g.size):
                for comp in range(g.m):
                    r = np.zeros(cd.d)
                    r[blocks[0, comp]] += 1.0
                    r[blocks[a, comp]] -= 1.0
                    rows_eq.append(r)
        elif isinstance(g, orc.NonNegative):
            for j in idx:
                r = np.zeros(cd.d)
                r[j] = -1.0
                rows_in.append(r)
                rhs_in.append(0.0)
        else:
            raise ValueError(f"unsupported clique term {type(g).__name__}")
    a_in = np.array(rows_in).reshape(-1, cd.d)
    a_eq = np.array(rows_eq).reshape(-1, cd.d)
    return a_in, np.array(rhs_in), a_eq


def brute_qp(p):
    """Active-set enumeration for a strictly convex quadratic problem.

    Inequality subsets are visited by increasing size; the first subset whose
    equality-constrained solution is primal feasible with nonnegative
    multipliers is optimal.
    """
    H, c = quadratic_model(p)
    a_in, b_in, a_eq = linear_constraints(p)
    d = H.shape[0]
    if d > BRUTE_MAX_DIM or a_in.shape[0] > BRUTE_MAX_CONSTRAINTS:
        raise ValueError("brute-force QP limited to small instances")
    n_eq = a_eq.shape[0]
    for size in range(a_in.shape[0] + 1):
        for act in itertools.combinations(range(a_in.shape[0]), size):
            act = list(act)
            A = np.vstack([a_eq, a_in[act]])
            rhs = np.concatenate([np.zeros(n_eq), b_in[act]])
            m = A.shape[0]
            K = np.block([[H, A.T], [A, np.zeros((m, m))]])
            sol = np.linalg.lstsq(K, np.concatenate([c, rhs]), rcond=None)[0]
            x, lam = sol[:d], sol[d + n_eq:]
            if np.max(np.abs(K @ sol - np.concatenate([c, rhs])), initial=0.0) > 1e-9:
                continue
            if np.all(a_in @ x <= b_in + 1e-10) and np.all(lam >= -1e-10):
                return x
    raise ValueError("no KKT point found")


def centralized_consensus(p, tol=1e-15, max_iter=200_000):
    """Minimize ``sum_i f_i(theta) + g_i(theta)`` over a common ``theta``.

    Quadratic node costs, node terms zero, l1 or nonnegativity. Uses a
    direct solve when there is no nonsmooth term and FISTA with adaptive
    restart otherwise.
    """
    cd = p.cd
    m = cd.uniform_dim
    if m is None or not p.is_consensus or p.has_clique_smooth:
        raise ValueError("centralized reference needs a consensus problem")
    H = np.zeros((m, m))
    c = np.zeros(m)
    for f in p.node_f:
        if f is None:
            continue
        if not isinstance(f, orc.Quadratic):
            raise ValueError("centralized reference needs quadratic node costs")
        H += f.hessian
        c += f.linear
    gs = [g for g in p.node_g if g is not None and not isinstance(g, orc.ZeroProx)]
    if not gs:
        theta = np.linalg.solve(H, c)
    else:
        if all(isinstance(g, orc.L1Norm) for g in gs):
            lam = sum(g.lam for g in gs)
            prox = lambda v, s: np.sign(v) * np.maximum(np.abs(v) - lam * s, 0.0)
        elif all(isinstance(g, orc.NonNegative) for g in gs):
            prox = lambda v, s: np.maximum(v, 0.0)
        else:
            raise ValueError("centralized reference supports l1 or nonnegativity terms")
        step = 1.0 / np.linalg.eigvalsh(H)[-1]
        theta = np.linalg.solve(H, c)
        y, t = theta.copy(), 1.0
        for _ in range(max_iter):
            nxt = prox(y - step * (H @ y - c), step)
            if (y - nxt) @ (nxt - theta) > 0:
                t = 1.0              # gradient-based restart
            t_next = 0.5 * (1 + np.sqrt(1 + 4 * t * t))
            y = nxt + ((t - 1) / t_next) * (nxt - theta)
            done = np.max(np.abs(nxt - theta)) <= tol * max(1.0, np.max(np.abs(nxt)))
            theta, t = nxt, t_next
            if done:
                break
    return np.tile(theta, cd.n)


def scipy_qp(p):
    """SLSQP on the quadratic model with the affine constraints.

    Equalities are eliminated through a null-space basis first: overlapping
    consensus cliques produce redundant rows that make SLSQP's subproblem
    singular.
    """
    H, c = quadratic_model(p)
    a_in, b_in, a_eq = linear_constraints(p)
    Z = linalg.null_space(a_eq) if a_eq.shape[0] else np.eye(H.shape[0])
    Hz, cz, az = Z.T @ H @ Z, Z.T @ c, a_in @ Z
    cons = []
    if az.shape[0]:
        cons.append({"type": "ineq", "fun": lambda y: b_in - az @ y, "jac": lambda y: -az})
    y0 = np.linalg.lstsq(Hz, cz, rcond=None)[0]
    res = optimize.minimize(lambda y: 0.5 * y @ Hz @ y - cz @ y, y0, jac=lambda y: Hz @ y - cz,
                            constraints=cons, method="SLSQP",
                            options={"ftol": 1e-15, "maxiter": 2000})
    return Z @ res.x


def reference_solution(p, method, long_run=None):
    """Compute ``x*`` and ``F(x*)`` with one method.

    Parameters
    ----------
    method : ReferenceMethod or str
    long_run : callable, optional
        ``long_run()`` returning a node vector; required for ``LONG_RUN``.
    """
    method = ReferenceMethod(method)
    if method is ReferenceMethod.LONG_RUN:
        if long_run is None:
            raise ValueError("long_run callable required")
        x = np.asarray(long_run(), dtype=float)
    elif method is ReferenceMethod.BRUTE_QP:
        x = brute_qp(p)
    elif method is ReferenceMethod.CENTRALIZED:
        x = centralized_consensus(p)
    else:
        x = scipy_qp(p)
    return ReferenceSolution(x, float(p.objective(x)), method.value)


def cross_validated_reference(p, methods, long_run=None, tol=AGREEMENT_TOL):
    """Run several methods and require pairwise agreement within ``tol``.

    The first method's solution is returned.

    Raises
    ------
    OracleDisagreement
    """
    sols = [reference_solution(p, m, long_run) for m in methods]
    for a, b in itertools.combinations(sols, 2):
        gap = float(np.max(np.abs(a.x - b.x)))
        if gap > tol:
            raise OracleDisagreement(f"{a.method} and {b.method} differ by {gap:.3e}")
    return sols[0]
