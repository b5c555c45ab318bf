"""
Mixing matrices: the clique-based matrix Phi and the classical comparisons.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import AssumptionViolation, DimensionMismatch, EpsilonOutOfRange
from .graph import check_assumptions

EIG_TOL = 1e-10


class Provenance(str, enum.Enum):
    PHI_EDGE = "phi_edge"
    PHI_MAXIMAL = "phi_maximal"
    PHI_CUSTOM = "phi_custom"
    MAX_DEGREE = "max_degree"
    METROPOLIS_HASTINGS = "metropolis_hastings"
    GLOBALLY_TUNED = "globally_tuned"


@dataclass(frozen=True)
class MixingMatrix:
    w: np.ndarray
    provenance: Provenance
    params: dict = field(default_factory=dict)

    @property
    def n(self):
        return self.w.shape[0]

    def apply(self, x):
        """``(W kron I_m) x`` for a stacked vector of ``n`` blocks of equal size."""
        x = np.asarray(x, dtype=float)
        if x.size % self.n:
            raise DimensionMismatch(f"vector of size {x.size} is not {self.n} equal blocks")
        return (self.w @ x.reshape(self.n, -1)).reshape(-1)

    def row_sum_error(self):
        return float(max(np.abs(self.w.sum(axis=1) - 1).max(), np.abs(self.w.sum(axis=0) - 1).max()))


def build_phi(ci, q=None, g=None, provenance=Provenance.PHI_CUSTOM):
    """The clique-based mixing matrix for scalar node variables.

    ``[Phi]_ij = 1/(|Q^i||Q^j|) sum_{l in Q^ij} 1/(1^T Q_l 1)``, with
    ``Q^ii = Q^i``. Equivalently ``Phi = sum_l s_l u_l u_l^T`` with
    ``u_l`` the indicator of ``C_l`` divided by the clique counts and
    ``s_l = 1/sum_{j in C_l} 1/|Q^j|``.

    Parameters
    ----------
    ci : graph.CliqueIndex
    q : cd.BlockMetric, optional
        Only consulted for a consistency check on the weights.
    g : graph.Graph, optional
        When given, the edge/shared-clique equivalence is verified.

    Raises
    ------
    AssumptionViolation
        If ``g`` is given and some edge shares no clique, or a non-edge does.
    """
    if g is not None:
        rep = check_assumptions(ci, g)
        if not (rep.assumption1 and rep.assumption2):
            raise AssumptionViolation("cliques must cover every node and share one iff adjacent")
    counts = ci.counts.astype(float)
    if np.any(counts == 0):
        raise AssumptionViolation("every node must belong to a clique")
    if q is not None and q.cd.uniform_dim != 1:
        raise DimensionMismatch("Phi is defined for scalar node variables")
    phi = np.zeros((ci.n, ci.n))
    for c in ci.cliques:
        c = list(c)
        inv = 1.0 / counts[c]
        s = 1.0 / inv.sum()
        phi[np.ix_(c, c)] += s * np.outer(inv, inv)
    return MixingMatrix(phi, Provenance(provenance))


def laplacian_mixing(g, epsilon):
    """``W_L = I - epsilon L``."""
    return np.eye(g.n) - epsilon * g.laplacian()


def default_epsilon(g, scale=0.99):
    dmax = int(g.degrees().max(initial=0))
    return scale / dmax if dmax else scale


def build_max_degree(g, epsilon=None):
    """``(I + W_L)/2`` with ``W_L = I - epsilon L``.

    ``epsilon`` must lie in ``(0, 1/max degree)``; the default is
    ``0.99/max degree``.
    """
    dmax = int(g.degrees().max(initial=0))
    if epsilon is None:
        epsilon = default_epsilon(g)
    if epsilon <= 0 or (dmax and epsilon >= 1.0 / dmax):
        raise EpsilonOutOfRange(f"epsilon={epsilon} not in (0, 1/{dmax})")
    w = 0.5 * (np.eye(g.n) + laplacian_mixing(g, epsilon))
    return MixingMatrix(w, Provenance.MAX_DEGREE, {"epsilon": float(epsilon)})


def build_metropolis_hastings(g, varepsilon=1.0):
    """``(I + W_mh)/2`` with off-diagonals ``1/(max(deg_i, deg_j) + varepsilon)``."""
    if varepsilon <= 0:
        raise ValueError("varepsilon must be positive")
    deg = g.degrees()
    w = np.zeros((g.n, g.n))
    for i, j in g.edges:
        w[i, j] = w[j, i] = 1.0 / (max(deg[i], deg[j]) + varepsilon)
    w[np.diag_indices(g.n)] = 1.0 - w.sum(axis=1)
    return MixingMatrix(0.5 * (np.eye(g.n) + w), Provenance.METROPOLIS_HASTINGS,
                        {"varepsilon": float(varepsilon)})


def build_globally_tuned(g, alpha, epsilon=None):
    """``I - alpha c (I - W_L)`` with ``c = 1/((1 - lambda_min(W_L)) alpha)``.

    The scaling maps the smallest eigenvalue of ``W_L`` to zero, which is
    the most aggressive PSD rescaling of ``W_L``.
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    if epsilon is None:
        epsilon = default_epsilon(g)
    wl = laplacian_mixing(g, epsilon)
    lam_min = float(np.linalg.eigvalsh(wl)[0])
    if lam_min >= 1.0 - EIG_TOL:
        # no edges: W_L = I and the rescaling is irrelevant
        return MixingMatrix(np.eye(g.n), Provenance.GLOBALLY_TUNED,
                            {"alpha": float(alpha), "lambda_min": lam_min, "epsilon": float(epsilon), "c": None})
    c = 1.0 / ((1.0 - lam_min) * alpha)
    w = np.eye(g.n) - alpha * c * (np.eye(g.n) - wl)
    return MixingMatrix(w, Provenance.GLOBALLY_TUNED,
                        {"alpha": float(alpha), "lambda_min": lam_min, "epsilon": float(epsilon), "c": c})


@dataclass(frozen=True)
class SpectrumReport:
    eigenvalues: np.ndarray          # descending
    multiplicity_one: int
    second_largest: float
    smallest: float

    @property
    def one_is_simple(self):
        return self.multiplicity_one == 1


def spectrum(m, tol=EIG_TOL):
    w = m.w if isinstance(m, MixingMatrix) else np.asarray(m, dtype=float)
    if not np.allclose(w, w.T, atol=1e-12, rtol=0):
        raise ValueError("spectrum expects a symmetric matrix")
    eig = np.linalg.eigvalsh(w)[::-1]
    mult = int(np.sum(np.abs(eig - 1.0) <= tol))
    second = float(eig[1]) if eig.size > 1 else float("nan")
    return SpectrumReport(eig, mult, second, float(eig[-1]))
