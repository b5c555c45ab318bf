"""
Experiment drivers: resource allocation, consensus lasso, spectrum study and
user-configured problems.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .. import oracles as orc
from ..errors import ConfigError
from ..graph import Graph, build_clique_index, custom_cliques, enumerate_cliques
from ..mixing import (build_globally_tuned, build_max_degree, build_metropolis_hastings, build_phi,
                      Provenance, spectrum)
from ..problem import assemble_problem, consensus_constraints
from ..solvers import (Constant, Diminishing, LyapunovMonitor, acpgd_solve, cddys_solve, cddys_vm_solve,
                       consensus_rate_inputs, cpgd_solve, diffusion_solve, dys_fixed_point,
                       exact_diffusion_solve, lifted_gradient, nids_solve, rate_certificate)
from ..solvers.cddys import resolve_alpha
from .reference import cross_validated_reference

AUTO_SAFETY = 0.999
RESIDUAL_TOL = 1e-6
MONITOR_PASS_FRACTION = 0.99
FEASIBILITY_TOL = 1e-6

# 0-based members of the four communities in the resource allocation network
RESOURCE_CLIQUES = (
    tuple(range(0, 6)),
    tuple(range(4, 9)),
    tuple(range(7, 12)),
    (8, 9) + tuple(range(12, 20)),
)
RESOURCE_N = (5.0, 10.0, 5.0, 15.0)

LASSO_MIXINGS = ("phi_maximal", "phi_edge", "max_degree", "metropolis_hastings", "globally_tuned")


@dataclass
class ResultTable:
    """Traces of every solver run in one experiment, plus metadata."""

    experiment: str
    runs: dict = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)
    spectra: list = field(default_factory=list)         # (rank, lambda, matrix_name)
    invariants: dict = field(default_factory=dict)

    @property
    def ok(self):
        return all(self.invariants.values())

    def rows(self):
        """``(iteration, solver, residual, wallclock_us)`` for every run."""
        out = []
        for name, rep in self.runs.items():
            for k, (r, w) in enumerate(zip(rep.residual, rep.wallclock_us), 1):
                out.append((k, name, r, w))
        return out


# -- problem builders -------------------------------------------------------


def resource_allocation_problem(seed, N=RESOURCE_N, a=None, a_hat=1.0):
    """The four-community resource allocation problem on 20 agents.

    ``b_l ~ U[0, 50)`` is drawn before ``b_hat_i ~ U[0, 10)`` from one
    generator. ``N`` entries may be ``inf`` to deactivate a constraint.
    """
    rng = np.random.default_rng(seed)
    q = len(RESOURCE_CLIQUES)
    a = np.arange(1, q + 1, dtype=float) if a is None else np.asarray(a, dtype=float)
    b = rng.uniform(0.0, 50.0, size=q)
    b_hat = rng.uniform(0.0, 10.0, size=20)
    g = Graph.from_cliques(20, RESOURCE_CLIQUES)
    ci = build_clique_index(g, custom_cliques(g, RESOURCE_CLIQUES))
    # community label of each clique in the (size, lexicographic) clique order
    order = [RESOURCE_CLIQUES.index(c) for c in ci.cliques]
    clique_f = [orc.clique_mean_quadratic(a[l], len(c), b[l]) for l, c in zip(order, ci.cliques)]
    clique_g = [orc.HalfSpace(np.ones(len(c)), float(N[l])) for l, c in zip(order, ci.cliques)]
    s = np.sqrt(a_hat)
    node_f = [orc.Quadratic(s, s * b_hat[i]) for i in range(20)]
    node_g = [orc.NonNegative() for _ in range(20)]
    p = assemble_problem(g, ci, 1, node_f=node_f, node_g=node_g, clique_f=clique_f,
                         clique_g=clique_g, name="resource_allocation")
    data = {"a": a, "b": b, "b_hat": b_hat, "N": np.asarray(N, dtype=float), "a_hat": a_hat,
            "clique_order": order}
    return p, data


def resource_allocation_alpha(p, data):
    """``1/(max a_hat / min |Q^i| + max a_l)``."""
    return 1.0 / (data["a_hat"] / p.cd.node_counts.min() + data["a"].max())


def lasso_data(n, m, seed):
    """``Psi_i = I + 0.05 Omega_i`` and ``b_i``, standard normal entries, node by node."""
    rng = np.random.default_rng(seed)
    psi, b = [], []
    for _ in range(n):
        psi.append(np.eye(m) + 0.05 * rng.standard_normal((m, m)))
        b.append(rng.standard_normal(m))
    return psi, b


def consensus_lasso_problem(g, psi, b, lam, clique_kind="maximal"):
    ci = build_clique_index(g, enumerate_cliques(g, clique_kind))
    m = psi[0].shape[1]
    node_f = [orc.Quadratic(P, bi) for P, bi in zip(psi, b)]
    node_g = [orc.L1Norm(lam) for _ in psi]
    return assemble_problem(g, ci, m, node_f=node_f, node_g=node_g,
                            clique_g=consensus_constraints(ci, m), name="consensus_lasso")


def lasso_alpha(p, psi, rule="clique_scaled"):
    """Common NIDS step for the lasso experiment.

    ``"clique_scaled"``: ``1/max_i lambda_max(|Q^i| Psi_i^T Psi_i)`` with the
    clique counts of ``p``. ``"unscaled"``: ``1/max_i lambda_max(Psi_i^T Psi_i)``.
    """
    if rule == "clique_scaled":
        counts = p.cd.node_counts
    elif rule == "unscaled":
        counts = np.ones(p.n)
    else:
        raise ConfigError(f"unknown alpha rule {rule!r}")
    return 1.0 / max(c * np.linalg.eigvalsh(P.T @ P)[-1] for c, P in zip(counts, psi))


def mixing_by_name(name, g, alpha=None, params=None):
    params = params or {}
    if name in ("phi_maximal", "phi_edge"):
        kind = "maximal" if name == "phi_maximal" else "edge"
        ci = build_clique_index(g, enumerate_cliques(g, kind))
        prov = Provenance.PHI_MAXIMAL if kind == "maximal" else Provenance.PHI_EDGE
        return build_phi(ci, g=g, provenance=prov)
    if name == "max_degree":
        return build_max_degree(g, params.get("epsilon"))
    if name == "metropolis_hastings":
        return build_metropolis_hastings(g, params.get("varepsilon", 1.0))
    if name == "globally_tuned":
        if alpha is None:
            raise ConfigError("globally tuned mixing needs the step size")
        return build_globally_tuned(g, alpha, params.get("epsilon"))
    raise ConfigError(f"unknown mixing {name!r}")


# -- solver dispatch ----------------------------------------------------------


def _auto_alpha(p, algorithm, alpha):
    if alpha not in (None, "auto"):
        return float(alpha)
    if algorithm in ("cddys", "cddys_vm"):
        return resolve_alpha(p, "auto", algorithm == "cddys_vm")
    lhat = p.L_hat_max
    if lhat <= 0:
        return 1.0
    if algorithm in ("nids", "exact_diffusion", "diffusion"):
        return AUTO_SAFETY * 2.0 / lhat
    return AUTO_SAFETY / lhat


def run_solver(p, entry, reference=None, mixing=None, record_trajectory=False):
    """Run one configured solver; returns ``(report, extra_metadata)``."""
    algo = entry["algorithm"]
    iters = int(entry.get("iters", 1000))
    alpha = _auto_alpha(p, algo, entry.get("alpha"))
    monitored = bool(entry.get("monitor")) and algo == "cddys_vm"
    if monitored and entry.get("alpha") in (None, "auto"):
        # the certificate needs alpha < 2 varepsilon / L; take the midpoint
        L, _ = consensus_rate_inputs(p)
        alpha = min(alpha, float(entry.get("varepsilon", 0.5)) / L)
    tol = entry.get("tol")
    meta = {"algorithm": algo, "alpha": alpha, "iters": iters}
    kw = dict(reference=reference, record_trajectory=record_trajectory, tol=tol)
    if algo in ("cddys", "cddys_vm"):
        monitor = None
        if monitored:
            L, mu = consensus_rate_inputs(p)
            cert = rate_certificate(L, mu, entry.get("varepsilon", 0.5), alpha, entry.get("nu"))
            ref_state = dys_fixed_point(p, alpha, int(entry.get("reference_iters", 100_000)))
            monitor = LyapunovMonitor(cert, ref_state.z, ref_state.y_half,
                                      lambda y: lifted_gradient(p, y), metric=p.metric.weights)
            meta["certificate"] = cert.as_dict()
        solve = cddys_vm_solve if algo == "cddys_vm" else cddys_solve
        rep = solve(p, alpha, iters, monitor=monitor, **kw)
        if monitor is not None:
            meta["lyapunov_pass_fraction"] = monitor.pass_fraction
        return rep, meta
    if algo in ("nids", "exact_diffusion", "diffusion"):
        if mixing is None:
            raise ConfigError(f"{algo} needs a mixing matrix")
        meta["mixing"] = mixing.provenance.value
        meta["mixing_params"] = {k: v for k, v in mixing.params.items()}
        solve = {"nids": nids_solve, "exact_diffusion": exact_diffusion_solve,
                 "diffusion": diffusion_solve}[algo]
        return solve(p, mixing, alpha, iters, **kw), meta
    if algo == "cpgd":
        sched = entry.get("schedule", {"type": "constant"})
        if sched.get("type", "constant") == "constant":
            schedule = Constant(alpha)
        elif sched["type"] == "diminishing":
            schedule = Diminishing(float(sched.get("c", alpha)))
        else:
            raise ConfigError(f"unknown schedule {sched!r}")
        meta["schedule"] = repr(schedule)
        return cpgd_solve(p, schedule, iters, depth=int(entry.get("depth", 1)), **kw), meta
    if algo == "acpgd":
        return acpgd_solve(p, alpha, iters, **kw), meta
    raise ConfigError(f"unknown algorithm {algo!r}")


def _run_name(entry, default):
    return entry.get("name") or default


def _common_metadata(cfg, g=None):
    import numpy, scipy
    from .. import __version__
    meta = {"experiment": cfg.kind.value, "config_hash": cfg.digest(), "seeds": cfg.seeds,
            "versions": {"cliquesplit": __version__, "numpy": numpy.__version__, "scipy": scipy.__version__}}
    if g is not None:
        meta["graph"] = {"n": g.n, "edges": len(g.edges), "source": cfg.graph}
    return meta


# -- experiments --------------------------------------------------------------


def run_resource_allocation(cfg):
    """CD-DYS on the four-community resource allocation problem.

    ``params``: ``N`` (list, entries may be ``"inf"``), ``iters`` (5000),
    ``reference_factor`` (50). The default solver is CD-DYS with the step
    ``1/(max a_hat/min |Q^i| + max a_l)``; a solver entry selects it with
    ``"alpha": "experiment"``.
    """
    prm = cfg.params
    N = [float(v) if v is not None else np.inf for v in prm.get("N", RESOURCE_N)]
    p, data = resource_allocation_problem(cfg.seed("data", 0), N=N)
    iters = int(prm.get("iters", 5000))
    alpha = resource_allocation_alpha(p, data)
    solvers = cfg.solvers or [{"algorithm": "cddys", "alpha": "experiment"}]
    factor = int(prm.get("reference_factor", 50))

    def long_run():
        return dys_fixed_point(p, alpha, iters * factor, variable_metric=False).aux

    methods = prm.get("reference_methods", ["long_run", "scipy"])
    ref = cross_validated_reference(p, methods, long_run=long_run)
    table = ResultTable("resource_allocation")
    meta = _common_metadata(cfg, p.graph)
    meta.update({"reference_objective": ref.objective, "reference_method": ref.method,
                 "cross_checked_with": methods, "alpha_experiment": alpha,
                 "b": data["b"].tolist(), "b_hat": data["b_hat"].tolist(), "runs": {}})
    for idx, entry in enumerate(solvers):
        entry = dict(entry)
        entry.setdefault("iters", iters)
        if entry.get("alpha") == "experiment":
            entry["alpha"] = alpha
        rep, rmeta = run_solver(p, entry, ref.as_reference())
        name = _run_name(entry, f"{entry['algorithm']}_{idx}" if len(solvers) > 1 else entry["algorithm"])
        table.runs[name] = rep
        viol = feasibility_report(p, rep.x, data)
        rmeta["feasibility"] = viol
        meta["runs"][name] = rmeta
        table.invariants[f"feasible:{name}"] = max(viol.values()) <= FEASIBILITY_TOL
    table.metadata = meta
    return table


def feasibility_report(p, x, data):
    """Largest excess of each clique sum over ``N_l`` and of ``-x``."""
    out = {}
    for l, c in enumerate(p.cd.cliques):
        lim = data["N"][data["clique_order"][l]]
        out[f"clique_{data['clique_order'][l] + 1}"] = float(max(x[list(c)].sum() - lim, 0.0))
    out["nonneg"] = float(max(0.0, -x.min()))
    return out


def run_consensus_lasso(cfg):
    """NIDS with five mixing matrices on one seeded l1 consensus problem.

    ``params``: ``m`` (10), ``lam`` (0.001), ``iters`` (300),
    ``reference_factor`` (50), ``mixings`` (all five), ``alpha`` or
    ``alpha_rule`` (see :func:`lasso_alpha`; default ``"clique_scaled"``
    with the counts of the configured clique kind).
    """
    prm = cfg.params
    g = cfg.build_graph()
    m, lam = int(prm.get("m", 10)), float(prm.get("lam", 1e-3))
    iters = int(prm.get("iters", 300))
    psi, b = lasso_data(g.n, m, cfg.seed("data", 0))
    p = consensus_lasso_problem(g, psi, b, lam, cfg.clique_kind)
    alpha = float(prm["alpha"]) if "alpha" in prm else lasso_alpha(p, psi, prm.get("alpha_rule", "clique_scaled"))
    mixings = {name: mixing_by_name(name, g, alpha) for name in prm.get("mixings", LASSO_MIXINGS)}
    factor = int(prm.get("reference_factor", 50))
    first = next(iter(mixings.values()))

    def long_run():
        return nids_solve(p, first, alpha, iters * factor).x

    methods = prm.get("reference_methods", ["centralized", "long_run"])
    ref = cross_validated_reference(p, methods, long_run=long_run)
    table = ResultTable("consensus_lasso")
    meta = _common_metadata(cfg, g)
    meta.update({"reference_objective": ref.objective, "reference_method": ref.method,
                 "cross_checked_with": methods, "alpha": alpha, "runs": {}})
    solvers = cfg.solvers or [{"algorithm": "nids", "mixing": name} for name in mixings]
    tol = float(prm.get("residual_tol", RESIDUAL_TOL))
    for entry in solvers:
        entry = dict(entry)
        entry.setdefault("iters", iters)
        entry.setdefault("alpha", alpha)
        mix_name = entry.get("mixing", "phi_maximal")
        mixing = mixings.get(mix_name) or mixing_by_name(mix_name, g, alpha)
        rep, rmeta = run_solver(p, entry, ref.as_reference(), mixing=mixing)
        name = _run_name(entry, f"{entry['algorithm']}_{mix_name}")
        rmeta["iterations_to_tol"] = rep.first_below(tol)
        table.runs[name] = rep
        meta["runs"][name] = rmeta
    meta["residual_tol"] = tol
    table.metadata = meta
    return table


def run_spectrum_study(cfg):
    """Spectra of Phi and the comparison matrices on seeded random graphs.

    ``params``: ``graph_seeds`` (list; defaults to the graph seed),
    ``n`` (50), ``p`` (0.2), ``matrices``.
    """
    from ..graph import erdos_renyi

    prm = cfg.params
    names = prm.get("matrices", ["phi_maximal", "phi_edge", "max_degree", "metropolis_hastings"])
    if cfg.graph is not None and "file" in cfg.graph:
        graphs = [("file", cfg.build_graph())]
    else:
        gspec = cfg.graph or {}
        n, pr = int(prm.get("n", gspec.get("n", 50))), float(prm.get("p", gspec.get("p", 0.2)))
        seeds = prm.get("graph_seeds", [gspec.get("seed", cfg.seeds.get("graph"))])
        if any(not isinstance(s, int) for s in seeds):
            raise ConfigError("spectrum study needs integer graph seeds")
        graphs = [(s, erdos_renyi(n, pr, s, connected=prm.get("connected", True))) for s in seeds]
    table = ResultTable("spectrum_study")
    meta = _common_metadata(cfg)
    meta["graphs"] = []
    for seed, g in graphs:
        mats = {name: mixing_by_name(name, g, prm.get("alpha"), prm) for name in names}
        suffix = f"@{seed}" if len(graphs) > 1 else ""
        info = {"seed": seed, "n": g.n, "edges": len(g.edges), "connected": g.is_connected(), "matrices": {}}
        for name, mix in mats.items():
            rep = spectrum(mix)
            for r, lam in enumerate(rep.eigenvalues, 1):
                table.spectra.append((r, float(lam), name + suffix))
            info["matrices"][name] = {"second_largest": rep.second_largest, "smallest": rep.smallest,
                                      "multiplicity_one": rep.multiplicity_one,
                                      "row_sum_error": mix.row_sum_error()}
            if name.startswith("phi"):
                table.invariants[f"doubly_stochastic:{name}{suffix}"] = mix.row_sum_error() <= 1e-12
                table.invariants[f"psd:{name}{suffix}"] = rep.smallest >= -1e-10
                if g.is_connected():
                    table.invariants[f"simple_one:{name}{suffix}"] = rep.one_is_simple
        if "phi_edge" in mats:
            dphi = np.diag(mats["phi_edge"].w)
            for other in ("max_degree", "metropolis_hastings"):
                if other in mats and g.edges:
                    table.invariants[f"diag_below:{other}{suffix}"] = bool(np.all(dphi < np.diag(mats[other].w)))
        meta["graphs"].append(info)
    table.metadata = meta
    return table


# -- user-configured problems -------------------------------------------------


def _oracle(spec, size, m):
    if spec is None:
        return None
    t = spec.get("type")
    dim = size * m
    if t == "zero":
        return None
    if t == "quadratic":
        A = spec.get("A", 1.0)
        if np.ndim(A) == 0:
            return orc.Quadratic(float(A), np.broadcast_to(np.asarray(spec.get("b", 0.0), dtype=float), (dim,)))
        return orc.Quadratic(np.asarray(A, dtype=float), spec["b"])
    if t == "clique_mean_quadratic":
        return orc.clique_mean_quadratic(float(spec.get("weight", 1.0)), size, spec.get("target", 0.0), m)
    if t == "l1":
        return orc.L1Norm(float(spec["lam"]))
    if t == "nonneg":
        return orc.NonNegative()
    if t == "consensus":
        return orc.ConsensusSet(size, m)
    if t == "halfspace":
        normal = spec.get("normal", "ones")
        normal = np.ones(dim) if normal == "ones" else np.asarray(normal, dtype=float)
        off = spec["offset"]
        return orc.HalfSpace(normal, np.inf if off in (None, "inf") else float(off))
    raise ConfigError(f"unknown oracle type {t!r}")


def _oracles(spec, sizes, m, what):
    if spec is None:
        return None
    if isinstance(spec, dict):
        return [_oracle(spec, s, m) for s in sizes]
    if isinstance(spec, list):
        if len(spec) != len(sizes):
            raise ConfigError(f"{what}: expected {len(sizes)} entries, got {len(spec)}")
        return [_oracle(sp, s, m) for sp, s in zip(spec, sizes)]
    raise ConfigError(f"{what} must be an object or a list")


def build_custom_problem(cfg):
    """Assemble a problem from ``params``: ``node_dim``, ``node_f``, ``node_g``,
    ``clique_f``, ``clique_g`` and optional ``cliques`` (1-based lists)."""
    prm = cfg.params
    g = cfg.build_graph()
    m = int(prm.get("node_dim", 1))
    if "cliques" in prm:
        cs = custom_cliques(g, [[v - 1 for v in c] for c in prm["cliques"]])
    else:
        cs = enumerate_cliques(g, cfg.clique_kind)
    ci = build_clique_index(g, cs)
    sizes = [len(c) for c in ci.cliques]
    return assemble_problem(
        g, ci, m,
        node_f=_oracles(prm.get("node_f"), [1] * g.n, m, "node_f"),
        node_g=_oracles(prm.get("node_g"), [1] * g.n, m, "node_g"),
        clique_f=_oracles(prm.get("clique_f"), sizes, m, "clique_f"),
        clique_g=_oracles(prm.get("clique_g"), sizes, m, "clique_g"),
        name="custom",
    )


def run_custom(cfg):
    """Run every configured solver on a user-specified problem."""
    if not cfg.solvers:
        raise ConfigError("custom experiments need at least one solver")
    p = build_custom_problem(cfg)
    prm = cfg.params
    first = dict(cfg.solvers[0])
    factor = int(prm.get("reference_factor", 50))
    mixing_for = lambda e: (mixing_by_name(e["mixing"], p.graph, _auto_alpha(p, e["algorithm"], e.get("alpha")))
                            if "mixing" in e else None)

    def long_run():
        e = dict(first)
        e["iters"] = int(e.get("iters", 1000)) * factor
        e.pop("monitor", None)
        e.pop("tol", None)
        return run_solver(p, e, mixing=mixing_for(e))[0].x

    methods = prm.get("reference_methods", ["long_run"])
    ref = cross_validated_reference(p, methods, long_run=long_run)
    table = ResultTable("custom")
    meta = _common_metadata(cfg, p.graph)
    meta.update({"reference_objective": ref.objective, "reference_method": ref.method,
                 "cross_checked_with": methods, "runs": {}})
    for idx, entry in enumerate(cfg.solvers):
        rep, rmeta = run_solver(p, entry, ref.as_reference(), mixing=mixing_for(entry))
        name = _run_name(entry, f"{entry['algorithm']}_{idx}")
        table.runs[name] = rep
        meta["runs"][name] = rmeta
        if "lyapunov_pass_fraction" in rmeta:
            table.invariants[f"lyapunov:{name}"] = rmeta["lyapunov_pass_fraction"] >= MONITOR_PASS_FRACTION
    table.metadata = meta
    return table


def run_experiment(cfg):
    from .config import ExperimentKind
    return {
        ExperimentKind.RESOURCE_ALLOCATION: run_resource_allocation,
        ExperimentKind.CONSENSUS_LASSO: run_consensus_lasso,
        ExperimentKind.SPECTRUM_STUDY: run_spectrum_study,
        ExperimentKind.CUSTOM: run_custom,
    }[cfg.kind](cfg)
