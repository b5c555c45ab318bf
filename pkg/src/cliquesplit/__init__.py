"""Distributed optimization of clique-wise coupled problems."""

from .cd import BlockMetric, CdMatrix, grad_lifted, metric_identities_check, prox_lifted_node_separable
from .errors import *  # noqa: F401,F403
from .graph import (CliqueIndex, CliqueKind, CliqueSet, Graph, build_clique_index, check_assumptions,
                    custom_cliques, enumerate_cliques, erdos_renyi, read_graph, write_graph)
from .mixing import (MixingMatrix, Provenance, SpectrumReport, build_globally_tuned, build_max_degree,
                     build_metropolis_hastings, build_phi, spectrum)
from .problem import ProblemSpec, assemble_problem, consensus_constraints

__version__ = "0.1.0"
