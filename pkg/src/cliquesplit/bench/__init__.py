"""Experiment configuration, reference optima, drivers and the command line."""

from .config import ExperimentConfig, ExperimentKind, config_from_dict, load_config
from .experiments import (ResultTable, build_custom_problem, consensus_lasso_problem, lasso_alpha, lasso_data,
                          mixing_by_name, resource_allocation_alpha, resource_allocation_problem,
                          run_consensus_lasso, run_custom, run_experiment, run_resource_allocation,
                          run_solver, run_spectrum_study)
from .reference import (ReferenceMethod, ReferenceSolution, brute_qp, centralized_consensus,
                        cross_validated_reference, reference_solution, scipy_qp)
