"""Solvers derived from Davis-Yin splitting on the duplicated problem."""

from .cddys import cddys_solve, cddys_vm_solve, dys_fixed_point, lifted_gradient, step_bound
from .certificate import (LyapunovMonitor, RateCertificate, consensus_rate_inputs, envelope_check,
                          rate_certificate)
from .consensus import NidsState, diffusion_solve, exact_diffusion_solve, nids_solve
from .cpgd import (Constant, CpgdState, Diminishing, acpgd_solve, clique_projection_T, cpgd_solve,
                   grad_V, penalty_V, sigma_sequence)
from .dys import DysState, check_step, dys_step, init_state, zeta
from .report import ConvergenceReport, Recorder, Reference, relative_residual
