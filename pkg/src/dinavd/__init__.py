"""Inertial dynamics with Hessian-driven damping.

Continuous integrators (second-order, Hessian-free first-order, perturbed,
and the prox-discretized nonsmooth extension), energy diagnostics certifying
the decrease and rate properties of the dynamic, and the inertial
forward-backward solver family for composite problems.
"""

from .backend import active_backend
from .diagnostics import (DiagnosticsReport, audit_monotone, diagnose, energy_E,
                          energy_W, fit_rate, little_o_check, tail_integrals,
                          windowed_sup_ratio)
from .dynamics import (DynamicsParams, FirstOrderState, IntegrationError,
                       Perturbation, Trajectory, first_order_states,
                       integrate_avd, integrate_dinavd_1st,
                       integrate_dinavd_2nd, integrate_gdinavd,
                       integrate_perturbed, power_perturbation)
from .harness import (ExperimentConfig, compare_solvers, load_config,
                      reproduce_illustrations, run_experiment)
from .problems import (CATALOG_IDS, CompositeProblem, ProxableFunction,
                       SmoothFunction, check_derivatives, make_instance,
                       make_lasso, prox_box, prox_l1)
from .solvers import (AlgoParams, IterateHistory, SolverError, run_fista,
                      run_forward_backward, run_ifb_avd)

__version__ = "0.1.0"

__all__ = [
    "AlgoParams", "CATALOG_IDS", "CompositeProblem", "DiagnosticsReport",
    "DynamicsParams", "ExperimentConfig", "FirstOrderState", "IntegrationError",
    "IterateHistory", "Perturbation", "ProxableFunction", "SmoothFunction",
    "SolverError", "Trajectory", "active_backend", "audit_monotone",
    "check_derivatives", "compare_solvers", "diagnose", "energy_E", "energy_W",
    "first_order_states",
    "fit_rate", "integrate_avd", "integrate_dinavd_1st", "integrate_dinavd_2nd",
    "integrate_gdinavd", "integrate_perturbed", "little_o_check", "load_config",
    "make_instance", "make_lasso", "power_perturbation", "prox_box", "prox_l1",
    "reproduce_illustrations", "run_experiment", "run_fista",
    "run_forward_backward", "run_ifb_avd", "tail_integrals",
    "windowed_sup_ratio",
]
