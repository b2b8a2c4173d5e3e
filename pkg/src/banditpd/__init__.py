"""Distributed bandit online primal-dual optimisation with one-point sampling."""

from .algorithm import AgentState, RoundTrace, agent_step, init_agents, run
from .bandit import (
    estimate_constraint_jacobian,
    estimate_loss_gradient,
    estimate_two_point,
    sample_unit_sphere,
    smoothed_value,
)
from .benchmarks import dynamic_benchmark, static_benchmark
from .config import ExperimentConfig, preset
from .geometry import FeasibleSet, project, project_nonneg, project_scaled
from .graphs import GraphProcess, build_random_graph, mix, mixing_from_graph, validate_joint_connectivity
from .metrics import fit_growth_exponent, network_ccv, network_regret, path_length
from .problems import OnlineProblem, RidgeProblem, make_ridge_problem
from .schedule import ParameterSchedule, make_schedule

__version__ = "0.1.0"
