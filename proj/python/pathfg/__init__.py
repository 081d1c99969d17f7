"""Path-following MPC with a reference governor for a quadrotor outer loop."""

from ._core import (
    ConfigError,
    Error,
    PlanningError,
    SimConfig,
    SimResult,
    discretize_zoh,
    load_config,
    parse_config,
    plan,
    run_closed_loop,
    run_horizon_study,
    solve_dare,
    solve_qp,
    trajectory_header,
    write_outputs,
)

__all__ = [
    "ConfigError",
    "Error",
    "PlanningError",
    "SimConfig",
    "SimResult",
    "discretize_zoh",
    "load_config",
    "parse_config",
    "plan",
    "run_closed_loop",
    "run_horizon_study",
    "solve_dare",
    "solve_qp",
    "trajectory_header",
    "write_outputs",
]
