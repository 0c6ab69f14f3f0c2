"""Worst-case optimal control on finite hypergraphs and sampled systems.

The package has three layers:

* finite problems and the worklist solver (``problem``, ``solver``,
  ``oracle``, ``textio``);
* grid abstractions of sampled ODE systems (``grid``, ``regions``,
  ``flow``, ``enclosure``, ``abstraction``) and a batched parallel
  execution engine with a memory-budgeted transition cache (``runtime``);
* the aerial-firefighting case study and closed-loop simulation
  (``aircraft``, ``scenario``), plus a command-line frontend (``cli``).
"""

from .problem import (
    FULL_SET,
    INF,
    DiscreteProblem,
    InvalidTrajectoryError,
    ProblemFormatError,
    SignalPrefix,
    controller_choices,
    cost_functional,
    dp_operator,
    policy_performance,
    predecessors,
)
from .solver import SolveReport, bellman_ford_yen
from .oracle import dijkstra_minmax, random_problem, value_iteration_oracle

__all__ = [
    "FULL_SET",
    "INF",
    "DiscreteProblem",
    "InvalidTrajectoryError",
    "ProblemFormatError",
    "SignalPrefix",
    "SolveReport",
    "bellman_ford_yen",
    "controller_choices",
    "cost_functional",
    "dijkstra_minmax",
    "dp_operator",
    "policy_performance",
    "predecessors",
    "random_problem",
    "value_iteration_oracle",
]

__version__ = "0.1.0"
