"""Retention time of coupled-dipole memories under Glauber heat-bath dynamics.

Three independent routes to the expected first-passage time from the all-up
configuration: closed forms (:mod:`.closedform`), an exact absorbing-chain
solve (:mod:`.exact`) and Monte Carlo simulation (:mod:`.dynamics`).
"""

from .core import (
    ModelParams,
    Topology,
    TopologyError,
    energy,
    heat_bath_up_probability,
    is_failed,
    linear_chain,
    load_topology,
    local_field,
    magnetization,
    parse_topology,
    triangle,
    uncoupled,
)
from .closedform import (
    tau_linear,
    tau_ratio_triangle_over_linear,
    tau_single,
    tau_three_uncoupled,
    tau_triangle,
)
from .dynamics import RetentionEstimate, SimulationConfig, estimate_retention, first_passage_events
from .exact import build_chain, retention_time_exact, solve_hitting_times

__version__ = "0.1.0"
