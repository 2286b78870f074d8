"""Capacity of ad hoc networks under route-discovery load.

Slotted-time Monte Carlo simulator plus the analytic toolkit it is
checked against: cell tessellation of the unit square, L-shaped cell
routing, interference-safe cell scheduling, RREQ flooding with capture,
the arrival-rate fixed point, and throughput scaling classification.
"""

from .analysis import (INDETERMINATE, INTERFERENCE_LIMITED, RDP_LIMITED,
                       RegimeVerdict, ScalingFit, check_theta,
                       classify_regime, dormancy_bound, fit_exponent,
                       interference_bound)
from .config import RNG_ALGORITHM, NetworkConfig, TauModel
from .errors import (ConfigError, DivergenceError, DomainError, RdcapError,
                     RouteError)
from .flood import (FloodEngine, FloodStats, RdpOutcome, flood_stats,
                    run_concurrent_floods, run_flood)
from .gmodel import (GModel, g_eval, identity_g, k_target_g, step_repair_g,
                     validate_gmodel)
from .harness import (ExperimentSpec, RunRecord, default_horizon, point_seed,
                      run_sweep, scenario_presets)
from .mac import (Schedule, capture_receive, capture_winner, cell_schedule,
                  color_schedule, data_slot_success, schedule_stride)
from .rates import (expected_attempts, q_lower_bound, q_upper_bound,
                    scheme_a_qprime, solve_lambda, xi_from_rates,
                    xi_reference)
from .routing import (CellLoads, Route, assign_destinations, build_route,
                      cell_loads, loads_to_csv, redraw_destination)
from .simulate import Metrics, active_fraction, run_simulation, success_mode
from .topology import (Grid, NodePlacement, build_grid, cell_side,
                       empty_cell_bound, empty_cell_frequency, grid_dim,
                       interference_offsets, interfering_neighbors,
                       place_nodes)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
