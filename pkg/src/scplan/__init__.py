"""Capacity self-planning for multi-tenant small-cell networks.

A deterministic grid simulator plus a greedy incremental planner: tenant
SLAs are translated into per-cell planning specs, capacity conformance is
monitored over time, and the cell layout and channel allocation are
re-planned when capacity falls short.
"""

from .scenario import (GridSpec, CandidateSiteSet, Hotspot, TenantProfile,
                       TrafficMaps, ServingMap, SmallCell, NetworkState,
                       select_candidate_sites, build_traffic_maps,
                       pixel_positions, pixel_total_demand, cell_demand,
                       aggregate_cell_demand)
from .radio import (PropagationParams, RadioSnapshot, path_loss,
                    noise_floor_dbm, received_power, serving_assignment,
                    configure_powers, sinr, spectral_efficiency, average_se,
                    cell_capacity, radio_snapshot)
from .sla import (BusyHourSpec, PlanningSpecSet, busy_hour_spec,
                  translate_sc_level, translate_pixel_level,
                  pixel_specs_to_cell)
from .monitor import (MonitorParams, DemandHistory, TriggerDecision,
                      SlaExceedNotice, required_bandwidth, busy_hour,
                      check_trigger, sla_exceed_check)
from .evaluation import (METHODS, TenantSpecPolicy, EvaluationContext,
                         NetworkEvaluation, make_policy, evaluate_state)
from .planner import (PlannerParams, ActionLedger, AddChannel, RemoveChannel,
                      AddCell, RemoveCell, Relocate, select_channel,
                      select_site, plan, compress_actions, compress_ledger,
                      replay_actions)
from .scenario_io import (Scenario, NewTenantEvent, ScenarioError,
                          load_scenario, save_scenario)
from .experiment import (ExperimentConfig, Report, run_experiment,
                         emit_report, validate, validate_file, plan_once)
from .presets import build_reference_scenario, bundled_scenario_path

__version__ = "0.1.0"
