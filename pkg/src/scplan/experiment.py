"""End-to-end experiment runner and scenario validation.

A run steps time forward over the scenario's demand series, monitors
capacity conformance each step, launches the planner when the trigger
fires, and finally evaluates the deployed layout against the tenants'
actual traffic, producing the per-cell required-bandwidth table and the
action changelog.

The arriving tenant's traffic is not observable while its service is being
planned: until deployment completes its planning specs stand in for its
demand (scaled by its temporal profile), after which the real traffic map
becomes operative.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import reporting
from .evaluation import (METHODS, EvaluationContext, TenantSpecPolicy,
                         evaluate_state, make_policy)
from .monitor import CellCheck, DemandHistory, SlaExceedNotice, \
    check_trigger, sla_exceed_check
from .planner import ActionLedger, plan
from .radio import configure_powers
from .scenario import GridSpec, NetworkState, TenantProfile
from .scenario_io import Scenario, ScenarioError, load_scenario

__all__ = [
    "ExperimentConfig",
    "Report",
    "run_experiment",
    "emit_report",
    "validate",
    "validate_file",
    "plan_once",
    "build_event_policy",
]


@dataclass
class ExperimentConfig:
    scenario_path: str | Path
    method: str = "corr-px"
    horizon: int | None = None
    seed: int | None = None                 # overrides the candidate-site seed
    out_dir: str | Path | None = None
    alpha: float | None = None
    beta: float | None = None
    gamma: float | None = None
    k_max: int | None = None
    n_max_sc: int | None = None
    window_steps: int | None = None
    consecutive_steps: int | None = None
    step4_mode: str | None = None

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")


@dataclass
class Report:
    method: str
    horizon: int
    eval_step: int
    checks: list[CellCheck]
    fired_steps: list[int]
    notices: list[tuple[int, SlaExceedNotice]]
    ledgers: list[tuple[int, ActionLedger]]
    initial_state: NetworkState
    final_state: NetworkState
    bandwidth_rows: list[tuple[int, float]]
    total_required_mhz: float
    cell_count: int
    rasters: dict[str, np.ndarray]
    grid: GridSpec
    config_echo: dict


def _apply_overrides(scn: Scenario, cfg: ExperimentConfig) -> Scenario:
    monitor = scn.monitor
    planner = scn.planner
    if cfg.alpha is not None:
        monitor = replace(monitor, alpha=cfg.alpha)
        planner = replace(planner, alpha=cfg.alpha)
    if cfg.window_steps is not None:
        monitor = replace(monitor, window_steps=cfg.window_steps)
    if cfg.consecutive_steps is not None:
        monitor = replace(monitor, consecutive_steps=cfg.consecutive_steps)
    for name in ("beta", "gamma", "k_max", "n_max_sc"):
        value = getattr(cfg, name)
        if value is not None:
            planner = replace(planner, **{name: value})
    if cfg.step4_mode is not None:
        planner = replace(planner, step4_mode=cfg.step4_mode)
    scn = replace(scn, monitor=monitor, planner=planner)
    if cfg.seed is not None and scn.candidate_fraction is not None:
        from .scenario import select_candidate_sites
        scn = replace(scn, candidate_sites=select_candidate_sites(
            scn.grid, scn.candidate_fraction, cfg.seed))
    return scn


def build_event_policy(method: str, tenant: TenantProfile, scn: Scenario,
                       busy_weight: float, basis_px: np.ndarray) -> TenantSpecPolicy:
    """Spec policy for the arriving tenant under one translation method."""
    a_busy = tenant.contracted_capacity_mbps * busy_weight
    own = tenant.spatial_demand(scn.grid) if method == "oracle" else None
    return make_policy(method, tenant.tenant_id, a_busy, scn.grid,
                       basis_px=basis_px, own_map_px=own)


def _existing_policies(scn: Scenario, busy_step: int) -> dict[str, TenantSpecPolicy]:
    """Existing tenants plan against their own observed traffic."""
    policies = {}
    for tn in scn.tenants:
        spatial = tn.spatial_demand(scn.grid)
        a_busy = float(spatial.sum()) * tn.temporal_weight(busy_step)
        if a_busy <= 0:
            policies[tn.tenant_id] = make_policy("uniform-px", tn.tenant_id,
                                                 0.0, scn.grid)
        else:
            policies[tn.tenant_id] = make_policy("oracle", tn.tenant_id, a_busy,
                                                 scn.grid, own_map_px=spatial)
    return policies


def _context(scn: Scenario, policies, known: dict[str, np.ndarray],
             basis: dict[str, np.ndarray], scales: dict[str, float]
             ) -> EvaluationContext:
    return EvaluationContext(grid=scn.grid, radio=scn.radio, policies=policies,
                             known_demand=known, basis_demand=basis,
                             estimate_scale=scales)


def run_experiment(cfg: ExperimentConfig) -> Report:
    scn = _apply_overrides(load_scenario(cfg.scenario_path), cfg)
    grid = scn.grid
    horizon = cfg.horizon if cfg.horizon is not None else max(
        (len(t.temporal_profile) for t in scn.tenants), default=24)
    event = scn.event
    if event is not None and not 0 <= event.step < horizon:
        raise ScenarioError("event step outside the run horizon")

    existing = list(scn.tenants)
    spatial = {t.tenant_id: t.spatial_demand(grid) for t in existing}
    if event is not None:
        spatial[event.tenant.tenant_id] = event.tenant.spatial_demand(grid)

    def slice_of(tenant: TenantProfile, t: int) -> np.ndarray:
        return spatial[tenant.tenant_id] * tenant.temporal_weight(t)

    busy_step = max(
        range(horizon),
        key=lambda t: (sum(float(slice_of(tn, t).sum()) for tn in existing), t))
    basis_rasters = {tn.tenant_id: slice_of(tn, busy_step) for tn in existing}
    basis_total = (np.sum(list(basis_rasters.values()), axis=0)
                   if basis_rasters else np.zeros(grid.num_pixels))

    policies = _existing_policies(scn, busy_step)
    state = configure_powers(scn.initial_state, grid, scn.radio)
    initial_state = state
    history = DemandHistory(scn.monitor.window_steps)

    checks: list[CellCheck] = []
    fired_steps: list[int] = []
    notices: list[tuple[int, SlaExceedNotice]] = []
    ledgers: list[tuple[int, ActionLedger]] = []
    event_tenant = event.tenant if event is not None else None
    event_live_step: int | None = None
    if event is None:
        event_live_step = -1

    for t in range(horizon):
        active = list(existing)
        if event is not None and t >= event.step:
            active.append(event_tenant)
            if event_tenant.tenant_id not in policies:
                busy_weight = event_tenant.temporal_weight(busy_step)
                policies[event_tenant.tenant_id] = build_event_policy(
                    cfg.method, event_tenant, scn, busy_weight, basis_total)
        operative = [tn for tn in active
                     if tn in existing
                     or (event_live_step is not None and t >= event_live_step)]
        known = {tn.tenant_id: slice_of(tn, t) for tn in operative}
        scales = {tn.tenant_id: tn.temporal_weight(t) for tn in active
                  if tn.tenant_id not in known}
        active_policies = {m: p for m, p in policies.items()
                           if m in {tn.tenant_id for tn in active}}
        ctx = _context(scn, active_policies, known, basis_rasters, scales)

        ev = evaluate_state(state, ctx)
        state = ev.state
        history.record(t, ev.required_mhz)
        decision = check_trigger(history, state, scn.monitor,
                                 scn.radio.channel_bandwidth_mhz, t)
        checks.extend(decision.checks)
        for tn in operative:
            notice = sla_exceed_check(float(known[tn.tenant_id].sum()),
                                      tn.contracted_capacity_mbps, tn.tenant_id)
            if notice is not None:
                notices.append((t, notice))

        if decision.fire:
            fired_steps.append(t)
            plan_t = _planning_step(history, state)
            plan_known = {tn.tenant_id: slice_of(tn, plan_t) for tn in operative}
            plan_scales = {tn.tenant_id: tn.temporal_weight(plan_t)
                           for tn in active if tn.tenant_id not in plan_known}
            plan_ctx = _context(scn, active_policies, plan_known,
                                basis_rasters, plan_scales)
            state, ledger = plan(state, scn.candidate_sites, plan_ctx, scn.planner)
            ledgers.append((t, ledger))
            history = DemandHistory(scn.monitor.window_steps)
            if event is not None and event_live_step is None:
                event_live_step = t + 1
        if (event is not None and event_live_step is None
                and t >= event.step + scn.monitor.consecutive_steps - 1):
            # capacity proved adequate for the estimate: service goes live
            event_live_step = t + 1

    # evaluate the final layout against actual traffic from every tenant
    all_tenants = existing + ([event_tenant] if event is not None else [])
    eval_step = max(
        range(horizon),
        key=lambda t: (sum(float(slice_of(tn, t).sum()) for tn in all_tenants), t))
    known = {tn.tenant_id: slice_of(tn, eval_step) for tn in all_tenants}
    final_policies = dict(policies)
    ctx = _context(scn, final_policies, known, basis_rasters, {})
    ev = evaluate_state(state, ctx)
    state = ev.state

    rows = [(cid, ev.required_mhz[cid]) for cid in state.cell_ids]
    total = float(sum(v for _, v in rows))
    snap = ev.snapshot
    sinr_mean = _serving_sinr_mean(state, snap)
    rasters = {
        "demand_mbps": np.sum(list(known.values()), axis=0),
        "serving_cell": snap.serving.pixel_cell.astype(float),
        "pixel_se": snap.pixel_se,
        "sinr_db": sinr_mean,
    }
    echo = {
        "scenario": str(cfg.scenario_path),
        "method": cfg.method,
        "horizon": horizon,
        "seed": cfg.seed,
        "alpha": scn.monitor.alpha,
        "beta": scn.planner.beta,
        "gamma": scn.planner.gamma,
        "k_max": scn.planner.k_max,
        "n_max_sc": scn.planner.n_max_sc,
        "window_steps": scn.monitor.window_steps,
        "consecutive_steps": scn.monitor.consecutive_steps,
        "step4_mode": scn.planner.step4_mode,
    }
    return Report(cfg.method, horizon, eval_step, checks, fired_steps, notices,
                  ledgers, initial_state, state, rows, total, len(state.cells),
                  rasters, grid, echo)


def _planning_step(history: DemandHistory, state: NetworkState) -> int:
    """Window step with the highest total requirement; ties go most recent."""
    totals: dict[int, float] = {}
    for cell in state.cells:
        try:
            window = history.window(cell.cell_id)
        except ValueError:
            continue
        for t, v in window:
            totals[t] = totals.get(t, 0.0) + v
    return max(totals, key=lambda t: (totals[t], t))


def _serving_sinr_mean(state: NetworkState, snap) -> np.ndarray:
    out = np.zeros(snap.sinr_db.shape[0])
    for c in state.cells:
        mask = snap.serving.pixel_cell == c.cell_id
        if mask.any():
            out[mask] = snap.sinr_db[np.ix_(mask, np.array(c.channels))].mean(axis=1)
    return out


def plan_once(scn: Scenario, method: str) -> tuple[NetworkState, ActionLedger,
                                                   EvaluationContext]:
    """One planner invocation on the initial layout, trigger assumed fired."""
    grid = scn.grid
    horizon = max((len(t.temporal_profile) for t in scn.tenants), default=24)
    existing = list(scn.tenants)
    busy_step = max(
        range(horizon),
        key=lambda t: (sum(float(tn.spatial_demand(grid).sum())
                           * tn.temporal_weight(t) for tn in existing), t))
    basis = {tn.tenant_id: tn.spatial_demand(grid) * tn.temporal_weight(busy_step)
             for tn in existing}
    basis_total = (np.sum(list(basis.values()), axis=0) if basis
                   else np.zeros(grid.num_pixels))
    policies = _existing_policies(scn, busy_step)
    if scn.event is not None:
        tenant = scn.event.tenant
        busy_weight = tenant.temporal_weight(busy_step)
        policies[tenant.tenant_id] = build_event_policy(method, tenant, scn,
                                                        busy_weight, basis_total)
    ctx = _context(scn, policies, basis, basis, {})
    state = configure_powers(scn.initial_state, grid, scn.radio)
    new_state, ledger = plan(state, scn.candidate_sites, ctx, scn.planner)
    return new_state, ledger, ctx


def emit_report(report: Report, out_dir) -> list[Path]:
    """Write every report artifact; overwrites are idempotent."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files = [
        reporting.write_monitor_log(out / "monitor_log.csv", report.checks,
                                    set(report.fired_steps)),
        reporting.write_notifications(out / "notifications.csv", report.notices),
        reporting.write_actions_csv(out / "actions.csv", report.ledgers),
        reporting.write_actions_csv(out / "actions_raw.csv", report.ledgers,
                                    raw=True),
        reporting.write_changelog(out / "changelog.txt", report.ledgers),
        reporting.write_bandwidth_table(out / "bandwidth_table.csv",
                                        report.bandwidth_rows),
        reporting.write_layout_fragment(out / "layout.json", report.final_state),
    ]
    for name, raster in report.rasters.items():
        files.append(reporting.write_raster_csv(out / f"{name}.csv",
                                                report.grid, raster))
        files.append(reporting.write_raster_pgm(out / f"{name}.pgm",
                                                report.grid, raster))
    summary = {
        "method": report.method,
        "horizon": report.horizon,
        "eval_step": report.eval_step,
        "cell_count": report.cell_count,
        "total_required_mhz": report.total_required_mhz,
        "fired_steps": report.fired_steps,
        "actions": sum(len(l.actions) for _, l in report.ledgers),
        "notes": [n for _, l in report.ledgers for n in l.notes],
        "config": report.config_echo,
    }
    path = out / "summary.json"
    path.write_text(json.dumps(summary, indent=2) + "\n")
    files.append(path)
    return files


def validate(doc: dict, path: str = "<scenario>") -> list[str]:
    """Check every scenario invariant; returns one line per violation."""
    violations: list[str] = []

    def bad(name: str, detail: str):
        violations.append(f"{name}: {detail}")

    grid = None
    g = doc.get("grid")
    if not isinstance(g, dict):
        bad("grid.missing", "no grid section")
    else:
        try:
            width, height, res = (float(g["width_m"]), float(g["height_m"]),
                                  float(g["resolution_m"]))
        except (KeyError, TypeError, ValueError):
            bad("grid.malformed", "grid needs width_m, height_m, resolution_m")
        else:
            if res <= 0:
                bad("grid.resolution_positive", f"resolution_m={res}")
            elif width <= 0 or height <= 0:
                bad("grid.dimensions_positive", f"{width} x {height}")
            else:
                grid = GridSpec(width, height, res)

    planner_doc = doc.get("planner", {})
    radio_doc = doc.get("radio", {})
    k_max = int(planner_doc.get("k_max", 2))
    num_channels = int(radio_doc.get("num_channels", 4))
    power_min = float(radio_doc.get("power_min_dbm", 10.0))
    power_max = float(radio_doc.get("power_max_dbm", 24.0))

    if float(radio_doc.get("channel_bandwidth_mhz", 20.0)) <= 0:
        bad("radio.bandwidth_positive", "channel_bandwidth_mhz must be > 0")
    if num_channels < 1:
        bad("radio.num_channels_positive", "num_channels must be >= 1")
    if power_min > power_max:
        bad("radio.power_range", f"power_min {power_min} > power_max {power_max}")
    if float(radio_doc.get("se_max_bps_hz", 4.4)) <= 0:
        bad("radio.se_max_positive", "se_max_bps_hz must be > 0")

    monitor_doc = doc.get("monitor", {})
    if not 0 <= float(monitor_doc.get("alpha", 0.9)) <= 1:
        bad("monitor.alpha_range", "alpha must be in [0, 1]")
    if int(monitor_doc.get("window_steps", 24)) < 1:
        bad("monitor.window_positive", "window_steps must be >= 1")
    if int(monitor_doc.get("consecutive_steps", 3)) < 1:
        bad("monitor.consecutive_positive", "consecutive_steps must be >= 1")

    for name in ("beta", "gamma"):
        if not 0 <= float(planner_doc.get(name, 0.5)) <= 1:
            bad(f"planner.{name}_range", f"{name} must be in [0, 1]")
    if k_max < 1:
        bad("planner.k_max_positive", "k_max must be >= 1")
    if int(planner_doc.get("n_max_sc", 10)) < 1:
        bad("planner.n_max_positive", "n_max_sc must be >= 1")

    for td in doc.get("tenants", []) + ([doc["event"]["tenant"]]
                                        if doc.get("event") else []):
        tid = td.get("id", "?")
        if float(td.get("contracted_capacity_mbps", 0)) < 0:
            bad("tenant.contracted_nonnegative", f"tenant {tid}")
        profile = td.get("temporal_profile", [1.0])
        if not profile or min(profile) < 0 or max(profile) > 1:
            bad("tenant.temporal_weights_range", f"tenant {tid}")
        elif max(profile) != 1.0:
            bad("tenant.temporal_peak_one", f"tenant {tid} peak {max(profile)}")
        for h in td.get("hotspots", []):
            if float(h.get("spread_m", 1)) <= 0:
                bad("tenant.hotspot_spread_positive", f"tenant {tid}")
            if float(h.get("peak_mbps", 0)) < 0:
                bad("tenant.hotspot_peak_nonnegative", f"tenant {tid}")
        if float(td.get("uniform_floor_mbps", 0.0)) < 0:
            bad("tenant.floor_nonnegative", f"tenant {tid}")

    site_list: list[int] = []
    cs = doc.get("candidate_sites")
    if not isinstance(cs, dict):
        bad("candidate_sites.missing", "no candidate_sites section")
    elif "pixels" in cs:
        site_list = [int(p) for p in cs["pixels"]]
        if len(set(site_list)) != len(site_list):
            bad("candidate_sites.distinct", "duplicate candidate pixels")
        if grid is not None and any(not 0 <= p < grid.num_pixels for p in site_list):
            bad("candidate_sites.pixel_range", "candidate pixel outside grid")
    else:
        fraction = float(cs.get("fraction", 0))
        if not 0 < fraction <= 1:
            bad("candidate_sites.fraction_range", f"fraction={fraction}")
        elif grid is not None:
            n = int(round(fraction * grid.num_pixels))
            if n <= 0:
                bad("candidate_sites.nonempty", "fraction yields zero sites")
            else:
                from .scenario import select_candidate_sites
                site_list = list(select_candidate_sites(
                    grid, fraction, int(cs.get("seed", 0))).site_pixels)

    sites_seen = set()
    for i, c in enumerate(doc.get("initial_cells", []), start=1):
        label = f"cell {c.get('id', i)}"
        pixel = int(c.get("site_pixel", -1))
        if grid is not None and not 0 <= pixel < grid.num_pixels:
            bad("cells.site_pixel_range", label)
        if site_list and pixel not in site_list:
            bad("cells.site_is_candidate", f"{label} at non-candidate pixel {pixel}")
        if pixel in sites_seen:
            bad("cells.sites_distinct", f"{label} duplicates pixel {pixel}")
        sites_seen.add(pixel)
        channels = [int(ch) for ch in c.get("channels", [])]
        if not 1 <= len(channels) <= k_max:
            bad("cells.channel_count", f"{label} holds {len(channels)} channels")
        if any(not 0 <= ch < num_channels for ch in channels):
            bad("cells.channel_range", label)
        if "power_dbm" in c and not power_min <= float(c["power_dbm"]) <= power_max:
            bad("cells.power_range", f"{label} power {c['power_dbm']}")

    if doc.get("event") is not None and int(doc["event"].get("step", -1)) < 0:
        bad("event.step_nonnegative", "event step must be >= 0")
    return violations


def validate_file(path) -> list[str]:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except OSError as exc:
        raise ScenarioError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}:{exc.lineno}: {exc.msg}") from exc
    return validate(doc, str(path))
