"""Scenario file format: one JSON document describing a full experiment world.

Sections: grid, tenants (with hotspot demand models), candidate_sites
(fraction+seed or an explicit pixel list), initial_cells, radio, monitor,
planner, and an optional new-tenant arrival event.  Loading and saving are
value-exact round trips.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

from .monitor import MonitorParams
from .planner import PlannerParams
from .radio import PropagationParams
from .scenario import (CandidateSiteSet, GridSpec, Hotspot, NetworkState,
                       SmallCell, TenantProfile, select_candidate_sites)

__all__ = [
    "Scenario",
    "NewTenantEvent",
    "ScenarioError",
    "load_scenario",
    "save_scenario",
    "scenario_to_dict",
    "scenario_from_dict",
]


class ScenarioError(ValueError):
    """Raised when a scenario document cannot be parsed."""


@dataclass(frozen=True)
class NewTenantEvent:
    """Arrival of a new tenant at a given time step."""

    step: int
    tenant: TenantProfile


@dataclass(frozen=True)
class Scenario:
    grid: GridSpec
    tenants: tuple[TenantProfile, ...]
    candidate_sites: CandidateSiteSet
    initial_state: NetworkState
    radio: PropagationParams
    monitor: MonitorParams
    planner: PlannerParams
    event: NewTenantEvent | None = None
    candidate_fraction: float | None = None


def _tenant_from_dict(d: dict) -> TenantProfile:
    return TenantProfile(
        tenant_id=d["id"],
        contracted_capacity_mbps=float(d["contracted_capacity_mbps"]),
        temporal_profile=tuple(float(w) for w in d.get("temporal_profile", [1.0])),
        hotspots=tuple(Hotspot(*[float(h[k]) for k in
                                 ("x_m", "y_m", "spread_m", "peak_mbps")])
                       for h in d.get("hotspots", [])),
        uniform_floor_mbps=float(d.get("uniform_floor_mbps", 0.0)),
    )


def _tenant_to_dict(t: TenantProfile) -> dict:
    return {
        "id": t.tenant_id,
        "contracted_capacity_mbps": t.contracted_capacity_mbps,
        "temporal_profile": list(t.temporal_profile),
        "hotspots": [{"x_m": h.x_m, "y_m": h.y_m, "spread_m": h.spread_m,
                      "peak_mbps": h.peak_mbps} for h in t.hotspots],
        "uniform_floor_mbps": t.uniform_floor_mbps,
    }


def scenario_from_dict(doc: dict) -> Scenario:
    try:
        g = doc["grid"]
        grid = GridSpec(float(g["width_m"]), float(g["height_m"]),
                        float(g["resolution_m"]))
        tenants = tuple(_tenant_from_dict(t) for t in doc.get("tenants", []))

        cs = doc["candidate_sites"]
        fraction = None
        if "pixels" in cs:
            sites = CandidateSiteSet(tuple(int(p) for p in cs["pixels"]),
                                     seed=cs.get("seed"))
        else:
            fraction = float(cs["fraction"])
            sites = select_candidate_sites(grid, fraction, int(cs["seed"]))

        cells = []
        for i, c in enumerate(doc.get("initial_cells", []), start=1):
            power = c.get("power_dbm")
            cells.append(SmallCell(
                cell_id=int(c.get("id", i)),
                site_pixel=int(c["site_pixel"]),
                channels=tuple(int(ch) for ch in c["channels"]),
                power_dbm=float(power) if power is not None else 24.0,
                power_fixed=power is not None,
            ))
        state = NetworkState(tuple(cells))

        radio = PropagationParams(**doc.get("radio", {}))
        monitor = MonitorParams(**doc.get("monitor", {}))
        planner = PlannerParams(**doc.get("planner", {}))

        event = None
        if "event" in doc and doc["event"] is not None:
            ev = doc["event"]
            event = NewTenantEvent(int(ev["step"]), _tenant_from_dict(ev["tenant"]))
    except ScenarioError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ScenarioError(f"bad scenario document: {exc}") from exc
    return Scenario(grid, tenants, sites, state, radio, monitor, planner,
                    event, fraction)


def scenario_to_dict(scn: Scenario) -> dict:
    doc: dict = {
        "grid": {"width_m": scn.grid.width_m, "height_m": scn.grid.height_m,
                 "resolution_m": scn.grid.resolution_m},
        "tenants": [_tenant_to_dict(t) for t in scn.tenants],
    }
    if scn.candidate_fraction is not None:
        doc["candidate_sites"] = {"fraction": scn.candidate_fraction,
                                  "seed": scn.candidate_sites.seed}
    else:
        doc["candidate_sites"] = {"pixels": list(scn.candidate_sites.site_pixels)}
        if scn.candidate_sites.seed is not None:
            doc["candidate_sites"]["seed"] = scn.candidate_sites.seed
    doc["initial_cells"] = [
        {"id": c.cell_id, "site_pixel": c.site_pixel,
         "channels": list(c.channels),
         **({"power_dbm": c.power_dbm} if c.power_fixed else {})}
        for c in scn.initial_state.cells]
    doc["radio"] = asdict(scn.radio)
    doc["monitor"] = asdict(scn.monitor)
    doc["planner"] = asdict(scn.planner)
    if scn.event is not None:
        doc["event"] = {"step": scn.event.step,
                        "tenant": _tenant_to_dict(scn.event.tenant)}
    return doc


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        with path.open() as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ScenarioError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}:{exc.lineno}: {exc.msg}") from exc
    return scenario_from_dict(doc)


def save_scenario(scn: Scenario, path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(scenario_to_dict(scn), indent=2) + "\n")
    return path
