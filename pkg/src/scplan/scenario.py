"""Geographic grid, tenants, traffic demand and deployed-network state.

The scenario is the simulator's ground truth: a rectangular pixel grid,
per-tenant per-time-step demand rasters, the candidate site pool and the
currently deployed small cells.  Everything here is immutable after
construction; updates produce new objects.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

__all__ = [
    "GridSpec",
    "pixel_positions",
    "CandidateSiteSet",
    "select_candidate_sites",
    "Hotspot",
    "TenantProfile",
    "TrafficMaps",
    "build_traffic_maps",
    "ServingMap",
    "SmallCell",
    "NetworkState",
    "pixel_total_demand",
    "cell_demand",
    "aggregate_cell_demand",
]


@dataclass(frozen=True)
class GridSpec:
    """Rectangular raster of pixels covering the planning area.

    The pixel count per axis is ``ceil(dimension / resolution_m)`` and pixel
    coordinates sit at the centers of the cells of a uniform grid fitted to
    the area, so every pixel lies strictly inside the bounds.  The effective
    pixel pitch is ``dimension / count`` (never larger than ``resolution_m``).
    Pixel indexing is row-major: ``index = row * nx + col``.
    """

    width_m: float
    height_m: float
    resolution_m: float

    def __post_init__(self):
        if self.resolution_m <= 0:
            raise ValueError("resolution_m must be positive")
        if self.width_m <= 0 or self.height_m <= 0:
            raise ValueError("grid dimensions must be positive")

    @property
    def nx(self) -> int:
        return math.ceil(self.width_m / self.resolution_m)

    @property
    def ny(self) -> int:
        return math.ceil(self.height_m / self.resolution_m)

    @property
    def num_pixels(self) -> int:
        return self.nx * self.ny

    def pixel_xy(self, pixel: int) -> tuple[float, float]:
        """Center coordinates (x_m, y_m) of one pixel."""
        if not 0 <= pixel < self.num_pixels:
            raise ValueError(f"pixel {pixel} out of range")
        row, col = divmod(pixel, self.nx)
        return ((col + 0.5) * self.width_m / self.nx,
                (row + 0.5) * self.height_m / self.ny)


@lru_cache(maxsize=32)
def pixel_positions(grid: GridSpec) -> np.ndarray:
    """(num_pixels, 2) array of pixel center coordinates, row-major order."""
    cols = (np.arange(grid.nx) + 0.5) * grid.width_m / grid.nx
    rows = (np.arange(grid.ny) + 0.5) * grid.height_m / grid.ny
    xx, yy = np.meshgrid(cols, rows)
    pos = np.column_stack([xx.ravel(), yy.ravel()])
    pos.flags.writeable = False
    return pos


@dataclass(frozen=True)
class CandidateSiteSet:
    """Pixels where a small cell may be deployed (backhaul/site constraints)."""

    site_pixels: tuple[int, ...]
    seed: int | None = None

    def __post_init__(self):
        if len(set(self.site_pixels)) != len(self.site_pixels):
            raise ValueError("duplicate candidate site pixels")

    def __contains__(self, pixel: int) -> bool:
        return pixel in set(self.site_pixels)

    def __len__(self) -> int:
        return len(self.site_pixels)


def select_candidate_sites(grid: GridSpec, fraction: float, seed: int) -> CandidateSiteSet:
    """Draw ``round(fraction * num_pixels)`` distinct pixels, reproducibly.

    The draw is uniform without replacement from a generator seeded with
    ``seed``; the result is returned in ascending pixel order so equal seeds
    give identical sets and ``fraction=1.0`` is the full grid in index order.
    """
    if not 0 < fraction <= 1:
        raise ValueError("fraction must be in (0, 1]")
    n = int(round(fraction * grid.num_pixels))
    if n <= 0:
        raise ValueError("no candidate sites")
    if n >= grid.num_pixels:
        pixels = np.arange(grid.num_pixels)
    else:
        rng = np.random.default_rng(seed)
        pixels = np.sort(rng.choice(grid.num_pixels, size=n, replace=False))
    return CandidateSiteSet(tuple(int(p) for p in pixels), seed=seed)


@dataclass(frozen=True)
class Hotspot:
    """One Gaussian bump of traffic demand."""

    x_m: float
    y_m: float
    spread_m: float
    peak_mbps: float    # per-pixel demand at the hotspot center


@dataclass(frozen=True)
class TenantProfile:
    """A communications provider sharing the infrastructure under an SLA.

    ``temporal_profile`` holds per-time-step weights normalized so the peak
    is exactly 1; the spatial demand model is a sum of Gaussian hotspots on
    top of a uniform floor.
    """

    tenant_id: str
    contracted_capacity_mbps: float
    temporal_profile: tuple[float, ...] = (1.0,)
    hotspots: tuple[Hotspot, ...] = ()
    uniform_floor_mbps: float = 0.0

    def __post_init__(self):
        if self.contracted_capacity_mbps < 0:
            raise ValueError("contracted_capacity_mbps must be >= 0")
        w = self.temporal_profile
        if not w or min(w) < 0 or max(w) > 1 or max(w) != 1.0:
            raise ValueError("temporal_profile weights must lie in [0,1] with peak exactly 1")

    def temporal_weight(self, t: int) -> float:
        return self.temporal_profile[t % len(self.temporal_profile)]

    def spatial_demand(self, grid: GridSpec) -> np.ndarray:
        """Per-pixel demand (Mbps) at the temporal peak."""
        pos = pixel_positions(grid)
        out = np.full(grid.num_pixels, float(self.uniform_floor_mbps))
        for h in self.hotspots:
            d2 = (pos[:, 0] - h.x_m) ** 2 + (pos[:, 1] - h.y_m) ** 2
            out += h.peak_mbps * np.exp(-d2 / (2.0 * h.spread_m ** 2))
        return out

    def demand_at(self, grid: GridSpec, t: int) -> np.ndarray:
        return self.spatial_demand(grid) * self.temporal_weight(t)


@dataclass(frozen=True)
class TrafficMaps:
    """Dense per-tenant per-step demand rasters (Mbps per pixel).

    ``demand`` has shape (num_tenants, num_steps, num_pixels) and is the one
    source of truth; cell-level figures are always sums over a serving map.
    """

    tenant_ids: tuple[str, ...]
    demand: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.demand, dtype=float)
        if d.ndim != 3 or d.shape[0] != len(self.tenant_ids):
            raise ValueError("demand must be (tenants, steps, pixels)")
        if d.size and d.min() < 0:
            raise ValueError("demand values must be >= 0")
        d.flags.writeable = False
        object.__setattr__(self, "demand", d)

    @property
    def num_steps(self) -> int:
        return self.demand.shape[1]

    @property
    def num_pixels(self) -> int:
        return self.demand.shape[2]

    def _tenant_index(self, tenant_id: str) -> int:
        try:
            return self.tenant_ids.index(tenant_id)
        except ValueError:
            raise ValueError(f"unknown tenant {tenant_id!r}") from None

    def _check_time(self, t: int):
        if not 0 <= t < self.num_steps:
            raise ValueError("time out of range")

    def tenant_slice(self, tenant_id: str, t: int) -> np.ndarray:
        self._check_time(t)
        return self.demand[self._tenant_index(tenant_id), t]

    def total_slice(self, t: int) -> np.ndarray:
        self._check_time(t)
        return self.demand[:, t, :].sum(axis=0)


def build_traffic_maps(tenants, grid: GridSpec, num_steps: int) -> TrafficMaps:
    """Rasterize tenant demand models into a TrafficMaps cube."""
    cube = np.zeros((len(tenants), num_steps, grid.num_pixels))
    for m, tenant in enumerate(tenants):
        spatial = tenant.spatial_demand(grid)
        for t in range(num_steps):
            cube[m, t] = spatial * tenant.temporal_weight(t)
    return TrafficMaps(tuple(t.tenant_id for t in tenants), cube)


@dataclass(frozen=True)
class ServingMap:
    """Assignment of every pixel to exactly one deployed cell."""

    cell_ids: tuple[int, ...]
    pixel_cell: np.ndarray      # (num_pixels,) of cell ids

    def __post_init__(self):
        arr = np.asarray(self.pixel_cell)
        arr.flags.writeable = False
        object.__setattr__(self, "pixel_cell", arr)

    def pixels_of(self, cell_id: int) -> np.ndarray:
        if cell_id not in self.cell_ids:
            raise ValueError(f"unknown cell id {cell_id}")
        return np.flatnonzero(self.pixel_cell == cell_id)

    def mask_of(self, cell_id: int) -> np.ndarray:
        if cell_id not in self.cell_ids:
            raise ValueError(f"unknown cell id {cell_id}")
        return self.pixel_cell == cell_id


@dataclass(frozen=True)
class SmallCell:
    """One deployed small cell: site pixel, channel set, transmit power."""

    cell_id: int
    site_pixel: int
    channels: tuple[int, ...]
    power_dbm: float = 24.0
    power_fixed: bool = False

    def __post_init__(self):
        ch = tuple(sorted(set(int(c) for c in self.channels)))
        if not ch:
            raise ValueError("a deployed cell must hold at least one channel")
        object.__setattr__(self, "channels", ch)


@dataclass(frozen=True)
class NetworkState:
    """Deployed cells at one point in time; functional updates only."""

    cells: tuple[SmallCell, ...]
    time_index: int = 0

    def __post_init__(self):
        cells = tuple(sorted(self.cells, key=lambda c: c.cell_id))
        ids = [c.cell_id for c in cells]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate cell ids")
        sites = [c.site_pixel for c in cells]
        if len(set(sites)) != len(sites):
            raise ValueError("duplicate cell sites")
        object.__setattr__(self, "cells", cells)

    @property
    def cell_ids(self) -> tuple[int, ...]:
        return tuple(c.cell_id for c in self.cells)

    @property
    def site_pixels(self) -> tuple[int, ...]:
        return tuple(c.site_pixel for c in self.cells)

    def cell(self, cell_id: int) -> SmallCell:
        for c in self.cells:
            if c.cell_id == cell_id:
                return c
        raise ValueError(f"unknown cell id {cell_id}")

    def add_cell(self, cell: SmallCell) -> "NetworkState":
        return replace(self, cells=self.cells + (cell,))

    def remove_cell(self, cell_id: int) -> "NetworkState":
        self.cell(cell_id)
        return replace(self, cells=tuple(c for c in self.cells if c.cell_id != cell_id))

    def add_channel(self, cell_id: int, channel: int) -> "NetworkState":
        c = self.cell(cell_id)
        if channel in c.channels:
            raise ValueError(f"cell {cell_id} already holds channel {channel}")
        return self._swap(replace(c, channels=c.channels + (channel,)))

    def remove_channel(self, cell_id: int, channel: int) -> "NetworkState":
        c = self.cell(cell_id)
        if channel not in c.channels:
            raise ValueError(f"cell {cell_id} does not hold channel {channel}")
        return self._swap(replace(c, channels=tuple(x for x in c.channels if x != channel)))

    def set_power(self, cell_id: int, power_dbm: float) -> "NetworkState":
        return self._swap(replace(self.cell(cell_id), power_dbm=float(power_dbm)))

    def _swap(self, cell: SmallCell) -> "NetworkState":
        return replace(self, cells=tuple(cell if c.cell_id == cell.cell_id else c
                                         for c in self.cells))


def pixel_total_demand(maps: TrafficMaps, u: int, t: int) -> float:
    """Total demand of all tenants at one pixel and time step."""
    maps._check_time(t)
    if not 0 <= u < maps.num_pixels:
        raise ValueError(f"pixel {u} out of range")
    return float(maps.demand[:, t, u].sum())


def cell_demand(maps: TrafficMaps, serving: ServingMap, tenant_id: str,
                cell_id: int, t: int) -> float:
    """One tenant's demand summed over the pixels a cell serves."""
    mask = serving.mask_of(cell_id)
    return float(maps.tenant_slice(tenant_id, t)[mask].sum())


def aggregate_cell_demand(maps: TrafficMaps, serving: ServingMap,
                          cell_id: int, t: int) -> float:
    """All tenants' demand summed over the pixels a cell serves."""
    mask = serving.mask_of(cell_id)
    return float(maps.total_slice(t)[mask].sum())
