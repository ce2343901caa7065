"""Network performance model: propagation, serving, SINR and capacity.

Deterministic downlink model over the pixel grid.  Path loss follows the
indoor-hotspot formulas (NLOS default, LOS selectable), every pixel attaches
to the cell with the strongest received power, and per-channel SINR feeds a
truncated-Shannon spectral efficiency.  A cell's capacity in Mbps is
``num_channels * channel_bandwidth_mhz * average_se``.

All functions are pure; evaluation order is fixed so results are bit-for-bit
reproducible.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .scenario import GridSpec, NetworkState, ServingMap, pixel_positions

__all__ = [
    "PropagationParams",
    "RadioSnapshot",
    "path_loss",
    "noise_floor_dbm",
    "rx_power_matrix",
    "received_power",
    "serving_assignment",
    "configure_powers",
    "sinr",
    "spectral_efficiency",
    "average_se",
    "cell_capacity",
    "radio_snapshot",
]

MIN_DISTANCE_M = 1.0    # clamp below this to keep log10 finite at a cell's own pixel


@dataclass(frozen=True)
class PropagationParams:
    """Radio constants for the downlink model."""

    carrier_ghz: float = 5.0
    channel_bandwidth_mhz: float = 20.0
    num_channels: int = 4
    antenna_gain_db: float = 2.0
    noise_figure_db: float = 9.0
    thermal_noise_dbm_per_hz: float = -174.0
    pathloss_variant: str = "nlos"          # "nlos" | "los"
    se_max_bps_hz: float = 4.4
    se_impl_factor: float = 0.6
    sinr_min_db: float = -10.0
    power_min_dbm: float = 10.0
    power_max_dbm: float = 24.0
    edge_sinr_target_db: float = 9.0
    edge_fraction: float = math.sqrt(3.0) / 2.0

    def __post_init__(self):
        if self.channel_bandwidth_mhz <= 0:
            raise ValueError("channel_bandwidth_mhz must be positive")
        if self.num_channels < 1:
            raise ValueError("num_channels must be >= 1")
        if self.power_min_dbm > self.power_max_dbm:
            raise ValueError("power_min_dbm must not exceed power_max_dbm")
        if self.se_max_bps_hz <= 0:
            raise ValueError("se_max_bps_hz must be positive")
        if self.pathloss_variant not in ("nlos", "los"):
            raise ValueError("pathloss_variant must be 'nlos' or 'los'")


def path_loss(distance_m, params: PropagationParams):
    """Indoor-hotspot path loss in dB; distances are clamped to 1 m.

    NLOS: 43.3*log10(d) + 11.5 + 20*log10(f_GHz)
    LOS:  16.9*log10(d) + 32.8 + 20*log10(f_GHz)
    """
    d = np.maximum(np.asarray(distance_m, dtype=float), MIN_DISTANCE_M)
    f_term = 20.0 * np.log10(params.carrier_ghz)
    if params.pathloss_variant == "los":
        pl = 16.9 * np.log10(d) + 32.8 + f_term
    else:
        pl = 43.3 * np.log10(d) + 11.5 + f_term
    return float(pl) if np.isscalar(distance_m) else pl


def noise_floor_dbm(params: PropagationParams) -> float:
    """Thermal noise over one channel bandwidth plus the terminal noise figure."""
    return (params.thermal_noise_dbm_per_hz
            + 10.0 * math.log10(params.channel_bandwidth_mhz * 1e6)
            + params.noise_figure_db)


def _site_positions(state: NetworkState, grid: GridSpec) -> np.ndarray:
    pos = pixel_positions(grid)
    return pos[np.array(state.site_pixels, dtype=int)]


def rx_power_matrix(state: NetworkState, grid: GridSpec,
                    params: PropagationParams) -> np.ndarray:
    """(num_pixels, num_cells) received power in dBm, cells in id order."""
    if not state.cells:
        raise ValueError("empty network")
    pos = pixel_positions(grid)
    sites = _site_positions(state, grid)
    d = np.sqrt(((pos[:, None, :] - sites[None, :, :]) ** 2).sum(axis=2))
    powers = np.array([c.power_dbm for c in state.cells])
    return powers[None, :] + params.antenna_gain_db - path_loss(d, params)


def received_power(cell_id: int, pixel: int, state: NetworkState,
                   grid: GridSpec, params: PropagationParams) -> float:
    """Received power (dBm) from one cell at one pixel."""
    c = state.cell(cell_id)
    px, py = grid.pixel_xy(pixel)
    sx, sy = grid.pixel_xy(c.site_pixel)
    return c.power_dbm + params.antenna_gain_db - path_loss(math.hypot(px - sx, py - sy), params)


def serving_assignment(state: NetworkState, grid: GridSpec,
                       params: PropagationParams) -> ServingMap:
    """Attach every pixel to the strongest cell; ties go to the lowest cell id."""
    rx = rx_power_matrix(state, grid, params)
    ids = np.array(state.cell_ids)
    return ServingMap(state.cell_ids, ids[np.argmax(rx, axis=1)])


def configure_powers(state: NetworkState, grid: GridSpec,
                     params: PropagationParams,
                     tol_db: float = 0.01, max_iter: int = 50) -> NetworkState:
    """Auto-configure transmit powers for a target cell-edge SINR.

    For each cell the inter-site distance is the distance to the nearest
    other deployed cell and the edge point lies toward that neighbor at
    ``edge_fraction * ISD``.  The power is solved so the SINR there hits
    ``edge_sinr_target_db`` against the single strongest co-channel
    interferer (at its current power) plus one channel of noise, clamped to
    [power_min_dbm, power_max_dbm].  Because the targets are coupled, the
    solve starts every non-fixed cell at maximum power and iterates until
    powers move less than ``tol_db``; the result depends only on the layout,
    never on the incoming power values.

    A single deployed cell (no interferer, no ISD) gets maximum power.
    Cells with ``power_fixed`` keep their power but still interfere.
    """
    cells = state.cells
    if not cells:
        raise ValueError("empty network")
    n = len(cells)
    fixed = np.array([c.power_fixed for c in cells])
    powers = np.where(fixed, [c.power_dbm for c in cells], params.power_max_dbm).astype(float)
    if n == 1:
        return _with_powers(state, powers)

    sites = _site_positions(state, grid)
    pair_d = np.sqrt(((sites[:, None, :] - sites[None, :, :]) ** 2).sum(axis=2))
    np.fill_diagonal(pair_d, np.inf)
    nearest = np.argmin(pair_d, axis=1)
    isd = pair_d[np.arange(n), nearest]
    edge = sites + (sites[nearest] - sites) * params.edge_fraction
    edge_d = np.sqrt(((edge[:, None, :] - sites[None, :, :]) ** 2).sum(axis=2))

    co_channel = np.zeros((n, n), dtype=bool)
    for i, ci in enumerate(cells):
        for j, cj in enumerate(cells):
            if i != j and set(ci.channels) & set(cj.channels):
                co_channel[i, j] = True

    serving_pl = path_loss(params.edge_fraction * isd, params)
    edge_pl = path_loss(edge_d, params)
    noise_lin = 10.0 ** (noise_floor_dbm(params) / 10.0)

    for _ in range(max_iter):
        rx_edge = powers[None, :] + params.antenna_gain_db - edge_pl
        rx_lin = np.where(co_channel, 10.0 ** (rx_edge / 10.0), 0.0)
        strongest = rx_lin.max(axis=1)
        required = (params.edge_sinr_target_db
                    + 10.0 * np.log10(strongest + noise_lin)
                    + serving_pl - params.antenna_gain_db)
        new_powers = np.where(
            fixed, powers,
            np.clip(required, params.power_min_dbm, params.power_max_dbm))
        if np.max(np.abs(new_powers - powers)) < tol_db:
            powers = new_powers
            break
        powers = new_powers
    return _with_powers(state, powers)


def _with_powers(state: NetworkState, powers: np.ndarray) -> NetworkState:
    cells = tuple(replace(c, power_dbm=float(p)) for c, p in zip(state.cells, powers))
    return replace(state, cells=cells)


def _sinr_table(state: NetworkState, grid: GridSpec, params: PropagationParams,
                serving: ServingMap, rx_dbm: np.ndarray) -> np.ndarray:
    """(num_pixels, num_channels) serving-link SINR in dB, NaN where the
    serving cell does not hold the channel."""
    rx_lin = 10.0 ** (rx_dbm / 10.0)
    ids = np.array(state.cell_ids)
    col_of = {cid: k for k, cid in enumerate(state.cell_ids)}
    serving_col = np.array([col_of[c] for c in serving.pixel_cell])
    s_lin = rx_lin[np.arange(rx_lin.shape[0]), serving_col]
    noise_lin = 10.0 ** (noise_floor_dbm(params) / 10.0)

    out = np.full((rx_dbm.shape[0], params.num_channels), np.nan)
    for ch in range(params.num_channels):
        holders = np.array([ch in c.channels for c in state.cells])
        if not holders.any():
            continue
        total = rx_lin[:, holders].sum(axis=1)
        serving_holds = holders[serving_col]
        interference = total - np.where(serving_holds, s_lin, 0.0)
        sinr_lin = s_lin / (interference + noise_lin)
        col = 10.0 * np.log10(sinr_lin)
        out[:, ch] = np.where(serving_holds, col, np.nan)
    return out


def sinr(pixel: int, channel: int, state: NetworkState, grid: GridSpec,
         params: PropagationParams) -> float:
    """Serving-link SINR (dB) at a pixel on one channel.

    Interference is the sum of received powers from every other deployed
    cell holding the channel; noise spans one channel bandwidth.
    """
    serving = serving_assignment(state, grid, params)
    serving_cell = state.cell(int(serving.pixel_cell[pixel]))
    if channel not in serving_cell.channels:
        raise ValueError(f"channel {channel} not allocated at serving cell "
                         f"{serving_cell.cell_id}")
    rx = rx_power_matrix(state, grid, params)
    table = _sinr_table(state, grid, params, serving, rx)
    return float(table[pixel, channel])


def spectral_efficiency(sinr_db, params: PropagationParams):
    """Truncated-Shannon mapping from SINR (dB) to b/s/Hz.

    Zero below ``sinr_min_db``, otherwise
    ``min(se_max, se_impl_factor * log2(1 + sinr))``.
    """
    arr = np.asarray(sinr_db, dtype=float)
    lin = 10.0 ** (arr / 10.0)
    se = np.minimum(params.se_max_bps_hz, params.se_impl_factor * np.log2(1.0 + lin))
    se = np.where(arr < params.sinr_min_db, 0.0, se)
    return float(se) if np.isscalar(sinr_db) else se


def _pixel_se(state: NetworkState, serving: ServingMap, se_table: np.ndarray) -> np.ndarray:
    """Per-pixel SE: mean over the serving cell's allocated channels."""
    out = np.zeros(se_table.shape[0])
    for c in state.cells:
        mask = serving.pixel_cell == c.cell_id
        if mask.any():
            out[mask] = se_table[np.ix_(mask, np.array(c.channels))].mean(axis=1)
    return out


def average_se(cell_id: int, serving: ServingMap, pixel_se: np.ndarray,
               pixel_weights: np.ndarray | None = None) -> float:
    """Demand-weighted mean SE over the pixels a cell serves.

    Falls back to a uniform mean when the served demand totals zero and to
    0 when the cell serves no pixels.
    """
    mask = serving.mask_of(cell_id)
    if not mask.any():
        return 0.0
    se = pixel_se[mask]
    if pixel_weights is not None:
        w = pixel_weights[mask]
        tot = float(w.sum())
        if tot > 0:
            return float((se * w).sum() / tot)
    return float(se.mean())


def cell_capacity(num_channels: int, avg_se: float, params: PropagationParams) -> float:
    """Capacity in Mbps: allocated bandwidth (MHz) times average SE."""
    return num_channels * params.channel_bandwidth_mhz * avg_se


@dataclass(frozen=True)
class RadioSnapshot:
    """Derived radio state for one network layout.

    ``sinr_db`` is (num_pixels, num_channels) for the serving link, NaN on
    channels the serving cell does not hold; ``pixel_se`` is the mean SE over
    the serving cell's channels.
    """

    serving: ServingMap
    rx_power_dbm: np.ndarray
    sinr_db: np.ndarray
    pixel_se: np.ndarray
    avg_se: dict[int, float]
    capacity_mbps: dict[int, float]


def link_state(state: NetworkState, grid: GridSpec, params: PropagationParams
               ) -> tuple[ServingMap, np.ndarray, np.ndarray, np.ndarray]:
    """Weight-independent link quantities: serving map, rx power, SINR table
    and per-pixel SE."""
    rx = rx_power_matrix(state, grid, params)
    ids = np.array(state.cell_ids)
    serving = ServingMap(state.cell_ids, ids[np.argmax(rx, axis=1)])
    table = _sinr_table(state, grid, params, serving, rx)
    se_table = spectral_efficiency(np.nan_to_num(table, nan=-np.inf), params)
    pixel_se = _pixel_se(state, serving, se_table)
    return serving, rx, table, pixel_se


def radio_snapshot(state: NetworkState, grid: GridSpec, params: PropagationParams,
                   pixel_weights: np.ndarray | None = None) -> RadioSnapshot:
    """Evaluate serving, SINR, SE and capacity for the whole grid at once."""
    serving, rx, table, pixel_se = link_state(state, grid, params)
    avg = {c.cell_id: average_se(c.cell_id, serving, pixel_se, pixel_weights)
           for c in state.cells}
    cap = {c.cell_id: cell_capacity(len(c.channels), avg[c.cell_id], params)
           for c in state.cells}
    return RadioSnapshot(serving, rx, table, pixel_se, avg, cap)
