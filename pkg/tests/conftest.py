"""Shared fixtures and independent oracles for the test suite."""
from __future__ import annotations

import math

import numpy as np
import pytest

from scplan.radio import PropagationParams
from scplan.scenario import (GridSpec, NetworkState, SmallCell,
                             pixel_positions)


@pytest.fixture
def params():
    return PropagationParams()


def oracle_path_loss(d_m: float, f_ghz: float = 5.0, los: bool = False) -> float:
    """Independent re-coding of the indoor-hotspot path loss."""
    d = max(d_m, 1.0)
    if los:
        return 16.9 * math.log10(d) + 32.8 + 20.0 * math.log10(f_ghz)
    return 43.3 * math.log10(d) + 11.5 + 20.0 * math.log10(f_ghz)


def oracle_noise_dbm(bandwidth_mhz: float = 20.0, noise_figure_db: float = 9.0) -> float:
    return -174.0 + 10.0 * math.log10(bandwidth_mhz * 1e6) + noise_figure_db


def oracle_sinr_db(pixel: int, channel: int, state: NetworkState, grid: GridSpec,
                   params: PropagationParams) -> float:
    """Brute-force link budget: loops and scalar math only."""
    px, py = grid.pixel_xy(pixel)

    def rx_dbm(cell):
        sx, sy = grid.pixel_xy(cell.site_pixel)
        d = math.hypot(px - sx, py - sy)
        pl = oracle_path_loss(d, params.carrier_ghz,
                              params.pathloss_variant == "los")
        return cell.power_dbm + params.antenna_gain_db - pl

    best, serving = None, None
    for cell in state.cells:
        r = rx_dbm(cell)
        if best is None or r > best:
            best, serving = r, cell
    if channel not in serving.channels:
        raise ValueError("channel not allocated at serving cell")
    signal_mw = 10.0 ** (best / 10.0)
    interference_mw = 0.0
    for cell in state.cells:
        if cell.cell_id != serving.cell_id and channel in cell.channels:
            interference_mw += 10.0 ** (rx_dbm(cell) / 10.0)
    noise_mw = 10.0 ** (oracle_noise_dbm(params.channel_bandwidth_mhz,
                                         params.noise_figure_db) / 10.0)
    return 10.0 * math.log10(signal_mw / (interference_mw + noise_mw))


def oracle_serving(state: NetworkState, grid: GridSpec,
                   params: PropagationParams) -> list[int]:
    """Per-pixel argmax of received power, lowest cell id on ties."""
    out = []
    for u in range(grid.num_pixels):
        px, py = grid.pixel_xy(u)
        best, best_id = None, None
        for cell in state.cells:
            sx, sy = grid.pixel_xy(cell.site_pixel)
            d = max(math.hypot(px - sx, py - sy), 1.0)
            if params.pathloss_variant == "los":
                pl = 16.9 * math.log10(d) + 32.8 + 20 * math.log10(params.carrier_ghz)
            else:
                pl = 43.3 * math.log10(d) + 11.5 + 20 * math.log10(params.carrier_ghz)
            r = cell.power_dbm + params.antenna_gain_db - pl
            if best is None or r > best:
                best, best_id = r, cell.cell_id
        out.append(best_id)
    return out


def oracle_best_channel(cell_id: int, state: NetworkState, grid: GridSpec,
                        num_channels: int) -> int:
    """Brute-force max-min co-channel distance scan."""
    pos = pixel_positions(grid)
    me = state.cell(cell_id)
    mx, my = pos[me.site_pixel]
    best_ch, best_d = None, None
    for ch in range(num_channels):
        if ch in me.channels:
            continue
        dmin = math.inf
        for other in state.cells:
            if other.cell_id != cell_id and ch in other.channels:
                ox, oy = pos[other.site_pixel]
                dmin = min(dmin, math.hypot(mx - ox, my - oy))
        if best_d is None or dmin > best_d:
            best_ch, best_d = ch, dmin
    return best_ch


def random_state(rng: np.random.Generator, grid: GridSpec, num_cells: int,
                 num_channels: int = 4, k_max: int = 2,
                 power_span=(10.0, 24.0)) -> NetworkState:
    sites = rng.choice(grid.num_pixels, size=num_cells, replace=False)
    cells = []
    for i, site in enumerate(sites, start=1):
        count = int(rng.integers(1, k_max + 1))
        channels = tuple(int(c) for c in
                         rng.choice(num_channels, size=count, replace=False))
        power = float(rng.uniform(*power_span))
        cells.append(SmallCell(i, int(site), channels, power))
    return NetworkState(tuple(cells))
