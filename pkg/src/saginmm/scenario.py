"""Urban scenario generation and world deployment.

Buildings follow the ITU-R statistical urban model: for built ratio alpha,
density beta (buildings per km^2) and Rayleigh height scale gamma, an area A
km^2 holds round(beta*A) square-footprint buildings of side sqrt(alpha/beta) km
with Rayleigh-distributed heights, placed on a jittered grid. Line-of-sight
between two points is a segment test against the resulting boxes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import (AN, GN, SN, RunConfig, SatelliteSpec, ScenarioConfig,
                     SiteSpec, validate_config)
from .errors import ConfigError


@dataclass
class BuildingMap:
    """Axis-aligned building boxes plus the parameters that generated them."""

    box_lo: np.ndarray   # (n, 3) lower corners, z = 0
    box_hi: np.ndarray   # (n, 3) upper corners, z = height
    alpha: float
    beta_per_km2: float
    gamma_m: float
    seed: int

    @property
    def count(self) -> int:
        return self.box_lo.shape[0]


def generate_buildings(area_lo, area_hi, alpha: float, beta_per_km2: float,
                       gamma_m: float, seed: int) -> BuildingMap:
    """Jittered-grid realization of the statistical urban layout."""
    if not (0.0 < alpha < 1.0):
        raise ConfigError("alpha must lie in (0, 1)")
    if beta_per_km2 <= 0:
        raise ConfigError("beta must be positive")
    if gamma_m <= 0:
        raise ConfigError("gamma must be positive")
    width = float(area_hi[0] - area_lo[0])
    depth = float(area_hi[1] - area_lo[1])
    if width <= 0 or depth <= 0:
        raise ConfigError("degenerate area")
    area_km2 = width * depth * 1e-6
    count = int(round(beta_per_km2 * area_km2))
    side = math.sqrt(alpha / beta_per_km2) * 1000.0
    rng = np.random.default_rng(seed)
    if count == 0:
        empty = np.zeros((0, 3))
        return BuildingMap(empty, empty.copy(), alpha, beta_per_km2, gamma_m, seed)

    nx = max(1, int(math.ceil(math.sqrt(count * width / depth))))
    ny = int(math.ceil(count / nx))
    cell_w, cell_d = width / nx, depth / ny
    idx = np.arange(count)
    cx = area_lo[0] + (idx % nx + 0.5) * cell_w
    cy = area_lo[1] + (idx // nx + 0.5) * cell_d
    # jitter keeps each footprint inside its own grid cell when it fits
    margin = np.array([max(0.0, (cell_w - side) / 2.0),
                       max(0.0, (cell_d - side) / 2.0)])
    jitter = rng.uniform(-1.0, 1.0, size=(count, 2)) * margin
    heights = rng.rayleigh(scale=gamma_m, size=count)

    centers = np.column_stack([cx, cy]) + jitter
    half = side / 2.0
    lo_xy = np.clip(centers - half, area_lo[:2], area_hi[:2])
    hi_xy = np.clip(centers + half, area_lo[:2], area_hi[:2])
    box_lo = np.column_stack([lo_xy, np.zeros(count)])
    box_hi = np.column_stack([hi_xy, heights])
    box_lo.flags.writeable = False
    box_hi.flags.writeable = False
    return BuildingMap(box_lo, box_hi, alpha, beta_per_km2, gamma_m, seed)


def is_los(a, b, buildings: BuildingMap) -> bool:
    """True iff the open segment (a, b) passes through no building interior."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if buildings.count == 0:
        return True
    d = b - a
    lo, hi = buildings.box_lo, buildings.box_hi
    with np.errstate(divide="ignore", invalid="ignore"):
        t0 = (lo - a) / d
        t1 = (hi - a) / d
    near = np.minimum(t0, t1)
    far = np.maximum(t0, t1)
    # axes where the segment is parallel to the slab: inside -> unconstrained
    parallel = d == 0.0
    if parallel.any():
        inside = (a >= lo) & (a <= hi)
        near = np.where(parallel, np.where(inside, -np.inf, np.inf), near)
        far = np.where(parallel, np.where(inside, np.inf, -np.inf), far)
    tmin = near.max(axis=1)
    tmax = far.min(axis=1)
    t_lo = np.maximum(tmin, 0.0)
    t_hi = np.minimum(tmax, 1.0)
    hit = t_hi - t_lo > 1e-9
    if not hit.any():
        return True
    # grazing contact along a face is not an obstruction: require a chord
    # midpoint strictly inside some box
    mid = a + np.outer((t_lo[hit] + t_hi[hit]) / 2.0, d)
    strictly_in = ((mid > lo[hit]) & (mid < hi[hit])).all(axis=1)
    return not strictly_in.any()


def satellite_position(sat: SatelliteSpec, t: float) -> np.ndarray:
    """Beam center position at time t; the ground track wraps with the window period."""
    if t < 0:
        raise ValueError("t must be non-negative")
    period = sat.wrap_period_s
    tau = math.fmod(t, period)
    x = sat.initial_ground_xy[0] + sat.velocity_mps[0] * tau
    y = sat.initial_ground_xy[1] + sat.velocity_mps[1] * tau
    return np.array([x, y, sat.altitude_m])


@dataclass
class Cell:
    """One transmit point: a site sector or a satellite beam."""

    cell_id: int
    network: int             # GN / AN / SN
    site_xyz: np.ndarray     # static for GN/AN; initial point for SN
    azimuth_deg: float
    tilt_deg: float
    array_rows: int
    array_cols: int
    element_gain_dbi: float
    tx_power_w: float
    carrier_ghz: float
    bandwidth_hz: float
    satellite: SatelliteSpec | None = None


class World:
    """Immutable deployed scenario: buildings, cells, bounds, channel constants."""

    def __init__(self, cfg: ScenarioConfig, buildings: BuildingMap, cells: list[Cell]):
        self.cfg = cfg
        self.buildings = buildings
        self.cells = cells
        self.bounds_lo = np.array(cfg.bounds_lo, dtype=float)
        self.bounds_hi = np.array(cfg.bounds_hi, dtype=float)
        self.n_cells = len(cells)
        self.network = np.array([c.network for c in cells])
        self.tx_power_w = np.array([c.tx_power_w for c in cells])
        self.carrier_ghz = np.array([c.carrier_ghz for c in cells])
        self.bandwidth_hz = np.array([c.bandwidth_hz for c in cells])
        self.element_gain_dbi = np.array([c.element_gain_dbi for c in cells])
        self.array_rows = np.array([c.array_rows for c in cells])
        self.array_cols = np.array([c.array_cols for c in cells])
        self.noise_w = (10.0 ** ((-174.0 + cfg.noise_figure_db - 30.0) / 10.0)
                        * self.bandwidth_hz)
        az = np.deg2rad([c.azimuth_deg for c in cells])
        tilt = np.deg2rad([c.tilt_deg for c in cells])
        sat = self.network == SN
        # boresight and the two array axes; satellite beams point straight down
        self.boresight = np.column_stack([
            np.cos(tilt) * np.cos(az), np.cos(tilt) * np.sin(az), -np.sin(tilt)])
        self.axis_h = np.column_stack([-np.sin(az), np.cos(az), np.zeros(len(cells))])
        self.boresight[sat] = (0.0, 0.0, -1.0)
        self.axis_h[sat] = (1.0, 0.0, 0.0)
        self.axis_v = np.cross(self.boresight, self.axis_h)
        self._static_pos = np.array([c.site_xyz for c in cells])
        self._sat_ids = np.flatnonzero(sat)
        for arr in (self.network, self.tx_power_w, self.carrier_ghz,
                    self.bandwidth_hz, self.boresight, self.axis_h, self.axis_v,
                    self._static_pos):
            arr.flags.writeable = False

    def cell_positions(self, t: float) -> np.ndarray:
        """(n_cells, 3) transmit-point positions at time t."""
        pos = self._static_pos.copy()
        for i in self._sat_ids:
            pos[i] = satellite_position(self.cells[i].satellite, t)
        return pos

    def inside(self, p) -> bool:
        p = np.asarray(p, dtype=float)
        return bool(np.all(p >= self.bounds_lo) and np.all(p <= self.bounds_hi))

    def los_mask(self, uav_pos, t: float) -> np.ndarray:
        """Per-cell LoS flags; satellite links are always line-of-sight."""
        pos = self.cell_positions(t)
        mask = np.empty(self.n_cells, dtype=bool)
        for i in range(self.n_cells):
            if self.network[i] == SN:
                mask[i] = True
            else:
                mask[i] = is_los(uav_pos, pos[i], self.buildings)
        return mask


def _site_cells(sites: list[SiteSpec], network: int, start_id: int) -> list[Cell]:
    cells = []
    for site in sites:
        for sector in site.sectors:
            cells.append(Cell(
                cell_id=start_id + len(cells),
                network=network,
                site_xyz=np.array(site.position, dtype=float),
                azimuth_deg=sector.azimuth_deg,
                tilt_deg=sector.tilt_deg,
                array_rows=sector.array_rows,
                array_cols=sector.array_cols,
                element_gain_dbi=sector.element_gain_dbi,
                tx_power_w=10.0 ** ((site.tx_power_dbm - 30.0) / 10.0),
                carrier_ghz=site.carrier_ghz,
                bandwidth_hz=site.bandwidth_hz,
            ))
    return cells


def deploy_scenario(cfg: ScenarioConfig | RunConfig) -> World:
    """Validate the configuration and build the immutable world."""
    if isinstance(cfg, RunConfig):
        validate_config(cfg)
        cfg = cfg.scenario
    if not cfg.satellites:
        raise ConfigError("at least one satellite is required for SN coverage")
    buildings = generate_buildings(
        np.array(cfg.bounds_lo), np.array(cfg.bounds_hi),
        cfg.buildings.alpha, cfg.buildings.beta_per_km2,
        cfg.buildings.gamma_m, cfg.buildings.seed)
    cells = _site_cells(cfg.gn_sites, GN, 0)
    cells += _site_cells(cfg.an_sites, AN, len(cells))
    for sat in cfg.satellites:
        if not sat.enabled:
            continue
        cells.append(Cell(
            cell_id=len(cells),
            network=SN,
            site_xyz=np.array([sat.initial_ground_xy[0], sat.initial_ground_xy[1],
                               sat.altitude_m]),
            azimuth_deg=0.0,
            tilt_deg=90.0,
            array_rows=sat.array_rows,
            array_cols=sat.array_cols,
            element_gain_dbi=sat.element_gain_dbi,
            tx_power_w=10.0 ** ((sat.tx_power_dbm - 30.0) / 10.0),
            carrier_ghz=sat.carrier_ghz,
            bandwidth_hz=sat.bandwidth_hz,
            satellite=sat,
        ))
    if not cells:
        raise ConfigError("deployment produced no cells")
    return World(cfg, buildings, cells)
