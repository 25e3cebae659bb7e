"""Run configuration: scenario geometry, radio parameters, agents, training.

Everything an experiment needs is held in one schema-versioned structure that
round-trips through JSON unchanged. Radio constants default to the reference
urban deployment: three 3-sector ground sites at 6.7 GHz, three 3-sector
aerial sites at 4.9 GHz, two LEO beams at 2.185 GHz, all at 46 dBm over 1 MHz.
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field

from .errors import ConfigError

SCHEMA_VERSION = 1

GN, AN, SN = 0, 1, 2
NETWORK_NAMES = ("gn", "an", "sn")

SECTOR_AZIMUTHS_DEG = (0.0, 120.0, 240.0)


@dataclass
class SectorSpec:
    """One directional panel of a ground or aerial site."""

    azimuth_deg: float
    tilt_deg: float          # positive tilts the boresight below horizontal
    array_rows: int = 4
    array_cols: int = 2
    element_gain_dbi: float = 8.0


@dataclass
class SiteSpec:
    """A 3-sector terrestrial or aerial station."""

    position: list[float]    # [x, y, antenna height] in metres
    tx_power_dbm: float = 46.0
    carrier_ghz: float = 6.7
    bandwidth_hz: float = 1e6
    sectors: list[SectorSpec] = field(default_factory=list)


@dataclass
class SatelliteSpec:
    """A LEO beam on a straight +x ground track that wraps over the area."""

    altitude_m: float = 550e3
    initial_ground_xy: list[float] = field(default_factory=lambda: [0.0, 0.0])
    velocity_mps: list[float] = field(default_factory=lambda: [7500.0, 0.0])
    window_halfwidth_m: float = 100e3
    tx_power_dbm: float = 46.0
    carrier_ghz: float = 2.185
    bandwidth_hz: float = 1e6
    array_rows: int = 8
    array_cols: int = 8
    element_gain_dbi: float = 8.0
    enabled: bool = True

    @property
    def wrap_period_s(self) -> float:
        speed = math.hypot(self.velocity_mps[0], self.velocity_mps[1])
        if speed <= 0:
            raise ConfigError("satellite velocity must be nonzero")
        return 2.0 * self.window_halfwidth_m / speed


@dataclass
class BuildingParams:
    """Statistical urban layout: built ratio alpha, density beta, height scale gamma."""

    alpha: float = 0.3
    beta_per_km2: float = 300.0
    gamma_m: float = 20.0
    seed: int = 0


@dataclass
class ScenarioConfig:
    bounds_lo: list[float] = field(default_factory=lambda: [0.0, 0.0, 100.0])
    bounds_hi: list[float] = field(default_factory=lambda: [2000.0, 2000.0, 300.0])
    buildings: BuildingParams = field(default_factory=BuildingParams)
    gn_sites: list[SiteSpec] = field(default_factory=list)
    an_sites: list[SiteSpec] = field(default_factory=list)
    satellites: list[SatelliteSpec] = field(default_factory=list)
    noise_figure_db: float = 7.0
    rician_k_db: float = 15.0
    n_fading_draws: int = 16


@dataclass
class EnvParams:
    v_max_mps: float = 10.0
    dt_s: float = 1.0
    r_req_bps: float = 2e6
    lambda_rate: float = 1.0     # weight on the normalized link rate
    lambda_switch: float = 0.5   # weight on the handover penalty
    lambda_goal: float = 0.5     # weight on the goal-progress reward
    eta_bnd: float = 1.0
    d_qos: float = 0.05
    d_bnd: float = 0.0
    n_max_steps: int = 300
    arrival_radius_m: float | None = None   # None -> one step length v_max*dt
    r_min_bps: float = 0.0       # rate normalization bounds, set by calibration
    r_max_bps: float = 1e7
    goal: list[float] = field(default_factory=lambda: [1800.0, 1800.0, 150.0])
    start_lo: list[float] = field(default_factory=lambda: [150.0, 150.0, 140.0])
    start_hi: list[float] = field(default_factory=lambda: [250.0, 250.0, 160.0])


@dataclass
class DdqnParams:
    hidden: list[int] = field(default_factory=lambda: [128, 64])
    lr: float = 5e-4
    gamma: float = 0.97
    eps_init: float = 0.5
    eps_final: float = 0.05
    eps_final_frac: float = 0.6  # fraction of episodes by which eps reaches eps_final
    sync_period: int = 200
    batch_size: int = 128
    capacity: int = 50_000


@dataclass
class CsacParams:
    hidden: list[int] = field(default_factory=lambda: [128, 64])
    lr: float = 3e-4
    gamma: float = 0.99
    tau: float = 0.005
    batch_size: int = 128
    capacity: int = 50_000
    alpha_init: float = 0.2
    h_target: float = -3.0
    eta_lambda: float = 0.01
    log_std_min: float = -20.0
    log_std_max: float = 2.0


@dataclass
class TrainParams:
    episodes: int = 3000
    n_uavs: int = 1
    seed: int = 1
    top_every: int = 1           # lower-level steps per association decision
    calibration_episodes: int = 10
    calibration_seed: int = 0


@dataclass
class RunConfig:
    schema_version: int = SCHEMA_VERSION
    scenario: ScenarioConfig = field(default_factory=ScenarioConfig)
    env: EnvParams = field(default_factory=EnvParams)
    ddqn: DdqnParams = field(default_factory=DdqnParams)
    csac: CsacParams = field(default_factory=CsacParams)
    train: TrainParams = field(default_factory=TrainParams)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent, sort_keys=False)

    def save(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_json() + "\n")

    @property
    def arrival_radius(self) -> float:
        if self.env.arrival_radius_m is not None:
            return self.env.arrival_radius_m
        return self.env.v_max_mps * self.env.dt_s


def _build(cls, data: dict, path: str):
    """Construct a dataclass from a plain dict, rejecting unknown keys."""
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected an object, got {type(data).__name__}")
    names = {f.name: f for f in dataclasses.fields(cls)}
    unknown = set(data) - set(names)
    if unknown:
        raise ConfigError(f"{path}: unknown keys {sorted(unknown)}")
    kwargs = {}
    for key, value in data.items():
        fld = names[key]
        sub = _NESTED.get((cls, key))
        if sub is not None:
            elem_cls, is_list = sub
            if is_list:
                kwargs[key] = [_build(elem_cls, v, f"{path}.{key}[{i}]")
                               for i, v in enumerate(value)]
            else:
                kwargs[key] = _build(elem_cls, value, f"{path}.{key}")
        else:
            kwargs[key] = value
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


_NESTED = {
    (SiteSpec, "sectors"): (SectorSpec, True),
    (ScenarioConfig, "buildings"): (BuildingParams, False),
    (ScenarioConfig, "gn_sites"): (SiteSpec, True),
    (ScenarioConfig, "an_sites"): (SiteSpec, True),
    (ScenarioConfig, "satellites"): (SatelliteSpec, True),
    (RunConfig, "scenario"): (ScenarioConfig, False),
    (RunConfig, "env"): (EnvParams, False),
    (RunConfig, "ddqn"): (DdqnParams, False),
    (RunConfig, "csac"): (CsacParams, False),
    (RunConfig, "train"): (TrainParams, False),
}


def config_from_dict(data: dict) -> RunConfig:
    version = data.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ConfigError(
            f"config schema version {version!r} not supported (expected {SCHEMA_VERSION})")
    cfg = _build(RunConfig, data, "config")
    validate_config(cfg)
    return cfg


def load_config(path) -> RunConfig:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON ({exc})") from exc
    return config_from_dict(data)


def validate_config(cfg: RunConfig) -> None:
    sc, env = cfg.scenario, cfg.env
    lo, hi = sc.bounds_lo, sc.bounds_hi
    if len(lo) != 3 or len(hi) != 3 or any(h <= l for l, h in zip(lo, hi)):
        raise ConfigError("bounds must satisfy lo < hi componentwise")
    b = sc.buildings
    if not (0.0 < b.alpha < 1.0):
        raise ConfigError("buildings.alpha must lie in (0, 1)")
    if b.beta_per_km2 <= 0:
        raise ConfigError("buildings.beta_per_km2 must be positive")
    if b.gamma_m <= 0:
        raise ConfigError("buildings.gamma_m must be positive")
    if not sc.satellites:
        raise ConfigError("at least one satellite is required for SN coverage")
    seen: set[tuple] = set()
    for site in sc.gn_sites + sc.an_sites:
        key = (round(site.position[0], 6), round(site.position[1], 6))
        if key in seen:
            raise ConfigError(f"duplicate site position {key}")
        seen.add(key)
        if not (lo[0] <= site.position[0] <= hi[0] and lo[1] <= site.position[1] <= hi[1]):
            raise ConfigError(f"site at {site.position[:2]} lies outside the area")
        if len(site.sectors) != 3:
            raise ConfigError("each ground/aerial site needs exactly 3 sectors")
        azims = sorted(s.azimuth_deg % 360.0 for s in site.sectors)
        if any(abs(a - b_) > 1e-9 for a, b_ in zip(azims, SECTOR_AZIMUTHS_DEG)):
            raise ConfigError("sector azimuths must be 0/120/240 degrees")
    if env.v_max_mps <= 0 or env.dt_s <= 0:
        raise ConfigError("v_max and dt must be positive")
    if env.r_max_bps <= env.r_min_bps:
        raise ConfigError("rate bounds must satisfy r_min < r_max")
    if env.r_req_bps <= 0:
        raise ConfigError("r_req must be positive")
    if cfg.train.top_every < 1:
        raise ConfigError("train.top_every must be >= 1")
    if cfg.csac.log_std_max <= cfg.csac.log_std_min:
        raise ConfigError("log_std bounds must satisfy min < max")
    for p in (env.goal, env.start_lo, env.start_hi):
        if len(p) != 3:
            raise ConfigError("goal/start points must be 3-vectors")
        if not all(l <= v <= h for l, v, h in zip(lo, p, hi)):
            raise ConfigError(f"point {p} lies outside the world box")


def _three_sectors(tilt_deg: float) -> list[SectorSpec]:
    return [SectorSpec(azimuth_deg=a, tilt_deg=tilt_deg) for a in SECTOR_AZIMUTHS_DEG]


def default_config() -> RunConfig:
    """Reference 2 km x 2 km urban deployment with the full station layout."""
    sc = ScenarioConfig(
        gn_sites=[
            SiteSpec(position=[500.0, 500.0, 25.0], carrier_ghz=6.7,
                     sectors=_three_sectors(10.0)),
            SiteSpec(position=[1500.0, 500.0, 25.0], carrier_ghz=6.7,
                     sectors=_three_sectors(10.0)),
            SiteSpec(position=[1000.0, 1500.0, 25.0], carrier_ghz=6.7,
                     sectors=_three_sectors(10.0)),
        ],
        an_sites=[
            SiteSpec(position=[500.0, 1500.0, 50.0], carrier_ghz=4.9,
                     sectors=_three_sectors(-10.0)),
            SiteSpec(position=[1500.0, 1500.0, 50.0], carrier_ghz=4.9,
                     sectors=_three_sectors(-10.0)),
            SiteSpec(position=[1000.0, 500.0, 50.0], carrier_ghz=4.9,
                     sectors=_three_sectors(-10.0)),
        ],
        satellites=[
            SatelliteSpec(initial_ground_xy=[1000.0 - 100e3, 1000.0]),
            SatelliteSpec(initial_ground_xy=[1000.0, 1000.0]),
        ],
    )
    return RunConfig(scenario=sc)


def small_config(seed: int = 1) -> RunConfig:
    """Desk-scale single-UAV preset: 500 m x 500 m, one GN site, one AN site, two beams."""
    sc = ScenarioConfig(
        bounds_lo=[0.0, 0.0, 100.0],
        bounds_hi=[500.0, 500.0, 300.0],
        buildings=BuildingParams(alpha=0.3, beta_per_km2=300.0, gamma_m=25.0, seed=7),
        gn_sites=[SiteSpec(position=[140.0, 360.0, 25.0], carrier_ghz=6.7,
                           sectors=_three_sectors(10.0))],
        an_sites=[SiteSpec(position=[360.0, 140.0, 50.0], carrier_ghz=4.9,
                           sectors=_three_sectors(-10.0))],
        satellites=[
            SatelliteSpec(initial_ground_xy=[250.0 - 100e3, 250.0]),
            SatelliteSpec(initial_ground_xy=[250.0, 250.0]),
        ],
        n_fading_draws=8,
    )
    env = EnvParams(
        v_max_mps=10.0,
        n_max_steps=60,
        goal=[440.0, 440.0, 150.0],
        start_lo=[40.0, 40.0, 140.0],
        start_hi=[80.0, 80.0, 160.0],
    )
    # smaller heads and batches keep a 600-episode run on one core under the
    # wall-clock budget; the reference preset keeps the full-size defaults.
    # eps_init/alpha_init start fully exploratory so the short run shows a
    # clear low-to-high return trajectory instead of a half-converged start
    ddqn = DdqnParams(hidden=[64, 64], batch_size=64, eps_init=1.0)
    csac = CsacParams(hidden=[64, 64], batch_size=64, alpha_init=0.5)
    train = TrainParams(episodes=600, seed=seed)
    return RunConfig(scenario=sc, env=env, ddqn=ddqn, csac=csac, train=train)
