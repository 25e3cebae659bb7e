"""Radio channel: antenna gains, path loss, small-scale fading, SINR, rate.

Received power composes as p = P_tx * beta * G * h with beta the large-scale
path gain, G the combined element + array gain toward the UAV and h a
unit-mean small-scale power gain (Rayleigh when non-LoS, Rician otherwise;
satellite links are always Rician). Networks occupy orthogonal bands, so only
same-network cells interfere. The link rate is the fading expectation
B * E[log2(1 + SINR)], estimated by Monte Carlo draws.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import AN, GN, SN
from .scenario import World

# front-to-back attenuation cap and the 3GPP-style parabolic element pattern
_ELEM_MAX_ATT_DB = 30.0
_ELEM_ANGLE_3DB = 65.0


def _array_factor_axis(n, u):
    """Normalized |sum of n half-wavelength steering phases|^2 / n along one axis."""
    psi = np.pi * np.asarray(u, dtype=float) / 2.0
    s = np.sin(psi)
    with np.errstate(divide="ignore", invalid="ignore"):
        af = np.sin(n * psi) ** 2 / s ** 2
    af = np.where(np.abs(s) < 1e-12, np.asarray(n, dtype=float) ** 2, af)
    return af / n


def antenna_gain_db(world: World, directions: np.ndarray) -> np.ndarray:
    """Combined element + array gain (dBi) of every cell toward unit directions.

    directions: (n_cells, 3) unit vectors from each transmit point to the UAV.
    """
    d = np.asarray(directions, dtype=float)
    x = np.einsum("ij,ij->i", d, world.boresight)
    y = np.einsum("ij,ij->i", d, world.axis_h)
    z = np.einsum("ij,ij->i", d, world.axis_v)
    az_off = np.degrees(np.arctan2(y, x))
    el_off = np.degrees(np.arctan2(z, np.hypot(x, y)))
    att = np.minimum(12.0 * (az_off / _ELEM_ANGLE_3DB) ** 2
                     + 12.0 * (el_off / _ELEM_ANGLE_3DB) ** 2, _ELEM_MAX_ATT_DB)
    elem = world.element_gain_dbi - att
    af = (_array_factor_axis(world.array_rows, z)
          * _array_factor_axis(world.array_cols, y))
    # a planar panel radiates negligibly behind its ground plane: no array
    # gain in the back half-space, the element floor alone applies there
    af = np.where(x > 0.0, af, 1.0)
    return elem + 10.0 * np.log10(af)


def path_loss_db(network: np.ndarray, los: np.ndarray, d3d_m: np.ndarray,
                 fc_ghz: np.ndarray, uav_height_m: float) -> np.ndarray:
    """Large-scale path loss in dB; strictly increasing in distance."""
    d = np.asarray(d3d_m, dtype=float)
    if np.any(d <= 0):
        raise ValueError("path loss requires positive 3D distance")
    fc = np.asarray(fc_ghz, dtype=float)
    logd = np.log10(d)
    logf = np.log10(fc)
    pl_los = 28.0 + 22.0 * logd + 20.0 * logf
    pl_nlos_raw = (13.54 + 39.08 * logd + 20.0 * logf
                   - 0.6 * (uav_height_m - 1.5))
    pl_nlos = np.maximum(pl_los, pl_nlos_raw)
    # free space for the satellite links, classic MHz/km constant form
    pl_sat = (32.45 + 20.0 * np.log10(fc * 1e3) + 20.0 * np.log10(d / 1e3))
    network = np.asarray(network)
    terrestrial = np.where(np.asarray(los, dtype=bool), pl_los, pl_nlos)
    return np.where(network == SN, pl_sat, terrestrial)


def fading_gain(k_linear, normals: np.ndarray) -> np.ndarray:
    """Unit-mean small-scale power gain from standard-normal pairs.

    k_linear = 0 gives Rayleigh; k_linear = inf gives the deterministic limit 1.
    normals has shape (..., 2).
    """
    k = np.asarray(k_linear, dtype=float)
    with np.errstate(invalid="ignore"):
        a = np.sqrt(k / (k + 1.0))
        b = np.sqrt(1.0 / (2.0 * (k + 1.0)))
    a = np.where(np.isinf(k), 1.0, a)
    b = np.where(np.isinf(k), 0.0, b)
    x = normals[..., 0]
    y = normals[..., 1]
    return (a + b * x) ** 2 + (b * y) ** 2


def draw_fading(k_db: float, los: bool, rng: np.random.Generator,
                size=None) -> np.ndarray | float:
    """Sample the power fading gain: Rician K when LoS, Rayleigh otherwise."""
    k_linear = 10.0 ** (k_db / 10.0) if los else 0.0
    if np.isinf(k_db) and los:
        k_linear = np.inf
    shape = (2,) if size is None else tuple(np.atleast_1d(size)) + (2,)
    normals = rng.standard_normal(shape)
    g = fading_gain(k_linear, normals)
    return float(g) if size is None else g


def received_power_w(tx_power_w, path_loss_db_, gain_dbi, fading) -> np.ndarray:
    """p = P_tx * 10^((G - PL)/10) * h in watts."""
    return (np.asarray(tx_power_w, dtype=float)
            * 10.0 ** ((np.asarray(gain_dbi, dtype=float)
                        - np.asarray(path_loss_db_, dtype=float)) / 10.0)
            * np.asarray(fading, dtype=float))


def sinr_linear(serving_w: float, interferer_w, noise_w: float) -> float:
    """Serving power over same-band interference plus noise."""
    if noise_w <= 0:
        raise ValueError("noise power must be positive")
    interf = float(np.sum(interferer_w)) if np.size(interferer_w) else 0.0
    return float(serving_w) / (interf + float(noise_w))


def rate_bps(bandwidth_hz: float, sinr_draws) -> float:
    """Fading-averaged spectral efficiency scaled by bandwidth."""
    return float(bandwidth_hz) * float(np.mean(np.log2(1.0 + np.asarray(sinr_draws))))


@dataclass
class Measurements:
    """One full sweep over every cell at a given UAV position and time."""

    cell_ids: np.ndarray
    network: np.ndarray
    rsrp_dbm: np.ndarray     # fading-averaged received power
    sinr: np.ndarray         # large-scale (unit fading) SINR, linear
    rate_bps: np.ndarray     # fading-averaged achievable rate

    def best_in_network(self, network: int) -> int | None:
        """Cell id with the strongest RSRP within one network, None if empty."""
        mask = self.network == network
        if not mask.any():
            return None
        idx = np.flatnonzero(mask)
        return int(idx[np.argmax(self.rsrp_dbm[idx])])


def measure_all(world: World, uav_pos, t: float, rng: np.random.Generator,
                n_draws: int | None = None) -> Measurements:
    """Measure RSRP, SINR and expected rate for all cells at (uav_pos, t)."""
    pos = np.asarray(uav_pos, dtype=float)
    if not world.inside(pos):
        raise ValueError(f"UAV position {pos} outside the world box")
    if n_draws is None:
        n_draws = world.cfg.n_fading_draws
    cpos = world.cell_positions(t)
    vec = pos - cpos
    d3d = np.linalg.norm(vec, axis=1)
    dirs = vec / d3d[:, None]
    los = world.los_mask(pos, t)
    pl = path_loss_db(world.network, los, d3d, world.carrier_ghz, float(pos[2]))
    gain = antenna_gain_db(world, dirs)
    rsrp_w = received_power_w(world.tx_power_w, pl, gain, 1.0)

    k_db = world.cfg.rician_k_db
    k_lin = np.where(los | (world.network == SN),
                     np.inf if np.isinf(k_db) else 10.0 ** (k_db / 10.0), 0.0)
    normals = rng.standard_normal((world.n_cells, n_draws, 2))
    h = fading_gain(k_lin[:, None], normals)
    p = rsrp_w[:, None] * h

    sinr_draws = np.empty_like(p)
    sinr_ls = np.empty(world.n_cells)
    for net in (GN, AN, SN):
        mask = world.network == net
        if not mask.any():
            continue
        total = p[mask].sum(axis=0)
        sinr_draws[mask] = p[mask] / (total - p[mask] + world.noise_w[mask, None])
        total_ls = rsrp_w[mask].sum()
        sinr_ls[mask] = rsrp_w[mask] / (total_ls - rsrp_w[mask] + world.noise_w[mask])

    rates = world.bandwidth_hz * np.mean(np.log2(1.0 + sinr_draws), axis=1)
    return Measurements(
        cell_ids=np.arange(world.n_cells),
        network=world.network.copy(),
        rsrp_dbm=10.0 * np.log10(rsrp_w) + 30.0,
        sinr=sinr_ls,
        rate_bps=rates,
    )
