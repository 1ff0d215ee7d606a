"""Config-driven Monte-Carlo sweeps over antenna count or AOA spread:
schedules users (randomly or via coordinated assignment), synthesizes the
contaminated pilot phase, runs every requested estimator and aggregates
the normalized estimation error and the MRC per-cell rate into CSV rows."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .channel import ArrayGeometry, NetworkScenario, build_scenario, draw_link_channel
from .coordination import greedy_assign
from .covariance import link_covariance
from .estimators import (
    default_pilot,
    ls_estimate,
    no_interference_estimate,
    single_mmse_estimate,
    vectorize_received,
)

log = logging.getLogger(__name__)

ESTIMATOR_ORDER = ("LS", "CB", "CPA", "no-int")
ERR_FLOOR_DB = -200.0


class ConfigError(ValueError):
    """Invalid experiment configuration; carries the offending field name."""

    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


@dataclass(frozen=True)
class ExperimentConfig:
    """One sweep: scenario parameters, estimator set, sweep axis and trial
    budget. Defaults follow the basic simulation parameters (1 km cells,
    20 dB edge SNR, 10 users per cell, 800 m user ring, exponent 3,
    half-wavelength spacing, 50 paths, pilot length 10)."""

    cells: int = 2
    users_per_cell: int = 10
    cell_radius_m: float = 1000.0
    user_distance_m: float = 800.0
    pathloss_exponent: float = 3.0
    edge_snr_db: float = 20.0
    pilot_len: int = 10
    num_paths: int = 50
    antennas: int = 10
    spacing_ratio: float = 0.5
    aoa_shape: str = "uniform"
    aoa_spread_deg: float = 20.0
    placement: str = "random"
    estimators: tuple[str, ...] = ESTIMATOR_ORDER
    sweep_variable: str = "m"
    sweep_values: tuple[float, ...] = (10, 20, 50, 100)
    trials: int = 100
    seed: int = 0
    out: str | None = None
    quad_nodes: int = 512


def validate_config(cfg: ExperimentConfig) -> ExperimentConfig:
    """Check field domains; raises ConfigError naming the bad field."""
    if cfg.cells not in (2, 7):
        raise ConfigError("cells", f"unsupported cell count {cfg.cells} (layouts: 2, 7)")
    if cfg.users_per_cell < 1:
        raise ConfigError("users_per_cell", f"must be >= 1, got {cfg.users_per_cell}")
    if not (0.0 < cfg.user_distance_m <= cfg.cell_radius_m):
        raise ConfigError("user_distance_m", f"must be in (0, cell_radius_m], got {cfg.user_distance_m}")
    if cfg.pilot_len < 1:
        raise ConfigError("pilot_len", f"must be >= 1, got {cfg.pilot_len}")
    if cfg.num_paths < 1:
        raise ConfigError("num_paths", f"must be >= 1, got {cfg.num_paths}")
    if cfg.antennas < 1:
        raise ConfigError("antennas", f"must be >= 1, got {cfg.antennas}")
    if not (0.0 < cfg.spacing_ratio <= 0.5):
        raise ConfigError("spacing_ratio", f"must be in (0, 0.5], got {cfg.spacing_ratio}")
    if cfg.aoa_shape not in ("uniform", "gaussian", "point"):
        raise ConfigError("aoa_shape", f"unknown shape {cfg.aoa_shape!r}")
    if cfg.aoa_spread_deg <= 0.0 and cfg.aoa_shape != "point":
        raise ConfigError("aoa_spread_deg", f"must be > 0, got {cfg.aoa_spread_deg}")
    if cfg.placement not in ("random", "fixed"):
        raise ConfigError("placement", f"unknown placement {cfg.placement!r}")
    if not cfg.estimators:
        raise ConfigError("estimators", "estimator set is empty")
    for name in cfg.estimators:
        if name not in ESTIMATOR_ORDER:
            raise ConfigError("estimators", f"unknown estimator {name!r} (choose from {ESTIMATOR_ORDER})")
    if cfg.sweep_variable not in ("m", "sigma"):
        raise ConfigError("sweep_variable", f"must be 'm' or 'sigma', got {cfg.sweep_variable!r}")
    if not cfg.sweep_values:
        raise ConfigError("sweep_values", "sweep list is empty")
    if cfg.sweep_variable == "m" and any(int(v) < 1 for v in cfg.sweep_values):
        raise ConfigError("sweep_values", "antenna counts must be >= 1")
    if cfg.sweep_variable == "sigma" and any(v <= 0 for v in cfg.sweep_values):
        raise ConfigError("sweep_values", "AOA spreads must be > 0")
    if cfg.trials < 1:
        raise ConfigError("trials", f"must be >= 1, got {cfg.trials}")
    return cfg


@dataclass(frozen=True)
class AggregateResult:
    """Aggregated outcome for one (sweep point, estimator) pair."""

    sweep_value: float
    estimator: str
    err_db: float
    rate_bps_hz: float
    trials: int
    seed: int


def _substream(seed: int, *key: int) -> np.random.Generator:
    """Independent generator keyed by (point, trial, stream); the keying
    makes trial results order-insensitive and reproducible."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=key))


def error_db_from_sums(err_energy: float, channel_energy: float) -> float:
    """10 log10 of the accumulated error-to-channel energy ratio, clamped
    at -200 dB."""
    if channel_energy <= 0.0:
        raise ValueError("total desired-channel energy is zero")
    if err_energy <= 0.0:
        return ERR_FLOOR_DB
    return max(10.0 * math.log10(err_energy / channel_energy), ERR_FLOOR_DB)


def normalized_error(pairs) -> float:
    """Normalized estimation error in dB over (estimate, truth) pairs:
    numerators and denominators are summed before the log."""
    num = 0.0
    den = 0.0
    count = 0
    for est, true in pairs:
        num += float(np.sum(np.abs(est - true) ** 2))
        den += float(np.sum(np.abs(true) ** 2))
        count += 1
    if count == 0:
        raise ValueError("no estimate/truth pairs given")
    return error_db_from_sums(num, den)


def mrc_rate(estimates: list[np.ndarray], channels: list[list[np.ndarray]], noise_var: float) -> float:
    """Downlink per-cell rate under matched-filter beamforming.

    channels[l][j] is the true channel between the user scheduled in cell l
    and base station j (reciprocal downlink). Beamformers are the unit-norm
    estimate directions with equal per-base transmit power; a zero estimate
    zeroes that cell's SINR.
    """
    ll = len(estimates)
    weights = []
    for j, est in enumerate(estimates):
        norm = np.linalg.norm(est)
        if norm == 0.0:
            log.warning("zero channel estimate in cell %d: beamformer undefined, SINR set to 0", j)
            weights.append(None)
        else:
            weights.append(est / norm)
    total = 0.0
    for j in range(ll):
        if weights[j] is None:
            continue
        signal = abs(np.vdot(channels[j][j], weights[j])) ** 2
        interference = sum(
            abs(np.vdot(channels[j][l], weights[l])) ** 2
            for l in range(ll)
            if l != j and weights[l] is not None
        )
        total += math.log2(1.0 + signal / (noise_var + interference))
    return total / ll


def _scenario_for_point(cfg: ExperimentConfig, sweep_value: float, rng) -> NetworkScenario:
    if cfg.sweep_variable == "m":
        m = int(sweep_value)
        spread = math.radians(cfg.aoa_spread_deg)
    else:
        m = cfg.antennas
        spread = math.radians(sweep_value)
    return build_scenario(
        cfg.cells,
        cfg.users_per_cell,
        cfg.cell_radius_m,
        cfg.user_distance_m,
        cfg.pathloss_exponent,
        cfg.edge_snr_db,
        cfg.pilot_len,
        ArrayGeometry(m, cfg.spacing_ratio),
        rng,
        aoa_shape=cfg.aoa_shape,
        aoa_spread=spread,
        num_paths=cfg.num_paths,
        quad_nodes=cfg.quad_nodes,
        placement=cfg.placement,
    )


def _draw_group(scenario: NetworkScenario, users: list[int], pilot: np.ndarray, rng):
    """Channels, noise and received blocks for one scheduled user group.

    Returns (H, noises, blocks) with H[l][j] the channel of cell l's user
    toward base station j.
    """
    ll = scenario.num_cells
    m = scenario.geometry.num_antennas
    tau = scenario.pilot_len
    h = [[draw_link_channel(scenario, l, users[l], j, rng) for j in range(ll)] for l in range(ll)]
    scale = math.sqrt(scenario.noise_var / 2.0)
    noises = [scale * (rng.standard_normal((m, tau)) + 1j * rng.standard_normal((m, tau))) for _ in range(ll)]
    blocks = []
    for j in range(ll):
        y = noises[j].copy()
        for l in range(ll):
            y += np.outer(h[l][j], pilot)
        blocks.append(y)
    return h, noises, blocks


def _bayes_estimates(scenario: NetworkScenario, users: list[int], blocks, pilot: np.ndarray):
    """Single-channel MMSE estimate of each cell's desired channel."""
    estimates = []
    for j in range(scenario.num_cells):
        covs = [link_covariance(scenario, j, users[j], j).entries]
        covs += [
            link_covariance(scenario, l, users[l], j).entries
            for l in range(scenario.num_cells)
            if l != j
        ]
        estimates.append(single_mmse_estimate(vectorize_received(blocks[j]), pilot, covs, scenario.noise_var))
    return estimates


def run_sweep(config: ExperimentConfig) -> list[AggregateResult]:
    """Execute the sweep; deterministic given the config (seed included).

    Per-trial substreams are keyed by (point, trial), so aggregates do not
    depend on execution order, and each estimator's result is unchanged by
    which other estimators are requested.
    """
    cfg = validate_config(config)
    wanted = [e for e in ESTIMATOR_ORDER if e in cfg.estimators]
    random_group_needed = any(e in wanted for e in ("LS", "CB", "no-int"))
    results: list[AggregateResult] = []

    for p_idx, sweep_value in enumerate(cfg.sweep_values):
        fixed_scenario = None
        if cfg.placement == "fixed":
            fixed_scenario = _scenario_for_point(cfg, sweep_value, None)
        pilot = default_pilot(cfg.pilot_len)
        ll = cfg.cells
        err_num = {e: np.zeros(cfg.trials) for e in wanted}
        err_den = {e: np.zeros(cfg.trials) for e in wanted}
        rates = {e: np.zeros(cfg.trials) for e in wanted}

        for t in range(cfg.trials):
            if fixed_scenario is not None:
                scenario = fixed_scenario
            else:
                scenario = _scenario_for_point(cfg, sweep_value, _substream(cfg.seed, p_idx, t, 0))
            sched_rng = _substream(cfg.seed, p_idx, t, 1)
            users_random = list(sched_rng.integers(0, cfg.users_per_cell, size=ll))

            def _account(name, estimates, channels):
                err_num[name][t] = sum(
                    float(np.sum(np.abs(estimates[j] - channels[j][j]) ** 2)) for j in range(ll)
                )
                err_den[name][t] = sum(float(np.sum(np.abs(channels[j][j]) ** 2)) for j in range(ll))
                rates[name][t] = mrc_rate(estimates, channels, scenario.noise_var)

            if random_group_needed:
                h, noises, blocks = _draw_group(scenario, users_random, pilot, _substream(cfg.seed, p_idx, t, 2))
                if "LS" in wanted:
                    _account("LS", [ls_estimate(blocks[j], pilot) for j in range(ll)], h)
                if "CB" in wanted:
                    _account("CB", _bayes_estimates(scenario, users_random, blocks, pilot), h)
                if "no-int" in wanted:
                    clean = []
                    for j in range(ll):
                        y_clean = noises[j] + np.outer(h[j][j], pilot)
                        r1 = link_covariance(scenario, j, users_random[j], j).entries
                        clean.append(
                            no_interference_estimate(
                                vectorize_received(y_clean), pilot, r1, scenario.noise_var
                            )
                        )
                    _account("no-int", clean, h)
            if "CPA" in wanted:
                users_cpa = [u for _, u in greedy_assign(scenario).selected]
                h_cpa, _, blocks_cpa = _draw_group(scenario, users_cpa, pilot, _substream(cfg.seed, p_idx, t, 3))
                _account("CPA", _bayes_estimates(scenario, users_cpa, blocks_cpa, pilot), h_cpa)

        for name in wanted:
            results.append(
                AggregateResult(
                    sweep_value=float(sweep_value),
                    estimator=name,
                    err_db=error_db_from_sums(float(err_num[name].sum()), float(err_den[name].sum())),
                    rate_bps_hz=float(rates[name].mean()),
                    trials=cfg.trials,
                    seed=cfg.seed,
                )
            )
    return results


def emit_csv(results: list[AggregateResult], path: str) -> None:
    """Write one row per (sweep point, estimator) with a fixed column order;
    floats at 6 significant digits, LF line endings."""
    if not results:
        raise ValueError("no results to write")
    try:
        with open(path, "w", newline="\n") as fh:
            fh.write("sweep_var,estimator,err_db,rate_bps_hz,trials,seed\n")
            for row in results:
                fh.write(
                    f"{row.sweep_value:.6g},{row.estimator},{row.err_db:.6g},"
                    f"{row.rate_bps_hz:.6g},{row.trials},{row.seed}\n"
                )
    except OSError as exc:
        raise OSError(f"cannot write results to {path}: {exc}") from exc
