"""Physical channel synthesis: ULA steering vectors, multipath draws with
configurable angle-of-arrival densities, path loss and the multi-cell
hexagonal layout."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class ArrayGeometry:
    """Uniform linear array: antenna count and spacing-to-wavelength ratio."""

    num_antennas: int
    spacing_ratio: float = 0.5  # D/lambda, <= 0.5 keeps spatial sampling unambiguous

    def __post_init__(self):
        if self.num_antennas < 1:
            raise ValueError(f"num_antennas must be >= 1, got {self.num_antennas}")
        if not (0.0 < self.spacing_ratio <= 0.5):
            raise ValueError(f"spacing_ratio must be in (0, 0.5], got {self.spacing_ratio}")


def fold_angle(phi: float) -> float:
    """Map any azimuth to the equivalent angle in [0, pi].

    A ULA cannot distinguish phi from -phi (only cos(phi) enters the array
    response), so angles are folded onto [0, pi] losslessly.
    """
    return float(np.arccos(np.clip(np.cos(phi), -1.0, 1.0)))


def _folded_interval(lo: float, hi: float) -> tuple[float, float]:
    """Fold the interval [lo, hi] into [0, pi].

    The folded image of an interval is again an interval; its endpoints
    come from the extrema of cos over [lo, hi].
    """
    cos_vals = [math.cos(lo), math.cos(hi)]
    # cos attains +1 at multiples of 2*pi, -1 at odd multiples of pi
    if math.floor(hi / TWO_PI) >= math.ceil(lo / TWO_PI):
        cmax = 1.0
    else:
        cmax = max(cos_vals)
    if math.floor((hi - math.pi) / TWO_PI) >= math.ceil((lo - math.pi) / TWO_PI):
        cmin = -1.0
    else:
        cmin = min(cos_vals)
    return (math.acos(min(cmax, 1.0)), math.acos(max(cmin, -1.0)))


@dataclass(frozen=True)
class PointAoa:
    """All multipath energy arrives from a single angle."""

    angle: float

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return np.full(size, self.angle)

    def folded_support(self) -> tuple[float, float]:
        a = fold_angle(self.angle)
        return (a, a)


@dataclass(frozen=True)
class UniformAoa:
    """AOA uniform over [mean - half_width, mean + half_width]."""

    mean: float
    half_width: float

    def __post_init__(self):
        if self.half_width <= 0.0:
            raise ValueError(f"half_width must be > 0, got {self.half_width}")

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return rng.uniform(self.mean - self.half_width, self.mean + self.half_width, size)

    def folded_support(self) -> tuple[float, float]:
        return _folded_interval(self.mean - self.half_width, self.mean + self.half_width)


@dataclass(frozen=True)
class GaussianAoa:
    """AOA normally distributed around a mean angle; support is unbounded.

    Samples are used unfolded: only cos(theta) enters the array response,
    so truncation or folding would change the model.
    """

    mean: float
    std: float

    def __post_init__(self):
        if self.std <= 0.0:
            raise ValueError(f"std must be > 0, got {self.std}")

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return rng.normal(self.mean, self.std, size)

    def folded_support(self) -> None:
        return None  # unbounded


AoaDensity = Union[PointAoa, UniformAoa, GaussianAoa]


@dataclass(frozen=True)
class PathProfile:
    """Multipath description of one link: path count, average attenuation
    power and the AOA density."""

    num_paths: int
    avg_attenuation_sq: float
    aoa: AoaDensity

    def __post_init__(self):
        if self.num_paths < 1:
            raise ValueError(f"num_paths must be >= 1, got {self.num_paths}")
        if self.avg_attenuation_sq < 0.0:
            raise ValueError(f"avg_attenuation_sq must be >= 0, got {self.avg_attenuation_sq}")


def steering_vector(geom: ArrayGeometry, theta: float) -> np.ndarray:
    """ULA response to a plane wave from angle theta.

    Entry m is exp(-2j*pi*(D/lambda)*m*cos(theta)); the first entry is 1
    and the norm is exactly sqrt(M).
    """
    m = np.arange(geom.num_antennas)
    return np.exp(-2j * np.pi * geom.spacing_ratio * m * np.cos(theta))


def steering_matrix(geom: ArrayGeometry, thetas: np.ndarray) -> np.ndarray:
    """Steering vectors for a batch of angles, stacked as columns (M x N)."""
    m = np.arange(geom.num_antennas)[:, None]
    return np.exp(-2j * np.pi * geom.spacing_ratio * m * np.cos(np.asarray(thetas))[None, :])


def draw_channel(profile: PathProfile, geom: ArrayGeometry, rng: np.random.Generator) -> np.ndarray:
    """Draw one channel vector from the multipath model.

    h = (1/sqrt(P)) * sum_p a(theta_p) * alpha_p with theta_p i.i.d. from the
    AOA density and alpha_p i.i.d. zero-mean complex Gaussian with variance
    avg_attenuation_sq. The expected squared norm is avg_attenuation_sq * M.
    """
    p = profile.num_paths
    thetas = profile.aoa.sample(rng, p)
    scale = math.sqrt(profile.avg_attenuation_sq / 2.0)
    alphas = scale * (rng.standard_normal(p) + 1j * rng.standard_normal(p))
    return steering_matrix(geom, thetas) @ alphas / math.sqrt(p)


def covariance_factor(entries: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Factor B with B @ B^H equal to the given PSD matrix (eigenvalue square
    root; rank-deficient inputs yield a thin factor)."""
    w, v = np.linalg.eigh(entries)
    keep = w > tol * max(w[-1], 0.0) if w[-1] > 0 else np.zeros_like(w, dtype=bool)
    return v[:, keep] * np.sqrt(w[keep])


def draw_channel_gaussian(factor: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Draw h = B @ w with w standard complex Gaussian, so E{h h^H} = B B^H.

    Realizes the correlated Gaussian channel model given a covariance factor
    from covariance_factor().
    """
    m = factor.shape[1]
    w = (rng.standard_normal(m) + 1j * rng.standard_normal(m)) / math.sqrt(2.0)
    return factor @ w


def path_loss(alpha: float, distance: float, gamma: float) -> float:
    """Distance-based average channel gain alpha / d**gamma."""
    if distance <= 0.0:
        raise ValueError(f"distance must be > 0, got {distance}")
    return alpha / distance**gamma


@dataclass(frozen=True)
class Link:
    """Geometry of one (cell, user) -> base-station link."""

    distance: float
    mean_aoa: float  # folded into [0, pi]
    delta_sq: float
    aoa: AoaDensity


@dataclass
class NetworkScenario:
    """Multi-cell layout with per-link geometry and attenuation.

    links maps (cell, user, bs) to a Link for every of the K*L*L
    combinations. Covariance matrices for the links are attached lazily by
    the covariance engine and cached here (see covariance.link_covariance).
    """

    num_cells: int
    users_per_cell: int
    cell_radius: float
    user_distance: float
    pathloss_exponent: float
    pathloss_constant: float
    noise_var: float
    pilot_len: int
    geometry: ArrayGeometry
    num_paths: int
    bs_positions: np.ndarray  # (L, 2)
    user_positions: np.ndarray  # (L, K, 2)
    links: dict[tuple[int, int, int], Link]
    quad_nodes: int = 512
    cov_cache: dict = field(default_factory=dict, repr=False)


def _bs_layout(num_cells: int, cell_radius: float) -> np.ndarray:
    """Base-station coordinates on a hexagonal grid with inter-site distance
    sqrt(3) * cell_radius."""
    isd = math.sqrt(3.0) * cell_radius
    if num_cells == 2:
        return np.array([[0.0, 0.0], [isd, 0.0]])
    if num_cells == 7:
        ring = [(isd * math.cos(k * math.pi / 3.0), isd * math.sin(k * math.pi / 3.0)) for k in range(6)]
        return np.array([[0.0, 0.0]] + ring)
    raise ValueError(f"unsupported cell count {num_cells}: layouts exist for L=2 and L=7")


def _spread_density(mean: float, shape: str, spread: float) -> AoaDensity:
    if shape == "uniform":
        return UniformAoa(mean, spread)
    if shape == "gaussian":
        return GaussianAoa(mean, spread)
    if shape == "point":
        return PointAoa(mean)
    raise ValueError(f"unknown AOA shape {shape!r}")


def build_scenario(
    num_cells: int,
    users_per_cell: int,
    cell_radius: float,
    user_distance: float,
    gamma: float,
    edge_snr_db: float,
    pilot_len: int,
    geom: ArrayGeometry,
    rng: Optional[np.random.Generator],
    *,
    aoa_shape: str = "uniform",
    aoa_spread: float = math.radians(20.0),
    num_paths: int = 50,
    noise_var: float = 1.0,
    quad_nodes: int = 512,
    placement: str = "random",
) -> NetworkScenario:
    """Assemble a symmetric multi-cell scenario.

    Every user sits at user_distance from its serving base station; the
    placement angle is drawn uniformly per user ("random") or set by the
    deterministic broadside rule angle_u = pi/2 + 2*pi*u/K ("fixed"). The
    path-loss constant is calibrated so a user at cell_radius is received
    at edge_snr_db above the noise floor.
    """
    if users_per_cell < 1:
        raise ValueError(f"users_per_cell must be >= 1, got {users_per_cell}")
    if not (0.0 < user_distance <= cell_radius):
        raise ValueError(f"user_distance must be in (0, cell_radius], got {user_distance}")
    bs = _bs_layout(num_cells, cell_radius)

    alpha = 10.0 ** (edge_snr_db / 10.0) * noise_var * cell_radius**gamma

    k = users_per_cell
    upos = np.zeros((num_cells, k, 2))
    for l in range(num_cells):
        if placement == "random":
            if rng is None:
                raise ValueError("random placement needs an rng")
            angles = rng.uniform(0.0, TWO_PI, k)
        elif placement == "fixed":
            angles = math.pi / 2.0 + TWO_PI * np.arange(k) / k
        else:
            raise ValueError(f"unknown placement {placement!r}")
        upos[l, :, 0] = bs[l, 0] + user_distance * np.cos(angles)
        upos[l, :, 1] = bs[l, 1] + user_distance * np.sin(angles)

    links: dict[tuple[int, int, int], Link] = {}
    for l in range(num_cells):
        for u in range(k):
            for j in range(num_cells):
                d = float(np.hypot(*(upos[l, u] - bs[j])))
                mean = fold_angle(math.atan2(upos[l, u, 1] - bs[j, 1], upos[l, u, 0] - bs[j, 0]))
                links[(l, u, j)] = Link(
                    distance=d,
                    mean_aoa=mean,
                    delta_sq=path_loss(alpha, d, gamma),
                    aoa=_spread_density(mean, aoa_shape, aoa_spread),
                )

    return NetworkScenario(
        num_cells=num_cells,
        users_per_cell=k,
        cell_radius=cell_radius,
        user_distance=user_distance,
        pathloss_exponent=gamma,
        pathloss_constant=alpha,
        noise_var=noise_var,
        pilot_len=pilot_len,
        geometry=geom,
        num_paths=num_paths,
        bs_positions=bs,
        user_positions=upos,
        links=links,
        quad_nodes=quad_nodes,
    )


def draw_link_channel(
    scenario: NetworkScenario, cell: int, user: int, bs: int, rng: np.random.Generator
) -> np.ndarray:
    """Multipath channel draw for one scenario link."""
    link = scenario.links[(cell, user, bs)]
    profile = PathProfile(scenario.num_paths, link.delta_sq, link.aoa)
    return draw_channel(profile, scenario.geometry, rng)
