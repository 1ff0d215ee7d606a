"""Numerical probes of the large-array covariance eigenstructure: the
spatial-frequency basis, dimension counts of steering spans, effective
rank against the support-width bound, null-space projections and
inter-user subspace overlap."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .channel import steering_vector
from .covariance import CovarianceMatrix

# eigenvalues below this fraction of the largest are treated as null space
DEFAULT_RANK_THRESHOLD = 1e-3


@dataclass(frozen=True)
class AngularSupport:
    """Closed angular interval in [0, pi]."""

    theta_min: float
    theta_max: float

    def __post_init__(self):
        if not (0.0 <= self.theta_min <= self.theta_max <= math.pi):
            raise ValueError(f"support [{self.theta_min}, {self.theta_max}] not ordered within [0, pi]")


@dataclass(frozen=True)
class SpectralDecomposition:
    """Dominant eigenpairs of a covariance: orthonormal eigvecs (M x m) and
    nonincreasing eigenvalues above threshold * max."""

    eigvecs: np.ndarray
    eigvals: np.ndarray
    threshold: float


def spatial_basis_matrix(x: np.ndarray, m: int) -> np.ndarray:
    """Columns alpha(x) = [1, e^{-j pi x}, ..., e^{-j pi (M-1) x}]^T for a
    batch of spatial frequencies x."""
    k = np.arange(m)[:, None]
    return np.exp(-1j * np.pi * k * np.asarray(x, dtype=float)[None, :])


def spatial_basis_vector(x: float, m: int) -> np.ndarray:
    return spatial_basis_matrix(np.array([x]), m)[:, 0]


def fourier_basis(m: int) -> np.ndarray:
    """Orthonormal basis mu_i = alpha(x_i)/sqrt(M) at the regularly spaced
    spatial frequencies x_i = -1 + 2(i-1)/M, returned as columns."""
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    x = -1.0 + 2.0 * np.arange(m) / m
    return spatial_basis_matrix(x, m) / math.sqrt(m)


def subspace_dimension_estimate(
    b1: float,
    b2: float,
    m: int,
    grid_size: Optional[int] = None,
    threshold: float = DEFAULT_RANK_THRESHOLD,
) -> int:
    """Numerical dimension of span{alpha(x), x in [b1, b2]}.

    Sums steering outer products over a periodic grid of [b1, b2) and counts
    eigenvalues above threshold * max; approximates (b2 - b1) * M / 2 for
    large M, and equals M exactly on the full band [-1, 1].
    """
    if not (-1.0 <= b1 < b2 <= 1.0):
        raise ValueError(f"need -1 <= b1 < b2 <= 1, got ({b1}, {b2})")
    if grid_size is None:
        grid_size = max(512, 4 * m)
    # periodic grid over [b1, b2): on the full band [-1, 1) the summed outer
    # products collapse to grid_size * I exactly
    x = b1 + (b2 - b1) * np.arange(grid_size) / grid_size
    a = spatial_basis_matrix(x, m)
    gram = a @ a.conj().T
    eigs = np.linalg.eigvalsh(gram)
    return int(np.sum(eigs >= threshold * eigs[-1]))


def spectral_decomposition(
    cov: CovarianceMatrix | np.ndarray,
    threshold: float = DEFAULT_RANK_THRESHOLD,
) -> SpectralDecomposition:
    entries = cov.entries if isinstance(cov, CovarianceMatrix) else np.asarray(cov)
    w, v = np.linalg.eigh(entries)
    w = w[::-1]
    v = v[:, ::-1]
    if w[0] <= 0.0:
        raise ValueError("covariance has no positive eigenvalue")
    keep = w >= threshold * w[0]
    return SpectralDecomposition(eigvecs=v[:, keep], eigvals=w[keep], threshold=threshold)


@dataclass(frozen=True)
class EffectiveRank:
    rank: int
    fraction: float  # rank / M
    support_bound: Optional[float]  # d_i * M when the AOA support is bounded


def rank_bound_fraction(cov: CovarianceMatrix) -> Optional[float]:
    """Large-M rank fraction bound d = (cos(theta_min) - cos(theta_max)) * D/lambda
    from the AOA support; None when the density is unbounded or unknown."""
    if cov.density is None or cov.geom is None:
        return None
    support = cov.density.folded_support()
    if support is None:
        return None
    lo, hi = support
    return (math.cos(lo) - math.cos(hi)) * cov.geom.spacing_ratio


def effective_rank(
    cov: CovarianceMatrix,
    threshold: float = DEFAULT_RANK_THRESHOLD,
) -> EffectiveRank:
    """Count of eigenvalues above threshold * max, with the support-width
    rank bound d * M attached when available."""
    dec = spectral_decomposition(cov, threshold)
    rank = dec.eigvals.shape[0]
    m = cov.num_antennas
    d = rank_bound_fraction(cov)
    return EffectiveRank(rank=rank, fraction=rank / m, support_bound=None if d is None else d * m)


def steering_null_projection(
    cov: CovarianceMatrix,
    phi: float,
    delta_sq: Optional[float] = None,
) -> float:
    """Normalized energy of the probe direction a(phi) under the covariance:
    E{ |a(phi)^H a(theta)|^2 / M^2 } = a(phi)^H R a(phi) / (delta_sq * M^2).

    Equals 1 when the density is a point mass at phi and decays toward zero
    as M grows for phi outside the AOA support.
    """
    if delta_sq is None:
        delta_sq = cov.scale
    m = cov.num_antennas
    geom = cov.geom
    if geom is None:
        raise ValueError("covariance carries no array geometry")
    a = steering_vector(geom, phi)
    val = np.real(a.conj() @ cov.entries @ a) / (delta_sq * m * m)
    return float(val)


def subspace_overlap(
    cov_a: CovarianceMatrix | np.ndarray,
    cov_b: CovarianceMatrix | np.ndarray,
    threshold: float = DEFAULT_RANK_THRESHOLD,
) -> float:
    """Overlap of the dominant eigenspaces, ||U_a^H U_b||_F / sqrt(min(m_a, m_b)).

    1 for identical covariances, near 0 for disjoint AOA supports at large M.
    """
    ent_a = cov_a.entries if isinstance(cov_a, CovarianceMatrix) else np.asarray(cov_a)
    ent_b = cov_b.entries if isinstance(cov_b, CovarianceMatrix) else np.asarray(cov_b)
    if not np.any(ent_a) or not np.any(ent_b):
        raise ValueError("subspace overlap undefined for a zero matrix")
    if ent_a.shape != ent_b.shape:
        raise ValueError(f"shape mismatch {ent_a.shape} vs {ent_b.shape}")
    ua = spectral_decomposition(ent_a, threshold).eigvecs
    ub = spectral_decomposition(ent_b, threshold).eigvecs
    cross = ua.conj().T @ ub
    return float(np.linalg.norm(cross) / math.sqrt(min(ua.shape[1], ub.shape[1])))
