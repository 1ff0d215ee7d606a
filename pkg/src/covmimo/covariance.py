"""Channel covariance construction from AOA densities.

The closed-form path evaluates the elementwise integral
R[m, n] = delta_sq * E{ exp(-2j*pi*(D/lambda)*(m-n)*cos(theta)) }
by Gauss-Legendre quadrature; a Monte-Carlo average of steering outer
products serves as the independent cross-check. Entries depend on m - n
only, so R is Hermitian Toeplitz and is assembled from its first column.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy.linalg import toeplitz

from .channel import (
    AoaDensity,
    ArrayGeometry,
    GaussianAoa,
    PointAoa,
    UniformAoa,
    steering_matrix,
    steering_vector,
)


@dataclass(frozen=True)
class QuadratureSpec:
    """Fixed-node quadrature settings; Gaussian densities are truncated at
    +/- gaussian_truncation standard deviations and renormalized."""

    num_nodes: int = 512
    gaussian_truncation: float = 6.0

    def __post_init__(self):
        if self.num_nodes < 32:
            raise ValueError(f"num_nodes must be >= 32, got {self.num_nodes}")


@dataclass(frozen=True)
class CovarianceMatrix:
    """Hermitian PSD channel covariance with its attenuation scale.

    geom and density record how the matrix was built (when known); the
    subspace analyzer uses them for support-based rank bounds.
    """

    entries: np.ndarray
    scale: float
    geom: Optional[ArrayGeometry] = None
    density: Optional[AoaDensity] = None

    @property
    def num_antennas(self) -> int:
        return self.entries.shape[0]

    def trace(self) -> float:
        return float(np.real(np.trace(self.entries)))


@lru_cache(maxsize=8)
def _leggauss(n: int) -> tuple[np.ndarray, np.ndarray]:
    return np.polynomial.legendre.leggauss(n)


def _density_nodes(density: AoaDensity, quad: QuadratureSpec) -> tuple[np.ndarray, np.ndarray]:
    """Quadrature nodes over the density support and normalized weights
    w_i * p(theta_i) summing to one."""
    base_x, base_w = _leggauss(quad.num_nodes)
    if isinstance(density, UniformAoa):
        a = density.mean - density.half_width
        b = density.mean + density.half_width
    elif isinstance(density, GaussianAoa):
        a = density.mean - quad.gaussian_truncation * density.std
        b = density.mean + quad.gaussian_truncation * density.std
    else:
        raise TypeError(f"no quadrature rule for density {type(density).__name__}")
    half = 0.5 * (b - a)
    nodes = 0.5 * (a + b) + half * base_x
    if isinstance(density, GaussianAoa):
        pdf = np.exp(-0.5 * ((nodes - density.mean) / density.std) ** 2)
    else:
        pdf = np.full(quad.num_nodes, 1.0 / (b - a))
    weights = base_w * half * pdf
    weights = weights / weights.sum()  # renormalize truncated mass; keeps diag exactly delta_sq
    return nodes, weights


def _toeplitz_column(geom: ArrayGeometry, cos_nodes: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """First column c_k = sum_i w_i exp(-2j*pi*(D/lambda)*k*cos(theta_i)),
    built by cumulative products to avoid M*nodes exponentials."""
    z = np.exp(-2j * np.pi * geom.spacing_ratio * cos_nodes)
    col = np.empty(geom.num_antennas, dtype=complex)
    acc = np.ones_like(z)
    col[0] = weights.sum()
    for k in range(1, geom.num_antennas):
        acc = acc * z
        col[k] = weights @ acc
    return col


def covariance_from_density(
    geom: ArrayGeometry,
    density: AoaDensity,
    delta_sq: float,
    quad: QuadratureSpec = QuadratureSpec(),
) -> CovarianceMatrix:
    """Closed-form covariance R = delta_sq * E{a(theta) a(theta)^H}."""
    if isinstance(density, PointAoa):
        a = steering_vector(geom, density.angle)
        entries = delta_sq * np.outer(a, a.conj())
    else:
        nodes, weights = _density_nodes(density, quad)
        col = _toeplitz_column(geom, np.cos(nodes), weights)
        entries = delta_sq * toeplitz(col)
    return CovarianceMatrix(entries=entries, scale=delta_sq, geom=geom, density=density)


def covariance_monte_carlo(
    geom: ArrayGeometry,
    density: AoaDensity,
    delta_sq: float,
    num_samples: int,
    rng: np.random.Generator,
    chunk: int = 200_000,
) -> CovarianceMatrix:
    """Sample-mean covariance over steering outer products (oracle for the
    quadrature path)."""
    if num_samples < 1:
        raise ValueError(f"num_samples must be >= 1, got {num_samples}")
    m = geom.num_antennas
    acc = np.zeros((m, m), dtype=complex)
    remaining = num_samples
    while remaining > 0:
        n = min(chunk, remaining)
        a = steering_matrix(geom, density.sample(rng, n))
        acc += a @ a.conj().T
        remaining -= n
    entries = delta_sq * acc / num_samples
    entries = 0.5 * (entries + entries.conj().T)
    return CovarianceMatrix(entries=entries, scale=delta_sq, geom=geom, density=density)


@dataclass(frozen=True)
class PsdReport:
    ok: bool
    hermitian_rel_err: float
    min_eigenvalue: float
    trace: float

    def __bool__(self) -> bool:
        return self.ok


def validate_psd(entries: np.ndarray, hermitian_tol: float = 1e-10) -> PsdReport:
    """Check Hermitian symmetry (relative) and eigenvalue floor
    min(eig) >= -1e-10 * trace."""
    entries = np.asarray(entries)
    if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {entries.shape}")
    scale = np.linalg.norm(entries)
    herm_err = np.linalg.norm(entries - entries.conj().T) / scale if scale > 0 else 0.0
    herm = 0.5 * (entries + entries.conj().T)
    eigs = np.linalg.eigvalsh(herm)
    tr = float(np.real(np.trace(herm)))
    ok = herm_err <= hermitian_tol and eigs[0] >= -1e-10 * max(tr, 0.0)
    return PsdReport(ok=ok, hermitian_rel_err=float(herm_err), min_eigenvalue=float(eigs[0]), trace=tr)


def link_covariance(scenario, cell: int, user: int, bs: int) -> CovarianceMatrix:
    """Covariance of one scenario link, computed once and cached on the
    scenario (the estimators and the pilot coordinator share the cache)."""
    key = (cell, user, bs)
    cov = scenario.cov_cache.get(key)
    if cov is None:
        link = scenario.links[key]
        quad = QuadratureSpec(num_nodes=scenario.quad_nodes)
        cov = covariance_from_density(scenario.geometry, link.aoa, link.delta_sq, quad)
        scenario.cov_cache[key] = cov
    return cov


# ---------------------------------------------------------------------------
# Binary dump of covariance sets (see README for the exact layout)
# ---------------------------------------------------------------------------

_MAGIC = b"COVS"


def _density_params(density) -> tuple[int, float, float]:
    if isinstance(density, PointAoa):
        return 0, density.angle, 0.0
    if isinstance(density, UniformAoa):
        return 1, density.mean, density.half_width
    if isinstance(density, GaussianAoa):
        return 2, density.mean, density.std
    return 255, 0.0, 0.0  # unknown / not recorded


def save_covariances(path: str, covs: list[CovarianceMatrix]) -> None:
    """Write a covariance set: magic 'COVS', uint32 count, then per matrix a
    header (uint32 M, float64 delta_sq, uint8 density code, 2x float64
    density params) followed by row-major complex64 entries."""
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<I", len(covs)))
        for cov in covs:
            code, p1, p2 = _density_params(cov.density)
            fh.write(struct.pack("<IdBdd", cov.num_antennas, cov.scale, code, p1, p2))
            fh.write(np.ascontiguousarray(cov.entries, dtype=np.complex64).tobytes())


def load_covariances(path: str) -> list[CovarianceMatrix]:
    """Read a covariance set written by save_covariances. Entries come back
    as complex128 upcast from the stored complex64."""
    out: list[CovarianceMatrix] = []
    with open(path, "rb") as fh:
        if fh.read(4) != _MAGIC:
            raise ValueError(f"{path} is not a covariance dump")
        (count,) = struct.unpack("<I", fh.read(4))
        for _ in range(count):
            m, delta_sq, code, p1, p2 = struct.unpack("<IdBdd", fh.read(struct.calcsize("<IdBdd")))
            raw = fh.read(m * m * 8)
            entries = np.frombuffer(raw, dtype=np.complex64).reshape(m, m).astype(complex)
            if code == 0:
                density = PointAoa(p1)
            elif code == 1:
                density = UniformAoa(p1, p2)
            elif code == 2:
                density = GaussianAoa(p1, p2)
            else:
                density = None
            out.append(CovarianceMatrix(entries=entries, scale=delta_sq, density=density))
    return out
