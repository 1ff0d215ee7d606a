"""Channel estimators for the contaminated pilot phase.

Implements the correlation (LS) estimator, the joint Bayesian/MMSE
estimators that recover all cells' channels at once, the single-channel
MMSE estimator under full pilot reuse, its interference-free counterpart,
and the closed-form MSE of each. All solves go through linear systems;
covariance matrices are never inverted explicitly.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.linalg import block_diag

_POWER_TOL = 1e-8


def default_pilot(tau: int) -> np.ndarray:
    """All-ones pilot of length tau (power tau by construction)."""
    return np.ones(tau, dtype=complex)


def random_pilot(tau: int, rng: np.random.Generator) -> np.ndarray:
    """Unit-modulus random-phase pilot; satisfies the power constraint
    sum |s_t|^2 = tau exactly."""
    return np.exp(2j * np.pi * rng.uniform(size=tau))


def _check_pilot_power(s: np.ndarray) -> None:
    tau = s.shape[0]
    power = float(np.sum(np.abs(s) ** 2))
    if abs(power - tau) > _POWER_TOL * tau:
        raise ValueError(f"pilot power {power:.6g} violates the constraint sum|s_t|^2 = tau = {tau}")


def simulate_received(
    channels: list[np.ndarray],
    pilots: list[np.ndarray],
    noise_var: float,
    rng: np.random.Generator,
) -> np.ndarray:
    """Received pilot block Y = sum_l h_l s_l^T + N (M x tau), noise i.i.d.
    complex Gaussian with per-entry variance noise_var."""
    if len(channels) != len(pilots):
        raise ValueError(f"{len(channels)} channels but {len(pilots)} pilots")
    m = channels[0].shape[0]
    tau = pilots[0].shape[0]
    for h in channels:
        if h.shape != (m,):
            raise ValueError(f"channel shape {h.shape} does not match M={m}")
    for s in pilots:
        if s.shape != (tau,):
            raise ValueError(f"pilot shape {s.shape} does not match tau={tau}")
    y = np.zeros((m, tau), dtype=complex)
    for h, s in zip(channels, pilots):
        y += np.outer(h, s)
    scale = math.sqrt(noise_var / 2.0)
    y += scale * (rng.standard_normal((m, tau)) + 1j * rng.standard_normal((m, tau)))
    return y


def vectorize_received(y_block: np.ndarray) -> np.ndarray:
    """Column-major stacking of the M x tau block, matching the s kron I_M
    pilot-matrix convention."""
    return y_block.ravel(order="F")


def ls_estimate(y_block: np.ndarray, s: np.ndarray) -> np.ndarray:
    """Correlation estimate Y s* / (s^T s*); under full pilot reuse the
    interfering channels leak into it undamped."""
    power = float(np.sum(np.abs(s) ** 2))
    if power == 0.0:
        raise ValueError("zero pilot sequence")
    return y_block @ s.conj() / power


def _pilot_matrix(pilots: list[np.ndarray], m: int) -> np.ndarray:
    """Stacked pilot matrix [s_1 kron I_M ... s_L kron I_M], (tau*M) x (L*M)."""
    eye = np.eye(m)
    return np.hstack([np.kron(s[:, None], eye) for s in pilots])


def _pilot_gram(pilots: list[np.ndarray]) -> np.ndarray:
    s = np.column_stack(pilots)
    return s.conj().T @ s


def joint_bayes_estimate(
    y: np.ndarray,
    pilots: list[np.ndarray],
    covariances: list[np.ndarray],
    noise_var: float,
) -> np.ndarray:
    """MAP estimate of all stacked channels:
    (noise_var I + R Stilde^H Stilde)^{-1} R Stilde^H y."""
    m = covariances[0].shape[0]
    ll = len(covariances)
    tau = pilots[0].shape[0]
    if y.shape != (m * tau,):
        raise ValueError(f"stacked observation shape {y.shape}, expected ({m * tau},)")
    if len(pilots) != ll:
        raise ValueError(f"{len(pilots)} pilots for {ll} covariances")
    r = block_diag(*covariances)
    st = _pilot_matrix(pilots, m)
    gram = np.kron(_pilot_gram(pilots), np.eye(m))
    lhs = noise_var * np.eye(ll * m) + r @ gram
    return np.linalg.solve(lhs, r @ (st.conj().T @ y))


def joint_mmse_estimate(
    y: np.ndarray,
    pilots: list[np.ndarray],
    covariances: list[np.ndarray],
    noise_var: float,
) -> np.ndarray:
    """MMSE form R Stilde^H (Stilde R Stilde^H + noise_var I)^{-1} y;
    algebraically identical to joint_bayes_estimate."""
    m = covariances[0].shape[0]
    tau = pilots[0].shape[0]
    if y.shape != (m * tau,):
        raise ValueError(f"stacked observation shape {y.shape}, expected ({m * tau},)")
    r = block_diag(*covariances)
    st = _pilot_matrix(pilots, m)
    lhs = st @ r @ st.conj().T + noise_var * np.eye(m * tau)
    return r @ (st.conj().T @ np.linalg.solve(lhs, y))


def single_mmse_estimate(
    y: np.ndarray,
    s: np.ndarray,
    covariances: list[np.ndarray],
    noise_var: float,
) -> np.ndarray:
    """Desired-channel MMSE estimate under the shared pilot s:
    R_1 (noise_var I + tau sum_l R_l)^{-1} Sbar^H y.

    covariances[0] is the desired link; the rest are the interferers
    observed at the same base station.
    """
    _check_pilot_power(s)
    m = covariances[0].shape[0]
    tau = s.shape[0]
    if y.shape != (m * tau,):
        raise ValueError(f"stacked observation shape {y.shape}, expected ({m * tau},)")
    sbar_h_y = y.reshape((tau, m)).T @ s.conj()  # Sbar^H y = Y s*
    lhs = noise_var * np.eye(m) + tau * np.sum(covariances, axis=0)
    return covariances[0] @ np.linalg.solve(lhs, sbar_h_y)


def no_interference_estimate(
    y_clean: np.ndarray,
    s: np.ndarray,
    r1: np.ndarray,
    noise_var: float,
) -> np.ndarray:
    """Single-channel estimate with the interference terms zeroed:
    R_1 (noise_var I + tau R_1)^{-1} Sbar^H (Sbar h_1 + n)."""
    return single_mmse_estimate(y_clean, s, [r1], noise_var)


def analytic_mse_joint(
    pilots: list[np.ndarray],
    covariances: list[np.ndarray],
    noise_var: float,
) -> float:
    """Closed-form MSE of the joint estimator,
    tr{ R (I + Stilde^H Stilde R / noise_var)^{-1} }.

    For identical pilots Stilde^H Stilde reduces to tau J_LL kron I_M with
    J_LL the all-ones matrix; the Gram construction covers both cases.
    """
    m = covariances[0].shape[0]
    ll = len(covariances)
    r = block_diag(*covariances)
    gram = np.kron(_pilot_gram(pilots), np.eye(m))
    lhs = np.eye(ll * m) + gram @ r / noise_var
    return float(np.real(np.trace(np.linalg.solve(lhs, r))))


def analytic_mse_single(
    covariances: list[np.ndarray],
    noise_var: float,
    tau: int,
) -> float:
    """Closed-form MSE of the single-channel estimator under full reuse,
    tr{ R_1 - R_1^2 ((noise_var/tau) I + sum_l R_l)^{-1} }."""
    m = covariances[0].shape[0]
    r1 = covariances[0]
    lhs = (noise_var / tau) * np.eye(m) + np.sum(covariances, axis=0)
    correction = np.trace(r1 @ np.linalg.solve(lhs, r1))
    return float(np.real(np.trace(r1) - correction))


def analytic_mse_no_int(r1: np.ndarray, noise_var: float, tau: int) -> float:
    """Interference-free MSE tr{ R_1 (I + (tau/noise_var) R_1)^{-1} }."""
    m = r1.shape[0]
    lhs = np.eye(m) + (tau / noise_var) * r1
    return float(np.real(np.trace(np.linalg.solve(lhs, r1))))
