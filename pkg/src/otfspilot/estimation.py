"""Pilot observations, the linear MMSE tap estimator, and its error.

The received pilot block depends linearly on the channel taps:
y_p = Z c + w with Z holding one column per tap.  For the compliant
single-pilot allocations Z has exactly one nonzero per column, so
Z^H Z = P_p I: the estimator decouples per tap and its error has the
closed form sum_i var_i * noise / (noise + var_i * P_p), which depends
on the placement only through the total pilot power.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .core import ChannelSpec, RngStream, complex_normal, tap_pairs, vec
from .dd_domain import build_phase_mask
from .pilot import Allocation, ReceiverFootprint, receiver_footprints

__all__ = [
    "TapPrior",
    "observation_matrix_from_grid",
    "build_observation_matrix",
    "gram_offdiag",
    "lmmse_estimate",
    "mse_closed_form",
    "mse_general",
    "empirical_mse",
]


@dataclass(frozen=True)
class TapPrior:
    """Diagonal Gaussian prior on the taps plus the noise variance."""

    tap_variances: np.ndarray
    noise_var: float

    def __post_init__(self) -> None:
        if np.any(self.tap_variances <= 0):
            raise ValueError("prior tap variances must be positive")
        if self.noise_var <= 0:
            raise ValueError("noise variance must be positive")

    @classmethod
    def from_spec(cls, spec: ChannelSpec, noise_var: float) -> "TapPrior":
        return cls(tap_variances=spec.tap_variance_vector(), noise_var=noise_var)


def observation_matrix_from_grid(
    pilot_grid: np.ndarray,
    pilot_obs: np.ndarray,
    spec: ChannelSpec,
) -> np.ndarray:
    """Observation matrix for an arbitrary pilot grid.

    Column (l, q) is the grid response of tap (l, q) with unit
    coefficient, restricted to the pilot_obs rows:
    vec(mask(l,q) * roll(S_p, (l, q)))[pilot_obs].
    """
    cols = []
    for l, q in tap_pairs(spec.L, spec.Q):
        shifted = np.roll(np.roll(pilot_grid, l, axis=0), q, axis=1)
        col = vec(build_phase_mask(l, q, spec.M, spec.N) * shifted)
        cols.append(col[pilot_obs])
    return np.column_stack(cols)


def build_observation_matrix(
    alloc: Allocation,
    footprint: ReceiverFootprint | None = None,
    method: str = "fast",
) -> np.ndarray:
    """R_p x n_taps map from taps to the received pilot block.

    method="fast" uses the grid shift/mask form; method="dense" goes
    through the full modulate/channel/demodulate matrix chain and exists
    as a cross-check.
    """
    if footprint is None:
        footprint = receiver_footprints(alloc)
    if method == "fast":
        return observation_matrix_from_grid(alloc.pilot_grid(), footprint.pilot_obs,
                                            alloc.spec)
    if method == "dense":
        return _observation_matrix_dense(alloc, footprint)
    raise ValueError(f"unknown method {method!r}")


def _observation_matrix_dense(alloc: Allocation, footprint: ReceiverFootprint) -> np.ndarray:
    """Matrix-chain construction: demod(time-shift(mod(pilot grid))) per tap."""
    from .modem import otfs_demodulate, otfs_modulate

    spec = alloc.spec
    K = spec.K
    x = otfs_modulate(alloc.pilot_grid())
    k = np.arange(K)
    cols = []
    for l, q in tap_pairs(spec.L, spec.Q):
        r = np.exp(2j * np.pi * q * k / K) * np.roll(x, l)
        col = vec(otfs_demodulate(r, spec.M, spec.N))
        cols.append(col[footprint.pilot_obs])
    return np.column_stack(cols)


def gram_offdiag(Z: np.ndarray) -> tuple[float, np.ndarray]:
    """Max off-diagonal magnitude of Z^H Z and its diagonal.

    A compliant allocation gives (0, [P_p, ..., P_p]); any off-diagonal
    mass means the pilot pattern is not shift-orthogonal and the
    estimator loses its per-tap decoupling.
    """
    gram = Z.conj().T @ Z
    diag = np.real(np.diag(gram)).copy()
    np.fill_diagonal(gram, 0.0)
    off = float(np.max(np.abs(gram))) if gram.size else 0.0
    return off, diag


def lmmse_estimate(y_p: np.ndarray, Z: np.ndarray, prior: TapPrior) -> np.ndarray:
    """Posterior-mean tap estimate (noise_var * R_c^-1 + Z^H Z)^-1 Z^H y_p."""
    A = prior.noise_var * np.diag(1.0 / prior.tap_variances) + Z.conj().T @ Z
    return scipy.linalg.solve(A, Z.conj().T @ y_p, assume_a="pos")


def mse_closed_form(prior: TapPrior, pilot_power: float) -> float:
    """Estimator MSE for a compliant allocation: decoupled per-tap shrinkage."""
    v, s2 = prior.tap_variances, prior.noise_var
    return float(np.sum(v * s2 / (s2 + v * pilot_power)))


def mse_general(Z: np.ndarray, prior: TapPrior) -> float:
    """Estimator MSE tr((R_c^-1 + Z^H Z / noise_var)^-1) for any Z."""
    A = np.diag(1.0 / prior.tap_variances) + (Z.conj().T @ Z) / prior.noise_var
    return float(np.real(np.trace(scipy.linalg.inv(A))))


def empirical_mse(
    alloc: Allocation,
    prior: TapPrior,
    trials: int,
    stream: RngStream,
) -> tuple[float, float]:
    """Monte Carlo estimator MSE: mean and standard error over trials.

    Each trial draws taps from the prior, simulates the received pilot
    block in the grid domain, and measures ||c - c_hat||^2.
    """
    Z = build_observation_matrix(alloc)
    A = prior.noise_var * np.diag(1.0 / prior.tap_variances) + Z.conj().T @ Z
    lu = scipy.linalg.cho_factor(A)
    errs = np.empty(trials)
    for t in range(trials):
        rng = stream.substream(t).generator()
        c = complex_normal(rng, prior.tap_variances, len(prior.tap_variances))
        w = complex_normal(rng, prior.noise_var, Z.shape[0])
        c_hat = scipy.linalg.cho_solve(lu, Z.conj().T @ (Z @ c + w))
        errs[t] = np.sum(np.abs(c - c_hat) ** 2)
    return float(errs.mean()), float(errs.std(ddof=1) / np.sqrt(trials))
