"""Linear time-varying channel built from complex-exponential basis taps.

The channel acts on K time samples as H = sum_{l,q} c[l,q] D_q P^l where
P is the cyclic delay and D_q the Doppler phase ramp, so the time-varying
impulse response is h(k, l) = sum_q c[l,q] exp(2j*pi*q*k/K).  Taps are
drawn independently CN(0, var[l,q]).  A channel given as a list of
on-grid delay-Doppler paths maps exactly onto these taps.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .core import ChannelSpec, complex_normal, tap_index, tap_pairs

__all__ = [
    "DENSE_LIMIT",
    "DdPath",
    "cyclic_shift_matrix",
    "shift_decomposition",
    "phase_diag",
    "build_time_channel",
    "apply_channel",
    "sample_taps",
    "paths_to_cebem",
    "build_path_channel",
]

# Dense K x K matrices are refused above this size; use the structured
# matvec (apply_channel) instead.
DENSE_LIMIT = 4096


def cyclic_shift_matrix(K: int, l: int) -> np.ndarray:
    """0/1 matrix P^l with (P^l x)[k] = x[(k - l) mod K]."""
    if not 0 <= l < K:
        raise ValueError(f"shift l={l} outside [0, {K})")
    P = np.zeros((K, K))
    P[np.arange(K), (np.arange(K) - l) % K] = 1.0
    return P


def shift_decomposition(M: int, l: int) -> tuple[np.ndarray, np.ndarray]:
    """Split P_M^l into its unwrapped and wrapped parts.

    Returns (lower, upper) with lower + upper = P_M^l, where lower holds
    the entries that do not wrap around the frame edge (i = j + l) and
    upper the ones that do (i = j + l - M).  For K = N*M the identity
    P_K^l = I_N kron lower + P_N kron upper holds entry for entry.
    """
    if not 0 <= l < M:
        raise ValueError(f"shift l={l} outside [0, {M}); decomposition needs l < M")
    lower = np.zeros((M, M))
    upper = np.zeros((M, M))
    j = np.arange(M - l)
    lower[j + l, j] = 1.0
    j = np.arange(M - l, M)
    upper[j + l - M, j] = 1.0
    return lower, upper


def phase_diag(size: int, q: int, denom: int | None = None) -> np.ndarray:
    """Diagonal Doppler phase matrix diag(exp(2j*pi*q*k/denom)), k < size.

    denom defaults to size.  Passing denom = N*size gives the fractional
    block that factors the full ramp: with K = N*M,
    phase_diag(K, q) == kron(phase_diag(N, q), phase_diag(M, q, denom=K)).
    """
    if denom is None:
        denom = size
    return np.diag(np.exp(2j * np.pi * q * np.arange(size) / denom))


def _tap_gains(spec: ChannelSpec, coeffs: np.ndarray) -> np.ndarray:
    """h(k, l) for all k, l: shape (K, L+1), h[k, l] = sum_q c[l,q] e^{2j pi q k/K}."""
    K = spec.K
    k = np.arange(K)
    gains = np.zeros((K, spec.L + 1), dtype=complex)
    for i, (l, q) in enumerate(tap_pairs(spec.L, spec.Q)):
        gains[:, l] += coeffs[i] * np.exp(2j * np.pi * q * k / K)
    return gains


def build_time_channel(spec: ChannelSpec, coeffs: np.ndarray) -> np.ndarray:
    """Dense K x K channel matrix sum_{l,q} c[l,q] D_q P^l.

    Refused for K > DENSE_LIMIT; the structured apply_channel has no such
    limit.
    """
    coeffs = _check_coeffs(spec, coeffs)
    K = spec.K
    if K > DENSE_LIMIT:
        raise ValueError(f"K={K} exceeds dense limit {DENSE_LIMIT}; use apply_channel")
    gains = _tap_gains(spec, coeffs)
    H = np.zeros((K, K), dtype=complex)
    k = np.arange(K)
    for l in range(spec.L + 1):
        H[k, (k - l) % K] += gains[:, l]
    return H


def apply_channel(
    spec: ChannelSpec,
    coeffs: np.ndarray,
    x: np.ndarray,
    noise_var: float = 0.0,
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """r = Hx + n without materializing H: per-delay roll and phase accumulate."""
    coeffs = _check_coeffs(spec, coeffs)
    x = np.asarray(x)
    if x.shape != (spec.K,):
        raise ValueError(f"expected signal of length K={spec.K}, got shape {x.shape}")
    gains = _tap_gains(spec, coeffs)
    r = np.zeros(spec.K, dtype=complex)
    for l in range(spec.L + 1):
        r += gains[:, l] * np.roll(x, l)
    if noise_var > 0.0:
        if rng is None:
            raise ValueError("noise_var > 0 requires an rng")
        r = r + complex_normal(rng, noise_var, spec.K)
    return r


def sample_taps(spec: ChannelSpec, rng: np.random.Generator) -> np.ndarray:
    """Independent CN(0, var[l,q]) tap draws in canonical flat order."""
    return complex_normal(rng, spec.tap_variance_vector(), spec.n_taps)


@dataclass(frozen=True)
class DdPath:
    """One propagation path: complex gain, integer delay and Doppler index."""

    gain: complex
    delay: int
    doppler: int


def paths_to_cebem(paths: Iterable[DdPath], spec: ChannelSpec) -> np.ndarray:
    """Accumulate on-grid paths into basis-tap coefficients.

    A path with delay tau and Doppler index q contributes
    gain * exp(-2j*pi*q*tau/K) to tap (tau, q); several paths may share a
    delay (Doppler spread).  Off-grid paths are rejected, not rounded.
    """
    coeffs = np.zeros(spec.n_taps, dtype=complex)
    for p in paths:
        if not isinstance(p.delay, (int, np.integer)) or not isinstance(p.doppler, (int, np.integer)):
            raise ValueError(f"path delays/Dopplers must be integers, got {p}")
        if not 0 <= p.delay <= spec.L:
            raise ValueError(f"path delay {p.delay} outside [0, {spec.L}]")
        if not -spec.Q // 2 <= p.doppler <= spec.Q // 2:
            raise ValueError(
                f"path Doppler {p.doppler} outside [{-spec.Q//2}, {spec.Q//2}]"
            )
        i = tap_index(p.delay, p.doppler, spec.L, spec.Q)
        coeffs[i] += p.gain * np.exp(-2j * np.pi * p.doppler * p.delay / spec.K)
    return coeffs


def build_path_channel(paths: Sequence[DdPath], spec: ChannelSpec) -> np.ndarray:
    """Dense channel matrix built directly from the path sum.

    Each path delays by tau and applies the ramp exp(2j*pi*q*(k - tau)/K);
    independent of the tap-coefficient route through paths_to_cebem.
    """
    K = spec.K
    if K > DENSE_LIMIT:
        raise ValueError(f"K={K} exceeds dense limit {DENSE_LIMIT}")
    H = np.zeros((K, K), dtype=complex)
    k = np.arange(K)
    for p in paths:
        ramp = p.gain * np.exp(2j * np.pi * p.doppler * (k - p.delay) / K)
        H[k, (k - p.delay) % K] += ramp
    return H


def _check_coeffs(spec: ChannelSpec, coeffs: np.ndarray) -> np.ndarray:
    coeffs = np.asarray(coeffs)
    if coeffs.shape != (spec.n_taps,):
        raise ValueError(
            f"expected {spec.n_taps} tap coefficients, got shape {coeffs.shape}"
        )
    return coeffs
