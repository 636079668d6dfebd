"""End-to-end link simulation: QPSK data through the estimated channel.

One trial runs the whole chain: map bits onto the data cells, modulate,
pass through a fresh channel draw plus noise, demodulate, estimate the
taps from the pilot block, MMSE-equalize the data block with the
estimated channel, and count bit errors.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .core import PowerBudget, RngStream, complex_normal, run_trials
from .dd_domain import DdBlockAssembler
from .estimation import TapPrior, build_observation_matrix
from .modem import otfs_demodulate, otfs_modulate
from .channel import apply_channel
from .pilot import Allocation, receiver_footprints

__all__ = [
    "qpsk_map",
    "qpsk_demap",
    "mmse_equalize",
    "wilson_interval",
    "BerEstimate",
    "ber_run",
]

# Gray-mapped QPSK: bit pair (b0, b1) -> ((1-2*b0) + 1j*(1-2*b1))/sqrt(2),
# so adjacent constellation points differ in exactly one bit.


def qpsk_map(bits: np.ndarray, symbol_power: float) -> np.ndarray:
    """Map an even-length bit sequence to QPSK symbols of the given power."""
    bits = np.asarray(bits)
    if bits.size % 2 != 0:
        raise ValueError("bit count must be even for QPSK")
    b = bits.reshape(-1, 2)
    return np.sqrt(symbol_power / 2.0) * ((1 - 2 * b[:, 0]) + 1j * (1 - 2 * b[:, 1]))


def qpsk_demap(symbols: np.ndarray) -> np.ndarray:
    """Hard-decision bits from (possibly noisy) QPSK symbols."""
    symbols = np.asarray(symbols)
    bits = np.empty((symbols.size, 2), dtype=int)
    bits[:, 0] = symbols.real < 0
    bits[:, 1] = symbols.imag < 0
    return bits.reshape(-1)


def mmse_equalize(
    y_c: np.ndarray,
    H_block: np.ndarray,
    noise_var: float,
    symbol_power: float,
) -> np.ndarray:
    """Regularized linear estimate (H^H H + (noise/power) I)^-1 H^H y_c."""
    if hasattr(H_block, "toarray"):
        H_block = H_block.toarray()
    k = H_block.shape[1]
    A = H_block.conj().T @ H_block + (noise_var / symbol_power) * np.eye(k)
    return scipy.linalg.solve(A, H_block.conj().T @ y_c, assume_a="pos")


def wilson_interval(errors: int, n: int, z: float = 1.96) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if n == 0:
        return 0.0, 1.0
    p = errors / n
    denom = 1.0 + z**2 / n
    centre = (p + z**2 / (2 * n)) / denom
    half = z * np.sqrt(p * (1 - p) / n + z**2 / (4 * n**2)) / denom
    return max(0.0, centre - half), min(1.0, centre + half)


@dataclass(frozen=True)
class BerEstimate:
    """Bit error rate with a Wilson confidence interval."""

    ber: float
    ci_low: float
    ci_high: float
    bits: int
    errors: int


def ber_run(
    alloc: Allocation,
    budget: PowerBudget,
    trials: int,
    stream: RngStream,
    threads: int = 1,
    perfect_csi: bool = False,
) -> BerEstimate:
    """Frame-level Monte Carlo BER of uncoded QPSK.

    Each trial carries 2*K_c bits.  perfect_csi equalizes with the true
    taps instead of the estimate (test baseline only).
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    spec = alloc.spec
    alloc = alloc.with_pilot_power(budget.pilot_power)
    fp = receiver_footprints(alloc)
    prior = TapPrior.from_spec(spec, budget.noise_var)
    symbol_power = budget.comm_power / alloc.K_c
    Z = build_observation_matrix(alloc, fp)
    solve = scipy.linalg.cho_factor(
        budget.noise_var * np.diag(1.0 / prior.tap_variances) + Z.conj().T @ Z
    )
    assembler = DdBlockAssembler(spec, fp.comm_obs, alloc.phi_c)
    bits_per_trial = 2 * alloc.K_c

    def one_trial(t: int) -> float:
        rng = stream.substream(t).generator()
        bits = rng.integers(0, 2, bits_per_trial)
        data = qpsk_map(bits, symbol_power)
        x = otfs_modulate(alloc.place_data(data))
        taps = complex_normal(rng, prior.tap_variances, spec.n_taps)
        r = apply_channel(spec, taps, x, noise_var=budget.noise_var, rng=rng)
        Y = otfs_demodulate(r, spec.M, spec.N)
        y = Y.reshape(-1, order="F")
        if perfect_csi:
            taps_hat = taps
        else:
            taps_hat = scipy.linalg.cho_solve(solve, Z.conj().T @ y[fp.pilot_obs])
        H_block = assembler.assemble(taps_hat, dense=True)
        s_hat = mmse_equalize(y[fp.comm_obs], H_block, budget.noise_var, symbol_power)
        return int(np.sum(qpsk_demap(s_hat) != bits))

    errs = run_trials(one_trial, trials, threads)
    errors = int(errs.sum())
    total = trials * bits_per_trial
    lo, hi = wilson_interval(errors, total)
    return BerEstimate(ber=errors / total, ci_low=lo, ci_high=hi,
                       bits=total, errors=errors)
