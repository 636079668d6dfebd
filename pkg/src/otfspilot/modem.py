"""OTFS modulation: delay-Doppler grid <-> time-domain samples.

The transmit map is x = vec(S F_N^H) = (F_N^H kron I_M) vec(S) with a
unitary DFT, so modulation is an isometry and power accounting done on
the grid carries over to the time domain unchanged.  The receive map is
its inverse, Y = vec_inv((F_N kron I_M) r).
"""

from __future__ import annotations

import numpy as np

from .core import vec, vec_inv

__all__ = ["dft_matrix", "otfs_modulate", "otfs_demodulate"]


def dft_matrix(n: int) -> np.ndarray:
    """Unitary DFT matrix F[k, m] = exp(-2j*pi*k*m/n)/sqrt(n)."""
    k = np.arange(n)
    return np.exp(-2j * np.pi * np.outer(k, k) / n) / np.sqrt(n)


def otfs_modulate(grid: np.ndarray) -> np.ndarray:
    """Map an M x N delay-Doppler grid to K = M*N time samples.

    Implemented with an IFFT across the Doppler axis; equals the dense
    product (F_N^H kron I_M) vec(grid).
    """
    if grid.ndim != 2:
        raise ValueError(f"expected an M x N grid, got shape {grid.shape}")
    N = grid.shape[1]
    # grid @ F_N^H == sqrt(N) * ifft along Doppler
    return vec(np.fft.ifft(grid, axis=1) * np.sqrt(N))


def otfs_demodulate(r: np.ndarray, M: int, N: int) -> np.ndarray:
    """Map K = M*N received time samples back to an M x N grid."""
    r = np.asarray(r)
    if r.ndim != 1 or r.size != M * N:
        raise ValueError(f"expected {M*N} samples, got shape {r.shape}")
    # vec_inv(r) @ F_N == fft along Doppler / sqrt(N)
    return np.fft.fft(vec_inv(r, M, N), axis=1) / np.sqrt(N)
