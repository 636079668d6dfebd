"""Closed-form delay-Doppler input-output relation of the modulated channel.

On the grid the channel is a sum over taps of a circular row shift by l,
a circular column shift by q, and a fixed unit-modulus phase mask:

    Y = sum_{l,q} c[l,q] * mask(l,q) * roll(S, (l, q)) + noise

which equals demodulate(H @ modulate(S)) exactly.  Because each tap moves
a cell to exactly one cell, the grid-domain channel matrix is extremely
sparse; DdBlockAssembler exploits that to build submatrices cheaply.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .core import ChannelSpec, tap_pairs
from .channel import DENSE_LIMIT

__all__ = [
    "build_phase_mask",
    "dd_response",
    "build_dd_channel",
    "dd_support",
    "DdBlockAssembler",
]


def build_phase_mask(l: int, q: int, M: int, N: int) -> np.ndarray:
    """Unit-modulus M x N mask applied by tap (l, q) after the grid shift.

    Entry (m, n) is exp(2j*pi*q*m/K); rows that wrapped around the delay
    axis (m < l) pick up the extra factor exp(-2j*pi*(n - q)/N).
    """
    if not 0 <= l < M:
        raise ValueError(f"delay shift l={l} outside [0, {M})")
    K = M * N
    m = np.arange(M)[:, None]
    n = np.arange(N)[None, :]
    mask = np.exp(2j * np.pi * q * m / K) * np.ones((1, N))
    return np.where(m < l, mask * np.exp(-2j * np.pi * (n - q) / N), mask)


def dd_response(grid: np.ndarray, coeffs: np.ndarray, spec: ChannelSpec) -> np.ndarray:
    """Noiseless grid-domain channel output for transmit grid S.

    Equals otfs_demodulate(apply_channel(otfs_modulate(S))) without going
    through the time domain.
    """
    M, N = spec.M, spec.N
    if grid.shape != (M, N):
        raise ValueError(f"expected grid of shape {(M, N)}, got {grid.shape}")
    out = np.zeros((M, N), dtype=complex)
    for i, (l, q) in enumerate(tap_pairs(spec.L, spec.Q)):
        shifted = np.roll(np.roll(grid, l, axis=0), q, axis=1)
        out += coeffs[i] * build_phase_mask(l, q, M, N) * shifted
    return out


def build_dd_channel(coeffs: np.ndarray, spec: ChannelSpec) -> np.ndarray:
    """Dense K x K grid-domain channel matrix (K <= DENSE_LIMIT).

    Column k is vec(dd_response(vec_inv(e_k))); built by scattering each
    tap's mask onto the shifted diagonal.
    """
    K = spec.K
    if K > DENSE_LIMIT:
        raise ValueError(f"K={K} exceeds dense limit {DENSE_LIMIT}")
    cols = np.arange(K)
    cells_m, cells_n = cols % spec.M, cols // spec.M
    H = np.zeros((K, K), dtype=complex)
    for i, (l, q) in enumerate(tap_pairs(spec.L, spec.Q)):
        mask = build_phase_mask(l, q, spec.M, spec.N)
        tm, tn = (cells_m + l) % spec.M, (cells_n + q) % spec.N
        H[tm + tn * spec.M, cols] += coeffs[i] * mask[tm, tn]
    return H


def dd_support(l: int, q: int, cell: tuple[int, int], M: int, N: int) -> tuple[int, int]:
    """Grid cell that receives energy from `cell` through tap (l, q)."""
    m, n = cell
    if not (0 <= m < M and 0 <= n < N):
        raise ValueError(f"cell {cell} outside the {M} x {N} grid")
    return (m + l) % M, (n + q) % N


class DdBlockAssembler:
    """Fast builder for submatrices of the grid-domain channel.

    Precomputes, once per (row set, column set), where every tap sends
    every source cell and with which mask phase; assemble() then only
    scales by the current tap coefficients.  Rows/cols are given as vec
    indices and define H_block = H_dd[rows][:, cols].
    """

    def __init__(self, spec: ChannelSpec, rows: Sequence[int], cols: Sequence[int]):
        self.spec = spec
        self.rows = np.asarray(rows, dtype=np.intp)
        self.cols = np.asarray(cols, dtype=np.intp)
        self.shape = (len(self.rows), len(self.cols))
        row_pos = -np.ones(spec.K, dtype=np.intp)
        row_pos[self.rows] = np.arange(len(self.rows))

        src_m, src_n = self.cols % spec.M, self.cols // spec.M
        ent_rows, ent_cols, ent_taps, ent_phase = [], [], [], []
        for i, (l, q) in enumerate(tap_pairs(spec.L, spec.Q)):
            mask = build_phase_mask(l, q, spec.M, spec.N)
            tm, tn = (src_m + l) % spec.M, (src_n + q) % spec.N
            hit = row_pos[tm + tn * spec.M]
            keep = hit >= 0
            ent_rows.append(hit[keep])
            ent_cols.append(np.nonzero(keep)[0])
            ent_taps.append(np.full(keep.sum(), i, dtype=np.intp))
            ent_phase.append(mask[tm[keep], tn[keep]])
        self._rows = np.concatenate(ent_rows)
        self._cols = np.concatenate(ent_cols)
        self._taps = np.concatenate(ent_taps)
        self._phase = np.concatenate(ent_phase)

    def assemble(self, coeffs: np.ndarray, dense: bool = False):
        """H_dd[rows][:, cols] for the given tap coefficients."""
        data = coeffs[self._taps] * self._phase
        mat = sp.coo_matrix((data, (self._rows, self._cols)), shape=self.shape)
        return mat.toarray() if dense else mat.tocsc()

    def frobenius_sq(self, coeffs: np.ndarray) -> float:
        """||H_block||_F^2; duplicate-entry coalescing happens in tocsc()."""
        mat = self.assemble(coeffs)
        return float(np.sum(np.abs(mat.data) ** 2))
