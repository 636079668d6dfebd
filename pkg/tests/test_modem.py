"""Tests for the grid <-> time-domain transform."""

import numpy as np
import pytest

from otfspilot import dft_matrix, otfs_demodulate, otfs_modulate, vec


def random_grid(M, N, seed=0):
    rng = np.random.default_rng(seed)
    return rng.standard_normal((M, N)) + 1j * rng.standard_normal((M, N))


class TestDftMatrix:
    def test_unitary(self):
        for n in (1, 2, 5, 8):
            F = dft_matrix(n)
            assert np.max(np.abs(F @ F.conj().T - np.eye(n))) < 1e-12


class TestModulate:
    def test_single_doppler_bin_is_vec(self):
        grid = random_grid(5, 1)
        assert np.allclose(otfs_modulate(grid), vec(grid), atol=1e-14)

    def test_two_point_transform(self):
        # one delay bin, two Doppler bins: a 2-point inverse DFT
        a, b = 1.0 + 2.0j, -0.5 + 1.0j
        x = otfs_modulate(np.array([[a, b]]))
        assert np.allclose(x, [(a + b) / np.sqrt(2), (a - b) / np.sqrt(2)])

    def test_matches_kronecker_product(self):
        M, N = 6, 3
        grid = random_grid(M, N, seed=1)
        F = dft_matrix(N)
        dense = np.kron(F.conj().T, np.eye(M)) @ vec(grid)
        assert np.max(np.abs(otfs_modulate(grid) - dense)) < 1e-10

    def test_energy_preserving(self):
        for seed in range(5):
            grid = random_grid(7, 4, seed)
            x = otfs_modulate(grid)
            assert np.sum(np.abs(x) ** 2) == pytest.approx(
                np.sum(np.abs(grid) ** 2), rel=1e-12)

    def test_block_repetition_for_single_doppler_column(self):
        # energy in one Doppler column repeats as N phase-rotated copies in time
        M, N, n0 = 6, 4, 3
        grid = np.zeros((M, N), dtype=complex)
        grid[:, n0] = random_grid(M, 1, seed=2)[:, 0]
        x = otfs_modulate(grid).reshape(N, M)  # block k = samples [kM, (k+1)M)
        for k in range(N):
            expected = x[0] * np.exp(2j * np.pi * k * n0 / N)
            assert np.max(np.abs(x[k] - expected)) < 1e-12


class TestDemodulate:
    def test_round_trip(self):
        grid = random_grid(6, 3, seed=3)
        out = otfs_demodulate(otfs_modulate(grid), 6, 3)
        assert np.max(np.abs(out - grid)) < 1e-12

    def test_zero_in_zero_out(self):
        assert np.all(otfs_demodulate(np.zeros(18), 6, 3) == 0)

    def test_identity_channel_recovers_grid(self):
        grid = random_grid(6, 3, seed=4)
        r = otfs_modulate(grid)  # identity channel
        assert np.max(np.abs(otfs_demodulate(r, 6, 3) - grid)) < 1e-12

    def test_dimension_error(self):
        with pytest.raises(ValueError):
            otfs_demodulate(np.zeros(17), 6, 3)
