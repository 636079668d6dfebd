"""Tests for the grid-domain channel form against the time-domain pipeline."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from otfspilot import (
    ChannelSpec,
    DdBlockAssembler,
    apply_channel,
    build_dd_channel,
    build_phase_mask,
    build_time_channel,
    dd_response,
    dd_support,
    dft_matrix,
    otfs_demodulate,
    otfs_modulate,
    sample_taps,
    tap_index,
    vec,
    vec_inv,
)


def pipeline_response(grid, coeffs, spec):
    """Independent oracle: modulate, run the time channel, demodulate."""
    r = apply_channel(spec, coeffs, otfs_modulate(grid))
    return otfs_demodulate(r, spec.M, spec.N)


def random_grid(spec, rng):
    return rng.standard_normal((spec.M, spec.N)) + 1j * rng.standard_normal((spec.M, spec.N))


class TestPhaseMask:
    def test_no_shift_is_all_ones(self):
        assert np.array_equal(build_phase_mask(0, 0, 4, 3), np.ones((4, 3)))

    def test_zero_delay_is_column_ramp(self):
        M, N, q = 6, 3, 2
        mask = build_phase_mask(0, q, M, N)
        ramp = np.exp(2j * np.pi * q * np.arange(M) / (M * N))
        assert np.max(np.abs(mask - ramp[:, None])) < 1e-14

    def test_wrapped_rows_carry_extra_factor(self):
        M, N, l, q = 6, 3, 2, 1
        mask = build_phase_mask(l, q, M, N)
        K = M * N
        for m in range(M):
            for n in range(N):
                expected = np.exp(2j * np.pi * q * m / K)
                if m < l:
                    expected *= np.exp(-2j * np.pi * (n - q) / N)
                assert abs(mask[m, n] - expected) < 1e-14

    @given(st.integers(1, 6), st.integers(1, 6), st.integers(-3, 3), st.integers(0, 5))
    @settings(max_examples=40, deadline=None)
    def test_unit_modulus(self, M, N, q, l):
        if l >= M:
            return
        mask = build_phase_mask(l, q, M, N)
        assert np.max(np.abs(np.abs(mask) - 1.0)) < 1e-12

    def test_rejects_delay_at_least_m(self):
        with pytest.raises(ValueError):
            build_phase_mask(4, 0, 4, 3)


class TestDdResponse:
    def test_identity_channel(self):
        spec = ChannelSpec.uniform(N=3, M=6, L=0, Q=0)
        grid = random_grid(spec, np.random.default_rng(0))
        assert np.allclose(dd_response(grid, np.array([1.0 + 0j]), spec), grid)

    def test_single_tap_moves_impulse(self):
        spec = ChannelSpec.uniform(N=5, M=6, L=2, Q=4)
        coeffs = np.zeros(spec.n_taps, dtype=complex)
        l, q = 2, -1
        coeffs[tap_index(l, q, spec.L, spec.Q)] = 1.0
        grid = np.zeros((6, 5), dtype=complex)
        m0, n0 = 5, 0
        grid[m0, n0] = 1.0
        out = dd_response(grid, coeffs, spec)
        target = ((m0 + l) % 6, (n0 + q) % 5)
        assert abs(abs(out[target]) - 1.0) < 1e-12
        out[target] = 0.0
        assert np.max(np.abs(out)) < 1e-14

    @pytest.mark.parametrize("N,M", [(3, 6), (21, 21), (7, 63), (63, 7)])
    def test_matches_time_domain_pipeline(self, N, M):
        L = min(6, M - 1)
        Q = 6 if N > 6 else 2
        spec = ChannelSpec.uniform(N=N, M=M, L=L, Q=Q)
        rng = np.random.default_rng(1)
        grid = random_grid(spec, rng)
        coeffs = sample_taps(spec, rng)
        fast = dd_response(grid, coeffs, spec)
        slow = pipeline_response(grid, coeffs, spec)
        rel = np.max(np.abs(fast - slow)) / np.max(np.abs(slow))
        assert rel < 1e-10

    def test_linear_in_grid_and_taps(self):
        spec = ChannelSpec.uniform(N=3, M=6, L=2, Q=2)
        rng = np.random.default_rng(2)
        g1, g2 = random_grid(spec, rng), random_grid(spec, rng)
        c1, c2 = sample_taps(spec, rng), sample_taps(spec, rng)
        lhs = dd_response(2.0 * g1 - 1j * g2, c1, spec)
        rhs = 2.0 * dd_response(g1, c1, spec) - 1j * dd_response(g2, c1, spec)
        assert np.max(np.abs(lhs - rhs)) < 1e-12
        lhs = dd_response(g1, 0.5 * c1 + 2j * c2, spec)
        rhs = 0.5 * dd_response(g1, c1, spec) + 2j * dd_response(g1, c2, spec)
        assert np.max(np.abs(lhs - rhs)) < 1e-12


class TestBuildDdChannel:
    def test_identity_channel_is_identity(self):
        spec = ChannelSpec.uniform(N=3, M=6, L=0, Q=0)
        H = build_dd_channel(np.array([1.0 + 0j]), spec)
        assert np.allclose(H, np.eye(18))

    def test_columns_match_dd_response(self):
        spec = ChannelSpec.uniform(N=3, M=6, L=2, Q=2)
        coeffs = sample_taps(spec, np.random.default_rng(3))
        H = build_dd_channel(coeffs, spec)
        for k in (0, 5, 11, 17):
            e = np.zeros(spec.K)
            e[k] = 1.0
            col = vec(dd_response(vec_inv(e, spec.M, spec.N), coeffs, spec))
            assert np.max(np.abs(H[:, k] - col)) < 1e-12

    def test_similarity_transform_of_time_channel(self):
        spec = ChannelSpec.uniform(N=3, M=6, L=2, Q=2)
        coeffs = sample_taps(spec, np.random.default_rng(4))
        H_time = build_time_channel(spec, coeffs)
        F = dft_matrix(spec.N)
        expected = np.kron(F, np.eye(spec.M)) @ H_time @ np.kron(F.conj().T, np.eye(spec.M))
        H_dd = build_dd_channel(coeffs, spec)
        assert np.max(np.abs(H_dd - expected)) < 1e-10
        # unitary similarity preserves the Frobenius norm
        assert np.linalg.norm(H_dd) == pytest.approx(np.linalg.norm(H_time), rel=1e-10)


class TestDdSupport:
    def test_identity_shift(self):
        assert dd_support(0, 0, (3, 2), 6, 5) == (3, 2)

    def test_wraps_delay_axis(self):
        assert dd_support(1, 0, (5, 0), 6, 5) == (0, 0)

    def test_footprint_cardinality(self):
        M, N, L, Q = 8, 7, 2, 4
        cells = {dd_support(l, q, (3, 3), M, N)
                 for l in range(L + 1) for q in range(-Q // 2, Q // 2 + 1)}
        assert len(cells) == (L + 1) * (Q + 1)


class TestDdBlockAssembler:
    def test_matches_dense_submatrix(self):
        spec = ChannelSpec.uniform(N=5, M=6, L=2, Q=2)
        rng = np.random.default_rng(5)
        coeffs = sample_taps(spec, rng)
        rows = np.array([0, 3, 7, 12, 20, 29])
        cols = np.array([1, 2, 14, 28])
        full = build_dd_channel(coeffs, spec)
        block = DdBlockAssembler(spec, rows, cols).assemble(coeffs, dense=True)
        assert np.max(np.abs(block - full[np.ix_(rows, cols)])) < 1e-12

    def test_sparse_and_dense_agree(self):
        spec = ChannelSpec.uniform(N=5, M=6, L=2, Q=2)
        coeffs = sample_taps(spec, np.random.default_rng(6))
        asm = DdBlockAssembler(spec, np.arange(spec.K), np.arange(spec.K))
        sparse = asm.assemble(coeffs).toarray()
        dense = asm.assemble(coeffs, dense=True)
        assert np.max(np.abs(sparse - dense)) < 1e-14

    def test_frobenius_sq(self):
        spec = ChannelSpec.uniform(N=5, M=6, L=2, Q=2)
        coeffs = sample_taps(spec, np.random.default_rng(7))
        rows = np.arange(0, spec.K, 2)
        cols = np.arange(1, spec.K, 3)
        asm = DdBlockAssembler(spec, rows, cols)
        dense = asm.assemble(coeffs, dense=True)
        assert asm.frobenius_sq(coeffs) == pytest.approx(
            np.sum(np.abs(dense) ** 2), rel=1e-12)
