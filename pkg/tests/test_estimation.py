"""Tests for the observation matrix, its Gram structure, and the estimator."""

import numpy as np
import pytest

from otfspilot import (
    ChannelSpec,
    RngStream,
    TapPrior,
    build_observation_matrix,
    empirical_mse,
    gram_offdiag,
    lmmse_estimate,
    make_allocation,
    mse_closed_form,
    mse_general,
    observation_matrix_from_grid,
    receiver_footprints,
    sample_taps,
)
from otfspilot.core import cell_to_index
from otfspilot.dd_domain import dd_support


def two_pilot_observation(spec, cells, values):
    """Observation matrix for a hand-built multi-pilot grid."""
    grid = np.zeros((spec.M, spec.N), dtype=complex)
    for cell, val in zip(cells, values):
        grid[cell] = val
    shifts = [(l, q) for l in range(spec.L + 1)
              for q in range(-spec.Q // 2, spec.Q // 2 + 1)]
    obs = sorted({cell_to_index(*dd_support(l, q, c, spec.M, spec.N), spec.M)
                  for c in cells for l, q in shifts})
    return observation_matrix_from_grid(grid, np.array(obs), spec)


class TestObservationMatrix:
    def test_flat_channel_single_column(self):
        spec = ChannelSpec.uniform(N=4, M=5, L=0, Q=0)
        alloc = make_allocation("island", spec, pilot_power=2.0)
        Z = build_observation_matrix(alloc)
        assert Z.shape == (1, 1)
        assert np.sum(np.abs(Z) ** 2) == pytest.approx(2.0)

    def test_island_gram_is_scaled_identity(self):
        spec = ChannelSpec.uniform(N=21, M=21, L=2, Q=2)
        alloc = make_allocation("island", spec, pilot_power=1.3, phase=0.4)
        Z = build_observation_matrix(alloc)
        assert Z.shape == (9, 9)
        off, diag = gram_offdiag(Z)
        assert off < 1e-10
        assert np.max(np.abs(diag - 1.3)) < 1e-10

    def test_fast_and_dense_paths_agree(self):
        for kind, N, M in [("island", 21, 21), ("doppler_slab", 7, 63),
                           ("delay_slab", 63, 7)]:
            spec = ChannelSpec.uniform(N=N, M=M, L=6, Q=6)
            alloc = make_allocation(kind, spec, pilot_power=1.0, phase=0.9)
            fp = receiver_footprints(alloc)
            fast = build_observation_matrix(alloc, fp, method="fast")
            dense = build_observation_matrix(alloc, fp, method="dense")
            assert np.max(np.abs(fast - dense)) < 1e-12

    def test_two_pilots_break_orthogonality(self):
        spec = ChannelSpec.uniform(N=21, M=21, L=2, Q=2)
        Z = two_pilot_observation(spec, [(10, 10), (10, 11)], [1.0, 1.0])
        off, _ = gram_offdiag(Z)
        assert off > 1e-3


class TestGramDiagnostics:
    def test_zero_matrix(self):
        off, diag = gram_offdiag(np.zeros((4, 3), dtype=complex))
        assert off == 0.0
        assert np.all(diag == 0.0)

    def test_power_scaling(self):
        spec = ChannelSpec.uniform(N=21, M=21, L=2, Q=2)
        a1 = make_allocation("island", spec, pilot_power=1.0)
        a2 = make_allocation("island", spec, pilot_power=2.0)
        _, d1 = gram_offdiag(build_observation_matrix(a1))
        _, d2 = gram_offdiag(build_observation_matrix(a2))
        assert np.allclose(d2, 2.0 * d1)


class TestLmmse:
    def test_noiseless_limit_recovers_taps(self):
        spec = ChannelSpec.uniform(N=21, M=21, L=2, Q=2)
        alloc = make_allocation("island", spec, pilot_power=1.0)
        Z = build_observation_matrix(alloc)
        c = sample_taps(spec, np.random.default_rng(0))
        prior = TapPrior.from_spec(spec, noise_var=1e-12)
        c_hat = lmmse_estimate(Z @ c, Z, prior)
        assert np.max(np.abs(c_hat - c)) < 1e-6

    def test_zero_observation_gives_zero(self):
        spec = ChannelSpec.uniform(N=21, M=21, L=2, Q=2)
        alloc = make_allocation("island", spec, pilot_power=1.0)
        Z = build_observation_matrix(alloc)
        prior = TapPrior.from_spec(spec, noise_var=0.1)
        assert np.all(lmmse_estimate(np.zeros(Z.shape[0]), Z, prior) == 0)

    def test_empirical_mse_matches_closed_form(self):
        spec = ChannelSpec.uniform(N=21, M=21, L=2, Q=2)
        budget_pp = 0.5
        alloc = make_allocation("island", spec, pilot_power=budget_pp)
        prior = TapPrior.from_spec(spec, noise_var=1.0 / (spec.K * 100.0))
        emp, stderr = empirical_mse(alloc, prior, trials=2000, stream=RngStream(1))
        closed = mse_closed_form(prior, budget_pp)
        assert emp == pytest.approx(closed, rel=0.05)
        assert abs(emp - closed) < 4 * stderr


class TestMseForms:
    def test_direct_substitution(self):
        prior = TapPrior(tap_variances=np.ones(9), noise_var=1.0)
        assert mse_closed_form(prior, pilot_power=1.0) == pytest.approx(4.5)

    def test_infinite_pilot_power_limit(self):
        prior = TapPrior(tap_variances=np.full(4, 0.25), noise_var=1.0)
        assert mse_closed_form(prior, pilot_power=1e12) < 1e-10

    def test_zero_pilot_power_gives_prior_mass(self):
        prior = TapPrior(tap_variances=np.array([0.5, 0.25]), noise_var=1.0)
        assert mse_closed_form(prior, pilot_power=0.0) == pytest.approx(0.75)

    def test_general_form_matches_on_compliant_allocation(self):
        spec = ChannelSpec.uniform(N=21, M=21, L=2, Q=2)
        alloc = make_allocation("island", spec, pilot_power=0.7, phase=0.2)
        Z = build_observation_matrix(alloc)
        prior = TapPrior.from_spec(spec, noise_var=0.01)
        assert mse_general(Z, prior) == pytest.approx(
            mse_closed_form(prior, 0.7), abs=1e-10)

    def test_general_form_on_zero_observation(self):
        prior = TapPrior(tap_variances=np.array([0.5, 0.25]), noise_var=1.0)
        assert mse_general(np.zeros((3, 2)), prior) == pytest.approx(0.75)

    def test_non_orthogonal_design_is_worse(self):
        # same total pilot power, split over two cells that interfere
        spec = ChannelSpec.uniform(N=21, M=21, L=2, Q=2)
        prior = TapPrior.from_spec(spec, noise_var=0.01)
        P_p = 1.0
        Z_bad = two_pilot_observation(spec, [(10, 10), (10, 11)],
                                      [np.sqrt(P_p / 2)] * 2)
        assert mse_general(Z_bad, prior) > mse_closed_form(prior, P_p)

    def test_monotonicity(self):
        prior = TapPrior(tap_variances=np.full(6, 0.3), noise_var=0.2)
        powers = np.linspace(0.0, 5.0, 20)
        mses = [mse_closed_form(prior, p) for p in powers]
        assert np.all(np.diff(mses) < 0)
        noisier = TapPrior(tap_variances=np.full(6, 0.3), noise_var=0.4)
        assert mse_closed_form(noisier, 1.0) > mse_closed_form(prior, 1.0)


class TestGramTheorem:
    @pytest.mark.parametrize("L,Q", [(2, 2), (8, 2), (2, 8)])
    def test_any_position_any_phase(self, L, Q):
        rng = np.random.default_rng(L * 10 + Q)
        geoms = {
            "island": (2 * Q + 1, 2 * L + 1),
            "doppler_slab": (Q + 1, 2 * L + 1),
            "delay_slab": (2 * Q + 1, L + 1),
        }
        for kind, (N, M) in geoms.items():
            spec = ChannelSpec.uniform(N=N, M=M, L=L, Q=Q)
            n_positions = {"island": 1, "doppler_slab": N, "delay_slab": M}[kind]
            for pos in range(n_positions):
                alloc = make_allocation(kind, spec, pilot_power=2.2,
                                        position=None if kind == "island" else pos,
                                        phase=float(rng.uniform(0, 2 * np.pi)))
                off, diag = gram_offdiag(build_observation_matrix(alloc))
                assert off < 1e-9 * 2.2
                assert np.max(np.abs(diag - 2.2)) < 1e-9 * 2.2
