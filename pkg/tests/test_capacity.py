"""Tests for the effective SNR, power-split optimizer, and capacity bound."""

import numpy as np
import pytest

from otfspilot import (
    ChannelSpec,
    PowerBudget,
    RngStream,
    alpha_from_symbol_snrs,
    budget_from_symbol_snrs,
    capacity_lower_bound,
    effective_snr,
    estimated_tap_stats,
    estimated_tap_variance,
    make_allocation,
    mismatch_bound_report,
    optimize_alpha,
    receiver_footprints,
    snr_tx_from_symbol_snrs,
)
from otfspilot.core import linear_to_db


def channel1_island():
    spec = ChannelSpec.uniform(N=21, M=21, L=6, Q=6)
    alloc = make_allocation("island", spec, pilot_power=1.0)
    fp = receiver_footprints(alloc)
    budget = PowerBudget.from_snr_tx(20.0, spec.K, alpha=0.5)
    return spec, alloc, fp, budget


class TestEstimatedTapVariance:
    def test_direct_substitution(self):
        assert estimated_tap_variance(1.0, 1.0, 1.0) == pytest.approx(0.5)

    def test_perfect_estimation_limit(self):
        assert estimated_tap_variance(0.3, 1.0, 1e12) == pytest.approx(0.3, rel=1e-6)

    def test_no_pilot_power(self):
        assert estimated_tap_variance(0.3, 1.0, 0.0) == 0.0


class TestEffectiveSnr:
    def test_vanishes_at_both_extremes(self):
        spec, alloc, fp, budget = channel1_island()
        assert effective_snr(0.0, budget, spec, alloc.K_c, fp.R_c) == 0.0
        assert effective_snr(1.0, budget, spec, alloc.K_c, fp.R_c) == 0.0

    def test_positive_inside(self):
        spec, alloc, fp, budget = channel1_island()
        for a in (0.1, 0.5, 0.9):
            assert effective_snr(a, budget, spec, alloc.K_c, fp.R_c) > 0.0


class TestOptimizeAlpha:
    def test_reference_channel_optimum(self):
        spec, alloc, fp, budget = channel1_island()
        opt = optimize_alpha(budget, spec, alloc.K_c, fp.R_c)
        assert opt.alpha_star == pytest.approx(0.7015, abs=0.005)
        assert opt.grid_unimodal
        assert abs(opt.grid_alpha_star - opt.alpha_star) < 0.02

    def test_slab_optimum_matches_reference(self):
        spec = ChannelSpec.uniform(N=7, M=63, L=6, Q=6)
        alloc = make_allocation("doppler_slab", spec, pilot_power=1.0)
        fp = receiver_footprints(alloc)
        budget = PowerBudget.from_snr_tx(20.0, spec.K, alpha=0.5)
        opt = optimize_alpha(budget, spec, alloc.K_c, fp.R_c)
        assert opt.alpha_star == pytest.approx(0.7270, abs=0.005)

    def test_scale_invariance(self):
        # rho depends only on power ratios: scaling P and noise together
        # must leave the optimum in place
        spec, alloc, fp, budget = channel1_island()
        base = optimize_alpha(budget, spec, alloc.K_c, fp.R_c).alpha_star
        for kappa in (0.1, 10.0):
            scaled = PowerBudget(total=kappa * budget.total, alpha=0.5,
                                 noise_var=kappa * budget.noise_var)
            moved = optimize_alpha(scaled, spec, alloc.K_c, fp.R_c).alpha_star
            assert abs(moved - base) < 1e-3


class TestSnrConversions:
    def test_frame_snr_from_symbol_snrs(self):
        snr = snr_tx_from_symbol_snrs(1e5, 100.0, K=2048, k_comm=1983)
        assert snr == pytest.approx(145.654, abs=0.01)
        assert linear_to_db(snr) == pytest.approx(21.63, abs=0.005)

    def test_zero_data_share(self):
        assert snr_tx_from_symbol_snrs(1e4, 0.0, K=100, k_comm=90) == pytest.approx(100.0)

    def test_alpha_from_symbol_snrs(self):
        assert alpha_from_symbol_snrs(1e5, 100.0, k_comm=1983) == pytest.approx(
            0.6648, abs=5e-5)
        assert alpha_from_symbol_snrs(1e6, 100.0, k_comm=1983) == pytest.approx(
            0.1655, abs=5e-5)

    def test_zero_pilot_gives_full_data_share(self):
        assert alpha_from_symbol_snrs(0.0, 10.0, k_comm=50) == 1.0

    def test_budget_from_symbol_snrs(self):
        budget = budget_from_symbol_snrs(1e5, 100.0, k_comm=1983)
        assert budget.pilot_power == pytest.approx(1e5)
        assert budget.comm_power / 1983 == pytest.approx(100.0)


class TestCapacityLowerBound:
    def test_zero_rho_gives_exact_zero(self):
        spec, alloc, fp, budget = channel1_island()
        est = capacity_lower_bound(alloc, budget.with_alpha(0.0), trials=3,
                                   stream=RngStream(0))
        assert est.mean == 0.0 and est.stderr == 0.0 and est.rho == 0.0

    def test_deterministic_given_stream(self):
        spec, alloc, fp, budget = channel1_island()
        a = capacity_lower_bound(alloc, budget.with_alpha(0.7), 4, RngStream(3))
        b = capacity_lower_bound(alloc, budget.with_alpha(0.7), 4, RngStream(3))
        assert a.mean == b.mean and a.stderr == b.stderr

    def test_threaded_matches_serial(self):
        spec, alloc, fp, budget = channel1_island()
        serial = capacity_lower_bound(alloc, budget.with_alpha(0.7), 6,
                                      RngStream(4), threads=1)
        threaded = capacity_lower_bound(alloc, budget.with_alpha(0.7), 6,
                                        RngStream(4), threads=3)
        assert serial.mean == threaded.mean

    def test_monotone_in_rho_with_matched_draws(self):
        # larger rho at identical channel and noise draws is never worse
        spec, alloc, fp, budget = channel1_island()
        lo = capacity_lower_bound(alloc, budget.with_alpha(0.3), 4, RngStream(5),
                                  use_true_taps=True)
        hi_budget = PowerBudget(total=4.0 * budget.total, alpha=0.3,
                                noise_var=budget.noise_var)
        hi = capacity_lower_bound(alloc, hi_budget, 4, RngStream(5),
                                  use_true_taps=True)
        assert hi.rho > lo.rho
        assert hi.mean >= lo.mean

    def test_true_taps_upper_bound_estimated(self):
        # at low SNR the estimation penalty is large, so the ordering of the
        # matched-draw means is decisive
        spec = ChannelSpec.uniform(N=21, M=21, L=6, Q=6)
        alloc = make_allocation("island", spec, pilot_power=1.0)
        budget = PowerBudget.from_snr_tx(0.0, spec.K, alpha=0.7)
        est = capacity_lower_bound(alloc, budget, 12, RngStream(6))
        true = capacity_lower_bound(alloc, budget, 12, RngStream(6),
                                    use_true_taps=True)
        assert true.mean >= est.mean

    def test_dense_and_sparse_logdet_agree(self):
        from otfspilot.capacity import _logdet_gram
        from otfspilot.dd_domain import DdBlockAssembler
        from otfspilot.channel import sample_taps

        spec, alloc, fp, _ = channel1_island()
        asm = DdBlockAssembler(spec, fp.comm_obs, alloc.phi_c)
        taps = sample_taps(spec, np.random.default_rng(0))
        rho = 50.0
        dense = _logdet_gram(asm.assemble(taps, dense=True), rho)
        sparse = _logdet_gram(asm.assemble(taps, dense=False), rho)
        assert dense == pytest.approx(sparse, rel=1e-9)


class TestTapStatistics:
    def test_estimated_tap_covariance_is_diagonal(self):
        spec = ChannelSpec.uniform(N=21, M=21, L=2, Q=2)
        alloc = make_allocation("island", spec, pilot_power=1.0)
        budget = PowerBudget.from_snr_tx(20.0, spec.K, alpha=0.5)
        report = estimated_tap_stats(alloc, budget, trials=2000, stream=RngStream(7))
        assert report.max_rel_diag_error < 0.05
        # off-diagonals vanish in expectation; allow Monte Carlo noise
        assert report.max_offdiag < 5 * np.max(report.predicted_tap_variances) \
            / np.sqrt(2000) * 3
        assert report.trace_bound_holds

    def test_high_pilot_power_recovers_prior(self):
        spec = ChannelSpec.uniform(N=21, M=21, L=2, Q=2)
        alloc = make_allocation("island", spec, pilot_power=1.0)
        budget = PowerBudget(total=1e8, alpha=0.5, noise_var=1.0)
        report = estimated_tap_stats(alloc, budget, trials=200, stream=RngStream(8))
        assert np.allclose(report.predicted_tap_variances,
                           spec.tap_variance_vector(), rtol=1e-6)


class TestMismatchBound:
    def test_bound_holds_on_reference_island(self):
        spec = ChannelSpec.uniform(N=21, M=21, L=6, Q=6)
        alloc = make_allocation("island", spec, pilot_power=1.0)
        budget = PowerBudget.from_snr_tx(10.0, spec.K, alpha=0.5)
        report = mismatch_bound_report(alloc, budget, trials=500, stream=RngStream(9))
        assert report.tap_blocks_are_01_diagonal
        assert report.max_eigenvalue <= 1.1 * report.trace_mse_bound
        assert report.passed

    def test_flat_channel_scalar_case(self):
        spec = ChannelSpec.uniform(N=4, M=5, L=0, Q=0)
        alloc = make_allocation("island", spec, pilot_power=1.0)
        budget = PowerBudget.from_snr_tx(10.0, spec.K, alpha=0.5)
        report = mismatch_bound_report(alloc, budget, trials=500, stream=RngStream(10))
        assert report.passed
