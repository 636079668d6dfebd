"""OTFS pilot design, channel estimation, and power allocation toolkit."""

from .core import (
    ChannelSpec,
    PowerBudget,
    RngStream,
    complex_normal,
    db_to_linear,
    linear_to_db,
    tap_index,
    tap_pairs,
    vec,
    vec_inv,
)
from .modem import dft_matrix, otfs_demodulate, otfs_modulate
from .channel import (
    DdPath,
    apply_channel,
    build_path_channel,
    build_time_channel,
    cyclic_shift_matrix,
    paths_to_cebem,
    phase_diag,
    sample_taps,
    shift_decomposition,
)
from .dd_domain import (
    DdBlockAssembler,
    build_dd_channel,
    build_phase_mask,
    dd_response,
    dd_support,
)
from .pilot import (
    Allocation,
    IsolationReport,
    ReceiverFootprint,
    make_allocation,
    pilot_overhead,
    receiver_footprints,
    validate_isolation,
)
from .estimation import (
    TapPrior,
    build_observation_matrix,
    empirical_mse,
    gram_offdiag,
    lmmse_estimate,
    mse_closed_form,
    mse_general,
    observation_matrix_from_grid,
)
from .capacity import (
    AlphaOptimum,
    CapacityEstimate,
    MismatchBoundReport,
    TapStatsReport,
    alpha_from_symbol_snrs,
    budget_from_symbol_snrs,
    capacity_lower_bound,
    effective_snr,
    estimated_tap_stats,
    estimated_tap_variance,
    mismatch_bound_report,
    optimize_alpha,
    snr_tx_from_symbol_snrs,
)
from .link import BerEstimate, ber_run, mmse_equalize, qpsk_demap, qpsk_map

__version__ = "0.1.0"
