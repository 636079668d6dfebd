"""Capacity lower bound under estimated channel state and its power split.

Splitting total power P into a data share alpha*P and a pilot share
(1-alpha)*P trades estimation quality against data SNR.  The bound

    C_lb = (1/K) E[ log2 det(I + rho * Hn Hn^H) ]

uses the normalized estimated data-block channel Hn and an effective SNR
rho(alpha) that folds in the residual estimation error; rho vanishes at
both alpha extremes, and its interior maximizer alpha* is the designed
operating point.  rho depends on the geometry only through the data cell
count K_c and the data footprint size R_c.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .core import ChannelSpec, PowerBudget, RngStream, complex_normal, run_trials
from .dd_domain import DdBlockAssembler
from .estimation import TapPrior, build_observation_matrix, mse_closed_form
from .pilot import Allocation, receiver_footprints

__all__ = [
    "estimated_tap_variance",
    "effective_snr",
    "AlphaOptimum",
    "optimize_alpha",
    "snr_tx_from_symbol_snrs",
    "alpha_from_symbol_snrs",
    "budget_from_symbol_snrs",
    "CapacityEstimate",
    "capacity_lower_bound",
    "MismatchBoundReport",
    "mismatch_bound_report",
    "TapStatsReport",
    "estimated_tap_stats",
]

LN2 = float(np.log(2.0))

# Data-block Gram matrices up to this size use dense Cholesky; larger ones
# go through the sparse LU log-determinant.
_DENSE_LOGDET_LIMIT = 700


def estimated_tap_variance(tap_var, noise_var: float, pilot_power: float):
    """Variance of the estimated tap: P_p*v^2 / (noise + v*P_p).

    Grows from 0 (no pilot power) to the prior variance v (perfect
    estimation).
    """
    v = np.asarray(tap_var)
    return pilot_power * v**2 / (noise_var + v * pilot_power)


def effective_snr(
    alpha: float,
    budget: PowerBudget,
    spec: ChannelSpec,
    k_comm: int,
    r_comm: int,
) -> float:
    """Effective data-block SNR rho(alpha).

    Uses budget.total and budget.noise_var; alpha is the free argument
    (budget.alpha is ignored so the optimizer can sweep it).
    """
    if k_comm <= 0:
        raise ValueError("allocation leaves no data cells (K_c = 0)")
    P_c = alpha * budget.total
    P_p = (1.0 - alpha) * budget.total
    v = spec.tap_variance_vector()
    s2 = budget.noise_var
    mse = np.sum(v * s2 / (s2 + v * P_p))
    sum_est = np.sum(estimated_tap_variance(v, s2, P_p))
    return float((P_c * r_comm / k_comm) / ((P_c / k_comm) * mse + s2) * sum_est)


@dataclass(frozen=True)
class AlphaOptimum:
    """Result of the power-split search, with unimodality diagnostics."""

    alpha_star: float
    rho_star: float
    grid_alpha_star: float
    grid_unimodal: bool


def optimize_alpha(
    budget: PowerBudget,
    spec: ChannelSpec,
    k_comm: int,
    r_comm: int,
    tol: float = 1e-5,
    grid_points: int = 101,
) -> AlphaOptimum:
    """Deterministic golden-section maximization of rho over (0, 1).

    A coarse grid pre-scan guards against (and reports, never hides) a
    non-unimodal objective; rho is zero at both endpoints, so the
    maximizer is interior.
    """
    def f(a: float) -> float:
        return effective_snr(a, budget, spec, k_comm, r_comm)

    grid = np.linspace(0.0, 1.0, grid_points)
    vals = np.array([f(a) for a in grid])
    peaks = int(np.sum((vals[1:-1] > vals[:-2]) & (vals[1:-1] >= vals[2:])))
    grid_best = float(grid[np.argmax(vals)])

    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = 1e-4, 1.0 - 1e-4
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while abs(b - a) > tol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    alpha_star = 0.5 * (a + b)
    return AlphaOptimum(
        alpha_star=float(alpha_star),
        rho_star=f(alpha_star),
        grid_alpha_star=grid_best,
        grid_unimodal=bool(peaks == 1),
    )


def snr_tx_from_symbol_snrs(snr_p: float, snr_c: float, K: int, k_comm: int) -> float:
    """Frame SNR from per-symbol pilot/data SNRs (all linear scale)."""
    if snr_p < 0 or snr_c < 0:
        raise ValueError("symbol SNRs must be non-negative")
    return snr_p / K + (k_comm / K) * snr_c


def alpha_from_symbol_snrs(snr_p: float, snr_c: float, k_comm: int) -> float:
    """Power split implied by per-symbol pilot/data SNRs."""
    denom = k_comm * snr_c + snr_p
    if denom <= 0:
        raise ValueError("at least one symbol SNR must be positive")
    return k_comm * snr_c / denom


def budget_from_symbol_snrs(
    snr_p: float,
    snr_c: float,
    k_comm: int,
    noise_var: float = 1.0,
) -> PowerBudget:
    """Budget with P_p = snr_p*noise and per-symbol data power snr_c*noise."""
    pilot_power = snr_p * noise_var
    comm_power = k_comm * snr_c * noise_var
    total = pilot_power + comm_power
    return PowerBudget(total=total, alpha=comm_power / total, noise_var=noise_var)


@dataclass(frozen=True)
class CapacityEstimate:
    """Monte Carlo capacity lower bound in bits/s/Hz."""

    mean: float
    stderr: float
    trials: int
    alpha: float
    rho: float


def _logdet_gram(H_block, rho: float) -> float:
    """ln det(I + rho * H^H H); H may be dense or scipy sparse."""
    k = H_block.shape[1]
    if sp.issparse(H_block):
        gram = (H_block.conj().T @ H_block).tocsc()
        A = (sp.identity(k, format="csc", dtype=complex) + rho * gram).tocsc()
        lu = spla.splu(A)
        # Hermitian positive definite, so det > 0 and signs are irrelevant.
        return float(np.sum(np.log(np.abs(lu.U.diagonal()))))
    gram = H_block.conj().T @ H_block
    A = np.eye(k) + rho * gram
    chol = np.linalg.cholesky(A)
    return float(2.0 * np.sum(np.log(np.real(np.diag(chol)))))


def capacity_lower_bound(
    alloc: Allocation,
    budget: PowerBudget,
    trials: int,
    stream: RngStream,
    threads: int = 1,
    use_true_taps: bool = False,
) -> CapacityEstimate:
    """Monte Carlo evaluation of the capacity lower bound at budget.alpha.

    Per trial: draw taps, observe the pilot block, estimate the taps,
    build the estimated data-block channel, normalize it by the total
    estimated-tap energy, and accumulate (1/K) log2 det(I + rho Hn Hn^H).
    The allocation's pilot is rescaled to the budget's pilot power.

    use_true_taps skips estimation and plugs in the drawn taps; this is
    a test baseline that upper-bounds the estimated-channel value on
    matched draws.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    spec = alloc.spec
    fp = receiver_footprints(alloc)
    rho = effective_snr(budget.alpha, budget, spec, alloc.K_c, fp.R_c)
    if rho == 0.0:
        return CapacityEstimate(mean=0.0, stderr=0.0, trials=trials,
                                alpha=budget.alpha, rho=rho)

    alloc = alloc.with_pilot_power(budget.pilot_power)
    prior = TapPrior.from_spec(spec, budget.noise_var)
    Z = build_observation_matrix(alloc, fp)
    solve = scipy.linalg.cho_factor(
        budget.noise_var * np.diag(1.0 / prior.tap_variances) + Z.conj().T @ Z
    )
    sum_est = float(np.sum(estimated_tap_variance(
        prior.tap_variances, budget.noise_var, budget.pilot_power)))
    norm = np.sqrt(fp.R_c * sum_est)
    assembler = DdBlockAssembler(spec, fp.comm_obs, alloc.phi_c)
    dense = alloc.K_c <= _DENSE_LOGDET_LIMIT

    def one_trial(t: int) -> float:
        rng = stream.substream(t).generator()
        c = complex_normal(rng, prior.tap_variances, spec.n_taps)
        w = complex_normal(rng, budget.noise_var, Z.shape[0])
        taps = c if use_true_taps else scipy.linalg.cho_solve(
            solve, Z.conj().T @ (Z @ c + w))
        H_block = assembler.assemble(taps / norm, dense=dense)
        return _logdet_gram(H_block, rho) / spec.K / LN2

    vals = run_trials(one_trial, trials, threads)
    stderr = float(vals.std(ddof=1) / np.sqrt(trials)) if trials > 1 else 0.0
    return CapacityEstimate(mean=float(vals.mean()), stderr=stderr,
                            trials=trials, alpha=budget.alpha, rho=rho)


@dataclass(frozen=True)
class MismatchBoundReport:
    """Spectral check of the channel-mismatch covariance bound."""

    max_eigenvalue: float
    trace_mse_bound: float
    slack: float
    tap_blocks_are_01_diagonal: bool
    passed: bool


def mismatch_bound_report(
    alloc: Allocation,
    budget: PowerBudget,
    trials: int,
    stream: RngStream,
    slack: float = 0.10,
) -> MismatchBoundReport:
    """Verify E[(Hc - Hc_hat)(Hc - Hc_hat)^H] <= (1 + slack) * MSE * I.

    Accumulates the mismatch covariance of the data-block channel over
    Monte Carlo trials and compares its largest eigenvalue against the
    closed-form estimator MSE.  Also checks structurally that every
    single-tap data block B satisfies B B^H = 0/1 diagonal, which is what
    makes the bound hold.
    """
    spec = alloc.spec
    fp = receiver_footprints(alloc)
    alloc = alloc.with_pilot_power(budget.pilot_power)
    prior = TapPrior.from_spec(spec, budget.noise_var)
    Z = build_observation_matrix(alloc, fp)
    solve = scipy.linalg.cho_factor(
        budget.noise_var * np.diag(1.0 / prior.tap_variances) + Z.conj().T @ Z
    )
    assembler = DdBlockAssembler(spec, fp.comm_obs, alloc.phi_c)

    diag_ok = True
    for i in range(spec.n_taps):
        unit = np.zeros(spec.n_taps, dtype=complex)
        unit[i] = 1.0
        B = assembler.assemble(unit)
        D = (B @ B.conj().T).toarray()
        off = D - np.diag(np.diag(D))
        d = np.real(np.diag(D))
        if np.max(np.abs(off)) > 1e-10 or np.max(np.abs(d * (1.0 - d))) > 1e-10:
            diag_ok = False
            break

    acc = np.zeros((fp.R_c, fp.R_c), dtype=complex)
    for t in range(trials):
        rng = stream.substream(t).generator()
        c = complex_normal(rng, prior.tap_variances, spec.n_taps)
        w = complex_normal(rng, budget.noise_var, Z.shape[0])
        c_hat = scipy.linalg.cho_solve(solve, Z.conj().T @ (Z @ c + w))
        delta = assembler.assemble(c - c_hat)
        acc += (delta @ delta.conj().T).toarray()
    acc /= trials
    max_eig = float(scipy.linalg.eigvalsh(acc)[-1])
    bound = mse_closed_form(prior, budget.pilot_power)
    passed = diag_ok and max_eig <= (1.0 + slack) * bound
    return MismatchBoundReport(
        max_eigenvalue=max_eig,
        trace_mse_bound=bound,
        slack=slack,
        tap_blocks_are_01_diagonal=diag_ok,
        passed=passed,
    )


@dataclass(frozen=True)
class TapStatsReport:
    """Empirical second-order statistics of the estimated taps."""

    empirical_tap_variances: np.ndarray
    predicted_tap_variances: np.ndarray
    max_offdiag: float
    max_rel_diag_error: float
    empirical_trace: float
    trace_bound: float
    trace_bound_holds: bool


def estimated_tap_stats(
    alloc: Allocation,
    budget: PowerBudget,
    trials: int,
    stream: RngStream,
    slack: float = 0.10,
) -> TapStatsReport:
    """Check E[c_hat c_hat^H] against its diagonal closed form.

    Also accumulates E||Hc_hat||_F^2, which must stay below
    (1 + slack) * R_c * sum(estimated tap variances).
    """
    spec = alloc.spec
    fp = receiver_footprints(alloc)
    alloc = alloc.with_pilot_power(budget.pilot_power)
    prior = TapPrior.from_spec(spec, budget.noise_var)
    Z = build_observation_matrix(alloc, fp)
    solve = scipy.linalg.cho_factor(
        budget.noise_var * np.diag(1.0 / prior.tap_variances) + Z.conj().T @ Z
    )
    assembler = DdBlockAssembler(spec, fp.comm_obs, alloc.phi_c)

    cov = np.zeros((spec.n_taps, spec.n_taps), dtype=complex)
    frob = 0.0
    for t in range(trials):
        rng = stream.substream(t).generator()
        c = complex_normal(rng, prior.tap_variances, spec.n_taps)
        w = complex_normal(rng, budget.noise_var, Z.shape[0])
        c_hat = scipy.linalg.cho_solve(solve, Z.conj().T @ (Z @ c + w))
        cov += np.outer(c_hat, c_hat.conj())
        frob += assembler.frobenius_sq(c_hat)
    cov /= trials
    frob /= trials

    predicted = estimated_tap_variance(prior.tap_variances, budget.noise_var,
                                       budget.pilot_power)
    emp_diag = np.real(np.diag(cov)).copy()
    off = cov - np.diag(np.diag(cov))
    bound = fp.R_c * float(np.sum(predicted))
    return TapStatsReport(
        empirical_tap_variances=emp_diag,
        predicted_tap_variances=np.asarray(predicted),
        max_offdiag=float(np.max(np.abs(off))),
        max_rel_diag_error=float(np.max(np.abs(emp_diag - predicted) / predicted)),
        empirical_trace=float(frob),
        trace_bound=bound,
        trace_bound_holds=bool(frob <= (1.0 + slack) * bound),
    )
