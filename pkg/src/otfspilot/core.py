"""Shared domain types: grid geometry, tap layout, power budget, seeded randomness.

Conventions used throughout the package:

* A delay-Doppler grid is an ``M x N`` complex ndarray; rows index delay
  bins ``m``, columns index Doppler bins ``n``.
* ``vec`` stacks columns (Fortran order), so grid cell ``(m, n)`` maps to
  vector index ``m + n*M``.
* Channel taps ``c[l, q]`` with ``l in 0..L`` and ``q in -Q/2..Q/2`` are
  stored in a flat complex vector with index ``(q + Q/2)*(L + 1) + l``
  (Doppler-major, delay-minor).  Every matrix whose columns correspond to
  taps uses this same layout.
* A draw from CN(0, v) puts variance ``v/2`` in each of the real and
  imaginary parts.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

__all__ = [
    "ChannelSpec",
    "PowerBudget",
    "RngStream",
    "tap_pairs",
    "tap_index",
    "vec",
    "vec_inv",
    "cell_to_index",
    "index_to_cell",
    "complex_normal",
    "run_trials",
    "db_to_linear",
    "linear_to_db",
]


def db_to_linear(x_db: float) -> float:
    return 10.0 ** (x_db / 10.0)


def linear_to_db(x_lin: float) -> float:
    return 10.0 * np.log10(x_lin)


def tap_pairs(L: int, Q: int) -> list[tuple[int, int]]:
    """All (l, q) tap pairs in canonical flat order."""
    return [(l, q) for q in range(-Q // 2, Q // 2 + 1) for l in range(L + 1)]


def tap_index(l: int, q: int, L: int, Q: int) -> int:
    """Flat index of tap (l, q) in the canonical layout."""
    if not 0 <= l <= L:
        raise ValueError(f"delay index l={l} outside [0, {L}]")
    if not -Q // 2 <= q <= Q // 2:
        raise ValueError(f"Doppler index q={q} outside [{-Q//2}, {Q//2}]")
    return (q + Q // 2) * (L + 1) + l


def vec(grid: np.ndarray) -> np.ndarray:
    """Column-stack an M x N grid into a length M*N vector."""
    if grid.ndim != 2:
        raise ValueError(f"expected a 2-D grid, got shape {grid.shape}")
    return grid.reshape(-1, order="F")


def vec_inv(v: np.ndarray, M: int, N: int) -> np.ndarray:
    """Inverse of :func:`vec`: reshape a length M*N vector to an M x N grid."""
    v = np.asarray(v)
    if v.ndim != 1 or v.size != M * N:
        raise ValueError(f"expected a vector of length {M*N}, got shape {v.shape}")
    return v.reshape((M, N), order="F")


def cell_to_index(m: int, n: int, M: int) -> int:
    """Vector index of grid cell (m, n) under column stacking."""
    return m + n * M


def index_to_cell(k: int, M: int) -> tuple[int, int]:
    return k % M, k // M


@dataclass(frozen=True)
class ChannelSpec:
    """Frame geometry and channel statistics.

    K = N*M time samples per frame, arranged as an M x N delay-Doppler
    grid.  The channel has maximum delay index L and even Doppler spread
    order Q (Doppler shifts q in -Q/2..Q/2), with one variance per tap.
    """

    N: int
    M: int
    L: int
    Q: int
    tap_variances: Mapping[tuple[int, int], float]

    def __post_init__(self) -> None:
        if self.N < 1 or self.M < 1:
            raise ValueError("grid dimensions N, M must be positive")
        if self.L < 0:
            raise ValueError("maximum delay L must be non-negative")
        if self.Q < 0 or self.Q % 2 != 0:
            raise ValueError(f"Doppler order Q must be even and non-negative, got {self.Q}")
        pairs = tap_pairs(self.L, self.Q)
        missing = [p for p in pairs if p not in self.tap_variances]
        if missing or len(self.tap_variances) != len(pairs):
            raise ValueError(
                f"tap_variances must contain exactly the {len(pairs)} pairs "
                f"(l, q) with 0<=l<={self.L}, -{self.Q//2}<=q<={self.Q//2}"
            )
        bad = {p: v for p, v in self.tap_variances.items() if v <= 0}
        if bad:
            raise ValueError(f"all tap variances must be positive, got {bad}")

    @property
    def K(self) -> int:
        return self.N * self.M

    @property
    def n_taps(self) -> int:
        return (self.L + 1) * (self.Q + 1)

    def tap_variance_vector(self) -> np.ndarray:
        """Per-tap variances in canonical flat order."""
        return np.array([self.tap_variances[p] for p in tap_pairs(self.L, self.Q)])

    @classmethod
    def uniform(cls, N: int, M: int, L: int, Q: int) -> "ChannelSpec":
        """Spec with the flat profile: every tap has variance 1/((Q+1)(L+1))."""
        var = 1.0 / ((Q + 1) * (L + 1))
        return cls(N=N, M=M, L=L, Q=Q,
                   tap_variances={p: var for p in tap_pairs(L, Q)})

    def with_grid(self, N: int, M: int) -> "ChannelSpec":
        """Same channel statistics on a different N x M factorization."""
        return ChannelSpec(N=N, M=M, L=self.L, Q=self.Q,
                           tap_variances=dict(self.tap_variances))


@dataclass(frozen=True)
class PowerBudget:
    """Total transmit power and its pilot/communication split.

    alpha is the fraction assigned to communication symbols; the pilot
    gets the remainder.  noise_var is the per-sample noise variance.
    """

    total: float
    alpha: float
    noise_var: float

    def __post_init__(self) -> None:
        if self.total <= 0:
            raise ValueError("total power must be positive")
        if self.noise_var <= 0:
            raise ValueError("noise variance must be positive")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")

    @property
    def comm_power(self) -> float:
        return self.alpha * self.total

    @property
    def pilot_power(self) -> float:
        return (1.0 - self.alpha) * self.total

    def snr_tx(self, K: int) -> float:
        """Frame-level SNR P/(K*sigma_n^2), linear scale."""
        return self.total / (K * self.noise_var)

    def with_alpha(self, alpha: float) -> "PowerBudget":
        return PowerBudget(total=self.total, alpha=alpha, noise_var=self.noise_var)

    @classmethod
    def from_snr_tx(cls, snr_tx_db: float, K: int, alpha: float,
                    total: float = 1.0) -> "PowerBudget":
        """Fix P and set the noise variance to hit the requested frame SNR."""
        noise_var = total / (K * db_to_linear(snr_tx_db))
        return cls(total=total, alpha=alpha, noise_var=noise_var)


@dataclass(frozen=True)
class RngStream:
    """Reproducible random stream: one independent substream per trial.

    (seed, stream_id) fully determines the draw sequence via numpy's
    SeedSequence spawn keys, identically on every platform.
    """

    seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        return np.random.default_rng(
            np.random.SeedSequence(self.seed, spawn_key=(self.stream_id,))
        )

    def substream(self, stream_id: int) -> "RngStream":
        return RngStream(seed=self.seed, stream_id=stream_id)


def complex_normal(rng: np.random.Generator, var, size=None) -> np.ndarray:
    """CN(0, var) draws; var may broadcast against size."""
    scale = np.sqrt(np.asarray(var) / 2.0)
    return scale * (rng.standard_normal(size) + 1j * rng.standard_normal(size))


def run_trials(fn, trials: int, threads: int = 1) -> np.ndarray:
    """Evaluate fn(0..trials-1) into a trial-ordered array.

    Results land at their trial index, so the reduction is independent of
    scheduling and threaded runs match serial ones exactly.  fn must draw
    randomness only from its own per-trial stream.
    """
    if threads <= 1:
        return np.array([fn(t) for t in range(trials)])
    from concurrent.futures import ThreadPoolExecutor

    with ThreadPoolExecutor(max_workers=threads) as pool:
        return np.array(list(pool.map(fn, range(trials))))
