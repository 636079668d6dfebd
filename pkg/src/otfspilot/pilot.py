"""Guard-protected pilot allocations and their receive-side footprints.

Three geometries keep pilot and data energy disjoint at the receiver
under every possible channel shift (l in 0..L rows down, q in -Q/2..Q/2
columns across):

* island       - a (2L+1) x (2Q+1) zero region with one pilot in the
                 middle, embedded in data on all sides;
* doppler_slab - (2L+1) full grid rows; the pilot sits on the centre row
                 and may slide anywhere along the Doppler axis;
* delay_slab   - (2Q+1) full grid columns; the pilot sits on the centre
                 column and may slide anywhere along the delay axis.

Each uses a single nonzero pilot cell carrying the whole pilot power,
which is what makes the pilot observation columns mutually orthogonal
(see estimation.gram_offdiag).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .core import ChannelSpec, cell_to_index
from .dd_domain import build_dd_channel, dd_support

__all__ = [
    "Allocation",
    "ReceiverFootprint",
    "IsolationReport",
    "make_allocation",
    "pilot_overhead",
    "receiver_footprints",
    "validate_isolation",
]

KINDS = ("island", "doppler_slab", "delay_slab")


def pilot_overhead(kind: str, L: int, Q: int) -> int:
    """Minimum number of reserved grid cells (pilot plus guards)."""
    if L < 0 or Q < 0:
        raise ValueError("L and Q must be non-negative")
    if kind == "island":
        return (2 * Q + 1) * (2 * L + 1)
    if kind == "doppler_slab":
        return (Q + 1) * (2 * L + 1)
    if kind == "delay_slab":
        return (2 * Q + 1) * (L + 1)
    raise ValueError(f"unknown allocation kind {kind!r}")


@dataclass(frozen=True)
class Allocation:
    """A pilot placement: reserved region, the one nonzero cell, its value."""

    kind: str
    spec: ChannelSpec
    pilot_cell: tuple[int, int]
    pilot_value: complex
    region: frozenset[tuple[int, int]]

    @property
    def M(self) -> int:
        return self.spec.M

    @property
    def N(self) -> int:
        return self.spec.N

    @property
    def K(self) -> int:
        return self.spec.K

    @property
    def K_p(self) -> int:
        return len(self.region)

    @property
    def K_c(self) -> int:
        return self.K - self.K_p

    @property
    def pilot_power(self) -> float:
        return float(abs(self.pilot_value) ** 2)

    @cached_property
    def comm_cells(self) -> tuple[tuple[int, int], ...]:
        """Data-bearing cells in vec order."""
        cells = [(k % self.M, k // self.M) for k in range(self.K)]
        return tuple(c for c in cells if c not in self.region)

    @cached_property
    def phi_p(self) -> np.ndarray:
        """Vec indices of the reserved region (sorted)."""
        return np.array(sorted(cell_to_index(m, n, self.M) for m, n in self.region))

    @cached_property
    def phi_c(self) -> np.ndarray:
        """Vec indices of the data cells (sorted)."""
        return np.array([cell_to_index(m, n, self.M) for m, n in self.comm_cells])

    def pilot_grid(self) -> np.ndarray:
        """M x N grid holding the pilot value and zeros elsewhere."""
        S = np.zeros((self.M, self.N), dtype=complex)
        S[self.pilot_cell] = self.pilot_value
        return S

    def place_data(self, symbols: np.ndarray) -> np.ndarray:
        """Full transmit grid: pilot plus K_c data symbols in vec order."""
        symbols = np.asarray(symbols)
        if symbols.shape != (self.K_c,):
            raise ValueError(f"expected {self.K_c} data symbols, got {symbols.shape}")
        S = self.pilot_grid()
        for cell, s in zip(self.comm_cells, symbols):
            S[cell] = s
        return S

    def with_pilot_power(self, pilot_power: float) -> "Allocation":
        """Same geometry, pilot rescaled to the given total power."""
        phase = self.pilot_value / abs(self.pilot_value)
        return Allocation(kind=self.kind, spec=self.spec, pilot_cell=self.pilot_cell,
                          pilot_value=np.sqrt(pilot_power) * phase, region=self.region)


def make_allocation(
    kind: str,
    spec: ChannelSpec,
    pilot_power: float,
    position: int | tuple[int, int] | None = None,
    phase: float = 0.0,
) -> Allocation:
    """Build one of the three guard-protected allocations.

    position: for doppler_slab, the pilot's Doppler column; for
    delay_slab, the pilot's delay row; for island, the (m, n) centre
    cell.  Defaults to the grid centre.  phase rotates the pilot value
    (its default of 0 keeps goldens reproducible; the receiver-side
    orthogonality holds for any phase).
    """
    M, N, L, Q = spec.M, spec.N, spec.L, spec.Q
    if kind not in KINDS:
        raise ValueError(f"unknown allocation kind {kind!r}; expected one of {KINDS}")
    if pilot_power <= 0:
        raise ValueError("pilot power must be positive")

    if kind == "island":
        if M < 2 * L + 1:
            raise ValueError(f"island needs M >= 2L+1 = {2*L+1}, got M={M}")
        if N < 2 * Q + 1:
            raise ValueError(f"island needs N >= 2Q+1 = {2*Q+1}, got N={N}")
        if position is None:
            m0, n0 = M // 2, N // 2
        else:
            m0, n0 = position  # type: ignore[misc]
        region = frozenset(
            ((m0 + dm) % M, (n0 + dn) % N)
            for dm in range(-L, L + 1)
            for dn in range(-Q, Q + 1)
        )
        cell = (m0 % M, n0 % N)
    elif kind == "doppler_slab":
        if M < 2 * L + 1:
            raise ValueError(f"doppler_slab needs M >= 2L+1 = {2*L+1}, got M={M}")
        if N < Q + 1:
            raise ValueError(f"doppler_slab needs N >= Q+1 = {Q+1}, got N={N}")
        m0 = M // 2
        n0 = N // 2 if position is None else int(position) % N
        region = frozenset(
            ((m0 + dm) % M, n) for dm in range(-L, L + 1) for n in range(N)
        )
        cell = (m0, n0)
    else:  # delay_slab
        if M < L + 1:
            raise ValueError(f"delay_slab needs M >= L+1 = {L+1}, got M={M}")
        if N < 2 * Q + 1:
            raise ValueError(f"delay_slab needs N >= 2Q+1 = {2*Q+1}, got N={N}")
        n0 = N // 2
        m0 = M // 2 if position is None else int(position) % M
        region = frozenset(
            (m, (n0 + dn) % N) for dn in range(-Q, Q + 1) for m in range(M)
        )
        cell = (m0, n0)

    value = np.sqrt(pilot_power) * np.exp(1j * phase)
    return Allocation(kind=kind, spec=spec, pilot_cell=cell,
                      pilot_value=value, region=region)


@dataclass(frozen=True)
class ReceiverFootprint:
    """Vec indices of received cells holding pilot / data energy.

    Cells that receive neither (possible in oversized slabs) belong to
    no footprint; they carry only noise and are discarded.
    """

    pilot_obs: np.ndarray
    comm_obs: np.ndarray

    @property
    def R_p(self) -> int:
        return len(self.pilot_obs)

    @property
    def R_c(self) -> int:
        return len(self.comm_obs)


def receiver_footprints(alloc: Allocation) -> ReceiverFootprint:
    """Exact footprint enumeration over all (L+1)(Q+1) channel shifts."""
    spec = alloc.spec
    M, N = spec.M, spec.N
    shifts = [(l, q) for l in range(spec.L + 1)
              for q in range(-spec.Q // 2, spec.Q // 2 + 1)]
    pilot_obs = {dd_support(l, q, alloc.pilot_cell, M, N) for l, q in shifts}
    comm_obs = {
        dd_support(l, q, cell, M, N)
        for cell in alloc.comm_cells
        for l, q in shifts
    }
    return ReceiverFootprint(
        pilot_obs=np.array(sorted(cell_to_index(m, n, M) for m, n in pilot_obs)),
        comm_obs=np.array(sorted(cell_to_index(m, n, M) for m, n in comm_obs)),
    )


@dataclass(frozen=True)
class IsolationReport:
    """Outcome of the pilot/data no-overlap check."""

    footprints_disjoint: bool
    max_pilot_into_comm: float
    max_comm_into_pilot: float
    tol: float
    violations: tuple[tuple[int, int], ...] = field(default=())

    @property
    def passed(self) -> bool:
        return (self.footprints_disjoint
                and self.max_pilot_into_comm < self.tol
                and self.max_comm_into_pilot < self.tol)


def validate_isolation(
    alloc: Allocation,
    coeffs: np.ndarray | None = None,
    tol: float = 1e-10,
) -> IsolationReport:
    """Check that no channel shift can mix pilot and data energy.

    Builds the dense grid-domain channel (all-ones taps by default, a
    generic support witness) and verifies that the nonzero pilot cell
    reaches no data observation and no data cell reaches any pilot
    observation.  Also reports the purely set-theoretic footprint
    disjointness.
    """
    spec = alloc.spec
    coeffs = np.ones(spec.n_taps, dtype=complex) if coeffs is None else coeffs
    fp = receiver_footprints(alloc)
    H = build_dd_channel(coeffs, spec)
    pilot_col = np.array([cell_to_index(*alloc.pilot_cell, spec.M)])
    pilot_into_comm = np.abs(H[np.ix_(fp.comm_obs, pilot_col)])
    comm_into_pilot = np.abs(H[np.ix_(fp.pilot_obs, alloc.phi_c)])
    violations = []
    vi, vj = np.nonzero(pilot_into_comm >= tol)
    violations += [(int(fp.comm_obs[i]), int(pilot_col[j])) for i, j in zip(vi, vj)]
    vi, vj = np.nonzero(comm_into_pilot >= tol)
    violations += [(int(fp.pilot_obs[i]), int(alloc.phi_c[j])) for i, j in zip(vi, vj)]
    disjoint = len(np.intersect1d(fp.pilot_obs, fp.comm_obs)) == 0
    return IsolationReport(
        footprints_disjoint=disjoint,
        max_pilot_into_comm=float(pilot_into_comm.max(initial=0.0)),
        max_comm_into_pilot=float(comm_into_pilot.max(initial=0.0)),
        tol=tol,
        violations=tuple(violations),
    )
