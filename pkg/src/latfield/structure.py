"""Hadron structure: sector eigenstates, time-separated correlators, the
lattice momentum-fraction transform, and the current-current tensor.

States are prepared by exact diagonalization restricted to a total-charge
sector (the charge of every computational basis state is classical, so the
restriction is exact); an adiabatic sweep from the large-mass limit is
available as an independent cross-check.  Momentum is not projected on the
open chain: a ``momentum_index`` is carried as a label only.

The continuum bilinear of the momentum-fraction distribution has no unique
staggered transcription; the correlator machinery is generic over caller
supplied operators and the shipped defaults (hopping-type bilinear, charge
density, continuity-consistent bond current) are modeling choices for the
Thirring chain.

Grid points of a correlator table are independent; evaluation accumulates
in fixed row/column order, so repeated runs are bit-reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .evolution import SpectralDecomposition, make_plan, trotter_evolve
from .models import basis_charge, parity
from .pauli import (
    DENSE_QUBIT_CAP,
    DimensionError,
    PauliSum,
    ResourceLimitError,
    StateVector,
    letters_at,
)


class EmptySectorError(ValueError):
    """No basis state carries the requested quantum numbers."""


class BoundaryError(ValueError):
    """An operator translation left the open chain."""


@dataclass(frozen=True)
class SectorSpec:
    """Quantum numbers selecting an eigenstate: total staggered charge,
    an optional (unprojected) momentum label, and the energy rank inside
    the sector (0 = lowest)."""

    total_charge: int
    momentum_index: int | None = None
    energy_rank: int = 0

    def __post_init__(self) -> None:
        if self.energy_rank < 0:
            raise ValueError("energy_rank must be non-negative")


@dataclass(frozen=True)
class CorrelatorRequest:
    op_a: PauliSum
    op_b: PauliSum
    times: tuple[float, ...]
    positions: tuple[int, ...]

    def __post_init__(self) -> None:
        times = tuple(float(t) for t in self.times)
        positions = tuple(int(y) for y in self.positions)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "positions", positions)
        _check_uniform(np.asarray(times), "times")
        _check_uniform(np.asarray(positions, dtype=float), "positions")


@dataclass(frozen=True)
class SpectralTable:
    grid: np.ndarray
    values: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        grid = np.asarray(self.grid, dtype=float)
        if grid.size > 1 and not np.all(np.diff(grid) > 0):
            raise ValueError("spectral grid must be strictly increasing")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", np.asarray(self.values, dtype=complex))


def _check_uniform(grid: np.ndarray, name: str) -> None:
    if grid.size == 0:
        raise ValueError(f"{name} grid must be non-empty")
    if grid.size > 1:
        steps = np.diff(grid)
        if steps[0] <= 0 or not np.allclose(steps, steps[0], rtol=0, atol=1e-12):
            raise ValueError(f"{name} grid must be uniform and increasing")


# -- sector preparation ----------------------------------------------------


def sector_indices(n_qubits: int, total_charge: int) -> np.ndarray:
    idx = [k for k in range(2**n_qubits) if basis_charge(k, n_qubits) == total_charge]
    return np.asarray(idx, dtype=np.int64)


def sector_matrix(h: PauliSum, indices: np.ndarray) -> np.ndarray:
    """Dense block P h P on the given (sorted) basis indices.

    Each Pauli string maps basis states one to one, so the block fills with
    one scatter per term; matrix elements leaving the index set are dropped
    (zero for any Hamiltonian that conserves the sector's quantum number).
    """
    from .pauli import _masks

    indices = np.asarray(indices, dtype=np.uint64)
    dim = indices.size
    block = np.zeros((dim, dim), dtype=complex)
    block[np.arange(dim), np.arange(dim)] = complex(h.constant_offset)
    cols = np.arange(dim)
    for letters, coeff in h.items():
        xmask, zmask, ny = _masks(letters)
        signs = 1.0 - 2.0 * (np.bitwise_count(indices & np.uint64(zmask)) & 1)
        targets = indices ^ np.uint64(xmask)
        pos = np.searchsorted(indices, targets)
        pos_clipped = np.minimum(pos, dim - 1)
        inside = indices[pos_clipped] == targets
        block[pos_clipped[inside], cols[inside]] += coeff * 1j**ny * signs[inside]
    return block


def prepare_sector_state(
    h: PauliSum, sector: SectorSpec, cap: int = DENSE_QUBIT_CAP
) -> StateVector:
    """Eigenstate of ``h`` with the requested charge and energy rank.

    Valid only for Hamiltonians commuting with the staggered charge, which
    all the lattice models here do; the restriction is then exact and the
    returned state is an eigenstate to dense-arithmetic accuracy.
    """
    if h.n_qubits > cap:
        raise ResourceLimitError(
            f"sector eigensolve for {h.n_qubits} qubits exceeds cap {cap}"
        )
    indices = sector_indices(h.n_qubits, sector.total_charge)
    if indices.size == 0:
        raise EmptySectorError(
            f"no basis state has total charge {sector.total_charge}"
        )
    if sector.energy_rank >= indices.size:
        raise EmptySectorError(
            f"energy rank {sector.energy_rank} exceeds sector dimension {indices.size}"
        )
    block = sector_matrix(h, indices)
    _, vecs = np.linalg.eigh(block)
    amps = np.zeros(2**h.n_qubits, dtype=complex)
    amps[indices] = vecs[:, sector.energy_rank]
    return StateVector(amps)


def adiabatic_sector_state(
    h_path: Callable[[float], PauliSum],
    sector: SectorSpec,
    total_time: float = 60.0,
    steps: int = 240,
    cap: int = DENSE_QUBIT_CAP,
) -> StateVector:
    """Cross-check preparation: follow the sector ground state along a slow
    Hamiltonian sweep ``h_path(s)``, s from 0 to 1.

    The sweep starts from the exact sector ground state of ``h_path(0)``
    (chosen trivial, e.g. the large-mass limit) and applies piecewise
    constant evolution at the midpoint of each interval.  Only ground
    states (energy_rank 0) can be tracked this way; fidelity to the exact
    eigenstate improves with ``total_time`` while the sweep stays gapped.
    """
    if sector.energy_rank != 0:
        raise ValueError("adiabatic tracking only follows sector ground states")
    if steps < 1:
        raise ValueError("steps must be >= 1")
    from .evolution import exact_evolve

    state = prepare_sector_state(h_path(0.0), sector, cap)
    dt = total_time / steps
    for k in range(steps):
        s_mid = (k + 0.5) / steps
        state = exact_evolve(h_path(s_mid), dt, state, cap)
    return state


def thirring_mass_sweep(params, mass_start: float = 25.0) -> Callable[[float], PauliSum]:
    """Sweep from the trivial large-mass Thirring chain to the target one."""
    from .models import ThirringParams, build_thirring

    def path(s: float) -> PauliSum:
        mass = (1.0 - s) * mass_start + s * params.mass
        return build_thirring(ThirringParams(params.n_sites, mass, params.coupling))

    return path


# -- operators --------------------------------------------------------------


def translate(op: PauliSum, shift: int) -> PauliSum:
    """Shift an operator by ``shift`` sites on the open chain."""
    n = op.n_qubits
    pairs = []
    for letters, coeff in op.items():
        moved = ["I"] * n
        for pos, letter in enumerate(letters):
            if letter == "I":
                continue
            new = pos + shift
            if not 0 <= new < n:
                raise BoundaryError(
                    f"translation by {shift} moves support off the open chain"
                )
            moved[new] = letter
        pairs.append((coeff, "".join(moved)))
    return PauliSum(n, pairs, constant_offset=op.constant_offset, hermitian=op.hermitian)


def hopping_bilinear(n_sites: int, site: int) -> PauliSum:
    """Default structure bilinear: the Hermitian hopping pair on the bond
    starting at 0-based ``site``: (X X + Y Y)/4."""
    if not 0 <= site < n_sites - 1:
        raise BoundaryError(f"bond {site} not on an open chain of {n_sites} sites")
    return PauliSum(
        n_sites,
        [
            (0.25, letters_at(n_sites, {site: "X", site + 1: "X"})),
            (0.25, letters_at(n_sites, {site: "Y", site + 1: "Y"})),
        ],
    )


def charge_density(n_sites: int, site: int) -> PauliSum:
    """Staggered charge density (Z_j + (-1)^j)/2 at 0-based ``site``."""
    if not 0 <= site < n_sites:
        raise BoundaryError(f"site {site} outside the chain")
    return PauliSum(
        n_sites,
        [(0.5, letters_at(n_sites, {site: "Z"}))],
        constant_offset=parity(site + 1) / 2.0,
    )


def thirring_bond_current(n_sites: int, site: int) -> PauliSum:
    """Bond current on (site, site+1) satisfying the lattice continuity
    equation for the Thirring hopping strengths (-1)^(j+1)/2."""
    if not 0 <= site < n_sites - 1:
        raise BoundaryError(f"bond {site} not on an open chain of {n_sites} sites")
    w = -parity(site + 1) / 2.0  # (-1)^(j+1) at the 1-based bond index
    return PauliSum(
        n_sites,
        [
            (w / 2.0, letters_at(n_sites, {site: "X", site + 1: "Y"})),
            (-w / 2.0, letters_at(n_sites, {site: "Y", site + 1: "X"})),
        ],
    )


# -- correlators -------------------------------------------------------------


class _Propagator:
    """Shared forward/backward propagation, exact under the dense cap and
    Trotterized above it with a stated per-unit-time step count."""

    def __init__(self, h: PauliSum, cap: int, trotter_steps_per_unit: int):
        self.h = h
        self.exact = h.n_qubits <= cap
        self.steps_per_unit = trotter_steps_per_unit
        self._decomp = SpectralDecomposition.for_hamiltonian(h, cap) if self.exact else None

    def advance(self, state: StateVector, t_from: float, t_to: float) -> StateVector:
        if self.exact:
            return self._decomp.evolve(t_to - t_from, state)
        dt = t_to - t_from
        if dt == 0.0:
            return state
        steps = max(1, int(np.ceil(abs(dt) * self.steps_per_unit)))
        return trotter_evolve(make_plan(self.h, dt, steps), state)


def two_point(
    h: PauliSum,
    psi: StateVector,
    req: CorrelatorRequest,
    cap: int = DENSE_QUBIT_CAP,
    trotter_steps_per_unit: int = 128,
) -> np.ndarray:
    """C(y, t) = <psi| e^{iHt} A_y e^{-iHt} B_0 |psi> over the request grids.

    ``A_y`` is ``op_a`` translated by ``y`` sites.  Rows are positions,
    columns times.
    """
    psi.check_normalized()
    if req.op_a.n_qubits != h.n_qubits or req.op_b.n_qubits != h.n_qubits:
        raise DimensionError("operator and Hamiltonian qubit counts differ")
    translated = [translate(req.op_a, y) for y in req.positions]
    prop = _Propagator(h, cap, trotter_steps_per_unit)
    table = np.empty((len(req.positions), len(req.times)), dtype=complex)
    bra = psi
    ket = req.op_b.apply_to(psi)
    t_prev = 0.0
    for col, t in enumerate(req.times):
        bra = prop.advance(bra, t_prev, t)
        ket = prop.advance(ket, t_prev, t)
        t_prev = t
        for row, op in enumerate(translated):
            table[row, col] = bra.inner(op.apply_to(ket))
    return table


def time_ordered_current_correlator(
    h: PauliSum,
    psi: StateVector,
    current_a: Callable[[int], PauliSum],
    current_b: Callable[[int], PauliSum],
    positions: Sequence[int],
    times: Sequence[float],
    cap: int = DENSE_QUBIT_CAP,
    trotter_steps_per_unit: int = 128,
) -> np.ndarray:
    """<psi| T{ J_a(y, t) J_b(0, 0) } |psi> with the convention
    T{A(t)B(0)} = A(t)B(0) for t >= 0 and B(0)A(t) for t < 0."""
    psi.check_normalized()
    prop = _Propagator(h, cap, trotter_steps_per_unit)
    ops = [current_a(int(y)) for y in positions]
    ref = current_b(0)
    table = np.empty((len(ops), len(times)), dtype=complex)
    bra, ket = psi, ref.apply_to(psi)
    bra_neg, ket_neg = ref.adjoint().apply_to(psi), psi
    t_prev_pos = t_prev_neg = 0.0
    order = np.argsort(np.asarray(times))
    for col in order:
        t = float(times[col])
        if t >= 0:
            bra = prop.advance(bra, t_prev_pos, t)
            ket = prop.advance(ket, t_prev_pos, t)
            t_prev_pos = t
            for row, op in enumerate(ops):
                table[row, col] = bra.inner(op.apply_to(ket))
        else:
            bra_neg = prop.advance(bra_neg, t_prev_neg, t)
            ket_neg = prop.advance(ket_neg, t_prev_neg, t)
            t_prev_neg = t
            for row, op in enumerate(ops):
                table[row, col] = bra_neg.inner(op.apply_to(ket_neg))
    return table


# -- transforms ---------------------------------------------------------------


def pdf_transform(
    correlator: Sequence[complex],
    positions: Sequence[float],
    p_plus: float,
    metadata: dict | None = None,
) -> SpectralTable:
    """Discrete momentum-fraction transform of a separation-space slice.

    ``f(x_k) = sqrt(p_plus / 2 pi) * dy * sum_m exp(-i x_k p_plus y_m) C(y_m)``
    on the symmetric frequency grid ``x_k = 2 pi k / (M dy p_plus)``.  The
    kernel sign is fixed so that a correlator oscillation ``exp(i k y)``
    appears at momentum fraction ``x = k / p_plus`` (the mirrored choice is
    the same transform relabeled ``x -> -x``).  The normalization makes the
    rectangle-rule Parseval identity exact: ``sum |f|^2 dx = sum |C|^2 dy``.
    """
    if p_plus <= 0:
        raise ValueError("p_plus must be positive")
    values = np.asarray(correlator, dtype=complex)
    ys = np.asarray(positions, dtype=float)
    if values.ndim != 1 or values.size != ys.size:
        raise DimensionError("correlator and position grids differ in length")
    _check_uniform(ys, "positions")
    m = ys.size
    dy = float(ys[1] - ys[0]) if m > 1 else 1.0
    ks = np.arange(m) - (m // 2)
    xs = 2.0 * np.pi * ks / (m * dy * p_plus)
    phases = np.exp(-1j * p_plus * np.outer(xs, ys))
    f = np.sqrt(p_plus / (2.0 * np.pi)) * dy * (phases @ values)
    meta = {
        "quadrature": "rectangle",
        "normalization": "sqrt(p_plus/(2*pi))*dy",
        "p_plus": float(p_plus),
        "delta_y": dy,
    }
    if metadata:
        meta.update(metadata)
    return SpectralTable(grid=xs, values=f, metadata=meta)


def hadronic_tensor(
    h: PauliSum,
    psi: StateVector,
    current_a: Callable[[int], PauliSum],
    q_grid: Sequence[tuple[float, float]],
    positions: Sequence[int],
    times: Sequence[float],
    current_b: Callable[[int], PauliSum] | None = None,
    cap: int = DENSE_QUBIT_CAP,
    trotter_steps_per_unit: int = 128,
    metadata: dict | None = None,
) -> SpectralTable:
    """Real part of the spacetime Fourier transform of the time-ordered
    current-current correlator, sampled at (omega, k) pairs.

    ``W(omega, k) = Re sum_{y,t} dt dy exp(i (omega t - k y)) C_T(y, t)``.
    The returned grid is the row index of ``q_grid`` (the pairs live in the
    metadata); slices at fixed k are the usual frequency scans.
    """
    pos = np.asarray(positions, dtype=float)
    ts = np.asarray(times, dtype=float)
    _check_uniform(pos, "positions")
    _check_uniform(ts, "times")
    if current_b is None:
        current_b = current_a
    table = time_ordered_current_correlator(
        h, psi, current_a, current_b, positions, times, cap, trotter_steps_per_unit
    )
    dy = float(pos[1] - pos[0]) if pos.size > 1 else 1.0
    dt = float(ts[1] - ts[0]) if ts.size > 1 else 1.0
    out = np.empty(len(q_grid), dtype=complex)
    for row, (omega, k) in enumerate(q_grid):
        phases = np.exp(1j * (omega * ts[None, :] - k * pos[:, None]))
        out[row] = dt * dy * np.sum(phases * table)
    meta = {"q_pairs": [(float(w), float(k)) for w, k in q_grid], "delta_y": dy, "delta_t": dt}
    if metadata:
        meta.update(metadata)
    return SpectralTable(grid=np.arange(len(q_grid), dtype=float), values=out.real.astype(complex), metadata=meta)
