"""Real-time propagation.

First-order product formula over the Hamiltonian's terms, grouped greedily
into mutually commuting sets (term order inside a sweep is the builder's
construction order, flattened group by group, so trajectories are
reproducible bit for bit).  A dense eigendecomposition propagator serves as
the exact reference; the error diagnostic is the l2 distance between the
two paths.

Plans are immutable and shareable; one evolution mutates one state under a
single-writer contract, and independent trajectories (e.g. points of a
parameter scan) parallelize at the task level with no shared mutable state.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .pauli import (
    DENSE_QUBIT_CAP,
    DimensionError,
    InvariantViolation,
    PauliSum,
    PauliTerm,
    StateVector,
    _masks,
    terms_commute,
    to_dense,
)

_COMPILE_CAP = 17
"""Per-term index/sign arrays are cached only below this qubit count."""


class _TermAction:
    """Precompiled action of exp(-i theta P) for one unit Pauli string."""

    __slots__ = ("diagonal", "signs", "src", "scale")

    def __init__(self, letters: str, n_qubits: int):
        xmask, zmask, ny = _masks(letters)
        idx = np.arange(2**n_qubits, dtype=np.uint64)
        self.diagonal = xmask == 0
        self.scale = 1j**ny
        if self.diagonal:
            par = (np.bitwise_count(idx & np.uint64(zmask)) & 1).astype(np.float64)
            self.signs = 1.0 - 2.0 * par
            self.src = None
        else:
            src = idx ^ np.uint64(xmask)
            par = (np.bitwise_count(src & np.uint64(zmask)) & 1).astype(np.float64)
            self.signs = 1.0 - 2.0 * par
            self.src = src

    def exp_apply(self, amps: np.ndarray, cos_t: float, sin_t: float) -> np.ndarray:
        if self.diagonal:
            return amps * (cos_t - 1j * sin_t * self.signs)
        pamp = (self.scale * self.signs) * amps[self.src]
        return cos_t * amps - 1j * sin_t * pamp


@dataclass(frozen=True)
class EvolutionPlan:
    """A Trotterized evolution: Hamiltonian terms partitioned into
    commuting-within-group sets, total time, and sweep count."""

    hamiltonian: PauliSum
    total_time: float
    steps: int
    grouping: tuple[tuple[int, ...], ...]
    terms: tuple[PauliTerm, ...] = field(repr=False)

    def __post_init__(self) -> None:
        if self.steps < 1:
            raise ValueError("steps must be >= 1")
        covered = sorted(i for group in self.grouping for i in group)
        if covered != list(range(len(self.terms))):
            raise InvariantViolation("grouping must partition the term set")
        for group in self.grouping:
            for a in range(len(group)):
                for b in range(a + 1, len(group)):
                    if not terms_commute(self.terms[group[a]], self.terms[group[b]]):
                        raise InvariantViolation(
                            "terms within a group must commute pairwise"
                        )


def greedy_commuting_groups(terms: tuple[PauliTerm, ...]) -> tuple[tuple[int, ...], ...]:
    """First-fit partition: each term joins the earliest group it commutes
    with entirely.  On the lattice models this reproduces the even/odd bond
    split plus one diagonal group."""
    groups: list[list[int]] = []
    for i, term in enumerate(terms):
        for group in groups:
            if all(terms_commute(term, terms[j]) for j in group):
                group.append(i)
                break
        else:
            groups.append([i])
    return tuple(tuple(g) for g in groups)


def make_plan(h: PauliSum, total_time: float, steps: int) -> EvolutionPlan:
    if not h.hermitian:
        raise InvariantViolation("evolution requires a Hermitian Hamiltonian")
    terms = h.terms
    return EvolutionPlan(h, float(total_time), int(steps), greedy_commuting_groups(terms), terms)


def _ordered_terms(plan: EvolutionPlan, reverse: bool) -> list[PauliTerm]:
    seq = [plan.terms[i] for group in plan.grouping for i in group]
    return seq[::-1] if reverse else seq


def _sweep_kernels(plan: EvolutionPlan, reverse: bool):
    """(action-or-letters, cos, sin) triples for one sweep at dt = t / steps.

    Above ``_COMPILE_CAP`` qubits the per-term index arrays are built on the
    fly instead of being held for every term at once.
    """
    n = plan.hamiltonian.n_qubits
    dt = plan.total_time / plan.steps
    compile_actions = n <= _COMPILE_CAP
    kernels = []
    for term in _ordered_terms(plan, reverse):
        theta = dt * term.coefficient
        head = _TermAction(term.letters, n) if compile_actions else term.letters
        kernels.append((head, np.cos(theta), np.sin(theta)))
    return kernels


def trotter_states(
    plan: EvolutionPlan, s0: StateVector, reverse: bool = False
) -> Iterator[StateVector]:
    """Yield the state after each sweep (``plan.steps`` items)."""
    if s0.n_qubits != plan.hamiltonian.n_qubits:
        raise DimensionError("state and Hamiltonian qubit counts differ")
    n = plan.hamiltonian.n_qubits
    kernels = _sweep_kernels(plan, reverse)
    # The identity component commutes with everything; its phase is exact.
    dt = plan.total_time / plan.steps
    offset_phase = np.exp(-1j * complex(plan.hamiltonian.constant_offset).real * dt)
    amps = s0.amplitudes.copy()
    for _ in range(plan.steps):
        for action, cos_t, sin_t in kernels:
            if isinstance(action, str):
                action = _TermAction(action, n)
            amps = action.exp_apply(amps, cos_t, sin_t)
        amps = offset_phase * amps
        yield StateVector(amps)


def trotter_evolve(plan: EvolutionPlan, s0: StateVector, reverse: bool = False) -> StateVector:
    """First-order Trotter evolution by ``plan.total_time``.

    ``reverse=True`` applies each sweep's factors in reversed order, which
    together with negated time undoes a forward evolution exactly.
    """
    out = s0
    for out in trotter_states(plan, s0, reverse):
        pass
    drift = abs(out.norm() - s0.norm())
    if drift > 1e-10:
        raise InvariantViolation(f"norm drifted by {drift} during evolution")
    return out


class SpectralDecomposition:
    """Eigendecomposition of a Hermitian PauliSum, cached for reuse across
    many evolution times on the same operator."""

    _cache: dict[int, tuple[PauliSum, "SpectralDecomposition"]] = {}
    _cache_limit = 4

    def __init__(self, h: PauliSum, cap: int = DENSE_QUBIT_CAP):
        dense = to_dense(h, cap)
        self.eigenvalues, self.eigenvectors = np.linalg.eigh(dense)
        self._adjoint = np.ascontiguousarray(self.eigenvectors.conj().T)
        self.n_qubits = h.n_qubits

    @classmethod
    def for_hamiltonian(cls, h: PauliSum, cap: int = DENSE_QUBIT_CAP) -> "SpectralDecomposition":
        key = id(h)
        hit = cls._cache.get(key)
        if hit is not None and hit[0] is h:
            return hit[1]
        decomp = cls(h, cap)
        if len(cls._cache) >= cls._cache_limit:
            cls._cache.pop(next(iter(cls._cache)))
        cls._cache[key] = (h, decomp)
        return decomp

    def evolve_amplitudes(self, t: float, amps: np.ndarray) -> np.ndarray:
        phases = np.exp(-1j * self.eigenvalues * t)
        return self.eigenvectors @ (phases * (self._adjoint @ amps))

    def evolve(self, t: float, s: StateVector) -> StateVector:
        if s.n_qubits != self.n_qubits:
            raise DimensionError("state size mismatch")
        return StateVector(self.evolve_amplitudes(t, s.amplitudes))


def exact_evolve(
    h: PauliSum, t: float, s0: StateVector, cap: int = DENSE_QUBIT_CAP
) -> StateVector:
    """exp(-i H t)|s0> through the dense eigendecomposition."""
    if s0.n_qubits != h.n_qubits:
        raise DimensionError("state and Hamiltonian qubit counts differ")
    return SpectralDecomposition.for_hamiltonian(h, cap).evolve(t, s0)


def trotter_error(plan: EvolutionPlan, s0: StateVector, cap: int = DENSE_QUBIT_CAP) -> float:
    """l2 distance between the Trotter and exact propagations of ``s0``."""
    approx = trotter_evolve(plan, s0)
    exact = exact_evolve(plan.hamiltonian, plan.total_time, s0, cap)
    return float(np.linalg.norm(approx.amplitudes - exact.amplitudes))
