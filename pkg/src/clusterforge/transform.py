"""Induced multi-photon map of a device matrix and coincidence post-selection.

Convention: the device sends a_i^dagger -> sum_j U[i, j] a_j^dagger, so the
transition amplitude <out|Omega|in> is the permanent of U with row i
repeated in_i times and column j repeated out_j times. Applying U1 and
then U2 equals applying the single matrix U1 @ U2.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .fock import DimensionError, FockState, StateVector, enumerate_basis
from .permanent import permanent_ryser


@dataclass(frozen=True)
class DualRailLayout:
    """Assignment of qubits to (H-mode, V-mode) pairs plus unused vacuum modes."""

    qubit_pairs: tuple[tuple[int, int], ...]
    vacuum_modes: tuple[int, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "qubit_pairs", tuple(tuple(p) for p in self.qubit_pairs))
        object.__setattr__(self, "vacuum_modes", tuple(self.vacuum_modes))
        modes = [m for pair in self.qubit_pairs for m in pair] + list(self.vacuum_modes)
        if any(len(p) != 2 for p in self.qubit_pairs):
            raise ValueError("each qubit needs exactly two modes")
        if sorted(modes) != list(range(len(modes))):
            raise ValueError(f"layout modes must be distinct and cover 0..N-1, got {modes}")

    @classmethod
    def standard(cls, qubits: int, vacuum: int = 0) -> "DualRailLayout":
        """Pairs (2k, 2k+1) followed by ``vacuum`` trailing vacuum modes."""
        pairs = tuple((2 * k, 2 * k + 1) for k in range(qubits))
        return cls(pairs, tuple(range(2 * qubits, 2 * qubits + vacuum)))

    @property
    def qubit_count(self) -> int:
        return len(self.qubit_pairs)

    @property
    def mode_count(self) -> int:
        return 2 * len(self.qubit_pairs) + len(self.vacuum_modes)

    def fock_state(self, bits: Sequence[int]) -> FockState:
        """Fock state of a computational basis bitstring (0 -> H, 1 -> V)."""
        if len(bits) != self.qubit_count:
            raise DimensionError(f"need {self.qubit_count} bits, got {len(bits)}")
        occ = [0] * self.mode_count
        for (h, v), b in zip(self.qubit_pairs, bits):
            occ[v if b else h] = 1
        return tuple(occ)

    def computational_basis(self) -> list[FockState]:
        """All 2^n coincidence states, qubit 0 as the most significant bit."""
        return [self.fock_state(bits) for bits in itertools.product((0, 1), repeat=self.qubit_count)]

    def in_coincidence_subspace(self, occ: FockState) -> bool:
        if len(occ) != self.mode_count:
            raise DimensionError("occupation length does not match layout")
        return all(occ[h] + occ[v] == 1 for h, v in self.qubit_pairs) and all(
            occ[m] == 0 for m in self.vacuum_modes
        )


def _check_matrix(u, modes: int) -> np.ndarray:
    u = np.asarray(u, dtype=np.complex128)
    if u.shape != (modes, modes):
        raise DimensionError(f"device matrix shape {u.shape} does not match {modes} modes")
    return u


def _factorial_norm(occ: FockState) -> float:
    return math.prod(math.factorial(k) for k in occ)


def amplitude(u, inp: FockState, out: FockState) -> complex:
    """<out| Omega(U) |inp>."""
    u = np.asarray(u, dtype=np.complex128)
    n = u.shape[0]
    if len(inp) != n or len(out) != n or u.shape != (n, n):
        raise DimensionError("Fock states and matrix must share the mode count")
    if sum(inp) != sum(out):
        return 0j
    if sum(inp) == 0:
        return 1 + 0j
    rows = [i for i, k in enumerate(inp) for _ in range(k)]
    cols = [j for j, k in enumerate(out) for _ in range(k)]
    perm = permanent_ryser(u[np.ix_(rows, cols)])
    return perm / math.sqrt(_factorial_norm(inp) * _factorial_norm(out))


def apply_full(u, state: StateVector) -> StateVector:
    """Omega(U)|state>, expanded over the full output Fock basis."""
    u = _check_matrix(u, state.mode_count)
    out: dict[FockState, complex] = {}
    for photons in sorted(state.photon_numbers()):
        basis = enumerate_basis(state.mode_count, photons)
        for inp, coeff in state.items():
            if sum(inp) != photons:
                continue
            for occ in basis:
                out[occ] = out.get(occ, 0j) + coeff * amplitude(u, inp, occ)
    return StateVector(out, state.mode_count)


def project_coincidence(state: StateVector, layout: DualRailLayout) -> StateVector:
    """Keep only terms with one photon per qubit pair and empty vacuum modes."""
    if state.mode_count != layout.mode_count:
        raise DimensionError("state and layout mode counts differ")
    return StateVector(
        {occ: a for occ, a in state.items() if layout.in_coincidence_subspace(occ)},
        state.mode_count,
    )


def projected_output(u, state: StateVector, layout: DualRailLayout) -> StateVector:
    """Coincidence-projected output, evaluating only the 2^n coincidence amplitudes."""
    if state.mode_count != layout.mode_count:
        raise DimensionError("state and layout mode counts differ")
    u = _check_matrix(u, layout.mode_count)
    n = layout.qubit_count
    terms = [(inp, c) for inp, c in state.items() if sum(inp) == n]
    out = {}
    for occ in layout.computational_basis():
        out[occ] = sum((c * amplitude(u, inp, occ) for inp, c in terms), 0j)
    return StateVector(out, layout.mode_count)
