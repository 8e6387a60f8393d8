"""Dual-rail qubit states: plus products, Bell-pair products, linear clusters.

Qubit states are plain complex arrays of length 2**n indexed by bitstrings
with qubit 0 as the most significant bit (H -> 0, V -> 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fock import DimensionError, StateVector
from .transform import DualRailLayout

HADAMARD = np.array([[1, 1], [1, -1]], dtype=np.complex128) / math.sqrt(2)
PLUS = np.array([1, 1], dtype=np.complex128) / math.sqrt(2)
PHI_PLUS = np.array([1, 0, 0, 1], dtype=np.complex128) / math.sqrt(2)


def qubit_count(q: np.ndarray) -> int:
    n = int(round(math.log2(len(q)))) if len(q) else -1
    if n < 0 or 2**n != len(q):
        raise DimensionError(f"qubit state length {len(q)} is not a power of two")
    return n


def product_state(factors) -> np.ndarray:
    out = np.ones(1, dtype=np.complex128)
    for f in factors:
        out = np.kron(out, np.asarray(f, dtype=np.complex128))
    return out


def plus_product(n: int) -> np.ndarray:
    if n < 1:
        raise ValueError("need at least one qubit")
    return np.full(2**n, 2 ** (-n / 2), dtype=np.complex128)


def bell_product(m: int) -> np.ndarray:
    """|Phi+> on each qubit pair (2k, 2k+1), k < m."""
    if m < 1:
        raise ValueError("need at least one Bell pair")
    return product_state([PHI_PLUS] * m)


def _cz_signs(n: int, edges) -> np.ndarray:
    idx = np.arange(2**n)
    bits = [(idx >> (n - 1 - k)) & 1 for k in range(n)]
    signs = np.ones(2**n)
    for a, b in edges:
        signs[(bits[a] & bits[b]) == 1] *= -1
    return signs


def linear_cluster(n: int) -> np.ndarray:
    """CZ between neighbours of a chain of |+> states."""
    if n < 2:
        raise ValueError("a linear cluster needs at least two qubits")
    return plus_product(n) * _cz_signs(n, [(k, k + 1) for k in range(n - 1)])


def local_qubit_rotation(q: np.ndarray, k: int, r) -> np.ndarray:
    """Apply the 2x2 unitary ``r`` to qubit ``k``."""
    q = np.asarray(q, dtype=np.complex128)
    r = np.asarray(r, dtype=np.complex128)
    n = qubit_count(q)
    if r.shape != (2, 2) or np.max(np.abs(r.conj().T @ r - np.eye(2))) > 1e-10:
        raise ValueError("local rotation must be a 2x2 unitary")
    if not 0 <= k < n:
        raise IndexError(f"qubit {k} out of range for {n} qubits")
    t = np.tensordot(r, q.reshape((2,) * n), axes=([1], [k]))
    return np.moveaxis(t, 0, k).reshape(-1)


def encode_dual_rail(q: np.ndarray, layout: DualRailLayout) -> StateVector:
    n = qubit_count(q)
    if n != layout.qubit_count:
        raise DimensionError(f"layout has {layout.qubit_count} qubits, state has {n}")
    basis = layout.computational_basis()
    return StateVector(dict(zip(basis, q)), layout.mode_count)


def decode_dual_rail(state: StateVector, layout: DualRailLayout) -> np.ndarray:
    """Coincidence amplitudes of ``state`` in bitstring order (other terms ignored)."""
    return np.array([state[occ] for occ in layout.computational_basis()], dtype=np.complex128)


@dataclass(frozen=True)
class Recipe:
    """Parsed state recipe such as ``"bell:2"`` or ``"custom:1,0,0,1j"``.

    ``count`` is the Bell-pair count for ``bell`` and the qubit count otherwise.
    A ``custom`` recipe lists 2^n complex amplitudes (Python literals), which
    are normalised on build.
    """

    kind: str
    count: int
    amplitudes: tuple[complex, ...] = ()

    @classmethod
    def parse(cls, text: str) -> "Recipe":
        kind, sep, rest = text.partition(":")
        kind = kind.strip().lower()
        if not sep or kind not in ("plus", "bell", "cluster", "custom"):
            raise ValueError(
                f"bad state recipe {text!r}; expected plus:n, bell:m, cluster:n or custom:a0,a1,..."
            )
        if kind == "custom":
            return cls._custom(text, rest)
        try:
            count = int(rest)
        except ValueError:
            raise ValueError(f"bad count in state recipe {text!r}") from None
        if count < 1 or (kind == "cluster" and count < 2):
            raise ValueError(f"recipe {text!r} has too few qubits")
        return cls(kind, count)

    @classmethod
    def _custom(cls, text: str, rest: str) -> "Recipe":
        try:
            amps = tuple(complex(a.strip().replace(" ", "")) for a in rest.split(","))
        except ValueError:
            raise ValueError(f"bad amplitude in state recipe {text!r}") from None
        n = len(amps).bit_length() - 1
        if n < 1 or len(amps) != 2**n:
            raise ValueError(f"recipe {text!r} needs 2^n amplitudes with n >= 1, got {len(amps)}")
        if np.linalg.norm(amps) < 1e-12:
            raise ValueError(f"recipe {text!r} is the zero vector")
        return cls("custom", n, amps)

    @property
    def qubits(self) -> int:
        return 2 * self.count if self.kind == "bell" else self.count

    def build(self) -> np.ndarray:
        if self.kind == "custom":
            v = np.array(self.amplitudes, dtype=np.complex128)
            return v / np.linalg.norm(v)
        return {"plus": plus_product, "bell": bell_product, "cluster": linear_cluster}[
            self.kind
        ](self.count)

    def factors(self) -> list[tuple[tuple[int, ...], np.ndarray]]:
        """Tensor factors as (qubit indices, amplitudes) on disjoint qubits."""
        if self.kind == "plus":
            return [((k,), PLUS) for k in range(self.count)]
        if self.kind == "bell":
            return [((2 * k, 2 * k + 1), PHI_PLUS) for k in range(self.count)]
        return [(tuple(range(self.count)), self.build())]

    def __str__(self) -> str:
        if self.kind == "custom":
            return "custom:" + ",".join(repr(a) for a in self.amplitudes)
        return f"{self.kind}:{self.count}"


def build_state(recipe: str) -> np.ndarray:
    return Recipe.parse(recipe).build()
