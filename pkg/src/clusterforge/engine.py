"""Fast coincidence amplitudes and their gradient with respect to the device matrix.

For an input whose terms put at most one photon in each mode, the
coincidence amplitude for output columns C (one mode per qubit pair) is

    a(C) = sum_x psi_x perm(U[rows_x, C])
         = sum_{S subset C} (-1)^{n-|S|} P(U @ 1_S),

where P(v) = sum_x psi_x prod_{i in rows_x} v_i is the input polynomial.
Every S is a partial selection (none, H or V per pair), so all 2^n
amplitudes come from the 3^n values P(U @ 1_S) followed by the per-pair
reduction [[-1, 1, 0], [-1, 0, 1]]. The input polynomial is kept as a
product of factors on disjoint modes.
"""

from __future__ import annotations

import itertools
from typing import Sequence

import numpy as np

from .fock import DimensionError
from .transform import DualRailLayout

_REDUCE = np.array([[-1.0, 1.0, 0.0], [-1.0, 0.0, 1.0]])


def _along_axes(mat: np.ndarray, t: np.ndarray, n: int) -> np.ndarray:
    for k in range(n):
        t = np.moveaxis(np.tensordot(mat, t, axes=([1], [k])), 0, k)
    return t


class CoincidenceEngine:
    """Coincidence-projected amplitudes A(U)|psi> for a fixed input and layout.

    ``factors`` is a sequence of (qubit indices, amplitudes) pairs on disjoint
    qubits whose tensor product is the dual-rail input state.
    """

    def __init__(self, factors: Sequence[tuple[Sequence[int], np.ndarray]], layout: DualRailLayout):
        self.layout = layout
        n = layout.qubit_count
        self.n = n
        self.modes = layout.mode_count
        seen = sorted(q for qubits, _ in factors for q in qubits)
        if seen != list(range(n)):
            raise DimensionError(f"input factors cover qubits {seen}, layout has {n}")

        self._factors = []
        for qubits, amps in factors:
            amps = np.asarray(amps, dtype=np.complex128)
            k = len(qubits)
            if amps.shape != (2**k,):
                raise DimensionError(f"factor on {k} qubits needs {2**k} amplitudes")
            rows, coeffs = [], []
            for idx, bits in enumerate(itertools.product((0, 1), repeat=k)):
                if amps[idx] == 0:
                    continue
                rows.append([layout.qubit_pairs[q][b] for q, b in zip(qubits, bits)])
                coeffs.append(amps[idx])
            self._factors.append((np.array(rows, dtype=int), np.array(coeffs)))

        # Column S of `selection` is the indicator of a partial selection, in
        # C order over (none, H, V) per pair.
        choices = list(itertools.product(range(3), repeat=n))
        sel = np.zeros((self.modes, len(choices)))
        for s, choice in enumerate(choices):
            for (h, v), c in zip(layout.qubit_pairs, choice):
                if c == 1:
                    sel[h, s] = 1.0
                elif c == 2:
                    sel[v, s] = 1.0
        self.selection = sel

    @classmethod
    def from_state(cls, q: np.ndarray, layout: DualRailLayout) -> "CoincidenceEngine":
        return cls([(tuple(range(layout.qubit_count)), q)], layout)

    def _check(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=np.complex128)
        if u.shape != (self.modes, self.modes):
            raise DimensionError(f"device matrix shape {u.shape}, expected {(self.modes,) * 2}")
        return u

    def _factor_values(self, v: np.ndarray):
        out = []
        for rows, coeffs in self._factors:
            vals = v[rows]  # (terms, k, S)
            out.append((vals, coeffs @ np.prod(vals, axis=1)))
        return out

    def amplitudes(self, u) -> np.ndarray:
        """All 2^n coincidence amplitudes in bitstring order."""
        v = self._check(u) @ self.selection
        poly = np.ones(v.shape[1], dtype=np.complex128)
        for _, p in self._factor_values(v):
            poly = poly * p
        return self._reduce(poly)

    def _reduce(self, poly: np.ndarray) -> np.ndarray:
        t = _along_axes(_REDUCE, poly.reshape((3,) * self.n), self.n)
        return t.reshape(-1)

    def amplitudes_and_pullback(self, u):
        """Amplitudes plus a function mapping dL/da to the matrix gradient.

        The pullback takes ``w`` with w_b = dL/da_b (Wirtinger derivative of a
        real L) and returns G with dL = 2 Re sum_ij G_ij dU_ij.
        """
        u = self._check(u)
        v = u @ self.selection
        fv = self._factor_values(v)
        polys = [p for _, p in fv]
        nf = len(polys)
        prefix = [np.ones(v.shape[1], dtype=np.complex128)]
        for p in polys:
            prefix.append(prefix[-1] * p)
        suffix = [np.ones(v.shape[1], dtype=np.complex128)]
        for p in reversed(polys):
            suffix.append(suffix[-1] * p)
        suffix.reverse()
        amps = self._reduce(prefix[-1])

        def pullback(w: np.ndarray) -> np.ndarray:
            z = _along_axes(_REDUCE.T, np.asarray(w).reshape((2,) * self.n), self.n).reshape(-1)
            d = np.zeros_like(v)
            for f, ((rows, coeffs), (vals, _)) in enumerate(zip(self._factors, fv)):
                others = prefix[f] * suffix[f + 1]
                k = rows.shape[1]
                for pos in range(k):
                    rest = np.prod(np.delete(vals, pos, axis=1), axis=1) if k > 1 else np.ones_like(vals[:, 0])
                    np.add.at(d, rows[:, pos], coeffs[:, None] * rest * others)
            return (d * z) @ self.selection.T

        return amps, pullback
