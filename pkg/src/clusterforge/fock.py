"""Occupation-number basis and sparse bosonic state vectors.

A Fock state is a plain tuple of non-negative ints (photons per mode).
Basis order throughout the package is descending lexicographic, so that
``(1, 0)`` precedes ``(0, 1)`` and all photons in mode 0 come first.
"""

from __future__ import annotations

import math
from typing import Iterable, Iterator, Mapping

FockState = tuple[int, ...]

PRUNE_TOL = 1e-14


class DimensionError(ValueError):
    """Raised when objects with incompatible mode counts are combined."""


def enumerate_basis(mode_count: int, photon_count: int) -> list[FockState]:
    """All occupation vectors of ``mode_count`` modes holding ``photon_count`` photons."""
    if mode_count < 1 or photon_count < 0:
        raise ValueError("need mode_count >= 1 and photon_count >= 0")
    return list(_compositions(mode_count, photon_count))


def _compositions(modes: int, photons: int) -> Iterator[FockState]:
    if modes == 1:
        yield (photons,)
        return
    for k in range(photons, -1, -1):
        for rest in _compositions(modes - 1, photons - k):
            yield (k,) + rest


def basis_size(mode_count: int, photon_count: int) -> int:
    return math.comb(photon_count + mode_count - 1, photon_count)


def basis_key(occ: FockState) -> tuple[int, ...]:
    """Sort key realising the package-wide basis order."""
    return tuple(-k for k in occ)


class StateVector:
    """Immutable sparse map from Fock states to complex amplitudes.

    Terms with ``|amplitude| <= PRUNE_TOL`` are dropped on construction.
    """

    __slots__ = ("_terms", "_modes")

    def __init__(self, terms: Mapping[Iterable[int], complex], mode_count: int):
        if mode_count < 1:
            raise ValueError("mode_count must be positive")
        clean: dict[FockState, complex] = {}
        for occ, amp in terms.items():
            occ = tuple(int(k) for k in occ)
            if len(occ) != mode_count:
                raise DimensionError(
                    f"Fock state {occ} has {len(occ)} modes, expected {mode_count}"
                )
            if any(k < 0 for k in occ):
                raise ValueError(f"negative occupation in {occ}")
            amp = complex(amp)
            if abs(amp) > PRUNE_TOL:
                clean[occ] = clean.get(occ, 0j) + amp
        self._terms = {
            k: clean[k]
            for k in sorted(clean, key=basis_key)
            if abs(clean[k]) > PRUNE_TOL
        }
        self._modes = mode_count

    @property
    def mode_count(self) -> int:
        return self._modes

    @property
    def terms(self) -> Mapping[FockState, complex]:
        return dict(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def __iter__(self) -> Iterator[FockState]:
        return iter(self._terms)

    def items(self):
        return self._terms.items()

    def __getitem__(self, occ: Iterable[int]) -> complex:
        return self._terms.get(tuple(occ), 0j)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, StateVector):
            return NotImplemented
        return self._modes == other._modes and self._terms == other._terms

    def __repr__(self) -> str:
        body = ", ".join(f"{occ}: {amp:.6g}" for occ, amp in self._terms.items())
        return f"StateVector({{{body}}}, modes={self._modes})"

    def photon_numbers(self) -> set[int]:
        return {sum(occ) for occ in self._terms}

    def norm_squared(self) -> float:
        return float(sum(abs(a) ** 2 for a in self._terms.values()))

    def scaled(self, factor: complex) -> "StateVector":
        return StateVector({k: factor * a for k, a in self._terms.items()}, self._modes)

    def to_json(self) -> dict:
        return {
            "modes": self._modes,
            "terms": [
                {"occ": list(occ), "re": amp.real, "im": amp.imag}
                for occ, amp in self._terms.items()
            ],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "StateVector":
        terms = {
            tuple(t["occ"]): complex(t["re"], t["im"]) for t in data["terms"]
        }
        return cls(terms, int(data["modes"]))


def _check_modes(a: StateVector, b: StateVector) -> None:
    if a.mode_count != b.mode_count:
        raise DimensionError(f"mode counts differ: {a.mode_count} vs {b.mode_count}")


def inner_product(a: StateVector, b: StateVector) -> complex:
    """<a|b>, conjugate-linear in ``a``."""
    _check_modes(a, b)
    small, large = (a, b) if len(a) <= len(b) else (b, a)
    total = 0j
    for occ in small:
        if occ in large._terms:
            total += a._terms[occ].conjugate() * b._terms[occ]
    return total


def scale_add(target: StateVector, source: StateVector, factor: complex) -> StateVector:
    """target + factor * source."""
    _check_modes(target, source)
    terms = dict(target.items())
    for occ, amp in source.items():
        terms[occ] = terms.get(occ, 0j) + factor * amp
    return StateVector(terms, target.mode_count)
