"""Experiment definitions: what goes in, what should come out, how to search."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from functools import lru_cache
from typing import Any, Mapping

import numpy as np

from .engine import CoincidenceEngine
from .fock import StateVector
from .interferometer import param_length
from .states import Recipe, encode_dual_rail
from .transform import DualRailLayout

MODES = ("unitary", "contraction")
MERITS = ("overlap", "ratio")


@dataclass(frozen=True)
class ExperimentSpec:
    """One cluster-generation problem and its optimizer schedule.

    The device has ``2 * qubits + vacuum`` modes; qubit k occupies modes
    (2k, 2k+1) and the vacuum modes come last.
    """

    name: str
    input: str
    target: str
    vacuum: int = 0
    mode: str = "unitary"
    merit: str = "overlap"
    penalty_initial: float = 1.0
    penalty_growth: float = 4.0
    penalty_stages: int = 8
    grad_tol: float = 1e-6
    max_iter: int = 3000
    fidelity_tol: float = 1e-6
    cycles: int = 50
    seed: int = 0
    resamples: int = 3

    def __post_init__(self):
        inp = Recipe.parse(self.input)
        tgt = Recipe.parse(self.target)
        object.__setattr__(self, "input", str(inp))
        object.__setattr__(self, "target", str(tgt))
        if inp.qubits != tgt.qubits:
            raise ValueError(
                f"{self.name}: input {self.input} has {inp.qubits} qubits, "
                f"target {self.target} has {tgt.qubits}"
            )
        if self.mode not in MODES:
            raise ValueError(f"{self.name}: mode must be one of {MODES}, got {self.mode!r}")
        if self.merit not in MERITS:
            raise ValueError(f"{self.name}: merit must be one of {MERITS}, got {self.merit!r}")
        if self.vacuum < 0:
            raise ValueError(f"{self.name}: vacuum mode count must be >= 0")
        if self.cycles < 1:
            raise ValueError(f"{self.name}: cycle count must be >= 1")
        if self.penalty_initial <= 0 or self.penalty_growth < 1 or self.penalty_stages < 1:
            raise ValueError(f"{self.name}: bad penalty schedule")
        if self.grad_tol <= 0 or self.max_iter < 1 or self.fidelity_tol <= 0:
            raise ValueError(f"{self.name}: tolerances must be positive")

    @property
    def qubits(self) -> int:
        return Recipe.parse(self.target).qubits

    @property
    def modes(self) -> int:
        return 2 * self.qubits + self.vacuum

    @property
    def param_length(self) -> int:
        return param_length(self.modes, self.mode)

    @property
    def layout(self) -> DualRailLayout:
        return DualRailLayout.standard(self.qubits, self.vacuum)

    def input_qubits(self) -> np.ndarray:
        return Recipe.parse(self.input).build()

    def target_qubits(self) -> np.ndarray:
        return Recipe.parse(self.target).build()

    def input_state(self) -> StateVector:
        return encode_dual_rail(self.input_qubits(), self.layout)

    def target_state(self) -> StateVector:
        return encode_dual_rail(self.target_qubits(), self.layout)

    @property
    def engine(self) -> CoincidenceEngine:
        return _engine(self.input, self.vacuum)

    def replace(self, **changes) -> "ExperimentSpec":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict[str, Any]:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "ExperimentSpec":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown experiment fields: {sorted(unknown)}")
        return cls(**data)


@lru_cache(maxsize=32)
def _engine(input_recipe: str, vacuum: int) -> CoincidenceEngine:
    recipe = Recipe.parse(input_recipe)
    layout = DualRailLayout.standard(recipe.qubits, vacuum)
    return CoincidenceEngine(recipe.factors(), layout)
