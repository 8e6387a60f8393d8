"""Fidelity, success probability and the penalised merit used by the optimizer."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .experiment import ExperimentSpec
from .fock import StateVector, inner_product
from .interferometer import (
    contraction_pullback,
    exp_map,
    exp_map_pullback,
    matrix_from_params,
)
from .states import encode_dual_rail

DEGENERATE_NORM = 1e-30


class DegenerateOutputError(ValueError):
    """The post-selected output has (numerically) zero norm, so fidelity is undefined."""


def fidelity(out: StateVector, target: StateVector) -> float:
    """|<out|target>|^2 / (<out|out> <target|target>)."""
    nt = inner_product(target, target).real
    if nt <= 0:
        raise ValueError("target state has zero norm")
    no = inner_product(out, out).real
    if no < DEGENERATE_NORM:
        raise DegenerateOutputError(f"output norm^2 {no:.3g} too small for a fidelity")
    return float(min(1.0, abs(inner_product(out, target)) ** 2 / (no * nt)))


def success(out: StateVector) -> float:
    return float(inner_product(out, out).real)


def fubini_study(out: StateVector, target: StateVector) -> float:
    return math.acos(math.sqrt(fidelity(out, target)))


@dataclass(frozen=True)
class ObjectiveReport:
    success: float
    fidelity: float
    distance: float
    merit: float
    degenerate: bool = False

    def to_dict(self) -> dict:
        return {"s": self.success, "f": self.fidelity, "gamma": self.distance, "J": self.merit}


def _unit_target(spec: ExperimentSpec) -> np.ndarray:
    t = spec.target_qubits()
    return t / np.linalg.norm(t)


def merit_value(s: float, f: float, penalty: float, form: str = "overlap") -> float:
    """Penalised merit; both forms equal s when f = 1.

    ``ratio``:   s - c (1 - f)
    ``overlap``: s f - c s (1 - f), i.e. |<t|out>|^2 - c |out_perp|^2
    """
    if form == "ratio":
        return s - penalty * (1.0 - f)
    if form == "overlap":
        return s * f - penalty * s * (1.0 - f)
    raise ValueError(f"unknown merit form {form!r}")


def report_from_amplitudes(
    amps: np.ndarray, target: np.ndarray, penalty: float, form: str = "overlap"
) -> ObjectiveReport:
    s = float(np.vdot(amps, amps).real)
    if s < DEGENERATE_NORM:
        return ObjectiveReport(s, 0.0, math.pi / 2, -math.inf, degenerate=True)
    f = min(1.0, float(abs(np.vdot(target, amps)) ** 2 / s))
    return ObjectiveReport(s, f, math.acos(math.sqrt(f)), merit_value(s, f, penalty, form))


def evaluate_matrix(u, spec: ExperimentSpec, penalty: float = 0.0) -> ObjectiveReport:
    return report_from_amplitudes(
        spec.engine.amplitudes(u), _unit_target(spec), penalty, spec.merit
    )


def evaluate(p, spec: ExperimentSpec, penalty: float = 0.0) -> ObjectiveReport:
    """Report s, f, gamma and the experiment's merit J for parameters ``p``."""
    p = np.asarray(p, dtype=float)
    if p.shape != (spec.param_length,):
        raise ValueError(f"{spec.name}: expected {spec.param_length} parameters, got {p.shape}")
    return evaluate_matrix(matrix_from_params(p, spec.modes, spec.mode), spec, penalty)


def projected_state(u, spec: ExperimentSpec) -> StateVector:
    """The post-selected output as a Fock-space state."""
    return encode_dual_rail(spec.engine.amplitudes(u), spec.layout)


class Merit:
    """Penalised merit (see ``merit_value``) and its gradient in parameter space.

    In unitary mode the search is re-centred: parameters q describe
    ``base @ exp(iH(q))`` so each penalty stage starts from q = 0.
    """

    def __init__(self, spec: ExperimentSpec, penalty: float, base: np.ndarray | None = None):
        self.spec = spec
        self.penalty = penalty
        self.base = base
        self.target = _unit_target(spec)

    def matrix(self, q) -> np.ndarray:
        if self.spec.mode == "unitary":
            e = exp_map(q, self.spec.modes)
            return e if self.base is None else self.base @ e
        return matrix_from_params(q, self.spec.modes, "contraction")

    def report(self, q) -> ObjectiveReport:
        return report_from_amplitudes(
            self.spec.engine.amplitudes(self.matrix(q)), self.target, self.penalty, self.spec.merit
        )

    def value(self, q) -> float:
        return self.report(q).merit

    def value_and_grad(self, q) -> tuple[float, np.ndarray]:
        u = self.matrix(q)
        amps, pullback = self.spec.engine.amplitudes_and_pullback(u)
        rep = report_from_amplitudes(amps, self.target, self.penalty, self.spec.merit)
        if rep.degenerate:
            return rep.merit, np.zeros(len(q))
        s, f, c, t = rep.success, rep.fidelity, self.penalty, self.target
        overlap = np.vdot(t, amps)
        # w = dJ/da (Wirtinger)
        if self.spec.merit == "ratio":
            w = amps.conj() + c * (overlap.conjugate() * t.conj() - f * amps.conj()) / s
        else:
            w = (1 + c) * overlap.conjugate() * t.conj() - c * amps.conj()
        g = pullback(w)
        n = self.spec.modes
        if self.spec.mode == "unitary":
            if self.base is not None:
                g = self.base.T @ g
            return rep.merit, exp_map_pullback(q, n, g)
        return rep.merit, contraction_pullback(q, n, g)
