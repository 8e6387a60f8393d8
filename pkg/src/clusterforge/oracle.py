"""Built-in self-checks: each fast path against an independent reference."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import permanent as _perm
from .engine import CoincidenceEngine
from .fock import StateVector, enumerate_basis
from .interferometer import random_haar
from .states import (
    HADAMARD,
    bell_product,
    decode_dual_rail,
    encode_dual_rail,
    linear_cluster,
    local_qubit_rotation,
)
from .transform import DualRailLayout, amplitude, apply_full, project_coincidence, projected_output


@dataclass
class Check:
    name: str
    passed: bool
    detail: str


def _rel(a: complex, b: complex) -> float:
    return abs(a - b) / max(1.0, abs(b))


def check_permanent(kernel: Callable, rng: np.random.Generator) -> Check:
    worst = 0.0
    for _ in range(60):
        n = int(rng.integers(1, 8))
        m = rng.uniform(0, 1, (n, n)) * np.exp(2j * np.pi * rng.uniform(0, 1, (n, n)))
        worst = max(worst, _rel(kernel(m), _perm.permanent_naive(m)))
    return Check("permanent ryser vs naive", worst <= 1e-10, f"max rel err {worst:.2e}")


def _distance(a: StateVector, b: StateVector) -> float:
    """Largest amplitude difference, taken before any pruning."""
    keys = set(a) | set(b)
    return max((abs(a[k] - b[k]) for k in keys), default=0.0)


def _random_state(rng, modes: int, photons: int) -> StateVector:
    basis = enumerate_basis(modes, photons)
    amps = rng.normal(size=len(basis)) + 1j * rng.normal(size=len(basis))
    amps /= np.linalg.norm(amps)
    return StateVector(dict(zip(basis, amps)), modes)


def check_homomorphism(rng: np.random.Generator) -> Check:
    worst = 0.0
    for _ in range(5):
        u1, u2 = random_haar(3, rng.integers(2**32)), random_haar(3, rng.integers(2**32))
        psi = _random_state(rng, 3, 2)
        seq = apply_full(u2, apply_full(u1, psi))
        once = apply_full(u1 @ u2, psi)
        worst = max(worst, _distance(seq, once), abs(once.norm_squared() - 1))
    return Check("homomorphism and norm", worst <= 1e-10, f"max deviation {worst:.2e}")


def check_hom() -> Check:
    bs = np.array([[1, 1], [1, -1]]) / math.sqrt(2)
    a11 = amplitude(bs, (1, 1), (1, 1))
    a20 = amplitude(bs, (1, 1), (2, 0))
    err = max(abs(a11), abs(a20 - 1 / math.sqrt(2)))
    return Check("Hong-Ou-Mandel amplitudes", err <= 1e-12, f"<11|B|11>={a11:.3g}, <20|B|11>={a20:.6f}")


def check_projection(rng: np.random.Generator) -> Check:
    layout = DualRailLayout.standard(2)
    worst = 0.0
    for _ in range(10):
        u = random_haar(4, rng.integers(2**32))
        q = rng.normal(size=4) + 1j * rng.normal(size=4)
        psi = encode_dual_rail(q / np.linalg.norm(q), layout)
        fast = projected_output(u, psi, layout)
        slow = project_coincidence(apply_full(u, psi), layout)
        worst = max(worst, _distance(fast, slow))
    return Check("projected_output vs full expansion", worst <= 1e-10, f"max deviation {worst:.2e}")


def check_engine(rng: np.random.Generator) -> Check:
    layout = DualRailLayout.standard(4)
    engine = CoincidenceEngine([((0, 1), bell_product(1)), ((2, 3), bell_product(1))], layout)
    psi = encode_dual_rail(bell_product(2), layout)
    worst = 0.0
    for _ in range(3):
        u = random_haar(8, rng.integers(2**32))
        ref = decode_dual_rail(projected_output(u, psi, layout), layout)
        worst = max(worst, float(np.max(np.abs(engine.amplitudes(u) - ref))))
    return Check("coincidence engine vs permanents", worst <= 1e-10, f"max deviation {worst:.2e}")


def check_morph() -> Check:
    morphed = local_qubit_rotation(bell_product(1), 1, HADAMARD)
    overlap = abs(np.vdot(linear_cluster(2), morphed))
    return Check("Bell pair morphs into C2", bool(overlap >= 1 - 1e-12), f"|overlap| = {overlap:.15f}")


def run_oracles(kernel: Callable | None = None, seed: int = 7) -> list[Check]:
    rng = np.random.default_rng(seed)
    kernel = kernel or _perm.permanent_ryser
    return [
        check_permanent(kernel, rng),
        check_homomorphism(rng),
        check_hom(),
        check_projection(rng),
        check_engine(rng),
        check_morph(),
    ]
