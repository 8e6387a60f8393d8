import math

import numpy as np
import pytest

from clusterforge.experiment import ExperimentSpec
from clusterforge.fock import StateVector
from clusterforge.interferometer import random_haar
from clusterforge.objectives import (
    DegenerateOutputError,
    Merit,
    evaluate,
    evaluate_matrix,
    fidelity,
    fubini_study,
    merit_value,
    projected_state,
    success,
)
from clusterforge.optimizer import finite_diff_gradient
from clusterforge.states import encode_dual_rail
from clusterforge.transform import projected_output

C2 = ExperimentSpec(name="c2", input="plus:2", target="cluster:2")


def sv(d):
    return StateVector(d, 2)


def test_fidelity_examples():
    t = sv({(1, 0): 1})
    assert fidelity(sv({(1, 0): 0.5j}), t) == pytest.approx(1)
    assert fidelity(sv({(0, 1): 1}), t) == 0
    assert fidelity(sv({(1, 0): 1, (0, 1): 1}), t) == pytest.approx(0.5)


def test_fidelity_of_zero_output():
    with pytest.raises(DegenerateOutputError):
        fidelity(sv({}), sv({(1, 0): 1}))


def test_fidelity_scale_and_phase_invariant():
    rng = np.random.default_rng(0)
    out = sv({(1, 0): 0.3 + 0.1j, (0, 1): -0.7j})
    t = sv({(1, 0): 1, (0, 1): 1j})
    f = fidelity(out, t)
    for _ in range(5):
        k = rng.uniform(0.1, 5) * np.exp(1j * rng.uniform(0, 6.3))
        assert fidelity(out.scaled(k), t) == pytest.approx(f)


def test_success_and_distance():
    out = sv({(1, 0): 0.6, (0, 1): 0.0})
    assert success(out) == pytest.approx(0.36)
    assert fubini_study(out, sv({(1, 0): 1})) == pytest.approx(0, abs=1e-7)
    assert fubini_study(sv({(0, 1): 1}), sv({(1, 0): 1})) == pytest.approx(math.pi / 2)


def test_merit_forms_agree_at_unit_fidelity():
    for form in ("ratio", "overlap"):
        assert merit_value(0.3, 1.0, 50.0, form) == pytest.approx(0.3)
    assert merit_value(0.5, 0.9, 2.0, "ratio") == pytest.approx(0.5 - 0.2)
    assert merit_value(0.5, 0.9, 2.0, "overlap") == pytest.approx(0.45 - 0.1)
    with pytest.raises(ValueError):
        merit_value(0.5, 0.5, 1.0, "other")


def test_identity_on_c2_product():
    rep = evaluate_matrix(np.eye(4), C2)
    assert rep.success == pytest.approx(1)
    assert rep.fidelity == pytest.approx(0.25)


def test_report_recomputes_merit():
    p = np.random.default_rng(1).normal(size=16)
    for form in ("ratio", "overlap"):
        spec = C2.replace(merit=form)
        rep = evaluate(p, spec, penalty=3.0)
        assert rep.merit == pytest.approx(merit_value(rep.success, rep.fidelity, 3.0, form))


def test_engine_state_matches_permanent_path():
    u = random_haar(4, 3)
    fast = projected_state(u, C2)
    slow = projected_output(u, encode_dual_rail(C2.input_qubits(), C2.layout), C2.layout)
    assert max(abs(fast[k] - slow[k]) for k in set(fast) | set(slow)) <= 1e-12


def richardson(obj, p, h=1e-3):
    g = np.zeros_like(p)
    for k in range(len(p)):
        e = np.zeros_like(p)
        e[k] = 1

        def d(step):
            return (obj(p + step * e) - obj(p - step * e)) / (2 * step)

        g[k] = (4 * d(h / 2) - d(h)) / 3
    return g


@pytest.mark.parametrize("form", ["ratio", "overlap"])
@pytest.mark.parametrize("mode", ["unitary", "contraction"])
def test_gradient_matches_richardson(form, mode):
    spec = C2.replace(merit=form, mode=mode)
    p = np.random.default_rng(2).normal(size=spec.param_length) * (0.3 if mode == "contraction" else 1)
    merit = Merit(spec, 2.5)
    _, g = merit.value_and_grad(p)
    oracle = richardson(merit.value, p)
    assert np.max(np.abs(g - oracle)) <= 1e-5
    assert np.max(np.abs(finite_diff_gradient(merit.value, p) - oracle)) <= 1e-5


def test_recentred_gradient():
    base = random_haar(4, 8)
    merit = Merit(C2, 4.0, base)
    q = np.random.default_rng(3).normal(size=16) * 0.2
    _, g = merit.value_and_grad(q)
    assert np.max(np.abs(g - richardson(merit.value, q))) <= 1e-5
