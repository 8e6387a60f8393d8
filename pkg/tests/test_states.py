import math

import numpy as np
import pytest

from clusterforge.states import (
    HADAMARD,
    Recipe,
    bell_product,
    decode_dual_rail,
    encode_dual_rail,
    linear_cluster,
    local_qubit_rotation,
    plus_product,
)
from clusterforge.transform import DualRailLayout


def test_c3_sign_pattern():
    assert np.allclose(linear_cluster(3) * math.sqrt(8), [1, 1, 1, -1, 1, 1, -1, 1])


def test_c4_sign_pattern():
    signs = np.sign(linear_cluster(4).real).astype(int)
    assert list(signs) == [1, 1, 1, -1, 1, 1, -1, 1, 1, 1, 1, -1, -1, -1, 1, -1]


@pytest.mark.parametrize("n", range(2, 9))
def test_cluster_normalised(n):
    assert np.linalg.norm(linear_cluster(n)) == pytest.approx(1)


def test_bell_and_plus():
    assert np.allclose(bell_product(1), np.array([1, 0, 0, 1]) / math.sqrt(2))
    assert np.allclose(plus_product(2), np.full(4, 0.5))
    assert bell_product(3).shape == (64,)


def test_morph_bell_into_c2():
    morphed = local_qubit_rotation(bell_product(1), 1, HADAMARD)
    assert abs(np.vdot(linear_cluster(2), morphed)) >= 1 - 1e-12


def test_local_rotation_rejects_non_unitary():
    with pytest.raises(ValueError):
        local_qubit_rotation(plus_product(2), 0, np.ones((2, 2)))


def test_dual_rail_isometry():
    layout = DualRailLayout.standard(3)
    rng = np.random.default_rng(0)
    q = rng.normal(size=8) + 1j * rng.normal(size=8)
    q /= np.linalg.norm(q)
    psi = encode_dual_rail(q, layout)
    assert psi.norm_squared() == pytest.approx(1)
    assert np.allclose(decode_dual_rail(psi, layout), q)
    assert psi[(1, 0, 1, 0, 1, 0)] == pytest.approx(q[0])
    assert psi[(0, 1, 0, 1, 0, 1)] == pytest.approx(q[7])


def test_recipe_parse():
    r = Recipe.parse("bell:2")
    assert r.qubits == 4 and np.allclose(r.build(), bell_product(2))
    assert Recipe.parse("cluster:3").qubits == 3
    for bad in ("bell", "ghz:2", "plus:0", "plus:x"):
        with pytest.raises(ValueError):
            Recipe.parse(bad)


def test_recipe_factors_rebuild_state():
    for text in ("plus:3", "bell:2"):
        r = Recipe.parse(text)
        full = np.ones(1)
        for _, vec in r.factors():
            full = np.kron(full, vec)
        assert np.allclose(full, r.build())


def test_custom_recipe():
    r = Recipe.parse("custom:1, 0, 0, 1j")
    assert r.qubits == 2
    assert np.allclose(r.build(), np.array([1, 0, 0, 1j]) / math.sqrt(2))
    assert Recipe.parse(str(r)) == r
    for bad in ("custom:1,0,0", "custom:0,0", "custom:1,x"):
        with pytest.raises(ValueError):
            Recipe.parse(bad)
