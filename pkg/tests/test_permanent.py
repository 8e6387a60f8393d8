import numpy as np
import pytest

from clusterforge.fock import DimensionError
from clusterforge.permanent import permanent_naive, permanent_ryser


def unit_disk(rng, n):
    return rng.uniform(0, 1, (n, n)) * np.exp(2j * np.pi * rng.uniform(0, 1, (n, n)))


@pytest.mark.parametrize("perm", [permanent_naive, permanent_ryser])
def test_small_examples(perm):
    assert perm([[1]]) == 1
    a, b, c, d = 2 + 1j, -1, 0.5j, 3
    assert perm([[a, b], [c, d]]) == pytest.approx(a * d + b * c)
    assert perm(np.eye(4)) == pytest.approx(1)
    assert perm(np.ones((3, 3))) == pytest.approx(6)


@pytest.mark.parametrize("perm", [permanent_naive, permanent_ryser])
def test_non_square_rejected(perm):
    with pytest.raises(DimensionError):
        perm(np.ones((2, 3)))


def test_ryser_matches_naive_6x6():
    m = unit_disk(np.random.default_rng(6), 6)
    assert abs(permanent_ryser(m) - permanent_naive(m)) <= 1e-10 * max(1, abs(permanent_naive(m)))


def test_ryser_matches_naive_random():
    rng = np.random.default_rng(11)
    for _ in range(50):
        n = int(rng.integers(1, 8))
        m = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        ref = permanent_naive(m)
        assert abs(permanent_ryser(m) - ref) <= 1e-10 * max(1, abs(ref))


def test_row_permutation_and_transpose_invariance():
    rng = np.random.default_rng(5)
    m = unit_disk(rng, 5)
    p = permanent_ryser(m)
    assert permanent_ryser(m[rng.permutation(5)]) == pytest.approx(p, abs=1e-12)
    assert permanent_ryser(m.T) == pytest.approx(p, abs=1e-12)


def test_zero_row_gives_zero():
    m = unit_disk(np.random.default_rng(2), 5)
    m[3] = 0
    assert permanent_ryser(m) == 0
