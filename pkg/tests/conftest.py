import numpy as np
import pytest

from flipreduce.matrix import Column, FlipMatrix, ONE, from_columns, from_sets


def random_matrix(rng, n, m, p_unknown=0.2, weights=False):
    """Random 0/1/? matrix with at least one 1 per column."""
    p1 = (1 - p_unknown) / 2
    E = rng.choice([0, 1, 2], size=(n, m), p=[p1, p1, p_unknown]).astype(np.int8)
    for j in range(m):
        if not (E[:, j] == ONE).any():
            E[rng.integers(n), j] = ONE
    w = rng.integers(1, 3, size=m) if weights else np.ones(m, dtype=int)
    return FlipMatrix([f"t{i + 1}" for i in range(n)], [Column(f"c{j + 1}", int(w[j])) for j in range(m)], E)


@pytest.fixture
def conflict3():
    return from_columns(["110", "011"])


@pytest.fixture
def pp4():
    return from_columns(["1111", "1100", "0011"])


@pytest.fixture
def block6():
    return from_sets([{1, 2}, {2, 3}, {4, 5}, {5, 6}], 6)
