import math
import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from heckesums.kloosterman import (MAX_MODULUS, kloosterman, kloosterman_complex,
                                   kloosterman_row, mod_inverse)


def test_known_values():
    assert kloosterman(1, 1, 3) == pytest.approx(-1.0, abs=1e-12)
    assert kloosterman(2, 3, 5) == pytest.approx(0.3819660112501051, abs=1e-12)
    assert kloosterman(5, 7, 1) == 1.0


def test_ramanujan_sum_special_case():
    # S(0, n; c) is the Ramanujan sum; for n = 1 it equals mu(c)
    from heckesums.arith import moebius
    for c in range(1, 60):
        assert kloosterman(0, 1, c) == pytest.approx(moebius(c), abs=1e-9)


def test_mod_inverse():
    assert mod_inverse(3, 7) == 5
    assert mod_inverse(1, 1) == 0
    with pytest.raises(ValueError):
        mod_inverse(4, 6)


def test_bad_modulus():
    with pytest.raises(ValueError):
        kloosterman(1, 1, 0)
    with pytest.raises(OverflowError):
        kloosterman_complex(1, 1, MAX_MODULUS + 1)


@given(st.integers(0, 10**9), st.integers(0, 10**9), st.integers(1, 600))
@settings(max_examples=150, deadline=None)
def test_real_symmetric_periodic(m, n, c):
    z = kloosterman_complex(m, n, c)
    assert abs(z.imag) <= 1e-9 * max(1, c)
    assert z.real == pytest.approx(kloosterman(n, m, c), abs=1e-8)
    assert z.real == pytest.approx(kloosterman(m + 3 * c, n, c), abs=1e-8)


@pytest.mark.parametrize("c", [1, 2, 7, 12, 97, 360, 1001])
def test_row_matches_direct(c):
    rng = random.Random(c)
    n = rng.randint(1, 10**6)
    row = kloosterman_row(n, c)
    direct = np.array([kloosterman(a, n, c) for a in range(c)])
    assert np.max(np.abs(row - direct)) < 1e-9
