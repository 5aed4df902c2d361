import math

import numpy as np
import pytest

from heckesums.density import (GROUPS, DensityConfig, E_phi, P_star, fejer_pair,
                               one_level_estimate, q_star, rmt_atom, rmt_integral,
                               rmt_integral_fourier, rmt_integral_time, rmt_kernel,
                               rmt_kernel_hat, support_limit)
from heckesums.petersson import PreconditionError


def test_fejer_pair():
    for s in (0.5, 1.0, 2.0):
        phi = fejer_pair(s)
        assert phi.phi_hat(0.0) == 1.0
        assert phi.phi(0.0) == pytest.approx(s)
        y = np.linspace(-3 * s, 3 * s, 301)
        assert np.all(phi.phi_hat(y)[np.abs(y) >= s] == 0)
        assert np.allclose(phi.phi(y), phi.phi(-y))
    with pytest.raises(PreconditionError):
        fejer_pair(0)


def test_E_phi():
    assert E_phi(fejer_pair(1)) == 1.5
    assert E_phi(fejer_pair(2)) == 2.0


def test_kernels():
    assert rmt_kernel("U", 5.3) == 1.0
    assert rmt_kernel("SOeven", 0.0) == 2.0
    for x in (0.0, 0.3, 1.7, 4.25):
        even, odd = rmt_kernel("SOeven", x), rmt_kernel("SOodd", x)
        assert rmt_kernel("O", x) == pytest.approx(0.5 * even + 0.5 * odd)
        assert rmt_kernel("Sp", x) == pytest.approx(odd)
    assert rmt_atom("O") == pytest.approx(0.5 * rmt_atom("SOeven") + 0.5 * rmt_atom("SOodd"))
    assert rmt_kernel_hat("O", 0.2) == (1.0, 0.5)
    assert rmt_kernel_hat("U", 0.2) == (1.0, 0.0)
    with pytest.raises(PreconditionError):
        rmt_kernel("GUE", 0.0)


@pytest.mark.parametrize("sigma", [0.5, 1.0, 1.9])
def test_time_and_fourier_sides_agree(sigma):
    phi = fejer_pair(sigma)
    for g in GROUPS:
        assert rmt_integral_time(g, phi) == pytest.approx(rmt_integral_fourier(g, phi), abs=1e-6)


def test_exact_integrals():
    phi = fejer_pair(1)
    assert rmt_integral("U", phi) == pytest.approx(1.0, abs=1e-10)
    assert rmt_integral("O", phi) == pytest.approx(1.5, abs=1e-10)
    assert rmt_integral("Sp", phi) == pytest.approx(0.5, abs=1e-10)


def test_non_orthogonal_groups_separated_for_small_support():
    phi = fejer_pair(0.8)
    quarter = 0.25 * 0.8
    O = rmt_integral("O", phi)
    for g in ("U", "Sp"):
        assert abs(rmt_integral(g, phi) - O) >= quarter


def test_support_limit():
    assert support_limit(12, 10**6) == pytest.approx(1.7354, abs=1e-3)
    assert support_limit(7, 7) == pytest.approx(4 / 3)
    assert support_limit(4, 10**12) > 1.9
    with pytest.raises(PreconditionError):
        support_limit(1, 1)


def test_config_validation():
    with pytest.raises(PreconditionError):
        DensityConfig(12, 101, 1.6)
    DensityConfig(12, 101, 1.6, strict=False)
    with pytest.raises(PreconditionError):
        DensityConfig(12, 101, 0.5, R=1.0)


def test_empty_prime_sums():
    phi = fejer_pair(1)
    cfg = DensityConfig(12, 101, 0.05, R=10.0)
    assert P_star(cfg, phi).value == 0.0
    assert one_level_estimate(cfg, phi).D1 == E_phi(phi)
    # every prime up to R^u divides N
    cfg = DensityConfig(12, 2 * 3 * 5 * 7, 0.2, R=100.0)
    assert cfg.prime_bound < 11
    assert P_star(cfg, phi).value == 0.0


def test_density_point():
    phi = fejer_pair(1)
    est = one_level_estimate(DensityConfig(12, 101, 0.5), phi)
    assert abs(est.P_star_over_card) < 1
    assert abs(est.D1 - rmt_integral("O", phi)) <= 0.2
    assert abs(est.D1 - rmt_integral("Sp", phi)) >= 0.3
    assert est.P_star.converged


def test_q_star():
    phi = fejer_pair(0.5)
    cfg = DensityConfig(12, 7, 0.5, R=50.0)
    assert q_star(DensityConfig(12, 7, 0.1, R=3.0), 1, 7, fejer_pair(0.5)).value == 0.0
    far = q_star(cfg, 1, 7 * 10**4, phi)
    assert far.in_regime and abs(far.value) <= far.bound < 1e-30
    near = q_star(cfg, 1, 7, phi)
    assert abs(near.value) <= near.bound
    with pytest.raises(PreconditionError):
        q_star(cfg, 1, 5, phi)
