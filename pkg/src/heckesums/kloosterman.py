"""Kloosterman sums S(m, n; c) by direct summation.

The reference path walks the units mod ``c`` one by one with compensated
(Kahan) accumulation of the complex exponentials.  :func:`kloosterman_row`
is an accelerator returning ``S(a, n; c)`` for every residue ``a`` at once via
one FFT; it is checked against the direct path in the test-suite.
"""
from __future__ import annotations

import math

import numba
import numpy as np

from .arith import euler_phi

__all__ = ["mod_inverse", "kloosterman", "kloosterman_complex", "kloosterman_row",
           "MAX_MODULUS"]

# keeps (m mod c) * x below 2**62 in int64 arithmetic
MAX_MODULUS = 2**31 - 1


def mod_inverse(x: int, c: int) -> int:
    """Inverse of ``x`` modulo ``c``, in ``[1, c)`` (``0`` when ``c == 1``)."""
    if c < 1:
        raise ValueError("modulus must be positive")
    g = math.gcd(x, c)
    if g != 1:
        raise ValueError(f"{x} is not invertible mod {c} (gcd {g})")
    return pow(x, -1, c) if c > 1 else 0


@numba.njit(cache=True, nogil=True)
def _inv(x, c):
    # extended Euclid; caller guarantees gcd(x, c) == 1
    r0, r1 = c, x
    t0, t1 = 0, 1
    while r1 != 0:
        q = r0 // r1
        r0, r1 = r1, r0 - q * r1
        t0, t1 = t1, t0 - q * t1
    if t0 < 0:
        t0 += c
    return t0


@numba.njit(cache=True, nogil=True)
def _gcd(a, b):
    while b:
        a, b = b, a % b
    return a


@numba.njit(cache=True, nogil=True)
def _direct(m, n, c):
    m = m % c
    n = n % c
    two_pi_over_c = 2.0 * np.pi / c
    re = 0.0
    im = 0.0
    cre = 0.0
    cim = 0.0
    if c == 1:
        return 1.0, 0.0
    for x in range(1, c):
        if _gcd(x, c) != 1:
            continue
        xbar = _inv(x, c)
        a = (m * x + n * xbar) % c
        t = two_pi_over_c * a
        y = np.cos(t) - cre
        s = re + y
        cre = (s - re) - y
        re = s
        y = np.sin(t) - cim
        s = im + y
        cim = (s - im) - y
        im = s
    return re, im


def _check_modulus(c: int) -> None:
    if c < 1:
        raise ValueError(f"modulus must be positive, got {c}")
    if c > MAX_MODULUS:
        raise OverflowError(f"modulus {c} beyond supported range {MAX_MODULUS}")


def kloosterman_complex(m: int, n: int, c: int) -> complex:
    """The raw complex accumulation (imaginary part is pure round-off)."""
    _check_modulus(c)
    re, im = _direct(int(m) % c, int(n) % c, int(c))
    return complex(re, im)


def kloosterman(m: int, n: int, c: int) -> float:
    """S(m, n; c) as a real number.

    Raises AssertionError if the imaginary residue exceeds ``1e-9 * phi(c)``.
    """
    z = kloosterman_complex(m, n, c)
    if abs(z.imag) > 1e-9 * euler_phi(c):
        raise AssertionError(f"S({m},{n};{c}) has imaginary part {z.imag}")
    return z.real


@numba.njit(cache=True, nogil=True)
def _unit_phases(n, c):
    v = np.zeros(c, dtype=np.complex128)
    if c == 1:
        v[0] = 1.0
        return v
    n = n % c
    w = 2.0 * np.pi / c
    for x in range(1, c):
        if _gcd(x, c) == 1:
            t = w * ((n * _inv(x, c)) % c)
            v[x] = complex(np.cos(t), np.sin(t))
    return v


def kloosterman_row(n: int, c: int) -> np.ndarray:
    """``S(a, n; c)`` for ``a = 0, ..., c-1`` (real array of length ``c``).

    ``S(a, n; c) = sum_x v[x] e(a x / c)`` with ``v[x] = e(n xbar / c)`` on
    units, i.e. an inverse DFT of ``v``.
    """
    _check_modulus(c)
    v = _unit_phases(int(n) % c, int(c))
    row = np.fft.ifft(v) * c
    return row.real
