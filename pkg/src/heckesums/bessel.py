"""Bessel functions J_nu of integer order, without external special functions.

Small arguments (``x <= max(12, nu/2)``) use the power series; larger ones use
Miller's backward recurrence normalised by ``J_0 + 2 sum_k J_2k = 1``.
"""
from __future__ import annotations

import math

import numba
import numpy as np

__all__ = ["bessel_j", "bessel_j_many", "bessel_j_bound", "log_bessel_j_bound",
           "bessel_j_bound_flagged", "MAX_ORDER"]

MAX_ORDER = 10_000
_LOG_TINY = -744.0  # below this exp() underflows to zero/denormals
_BIG = 1e250


@numba.njit(cache=True, nogil=True)
def _series(nu, x):
    if x == 0.0:
        return 1.0 if nu == 0 else 0.0
    h = 0.5 * x
    log_lead = nu * math.log(h) - math.lgamma(nu + 1.0)
    if log_lead < _LOG_TINY:
        return 0.0
    term = math.exp(log_lead)
    total = term
    comp = 0.0
    h2 = h * h
    j = 0
    while True:
        term = -term * h2 / ((j + 1.0) * (j + 1.0 + nu))
        j += 1
        y = term - comp
        s = total + y
        comp = (s - total) - y
        total = s
        if j > h and abs(term) <= 1e-18 * abs(total):
            break
        if term == 0.0:
            break
    return total


@numba.njit(cache=True, nogil=True)
def _miller(nu, x):
    top = max(nu, int(x)) + 30 + int(math.sqrt(200.0 * max(nu, x)))
    top += top % 2
    tox = 2.0 / x
    bjp = 0.0
    bj = 1.0
    ans = 0.0
    s = 0.0
    jsum = False
    for j in range(top, 0, -1):
        bjm = j * tox * bj - bjp
        bjp = bj
        bj = bjm
        if abs(bj) > _BIG:
            bj /= _BIG
            bjp /= _BIG
            ans /= _BIG
            s /= _BIG
        if jsum:
            s += bj
        jsum = not jsum
        if j == nu:
            ans = bjp
    s = 2.0 * s - bj
    if nu == 0:
        ans = bj
    return ans / s


@numba.njit(cache=True, nogil=True)
def _bessel_j(nu, x):
    if x <= max(12.0, 0.5 * nu):
        return _series(nu, x)
    return _miller(nu, x)


@numba.njit(cache=True, nogil=True)
def _bessel_j_many(nu, xs):
    out = np.empty(xs.shape[0])
    for i in range(xs.shape[0]):
        out[i] = _bessel_j(nu, xs[i])
    return out


def _check(nu: int, x: float) -> None:
    if nu < 0 or nu > MAX_ORDER or int(nu) != nu:
        raise ValueError(f"order must be an integer in [0, {MAX_ORDER}], got {nu}")
    if not math.isfinite(x):
        raise ValueError(f"argument must be finite, got {x}")
    if x < 0:
        raise ValueError(f"negative argument {x} outside the domain")


def bessel_j(nu: int, x: float) -> float:
    """J_nu(x) for integer ``0 <= nu <= 10**4`` and finite ``x >= 0``."""
    _check(nu, x)
    return float(_bessel_j(int(nu), float(x)))


def bessel_j_many(nu: int, xs) -> np.ndarray:
    """Vectorised :func:`bessel_j` over a 1-d array of arguments."""
    xs = np.ascontiguousarray(xs, dtype=np.float64)
    if xs.size:
        _check(nu, float(xs.min()))
        if not np.all(np.isfinite(xs)):
            raise ValueError("arguments must be finite")
    return _bessel_j_many(int(nu), xs.ravel()).reshape(xs.shape)


def log_bessel_j_bound(nu: int, x: float) -> float:
    """``log((x/2)^nu / nu!)``; ``-inf`` at ``x = 0``."""
    if nu < 1:
        raise ValueError("the bound is stated for nu >= 1")
    if x < 0:
        raise ValueError(f"negative argument {x}")
    if x == 0:
        return -math.inf
    return nu * math.log(0.5 * x) - math.lgamma(nu + 1)


def bessel_j_bound_flagged(nu: int, x: float) -> tuple:
    """``(bound, underflowed)`` where ``bound >= |J_nu(x)|``.

    When the bound is below the normal double range it is flushed to 0.0 and
    ``underflowed`` is True.
    """
    lg = log_bessel_j_bound(nu, x)
    if lg == -math.inf:
        return 0.0, False
    if lg < -708.0:
        return 0.0, True
    return math.exp(lg), False


def bessel_j_bound(nu: int, x: float) -> float:
    """Upper bound ``(x/2)^nu / nu!`` for ``|J_nu(x)|``, valid for all ``x >= 0``."""
    return bessel_j_bound_flagged(nu, x)[0]
