"""Independent ground truth: Ramanujan tau and dimensions of cusp-form spaces."""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache

import gmpy2

from .arith import IntLike, as_factored, divisors, moebius
from .petersson import PreconditionError

__all__ = ["ramanujan_tau", "euler_function_coefficients", "poly_mul",
           "dim_cusp", "newform_dim", "epsilon2", "epsilon3", "cusp_count"]

MAX_TAU_BOUND = 10**5


def euler_function_coefficients(B: int) -> list:
    """Coefficients of ``prod_{m>=1} (1 - q^m)`` up to ``q^B`` (pentagonal numbers)."""
    c = [0] * (B + 1)
    c[0] = 1
    j = 1
    while True:
        sign = -1 if j % 2 else 1
        g1 = j * (3 * j - 1) // 2
        g2 = j * (3 * j + 1) // 2
        if g1 > B:
            break
        c[g1] += sign
        if g2 <= B:
            c[g2] += sign
        j += 1
    return c


def poly_mul(a: list, b: list, B: int) -> list:
    """Exact product of integer polynomials truncated at degree ``B``.

    Kronecker substitution: pack each polynomial into one big integer with a
    fixed number of bytes per slot, multiply once, and unpack signed digits.
    """
    a, b = a[: B + 1], b[: B + 1]
    bound = max(map(abs, a), default=0) * max(map(abs, b), default=0) * min(len(a), len(b))
    width = (bound.bit_length() + 2 + 7) // 8
    prod = _pack(a, width) * _pack(b, width)
    return _unpack(prod, width, B + 1)


def _pack(coeffs, width):
    pos = b"".join(max(c, 0).to_bytes(width, "little") for c in coeffs)
    neg = b"".join(max(-c, 0).to_bytes(width, "little") for c in coeffs)
    return gmpy2.mpz(int.from_bytes(pos, "little")) - gmpy2.mpz(int.from_bytes(neg, "little"))


def _unpack(value, width, count):
    # add half to every slot so all digits become non-negative, then split bytes
    half = 1 << (8 * width - 1)
    bias = int.from_bytes(half.to_bytes(width, "little") * count, "little")
    nbytes = width * count
    # drop slots beyond the truncation degree (two's complement wrap is harmless)
    shifted = gmpy2.f_mod_2exp(gmpy2.mpz(value) + bias, 8 * nbytes)
    raw = int(shifted).to_bytes(nbytes, "little")
    return [int.from_bytes(raw[i * width:(i + 1) * width], "little") - half
            for i in range(count)]


@lru_cache(maxsize=8)
def _tau_table(B: int) -> tuple:
    e = euler_function_coefficients(B)
    e2 = poly_mul(e, e, B)
    e4 = poly_mul(e2, e2, B)
    e8 = poly_mul(e4, e4, B)
    e16 = poly_mul(e8, e8, B)
    e24 = poly_mul(e16, e8, B)
    # tau(n) is the coefficient of q^(n-1) in prod (1 - q^m)^24
    return (0,) + tuple(e24[:B])


def ramanujan_tau(B: int) -> dict:
    """``{n: tau(n)}`` for ``1 <= n <= B`` from the q-expansion of Delta."""
    if B < 1:
        return {}
    if B > MAX_TAU_BOUND:
        raise PreconditionError(f"tau table bound {B} exceeds {MAX_TAU_BOUND}")
    table = _tau_table(int(B))
    return {n: table[n] for n in range(1, B + 1)}


def _kronecker_minus1(p: int) -> int:
    if p == 2:
        return 0
    return 1 if p % 4 == 1 else -1


def _kronecker_minus3(p: int) -> int:
    if p == 3:
        return 0
    if p == 2:
        return -1
    return 1 if p % 3 == 1 else -1


def epsilon2(N: IntLike) -> int:
    """Number of elliptic points of order 2 of Gamma_0(N)."""
    N = as_factored(N)
    if N.value % 4 == 0:
        return 0
    out = 1
    for p in N.primes:
        out *= 1 + _kronecker_minus1(p)
    return out


def epsilon3(N: IntLike) -> int:
    """Number of elliptic points of order 3 of Gamma_0(N)."""
    N = as_factored(N)
    if N.value % 9 == 0:
        return 0
    out = 1
    for p in N.primes:
        out *= 1 + _kronecker_minus3(p)
    return out


def cusp_count(N: IntLike) -> int:
    """``sum_{d | N} phi(gcd(d, N/d))``."""
    from math import gcd

    from .arith import euler_phi

    N = as_factored(N)
    return sum(euler_phi(gcd(d.value, N.value // d.value)) for d in divisors(N))


def _check_weight(k: int) -> None:
    if k % 2 or k < 4:
        raise PreconditionError(f"dimension formulas need even k >= 4, got {k}")


def dim_cusp(k: int, N: IntLike) -> int:
    """dim S_k(Gamma_0(N)) for even ``k >= 4`` (genus formula)."""
    from .arith import nu

    _check_weight(k)
    N = as_factored(N)
    index = nu(N)
    e2, e3, cusps = epsilon2(N), epsilon3(N), cusp_count(N)
    genus = 1 + Fraction(index, 12) - Fraction(e2, 4) - Fraction(e3, 3) - Fraction(cusps, 2)
    dim = (k - 1) * (genus - 1) + (k // 2 - 1) * cusps + (k // 4) * e2 + (k // 3) * e3
    assert dim.denominator == 1 and dim >= 0, (k, N.value, dim)
    return int(dim)


def _mu_mu(n) -> int:
    # Dirichlet inverse of the divisor function tau = 1 * 1
    return sum(moebius(d) * moebius(n.value // d.value) for d in divisors(n))


@lru_cache(maxsize=4096)
def newform_dim(k: int, N: IntLike) -> int:
    """|H_k^*(N)| by inverting ``dim S_k(N) = sum_{LM=N} tau(L) |H_k^*(M)|``."""
    _check_weight(k)
    N = as_factored(N)
    total = 0
    for L in divisors(N):
        coeff = _mu_mu(L)
        if coeff:
            total += coeff * dim_cusp(k, N // L)
    if total < 0:
        raise AssertionError(f"negative newform count {total} at k={k}, N={N.value}")
    return total
