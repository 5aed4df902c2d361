"""Exact multiplicative arithmetic on factored integers.

Everything downstream (levels, divisors, moduli) is passed around as a
:class:`FactoredInteger` so that multiplicative functions are evaluated
prime by prime without refactoring.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import Iterator, Tuple, Union

__all__ = [
    "FactoredInteger", "as_factored", "factor", "is_prime", "primes_up_to",
    "divisors", "moebius", "euler_phi", "divisor_count_tau", "tau3", "nu",
    "squarefull_split", "frak_p", "chi0", "sigma_twisted", "alpha", "beta",
    "eta", "eta_convolution", "artin_constant",
]

MAX_INT = 2**63 - 1

_SMALL_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


@dataclass(frozen=True)
class FactoredInteger:
    """A positive integer together with its prime factorization.

    ``factors`` holds ``(p, e)`` pairs with strictly increasing primes and
    exponents at least one; ``FactoredInteger(1, ())`` is the empty product.
    """

    value: int
    factors: Tuple[Tuple[int, int], ...] = ()

    def __post_init__(self):
        prod = 1
        last = 1
        for p, e in self.factors:
            if p <= last or e < 1:
                raise ValueError(f"malformed factorization {self.factors!r}")
            last = p
            prod *= p**e
        if prod != self.value:
            raise ValueError(f"factors {self.factors!r} do not multiply to {self.value}")

    def __int__(self) -> int:
        return self.value

    def __index__(self) -> int:
        return self.value

    def __repr__(self) -> str:
        return f"FactoredInteger({self.value}, {list(self.factors)})"

    @property
    def primes(self) -> Tuple[int, ...]:
        return tuple(p for p, _ in self.factors)

    def exponent(self, p: int) -> int:
        for q, e in self.factors:
            if q == p:
                return e
        return 0

    def __mul__(self, other: "FactoredInteger") -> "FactoredInteger":
        other = as_factored(other)
        exps = dict(self.factors)
        for p, e in other.factors:
            exps[p] = exps.get(p, 0) + e
        return FactoredInteger(self.value * other.value, tuple(sorted(exps.items())))

    def __floordiv__(self, other: "FactoredInteger") -> "FactoredInteger":
        other = as_factored(other)
        exps = dict(self.factors)
        for p, e in other.factors:
            left = exps.get(p, 0) - e
            if left < 0:
                raise ValueError(f"{other.value} does not divide {self.value}")
            if left:
                exps[p] = left
            else:
                del exps[p]
        return FactoredInteger(self.value // other.value, tuple(sorted(exps.items())))

    @classmethod
    def from_factors(cls, factors) -> "FactoredInteger":
        factors = tuple(sorted((int(p), int(e)) for p, e in factors if e))
        value = 1
        for p, e in factors:
            value *= p**e
        return cls(value, factors)


IntLike = Union[int, FactoredInteger]


def as_factored(n: IntLike) -> FactoredInteger:
    if isinstance(n, FactoredInteger):
        return n
    return factor(int(n))


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, exact for n < 3.3e24."""
    if n < 2:
        return False
    for p in _SMALL_PRIMES:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _SMALL_PRIMES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _pollard_brent(n: int) -> int:
    if n % 2 == 0:
        return 2
    rng = random.Random(n)
    while True:
        y, c, m = rng.randrange(1, n), rng.randrange(1, n), 128
        g = r = q = 1
        while g == 1:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            k = 0
            while k < r and g == 1:
                ys = y
                for _ in range(min(m, r - k)):
                    y = (y * y + c) % n
                    q = q * abs(x - y) % n
                g = math.gcd(q, n)
                k += m
            r *= 2
        if g == n:
            g = 1
            while g == 1:
                ys = (ys * ys + c) % n
                g = math.gcd(abs(x - ys), n)
        if g != n:
            return g


def _split(n: int, out: dict) -> None:
    if n == 1:
        return
    if is_prime(n):
        out[n] = out.get(n, 0) + 1
        return
    d = _pollard_brent(n)
    _split(d, out)
    _split(n // d, out)


@lru_cache(maxsize=65536)
def factor(n: int) -> FactoredInteger:
    """Factor ``1 <= n <= 2**63 - 1``.

    Trial division by primes below 1000, then Miller-Rabin on the cofactor and
    Pollard-Brent splitting if it is composite.
    """
    n = int(n)
    if n < 1:
        raise ValueError(f"factor() needs a positive integer, got {n}")
    if n > MAX_INT:
        raise ValueError(f"{n} exceeds the supported range 2**63-1")
    exps: dict = {}
    m = n
    for p in _trial_primes():
        if p * p > m:
            break
        if m % p == 0:
            e = 0
            while m % p == 0:
                m //= p
                e += 1
            exps[p] = e
    else:
        if m > 1:
            _split(m, exps)
            m = 1
    if m > 1:
        exps[m] = exps.get(m, 0) + 1
    return FactoredInteger(n, tuple(sorted(exps.items())))


@lru_cache(maxsize=1)
def _trial_primes() -> Tuple[int, ...]:
    return tuple(primes_up_to(1000))


def primes_up_to(x: float) -> list:
    """Primes ``p <= x`` by a plain sieve of Eratosthenes."""
    n = int(math.floor(x))
    if n < 2:
        return []
    sieve = bytearray([1]) * (n + 1)
    sieve[0] = sieve[1] = 0
    for p in range(2, math.isqrt(n) + 1):
        if sieve[p]:
            sieve[p * p :: p] = bytearray(len(range(p * p, n + 1, p)))
    return [i for i, flag in enumerate(sieve) if flag]


def divisors(n: IntLike) -> Iterator[FactoredInteger]:
    """All divisors of ``n`` as factored integers (unordered)."""
    n = as_factored(n)
    ranges = [range(e + 1) for _, e in n.factors]
    for exps in product(*ranges):
        yield FactoredInteger.from_factors(zip(n.primes, exps))


def moebius(n: IntLike) -> int:
    n = as_factored(n)
    if any(e > 1 for _, e in n.factors):
        return 0
    return -1 if len(n.factors) % 2 else 1


def euler_phi(n: IntLike) -> int:
    out = 1
    for p, e in as_factored(n).factors:
        out *= (p - 1) * p ** (e - 1)
    return out


def divisor_count_tau(n: IntLike) -> int:
    out = 1
    for _, e in as_factored(n).factors:
        out *= e + 1
    return out


def tau3(n: IntLike) -> int:
    """Number of ordered factorizations ``n = abc``."""
    out = 1
    for _, e in as_factored(n).factors:
        out *= (e + 1) * (e + 2) // 2
    return out


def nu(N: IntLike) -> int:
    """Index of Gamma_0(N) in SL_2(Z): ``N * prod_{p|N} (1 + 1/p)``."""
    N = as_factored(N)
    out = Fraction(N.value)
    for p in N.primes:
        out *= Fraction(p + 1, p)
    assert out.denominator == 1
    return int(out)


def squarefull_split(d: IntLike) -> Tuple[FactoredInteger, FactoredInteger]:
    """Split ``d = d1 * d2`` with d1 square-free, d2 square-full, coprime."""
    d = as_factored(d)
    d1 = FactoredInteger.from_factors((p, e) for p, e in d.factors if e == 1)
    d2 = FactoredInteger.from_factors((p, e) for p, e in d.factors if e >= 2)
    return d1, d2


def frak_p(L: IntLike, M: IntLike) -> FactoredInteger:
    """The part of L supported on primes dividing M."""
    L, M = as_factored(L), as_factored(M)
    shared = set(M.primes)
    return FactoredInteger.from_factors((p, e) for p, e in L.factors if p in shared)


def chi0(M: IntLike, n: int) -> int:
    """Principal character mod M.  Uses gcd(0, M) = M, so chi0(M, 0) = [M == 1]."""
    return 1 if math.gcd(int(n), int(M)) == 1 else 0


def sigma_twisted(b: IntLike, M: IntLike) -> Fraction:
    """``sum_{r | b} chi0_M(r) / r``, exactly."""
    b = as_factored(b)
    M = int(M)
    out = Fraction(1)
    for p, e in b.factors:
        if M % p == 0:
            continue  # only r = 1 survives at this prime
        out *= sum(Fraction(1, p**j) for j in range(e + 1))
    return out


def alpha(c: IntLike, M: IntLike) -> Fraction:
    """``sum_{b | c} chi0_M(b) mu(b) / b^2``."""
    c = as_factored(c)
    M = int(M)
    out = Fraction(1)
    for p, _ in c.factors:
        if M % p:
            out *= 1 - Fraction(1, p * p)
    return out


def beta(c: IntLike, M: IntLike) -> Fraction:
    """``sum_{b | c} chi0_M(b) mu(b)^2 / b``."""
    c = as_factored(c)
    M = int(M)
    out = Fraction(1)
    for p, _ in c.factors:
        if M % p:
            out *= 1 + Fraction(1, p)
    return out


def _eta_prime_power(p: int, v: int) -> Fraction:
    q = Fraction(1, p)
    if v == 1:
        return p * (1 - q)
    if v == 2:
        return p * p * (1 - q - q * q)
    return p**v * (1 - q * q) * (1 - q)


def eta(N: IntLike) -> int:
    """Main-term density of newforms: ``|H_k^*(N)| ~ (k-1)/12 * eta(N)``.

    Evaluated from the prime-power closed form.
    """
    out = Fraction(1)
    for p, v in as_factored(N).factors:
        out *= _eta_prime_power(p, v)
    assert out.denominator == 1, f"eta({int(N)}) is not integral: {out}"
    return int(out)


def _g(M: FactoredInteger) -> int:
    # M / zeta_{M''}(2) = M * prod_{p^2 | M} (1 - p^-2); integral because p^2 | M
    out = M.value
    for p, e in M.factors:
        if e >= 2:
            out = out // (p * p) * (p * p - 1)
    return out


def eta_convolution(N: IntLike) -> int:
    """``eta`` by the defining divisor sum ``sum_{LM=N} mu(L) g(M)``, exactly."""
    N = as_factored(N)
    total = 0
    for L in divisors(N):
        mu = moebius(L)
        if mu:
            total += mu * _g(N // L)
    return total


def _prime_zeta(s: int, dps: int):
    import mpmath

    with mpmath.workdps(dps):
        return mpmath.primezeta(s)


@lru_cache(maxsize=4)
def artin_constant(tol: float = 1e-12) -> float:
    """``prod_p (1 - 1/(p^2 - p))`` to absolute error below ``tol``.

    Primes below 1000 are multiplied in directly; the remaining tail is
    expanded as ``log(1 - x^2/(1-x)) = sum_j c_j x^j`` in ``x = 1/p`` and
    resummed with prime zeta values ``P(j) - sum_{p<1000} p^-j``.
    """
    import mpmath

    cut = 1000
    small = primes_up_to(cut)
    with mpmath.workdps(40):
        log_head = mpmath.fsum(mpmath.log(1 - mpmath.mpf(1) / (p * p - p)) for p in small)
        # power series of log(1 - x^2/(1 - x)) = log(1 - x - x^2) - log(1 - x)
        jmax = 2
        while mpmath.mpf(2) ** jmax / mpmath.mpf(cut) ** (jmax - 1) > tol * 1e-3:
            jmax += 1
        coeffs = [mpmath.mpf(0)] * (jmax + 1)
        # log(1 - x - x^2): roots phi, -1/phi -> -sum_j (phi^j + (-1/phi)^j) x^j / j
        phi = (1 + mpmath.sqrt(5)) / 2
        for j in range(1, jmax + 1):
            coeffs[j] = -(phi**j + (-1 / phi) ** j) / j + mpmath.mpf(1) / j
        log_tail = mpmath.mpf(0)
        for j in range(2, jmax + 1):
            pz = _prime_zeta(j, 40) - mpmath.fsum(mpmath.mpf(p) ** (-j) for p in small)
            log_tail += coeffs[j] * pz
        return float(mpmath.exp(log_head + log_tail))
