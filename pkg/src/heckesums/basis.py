"""Local data of a newform and the orthonormal-basis coefficients built on it.

A newform ``f`` of level ``M`` is represented only through its Hecke
eigenvalues at the primes a computation needs.  Everything here is
multiplicative and evaluated prime by prime.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Mapping, Optional

from .arith import (FactoredInteger, IntLike, alpha, as_factored, beta, chi0,
                    divisor_count_tau, divisors, moebius, sigma_twisted,
                    squarefull_split)
from .petersson import PreconditionError

__all__ = ["NewformLocalData", "MissingEigenvalueError", "hecke_lambda",
           "lambda_prime_power", "mu_f",
           "r_f", "rho_f", "xi", "xi_one_sum_direct", "xi_one_sum_closed",
           "z_local", "z_N", "fd_coefficient", "MAX_DIVISORS"]

MAX_DIVISORS = 10**6
_RAMIFIED_TOL = 1e-12


class MissingEigenvalueError(PreconditionError, KeyError):
    """lambda_f(p) was needed but not supplied."""

    def __str__(self):
        return str(self.args[0]) if self.args else ""


@dataclass(frozen=True)
class NewformLocalData:
    """Hecke eigenvalues ``lambda_f(p)`` of a newform of weight ``k``, level ``level``.

    At ``p || level`` the value must satisfy ``lambda^2 = 1/p``, at
    ``p^2 | level`` it must vanish, and elsewhere ``|lambda| <= 2`` unless
    ``deligne=False`` (synthetic spectra used for algebraic checks).
    """

    k: int
    level: FactoredInteger
    lambda_items: tuple
    deligne: bool = True

    def __init__(self, k: int, level: IntLike, lambda_p: Mapping[int, float],
                 deligne: bool = True):
        level = as_factored(level)
        items = tuple(sorted((int(p), float(v)) for p, v in lambda_p.items()))
        object.__setattr__(self, "k", int(k))
        object.__setattr__(self, "level", level)
        object.__setattr__(self, "lambda_items", items)
        object.__setattr__(self, "deligne", bool(deligne))
        self._validate()

    def _validate(self) -> None:
        if self.k % 2 or self.k < 2:
            raise PreconditionError(f"weight must be even and positive, got {self.k}")
        for p, lam in self.lambda_items:
            e = self.level.exponent(p)
            if not math.isfinite(lam):
                raise PreconditionError(f"lambda({p}) is not finite")
            if e == 1 and abs(lam * lam - 1.0 / p) > _RAMIFIED_TOL:
                raise PreconditionError(f"lambda({p})^2 must be 1/{p} at p || M, got {lam}")
            if e >= 2 and lam != 0.0:
                raise PreconditionError(f"lambda({p}) must vanish when {p}^2 | M")
            if e == 0 and self.deligne and abs(lam) > 2.0 + 1e-12:
                raise PreconditionError(f"|lambda({p})| = {abs(lam)} exceeds 2")

    @property
    def M(self) -> FactoredInteger:
        return self.level

    @property
    def lambda_p(self) -> dict:
        return dict(self.lambda_items)

    def lam(self, p: int) -> float:
        for q, v in self.lambda_items:
            if q == p:
                return v
        e = self.level.exponent(p)
        if e >= 2:
            return 0.0
        raise MissingEigenvalueError(f"lambda_f({p}) not available for level {self.level.value}")

    @classmethod
    def build(cls, k: int, level: IntLike, unramified: Mapping[int, float],
              ramified_signs: Optional[Mapping[int, int]] = None,
              deligne: bool = True) -> "NewformLocalData":
        """Fill in the forced values at primes dividing the level.

        ``ramified_signs[p]`` chooses ``lambda(p) = sign / sqrt(p)`` for
        ``p || level`` (default +1).
        """
        level = as_factored(level)
        signs = {int(p): int(s) for p, s in (ramified_signs or {}).items()}
        lam = {int(p): float(v) for p, v in unramified.items()}
        for p, e in level.factors:
            if e == 1:
                s = signs.get(p, 1)
                if s not in (1, -1):
                    raise PreconditionError(f"ramified sign at {p} must be +1 or -1")
                lam[p] = s / math.sqrt(p)
            else:
                lam[p] = 0.0
        return cls(k, level, lam, deligne)

    @classmethod
    def from_json(cls, source) -> "NewformLocalData":
        """Load ``{"k", "M", "lambda": {"p": value}, "ramified_signs": {"p": +-1}}``."""
        if isinstance(source, (str, bytes)):
            source = json.loads(source)
        try:
            k, M = int(source["k"]), int(source["M"])
            lam = {int(p): float(v) for p, v in source.get("lambda", {}).items()}
        except (KeyError, TypeError, ValueError) as exc:
            raise PreconditionError(f"malformed eigen-data: {exc}") from None
        level = as_factored(M)
        unram = {p: v for p, v in lam.items() if level.exponent(p) == 0}
        signs = {int(p): int(s) for p, s in source.get("ramified_signs", {}).items()}
        for p, v in lam.items():
            if level.exponent(p) == 1 and str(p) not in source.get("ramified_signs", {}):
                signs[p] = 1 if v >= 0 else -1
        out = cls.build(k, level, unram, signs)
        # explicit ramified values must agree with the forced ones
        cls(k, level, {**out.lambda_p, **{p: v for p, v in lam.items()
                                          if level.exponent(p) == 1}})
        return out

    def to_json(self) -> dict:
        ram = {str(p): (1 if v > 0 else -1) for p, v in self.lambda_items
               if self.level.exponent(p) == 1}
        unram = {str(p): v for p, v in self.lambda_items if self.level.exponent(p) == 0}
        return {"k": self.k, "M": self.level.value, "lambda": unram, "ramified_signs": ram}


def _chi(f: NewformLocalData, p: int) -> int:
    return chi0(f.level.value, p)


def lambda_prime_power(f: NewformLocalData, p: int, j: int) -> float:
    """``lambda_f(p^j)`` from the three-term Hecke recurrence."""
    if j == 0:
        return 1.0
    lp = f.lam(p)
    chi = _chi(f, p)
    prev, cur = 1.0, lp
    for _ in range(j - 1):
        prev, cur = cur, lp * cur - chi * prev
    return cur


def hecke_lambda(f: NewformLocalData, n: IntLike) -> float:
    """Normalized eigenvalue ``lambda_f(n)``, extended multiplicatively."""
    n = as_factored(n)
    out = 1.0
    for p, e in n.factors:
        out *= lambda_prime_power(f, p, e)
    return out


def mu_f(f: NewformLocalData, c: IntLike) -> float:
    """Dirichlet coefficients of ``1 / L(f, s)``."""
    out = 1.0
    for p, e in as_factored(c).factors:
        if e == 1:
            out *= -f.lam(p)
        elif e == 2:
            out *= _chi(f, p)
        else:
            return 0.0
    return out


def r_f(f: NewformLocalData, c: IntLike) -> float:
    """``sum_{b | c} mu(b) lambda_f(b)^2 / (b sigma_twisted(b)^2)``."""
    out = 1.0
    M = f.level.value
    for p in as_factored(c).primes:
        lam = f.lam(p)
        s = float(sigma_twisted(p, M))
        local = 1.0 - lam * lam / (p * s * s)
        if M % p:
            assert abs(local - _rho_local(lam, p)) <= 1e-13 * max(1.0, abs(local))
        else:
            assert abs(local - (1.0 - lam * lam / p)) <= 1e-13 * max(1.0, abs(local))
        out *= local
    return out


def _rho_local(lam: float, p: int) -> float:
    return 1.0 - p * (lam / (p + 1)) ** 2


def rho_f(f: NewformLocalData, c: IntLike) -> float:
    out = 1.0
    for p in as_factored(c).primes:
        out *= _rho_local(f.lam(p), p)
    return out


def _xi_prime_part(f, d1: FactoredInteger, l1: FactoredInteger) -> float:
    q = d1 // l1
    r = r_f(f, d1)
    if r <= 0:
        raise PreconditionError(f"r_f({d1.value}) = {r} is not positive")
    return (moebius(q) * hecke_lambda(f, q)
            / (math.sqrt(r) * math.sqrt(q.value) * float(beta(q, f.level.value))))


def _xi_full_part(f, d2: FactoredInteger, l2: FactoredInteger) -> float:
    q = d2 // l2
    r = r_f(f, d2)
    if r <= 0:
        raise PreconditionError(f"r_f({d2.value}) = {r} is not positive")
    return mu_f(f, q) / (math.sqrt(q.value) * math.sqrt(r * float(alpha(d2, f.level.value))))


def _gcd_factored(a: FactoredInteger, b: FactoredInteger) -> FactoredInteger:
    return FactoredInteger.from_factors((p, min(e, b.exponent(p))) for p, e in a.factors)


def xi(f: NewformLocalData, d: IntLike, ell: IntLike) -> float:
    """Basis coefficient ``xi_d(ell)`` for ``ell | d``."""
    d, ell = as_factored(d), as_factored(ell)
    if d.value % ell.value:
        raise PreconditionError(f"{ell.value} does not divide {d.value}")
    d1, d2 = squarefull_split(d)
    return (_xi_prime_part(f, d1, _gcd_factored(d1, ell))
            * _xi_full_part(f, d2, _gcd_factored(d2, ell)))


def _guard_divisors(L: FactoredInteger) -> None:
    if divisor_count_tau(L) > MAX_DIVISORS:
        raise PreconditionError(f"{L.value} has more than {MAX_DIVISORS} divisors")


def xi_one_sum_direct(f: NewformLocalData, L: IntLike) -> float:
    """``sum_{d | L} xi_d(1)^2`` by brute force over divisors."""
    L = as_factored(L)
    _guard_divisors(L)
    one = FactoredInteger(1)
    terms = sorted(xi(f, d, one) ** 2 for d in divisors(L))
    return math.fsum(terms)


def xi_one_sum_closed(f: NewformLocalData, L: IntLike, N: Optional[IntLike] = None) -> float:
    """Closed product for ``sum_{d | L} xi_d(1)^2`` with ``N = L * level``."""
    L = as_factored(L)
    M = f.level
    N = L * M if N is None else as_factored(N)
    if N.value != L.value * M.value:
        raise PreconditionError(f"N = {N.value} is not L * M = {L.value * M.value}")
    out = 1.0
    for p in L.primes:
        if M.exponent(p) == 0:
            out /= rho_f(f, p)
    for p, e in N.factors:
        if e >= 2 and M.exponent(p) < 2:
            out *= p * p / (p * p - 1.0)
    return out


def z_local(f: NewformLocalData, p: int) -> float:
    """Local factor ``Z_p(1, f) = sum_j lambda_f(p^{2j}) p^{-j}``, split by the form's level."""
    e = f.level.exponent(p)
    if e == 0:
        return 1.0 / ((1.0 + 1.0 / p) * rho_f(f, p))
    if e == 1:
        return 1.0 / ((1.0 + 1.0 / p) * (1.0 - 1.0 / p))
    return 1.0


def z_N(f: NewformLocalData, N: IntLike) -> float:
    out = 1.0
    for p in as_factored(N).primes:
        out *= z_local(f, p)
    return out


def fd_coefficient(f: NewformLocalData, d: IntLike, n: IntLike, k: Optional[int] = None) -> float:
    """n-th Fourier coefficient of the basis vector ``f_d``, with ``a_f(n) = lambda_f(n) n^{(k-1)/2}``."""
    d, n = as_factored(d), as_factored(n)
    k = f.k if k is None else int(k)
    total = 0.0
    for ell in divisors(_gcd_factored(d, n)):
        rest = n // ell
        a = hecke_lambda(f, rest) * rest.value ** ((k - 1) / 2)
        total += xi(f, d, ell) * ell.value ** (k / 2) * a
    return total
