"""Kloosterman-Bessel side of the Petersson formula.

``Delta_{k,N}(m, n) = delta(m, n) + 2 pi i^k sum_{N | c} S(m, n; c) / c * J_{k-1}(4 pi sqrt(mn) / c)``

The c-sum is cut at ``c_max`` and the remainder bounded rigorously using
``|S(m, n; c)| <= c`` together with ``|J_nu(x)| <= (x/2)^nu / nu!``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np

from .arith import FactoredInteger, IntLike, as_factored
from .bessel import _bessel_j, bessel_j_many
from .kloosterman import _direct, kloosterman_row

__all__ = ["WeightLevel", "TruncationPolicy", "TruncatedSum", "NonConvergenceError",
           "PreconditionError", "tail_bound", "plan_cutoff", "delta_full",
           "square_offdiagonal_sums"]


class PreconditionError(ValueError):
    """An input violates a documented precondition."""


class NonConvergenceError(RuntimeError):
    """A truncated sum could not meet its requested tolerance."""

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


@dataclass(frozen=True)
class WeightLevel:
    k: int
    N: FactoredInteger

    def __init__(self, k: int, N: IntLike):
        if k % 2 or k < 4:
            raise PreconditionError(f"weight must be even and >= 4, got k={k}")
        object.__setattr__(self, "k", int(k))
        object.__setattr__(self, "N", as_factored(N))

    @property
    def sign(self) -> int:
        """``i^k`` for even k."""
        return -1 if (self.k // 2) % 2 else 1


@dataclass(frozen=True)
class TruncationPolicy:
    """How far to run a c-sum.

    ``fixed_cmax`` sums every admissible ``c <= c_max``; ``target_tolerance``
    picks the smallest cut-off whose rigorous tail is below ``tol``, never
    exceeding ``hard_cap``.
    """

    mode: str = "target_tolerance"
    c_max: Optional[int] = None
    tol: float = 1e-10
    hard_cap: int = 10**7

    def __post_init__(self):
        if self.mode not in ("fixed_cmax", "target_tolerance"):
            raise PreconditionError(f"unknown truncation mode {self.mode!r}")
        if self.mode == "fixed_cmax" and (self.c_max is None or self.c_max < 1):
            raise PreconditionError("fixed_cmax mode needs a positive c_max")
        if not self.tol > 0:
            raise PreconditionError("tol must be positive")
        if self.hard_cap < 1:
            raise PreconditionError("hard_cap must be positive")

    @classmethod
    def fixed(cls, c_max: int) -> "TruncationPolicy":
        return cls(mode="fixed_cmax", c_max=int(c_max))

    @classmethod
    def tolerance(cls, tol: float, hard_cap: int = 10**7) -> "TruncationPolicy":
        return cls(mode="target_tolerance", tol=float(tol), hard_cap=int(hard_cap))

    def scaled(self, factor: float) -> "TruncationPolicy":
        """Same policy with the tolerance multiplied by ``factor``."""
        return TruncationPolicy(self.mode, self.c_max, self.tol * factor, self.hard_cap)


@dataclass
class TruncatedSum:
    value: float
    tail_bound: float
    terms_used: int
    converged: bool
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {"value": self.value, "tail_bound": self.tail_bound,
               "terms_used": self.terms_used, "converged": self.converged}
        out.update(self.diagnostics)
        return out


def _log_tail(nu: int, scale: float, J: int) -> float:
    # log of 2 pi * sum_{j > J} (scale / j)^nu / nu!  <=  2 pi scale^nu J^(1-nu) / (nu! (nu-1))
    if J < 1:
        return math.inf
    return (math.log(2 * math.pi) + nu * math.log(scale) - math.lgamma(nu + 1)
            + (1 - nu) * math.log(J) - math.log(nu - 1))


def tail_bound(k: int, N: int, mn: float, c_max: int) -> float:
    """Bound on the part of the Petersson c-sum with ``c > c_max``, ``N | c``."""
    nu = k - 1
    scale = 2 * math.pi * math.sqrt(mn) / N
    lg = _log_tail(nu, scale, int(c_max) // int(N))
    return 0.0 if lg < -745 else math.exp(lg)


def _multiples_for_tol(nu: int, scale: float, tol: float) -> int:
    # smallest J >= 1 with the closed-form tail below tol
    lg = (math.log(2 * math.pi) + nu * math.log(scale) - math.lgamma(nu + 1)
          - math.log(nu - 1) - math.log(tol))
    J = max(1, math.ceil(math.exp(lg / (nu - 1))) if lg > 0 else 1)
    while _log_tail(nu, scale, J) > math.log(tol):
        J += 1
    while J > 1 and _log_tail(nu, scale, J - 1) <= math.log(tol):
        J -= 1
    return J


def plan_cutoff(k: int, N: int, mn: float, policy: TruncationPolicy) -> tuple:
    """``(c_max, converged)`` for one c-sum under ``policy``."""
    if policy.mode == "fixed_cmax":
        c_max = (policy.c_max // N) * N
        return c_max, True
    scale = 2 * math.pi * math.sqrt(mn) / N
    J = _multiples_for_tol(k - 1, scale, policy.tol)
    if J * N > policy.hard_cap:
        return (policy.hard_cap // N) * N, False
    return J * N, True


def delta_full(wl: WeightLevel, m: int, n: int,
               policy: Optional[TruncationPolicy] = None) -> TruncatedSum:
    """Delta_{k,N}(m, n) from the Petersson formula with a rigorous tail bound.

    Direct O(c) Kloosterman sums and compensated summation over increasing c.
    """
    if m < 1 or n < 1:
        raise PreconditionError("m and n must be positive")
    policy = policy or TruncationPolicy()
    k, N = wl.k, wl.N.value
    nu = k - 1
    c_max, ok = plan_cutoff(k, N, m * n, policy)
    root = 4 * math.pi * math.sqrt(m * n)
    total = 0.0
    comp = 0.0
    terms = 0
    for c in range(N, c_max + 1, N):
        s, _ = _direct(m % c, n % c, c)
        t = s / c * _bessel_j(nu, root / c)
        y = t - comp
        acc = total + y
        comp = (acc - total) - y
        total = acc
        terms += 1
    value = (1.0 if m == n else 0.0) + 2 * math.pi * wl.sign * total
    tb = tail_bound(k, N, m * n, c_max) if c_max >= N else math.inf
    converged = ok and tb <= policy.tol
    return TruncatedSum(value, tb, terms, converged, {"c_max": c_max})


@lru_cache(maxsize=256)
def _square_sums_cached(k: int, M: int, n: int, Y: int, tol: float, hard_cap: int):
    nu = k - 1
    ms = np.array([m for m in range(1, Y + 1) if math.gcd(m, M) == 1], dtype=np.int64)
    policy = TruncationPolicy.tolerance(tol, hard_cap)
    plans = [plan_cutoff(k, M, float(m) ** 2 * n, policy) for m in ms]
    cmax = np.array([p[0] for p in plans], dtype=np.int64)
    ok = np.array([p[1] for p in plans], dtype=bool)
    # cutoff grows with m; enforce monotonicity so active sets are suffixes
    cmax = np.maximum.accumulate(cmax)
    acc = np.zeros(ms.size)
    comp = np.zeros(ms.size)
    terms = np.zeros(ms.size, dtype=np.int64)
    root = 4 * math.pi * math.sqrt(n) * ms.astype(np.float64)
    m2 = ms * ms
    top = int(cmax[-1]) if ms.size else 0
    start = 0
    for c in range(M, top + 1, M):
        while start < ms.size and cmax[start] < c:
            start += 1
        if start == ms.size:
            break
        row = kloosterman_row(n, c)
        s = row[m2[start:] % c]
        t = s / c * bessel_j_many(nu, root[start:] / c)
        y = t - comp[start:]
        tot = acc[start:] + y
        comp[start:] = (tot - acc[start:]) - y
        acc[start:] = tot
        terms[start:] += 1
    tails = np.array([tail_bound(k, M, float(m) ** 2 * n, int(c)) for m, c in zip(ms, cmax)])
    values = 2 * math.pi * (-1 if (k // 2) % 2 else 1) * acc
    for arr in (ms, values, tails, terms, ok):
        arr.setflags(write=False)
    return ms, values, tails, terms, ok


def square_offdiagonal_sums(k: int, M: int, n: int, Y: int, tol: float,
                            hard_cap: int = 10**7):
    """Kloosterman-Bessel part of ``Delta_{k,M}(m^2, n)`` for every ``m <= Y``
    coprime to ``M``.

    Returns ``(ms, values, tails, terms, converged)`` arrays.  One Kloosterman
    row ``S(., n; c)`` is shared by all ``m`` at each modulus ``c``.  Results
    are cached per argument tuple.
    """
    if k % 2 or k < 4:
        raise PreconditionError(f"weight must be even and >= 4, got k={k}")
    return _square_sums_cached(int(k), int(M), int(n), int(Y), float(tol), int(hard_cap))


def delta_from_batch(k: int, M: int, m: int, n: int, tol: float) -> float:
    """Single value ``Delta_{k,M}(m^2, n)`` through the batched path (tests)."""
    ms, values, _, _, _ = square_offdiagonal_sums(k, M, n, m, tol)
    idx = int(np.searchsorted(ms, m))
    return (1.0 if m * m == n else 0.0) + float(values[idx])
