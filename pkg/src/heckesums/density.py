"""One-level density of low-lying zeros via the explicit-formula prime sum,
and the random-matrix kernels it is compared against.

Kernels use ``K(y) = sin(pi y) / (pi y)``.  Each group has a continuous
density on the time side plus an optional point mass at 0; on the Fourier
side every group has a unit atom at 0 plus a piecewise-constant density.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional

import numpy as np
from scipy.special import sici

from .arith import as_factored, primes_up_to
from .bessel import bessel_j, bessel_j_bound
from .kloosterman import kloosterman
from .newform_sums import pure_sum
from .oracles import newform_dim
from .petersson import (NonConvergenceError, PreconditionError, TruncatedSum,
                        TruncationPolicy, WeightLevel)

__all__ = ["TestFunction", "fejer_pair", "E_phi", "DensityConfig", "P_star",
           "DensityEstimate", "one_level_estimate", "GROUPS", "rmt_kernel",
           "rmt_atom", "rmt_kernel_hat", "rmt_integral", "rmt_integral_time",
           "rmt_integral_fourier", "support_limit", "q_star", "QStar",
           "MAX_PRIME_RANGE"]

MAX_PRIME_RANGE = 10**7
GROUPS = ("U", "Sp", "O", "SOeven", "SOodd")

# time side: 1 + eps * sin(2 pi x) / (2 pi x), plus an atom at 0
_EPS = {"U": 0.0, "SOeven": 1.0, "Sp": -1.0, "SOodd": -1.0, "O": 0.0}
_ATOM = {"U": 0.0, "SOeven": 0.0, "Sp": 0.0, "SOodd": 1.0, "O": 0.5}
# Fourier side on |t| < 1: unit atom at 0 plus a constant density
_HAT_INSIDE = {"U": 0.0, "SOeven": 0.5, "Sp": -0.5, "SOodd": 0.5, "O": 0.5}
_HAT_OUTSIDE = {"U": 0.0, "SOeven": 0.0, "Sp": 0.0, "SOodd": 1.0, "O": 0.5}

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(24)


@dataclass(frozen=True)
class TestFunction:
    """An even ``phi`` whose Fourier transform ``phi_hat`` vanishes for ``|y| >= sigma``."""

    sigma: float
    phi: Callable[[np.ndarray], np.ndarray]
    phi_hat: Callable[[np.ndarray], np.ndarray]
    family: str
    # closed form of int_X^inf phi, used for the analytic quadrature tail
    phi_tail: Optional[Callable[[float], float]] = field(default=None, compare=False)

    __test__ = False  # not a pytest class


def _fejer_tail(sigma: float, X: float) -> float:
    # int_X^inf sigma sinc^2(sigma x) dx = (1/pi) int_U^inf sin^2 u / u^2 du, U = pi sigma X
    U = math.pi * sigma * X
    si, _ = sici(2 * U)
    return (math.sin(U) ** 2 / U + math.pi / 2 - float(si)) / math.pi


def fejer_pair(sigma: float) -> TestFunction:
    """``phi(x) = sigma sinc^2(sigma x)``, ``phi_hat(y) = max(0, 1 - |y|/sigma)``."""
    if not sigma > 0:
        raise PreconditionError(f"sigma must be positive, got {sigma}")
    sigma = float(sigma)

    def phi(x):
        return sigma * np.sinc(sigma * np.asarray(x, dtype=float)) ** 2

    def phi_hat(y):
        return np.maximum(0.0, 1.0 - np.abs(np.asarray(y, dtype=float)) / sigma)

    tf = TestFunction(sigma, phi, phi_hat, "fejer", lambda X: _fejer_tail(sigma, X))
    total = 2 * (_panel_integral(phi, 0.0, _cutoff(sigma)) + tf.phi_tail(_cutoff(sigma)))
    if abs(total - float(phi_hat(0.0))) > 1e-8:
        raise NonConvergenceError(f"Fourier pair check failed: int phi = {total}")
    return tf


def _cutoff(sigma: float) -> float:
    return 4000.0 / min(sigma, 1.0)


def _panel_integral(f, a: float, b: float, width: float = 0.25) -> float:
    panels = max(1, math.ceil((b - a) / width))
    edges = np.linspace(a, b, panels + 1)
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    x = (mid[:, None] + half[:, None] * _GL_NODES[None, :]).ravel()
    w = (half[:, None] * _GL_WEIGHTS[None, :]).ravel()
    return math.fsum(w * f(x))


def E_phi(phi: TestFunction) -> float:
    """``phi_hat(0) + phi(0) / 2``."""
    return float(phi.phi_hat(0.0)) + 0.5 * float(phi.phi(0.0))


def _check_group(group: str) -> None:
    if group not in _EPS:
        raise PreconditionError(f"unknown group {group!r}; expected one of {GROUPS}")


def rmt_kernel(group: str, x):
    """Continuous part of ``W_1(G)(x)``; see :func:`rmt_atom` for the point mass."""
    _check_group(group)
    x = np.asarray(x, dtype=float)
    out = 1.0 + _EPS[group] * np.sinc(2.0 * x)
    return float(out) if out.ndim == 0 else out


def rmt_atom(group: str) -> float:
    """Mass of the Dirac atom at 0 in ``W_1(G)``."""
    _check_group(group)
    return _ATOM[group]


def rmt_kernel_hat(group: str, t: float) -> tuple:
    """``(atom, density)``: Fourier transform of ``W_1(G)`` is ``atom * delta_0 + density``."""
    _check_group(group)
    inside = abs(t) < 1.0
    return 1.0, (_HAT_INSIDE if inside else _HAT_OUTSIDE)[group]


def rmt_integral_time(group: str, phi: TestFunction) -> float:
    """``int phi W_1(G)`` by composite Gauss-Legendre on the time side."""
    _check_group(group)
    eps = _EPS[group]
    X = _cutoff(phi.sigma)
    if phi.phi_tail is None:
        raise PreconditionError("time-side integral needs the test function's tail")

    def body(x):
        return phi.phi(x) * (1.0 + eps * np.sinc(2.0 * x))

    coarse = _panel_integral(body, 0.0, X, width=0.5)
    fine = _panel_integral(body, 0.0, X, width=0.25)
    if abs(coarse - fine) > 1e-10:
        raise NonConvergenceError(f"time-side quadrature unstable: {coarse} vs {fine}")
    # the eps-part of the tail is below 1 / (4 pi^3 sigma X^2), negligible at this X
    cont = 2 * (fine + phi.phi_tail(X))
    return cont + _ATOM[group] * float(phi.phi(0.0))


def rmt_integral_fourier(group: str, phi: TestFunction) -> float:
    """``int phi_hat W_1(G)^`` on the Fourier side, exact for piecewise-linear ``phi_hat``."""
    _check_group(group)
    s = phi.sigma
    cuts = sorted({0.0, s} | ({1.0} if 1.0 < s else set()))
    total = float(phi.phi_hat(0.0))
    for a, b in zip(cuts[:-1], cuts[1:]):
        mid = 0.5 * (a + b)
        dens = rmt_kernel_hat(group, mid)[1]
        if dens:
            x = mid + 0.5 * (b - a) * _GL_NODES
            total += 2 * dens * 0.5 * (b - a) * math.fsum(_GL_WEIGHTS * phi.phi_hat(x))
    return total


def rmt_integral(group: str, phi: TestFunction) -> float:
    """``int phi(x) W_1(G)(x) dx``; time side, cross-checked against the Fourier side."""
    time_side = rmt_integral_time(group, phi)
    fourier_side = rmt_integral_fourier(group, phi)
    if abs(time_side - fourier_side) > 1e-6:
        raise NonConvergenceError(
            f"{group}: time side {time_side} disagrees with Fourier side {fourier_side}")
    return time_side


def support_limit(k: int, N: int) -> float:
    """``2 log(kN) / log(k^2 N)``."""
    if k * k * N <= 1:
        raise PreconditionError("need k^2 N > 1")
    return 2 * math.log(k * N) / math.log(k * k * N)


@dataclass(frozen=True)
class DensityConfig:
    k: int
    N: int
    u: float
    R: Optional[float] = None
    X: Optional[int] = None
    Y: Optional[int] = None
    policy: Optional[TruncationPolicy] = None
    strict: bool = True
    threads: int = 1

    def __post_init__(self):
        WeightLevel(self.k, self.N)
        if self.R is None:
            object.__setattr__(self, "R", float(self.k * self.k * self.N))
        if not self.R > 1:
            raise PreconditionError(f"R must exceed 1, got {self.R}")
        if not self.u > 0:
            raise PreconditionError(f"u must be positive, got {self.u}")
        if self.strict and self.u >= support_limit(self.k, self.N):
            raise PreconditionError(
                f"u = {self.u} not below the support limit {support_limit(self.k, self.N):.4f}")

    @property
    def prime_bound(self) -> float:
        return self.R ** self.u


def _weight(phi: TestFunction, p: int, logR: float) -> float:
    lp = math.log(p)
    return float(phi.phi_hat(lp / logR)) * 2 * lp / (math.sqrt(p) * logR)


def _primes(cfg: DensityConfig, phi: TestFunction) -> list:
    bound = cfg.prime_bound
    if bound > MAX_PRIME_RANGE:
        raise PreconditionError(f"prime range R^u = {bound:.3g} exceeds {MAX_PRIME_RANGE}")
    logR = math.log(cfg.R)
    return [p for p in primes_up_to(bound) if cfg.N % p and _weight(phi, p, logR) != 0.0]


def P_star(cfg: DensityConfig, phi: TestFunction) -> TruncatedSum:
    """Prime sum ``sum_{p <= R^u, p !| N} Delta*_{k,N}(p) phi_hat(log p / log R) 2 log p / (sqrt(p) log R)``."""
    logR = math.log(cfg.R)
    primes = _primes(cfg, phi)

    def term(p):
        return pure_sum(cfg.k, cfg.N, p, X=cfg.X, Y=cfg.Y, policy=cfg.policy)

    if cfg.threads > 1 and len(primes) > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            results = list(pool.map(term, primes))
    else:
        results = [term(p) for p in primes]
    weights = [_weight(phi, p, logR) for p in primes]
    value = math.fsum(w * r.value for w, r in zip(weights, results))
    tail = math.fsum(w * r.tail_bound for w, r in zip(weights, results))
    converged = all(r.converged for r in results)
    diagnostics = {
        "primes": len(primes), "prime_bound": cfg.prime_bound,
        "oscillation": math.fsum(w * r.diagnostics["oscillation"] for w, r in zip(weights, results)),
        "heuristic_bound": math.fsum(w * r.diagnostics["heuristic_bound"]
                                     for w, r in zip(weights, results)),
    }
    out = TruncatedSum(value, tail, sum(r.terms_used for r in results), converged, diagnostics)
    if not converged:
        raise NonConvergenceError("a pure-sum term in the prime sum did not converge", out)
    return out


@dataclass
class DensityEstimate:
    E: float
    P_star: TruncatedSum
    card: int
    P_star_over_card: float
    D1: float
    heuristic_error: float

    def to_dict(self) -> dict:
        return {"E": self.E, "Pstar": self.P_star.to_dict(), "card": self.card,
                "Pstar_over_card": self.P_star_over_card, "D1": self.D1,
                "heuristic_error": self.heuristic_error}


def one_level_estimate(cfg: DensityConfig, phi: TestFunction) -> DensityEstimate:
    """``D1 = E(phi) - P* / |H_k^*(N)|``.

    The ``log log kN / log R`` correction is not computable from the prime
    sum and is reported as ``heuristic_error`` instead of being added.
    """
    card = newform_dim(cfg.k, cfg.N)
    if card == 0:
        raise PreconditionError(f"no newforms of weight {cfg.k} and level {cfg.N}")
    ps = P_star(cfg, phi)
    ratio = ps.value / card
    E = E_phi(phi)
    kN = cfg.k * cfg.N
    return DensityEstimate(E, ps, card, ratio, E - ratio,
                           math.log(math.log(kN)) / math.log(cfg.R))


@dataclass(frozen=True)
class QStar:
    value: float
    bound: float
    in_regime: bool
    primes: int


def q_star(cfg: DensityConfig, m: int, c: int, phi: TestFunction) -> QStar:
    """``2 pi i^k sum_{p !| N} S(m^2, p; c) J_{k-1}(4 pi m sqrt(p) / c) * weight(p)``.

    The prime range is the support of ``phi_hat``.  ``bound`` is the
    Weil-times-Bessel envelope; ``in_regime`` flags ``3 * 4 pi m sqrt(P) / c <= k``.
    """
    if m < 1 or c < 1:
        raise PreconditionError("m and c must be positive")
    if c % cfg.N:
        raise PreconditionError(f"c = {c} must be a multiple of N = {cfg.N}")
    wl = WeightLevel(cfg.k, cfg.N)
    logR = math.log(cfg.R)
    top = cfg.R ** phi.sigma
    if top > MAX_PRIME_RANGE:
        raise PreconditionError(f"prime range {top:.3g} exceeds {MAX_PRIME_RANGE}")
    primes = [p for p in primes_up_to(top) if cfg.N % p and _weight(phi, p, logR) != 0.0]
    nu = cfg.k - 1
    cf = as_factored(c)
    tau_c = 1
    for _, e in cf.factors:
        tau_c *= e + 1
    terms, env = [], []
    for p in primes:
        w = _weight(phi, p, logR)
        z = 4 * math.pi * m * math.sqrt(p) / c
        terms.append(kloosterman(m * m, p, c) * bessel_j(nu, z) * w)
        weil = tau_c * math.sqrt(math.gcd(math.gcd(m * m, p), c) * c)
        env.append(weil * bessel_j_bound(nu, z) * w)
    value = 2 * math.pi * wl.sign * math.fsum(terms)
    bound = 2 * math.pi * math.fsum(env)
    P = max(primes, default=0)
    in_regime = 3 * 4 * math.pi * m * math.sqrt(P) / c <= cfg.k
    return QStar(value, bound, in_regime, len(primes))
