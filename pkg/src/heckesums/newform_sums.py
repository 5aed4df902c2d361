"""Sums over newforms of exact level N, recovered from Petersson-weighted sums.

``pure_sum`` evaluates

    Delta*_{k,N}(n) = (k-1)/12 sum_{LM=N} mu(L) g(M) sum_{(m,M)=1} Delta_{k,M}(m^2, n) / m,
    g(M) = M prod_{p^2 | M} (1 - p^-2),

truncated at ``L <= X`` and ``m <= Y``.  The inner Petersson sums carry
rigorous tails; the m-series itself converges only conditionally, so its
truncation error is reported as diagnostics (oscillation of the partial
sums and a labelled heuristic), never as part of ``tail_bound``.
"""
from __future__ import annotations

import math
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Optional, Sequence

import numpy as np

from .arith import (FactoredInteger, IntLike, artin_constant, as_factored, divisors,
                    euler_phi, eta, moebius)
from .basis import NewformLocalData, hecke_lambda, z_N
from .oracles import newform_dim
from .petersson import (PreconditionError, TruncatedSum, TruncationPolicy,
                        WeightLevel, delta_full, square_offdiagonal_sums)

__all__ = ["level_weight", "lemma_constant", "delta_star_weighted_via_eigendata",
           "default_Y", "pure_sum", "cardinality_estimate", "SyntheticSpectrum",
           "inversion_pair_report", "inversion_pair_check",
           "DEFAULT_POLICY", "CARD_DEFAULT_Y", "HEURISTIC_EPS", "Y_GUARD"]

DEFAULT_POLICY = TruncationPolicy.tolerance(1e-6)
CARD_DEFAULT_Y = 1000
HEURISTIC_EPS = 0.1
Y_GUARD = 3


def level_weight(M: IntLike) -> Fraction:
    """``M prod_{p^2 | M} (1 - 1/p^2)``."""
    M = as_factored(M)
    out = Fraction(M.value)
    for p, e in M.factors:
        if e >= 2:
            out *= Fraction(p * p - 1, p * p)
    return out


def lemma_constant(k: int, N: IntLike) -> float:
    """``12 / ((k-1) N) * prod_{p^2 | N} p^2 / (p^2 - 1)``."""
    N = as_factored(N)
    return float(Fraction(12, k - 1) / level_weight(N))


def _coprime(a: int, N: FactoredInteger) -> bool:
    return math.gcd(int(a), N.value) == 1


def delta_star_weighted_via_eigendata(k: int, N: IntLike, m: int, n: int,
                                      data: Mapping[int, Sequence]) -> float:
    """Spectral side of ``Delta_{k,N}(m, n)`` for ``(mn, N) = 1``.

    ``data[M]`` lists ``(f, Z(1, f))`` for every newform of level ``M | N``;
    the list length must equal the newform count.
    """
    N = as_factored(N)
    if not (_coprime(m, N) and _coprime(n, N)):
        raise PreconditionError(f"m={m} and n={n} must be coprime to N={N.value}")
    total = 0.0
    for M in sorted(divisors(N), key=lambda d: d.value):
        forms = data.get(M.value)
        if forms is None:
            raise PreconditionError(f"no eigen-data supplied for level {M.value}")
        expected = newform_dim(k, M)
        if len(forms) != expected:
            raise PreconditionError(
                f"level {M.value} needs {expected} newforms, got {len(forms)}")
        for f, z_global in forms:
            if f.level.value != M.value or f.k != k:
                raise PreconditionError(f"form of weight {f.k}, level {f.level.value} filed under {M.value}")
            total += z_N(f, N) / z_global * hecke_lambda(f, m) * hecke_lambda(f, n)
    return lemma_constant(k, N) * total


def _mu_terms(N: FactoredInteger, X: int):
    out = []
    for L in sorted(divisors(N), key=lambda d: d.value):
        mu = moebius(L)
        if mu and L.value <= X:
            out.append((L, N // L, mu))
    return out


def default_Y(k: int, N: IntLike, n: int, X: Optional[int] = None) -> int:
    """Largest Y with ``12 pi Y sqrt(n) <= guard * k * N_min``, at least 1.

    ``N_min`` is the smallest level ``M = N/L`` kept in the sum.
    """
    N = as_factored(N)
    X = N.value if X is None else X
    terms = _mu_terms(N, X)
    n_min = min((M.value for _, M, _ in terms), default=N.value)
    return max(1, math.floor(Y_GUARD * k * n_min / (12 * math.pi * math.sqrt(n))))


def _inner_sums(k: int, M: int, n: int, Y: int, policy: TruncationPolicy):
    if policy.mode == "target_tolerance":
        return square_offdiagonal_sums(k, M, n, Y, policy.tol, policy.hard_cap)
    ms, vals, tails, terms, ok = [], [], [], [], []
    wl = WeightLevel(k, M)
    for m in range(1, Y + 1):
        if math.gcd(m, M) != 1:
            continue
        r = delta_full(wl, m * m, n, policy)
        ms.append(m)
        vals.append(r.value - (1.0 if m * m == n else 0.0))
        tails.append(r.tail_bound)
        terms.append(r.terms_used)
        ok.append(r.converged)
    return (np.array(ms, dtype=np.int64), np.array(vals), np.array(tails),
            np.array(terms, dtype=np.int64), np.array(ok, dtype=bool))


def pure_sum(k: int, N: IntLike, n: int, X: Optional[int] = None, Y: Optional[int] = None,
             policy: Optional[TruncationPolicy] = None, threads: int = 1) -> TruncatedSum:
    """Truncated pure sum ``sum_{f in H_k^*(N)} lambda_f(n)`` for ``(n, N) = 1``.

    ``tail_bound`` aggregates the rigorous inner Petersson tails only.
    Diagnostics carry ``heuristic_bound`` (the conditional estimate
    ``kN (1/X + Y^-1/2) (nkNXY)^0.1``) and ``oscillation``, the spread of the
    partial sums over the last decade of m.
    """
    wl = WeightLevel(k, N)
    N = wl.N
    if n < 1 or not _coprime(n, N):
        raise PreconditionError(f"n={n} must be a positive integer coprime to N={N.value}")
    X = N.value if X is None else int(X)
    if X < 1:
        raise PreconditionError("X must be >= 1")
    Y = default_Y(k, N, n, X) if Y is None else int(Y)
    if Y < 1:
        raise PreconditionError("Y must be >= 1")
    policy = policy or DEFAULT_POLICY
    terms = _mu_terms(N, X)
    root = math.isqrt(n)
    diag_m = root if root * root == n and root <= Y else 0

    def level_term(entry):
        L, M, mu = entry
        ms, vals, tails, nterms, ok = _inner_sums(k, M.value, n, Y, policy)
        coeff = mu * float(level_weight(M))
        contrib = np.zeros(Y + 1)
        contrib[ms] = coeff * vals / ms
        if diag_m and math.gcd(diag_m, M.value) == 1:
            contrib[diag_m] += coeff / diag_m
        tail = abs(coeff) * math.fsum(tails / ms)
        return contrib, tail, int(nterms.sum()), bool(ok.all())

    if threads > 1 and len(terms) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(level_term, terms))
    else:
        parts = [level_term(t) for t in terms]

    scale = (k - 1) / 12
    by_m = np.zeros(Y + 1)
    for contrib, _, _, _ in parts:
        by_m += contrib
    value = scale * math.fsum(by_m)
    partial = scale * np.cumsum(by_m)
    lo = max(1, math.ceil(Y / 10))
    window = partial[lo:Y + 1]
    oscillation = float(window.max() - window.min()) if window.size else 0.0
    tail = scale * math.fsum(p[1] for p in parts)
    converged = all(p[3] for p in parts)
    kN = k * N.value
    heuristic = kN * (1 / X + Y ** -0.5) * (n * kN * X * Y) ** HEURISTIC_EPS
    diagnostics = {
        "X": X, "Y": Y, "heuristic_bound": heuristic, "heuristic_eps": HEURISTIC_EPS,
        "oscillation": oscillation,
        "levels": [{"L": L.value, "M": M.value, "mu": mu,
                    "value": scale * math.fsum(part[0])}
                   for (L, M, mu), part in zip(terms, parts)],
    }
    return TruncatedSum(value, tail, sum(p[2] for p in parts), converged, diagnostics)


def cardinality_estimate(k: int, N: IntLike, X: Optional[int] = None, Y: Optional[int] = None,
                         policy: Optional[TruncationPolicy] = None,
                         threads: int = 1) -> TruncatedSum:
    """``pure_sum(k, N, 1)`` with the main term and the phi(N) sandwich attached."""
    N = as_factored(N)
    Y = CARD_DEFAULT_Y if Y is None else Y
    res = pure_sum(k, N, 1, X=X, Y=Y, policy=policy, threads=threads)
    scale = (k - 1) / 12
    phi = euler_phi(N)
    dim = newform_dim(k, N)
    rounded = int(round(res.value))
    res.diagnostics.update({
        "main_term": scale * eta(N),
        "sandwich": [scale * phi * artin_constant(), scale * phi],
        "oracle_dim": dim,
        "rounded": rounded,
        "residual": abs(res.value - rounded),
    })
    return res


@dataclass(frozen=True)
class SyntheticSpectrum:
    """A made-up newform spectrum: for each level, pairs ``(f, 1/Z(1, f))``."""

    k: int
    levels: tuple

    def at(self, W: int) -> tuple:
        for level, forms in self.levels:
            if level == W:
                return forms
        return ()

    @classmethod
    def random(cls, k: int, N: IntLike, primes: Sequence[int], rng: random.Random,
               per_level: int = 2, deligne: bool = True) -> "SyntheticSpectrum":
        """``per_level`` random forms at every ``W | N`` with eigenvalues at ``primes``."""
        N = as_factored(N)
        levels = []
        for W in sorted(divisors(N), key=lambda d: d.value):
            forms = []
            for _ in range(per_level):
                unram = {p: rng.uniform(-2, 2) for p in primes if W.value % p}
                signs = {p: rng.choice((-1, 1)) for p in W.primes}
                f = NewformLocalData.build(k, W, unram, signs, deligne=deligne)
                forms.append((f, rng.uniform(0.5, 3.0)))
            levels.append((W.value, tuple(forms)))
        return cls(k, tuple(levels))


def _ell_sum_local(f: NewformLocalData, p: int) -> float:
    # sum_j lambda(p^{2j}) p^{-j}: even part of 1 / (1 - lambda x + x^2) at x = p^{-1/2}
    lam = f.lam(p)
    disc = lam * lam - 4.0
    top = (abs(lam) + math.sqrt(disc)) / 2 if disc > 0 else 1.0
    if top >= math.sqrt(p):
        raise PreconditionError(f"lambda({p}) = {lam} makes the local series diverge")
    x2 = 1.0 / p
    return (1 + x2) / ((1 + x2) ** 2 - lam * lam * x2)


def _ell_sum(f: NewformLocalData, L: FactoredInteger, M: FactoredInteger) -> float:
    out = 1.0
    for p in L.primes:
        if M.value % p:
            out *= _ell_sum_local(f, p)
    return out


def inversion_pair_report(k: int, N: IntLike, m: int, n: int,
                          spectrum: SyntheticSpectrum) -> dict:
    """Both sides of the weighted/unweighted inversion pair on a synthetic spectrum."""
    N = as_factored(N)
    if not (_coprime(m, N) and _coprime(n, N)):
        raise PreconditionError(f"m={m} and n={n} must be coprime to N={N.value}")

    def spectral(W, Z_level):
        return [z_N(f, Z_level) * inv_z * hecke_lambda(f, m) * hecke_lambda(f, n)
                for f, inv_z in spectrum.at(W.value)]

    def lemma(level):
        return lemma_constant(k, level) * math.fsum(
            t for W in divisors(level) for t in spectral(W, level))

    pairs = [(L, N // L) for L in sorted(divisors(N), key=lambda d: d.value)]

    # forward: Delta_N via l-sums over L^infinity of level-M weighted sums
    fwd_terms = [lemma_constant(k, N) * z_N(f, M) * inv_z * hecke_lambda(f, m)
                 * hecke_lambda(f, n) * _ell_sum(f, L, M)
                 for L, M in pairs for f, inv_z in spectrum.at(M.value)]
    forward = math.fsum(fwd_terms)
    direct_delta = lemma(N)

    # backward: Moebius inversion recovers the level-N weighted sum
    back_terms = []
    for L, M in pairs:
        mu = moebius(L)
        if not mu:
            continue
        coeff = (k - 1) / 12 * mu * float(level_weight(M)) * lemma_constant(k, M)
        for W in divisors(M):
            for f, inv_z in spectrum.at(W.value):
                back_terms.append(coeff * z_N(f, M) * inv_z * hecke_lambda(f, m)
                                  * hecke_lambda(f, n) * _ell_sum(f, L, M))
    backward = math.fsum(back_terms)
    target = math.fsum(spectral(N, N))
    return {
        "forward": forward, "delta": direct_delta,
        "forward_scale": math.fsum(map(abs, fwd_terms)),
        "backward": backward, "target": target,
        "backward_scale": math.fsum(map(abs, back_terms)),
    }


def inversion_pair_check(k: int, N: IntLike, m: int, n: int, spectrum: SyntheticSpectrum,
                         rtol: float = 1e-9) -> bool:
    """True when both directions of the inversion pair agree to ``rtol``."""
    r = inversion_pair_report(k, N, m, n, spectrum)
    ok_fwd = abs(r["forward"] - r["delta"]) <= rtol * max(abs(r["delta"]), r["forward_scale"], 1e-300)
    ok_back = abs(r["backward"] - r["target"]) <= rtol * max(abs(r["target"]), r["backward_scale"], 1e-300)
    return ok_fwd and ok_back
