"""Acceptance criteria 1-10.  Each test prints one PASS/FAIL line."""
import math
import random
import time

import numpy as np
import pytest

from heckesums.arith import (artin_constant, divisor_count_tau, eta, eta_convolution,
                             euler_phi, factor, primes_up_to)
from heckesums.basis import NewformLocalData, xi, xi_one_sum_closed, xi_one_sum_direct, r_f
from heckesums.bessel import _miller, _series, bessel_j, bessel_j_bound
from heckesums.density import (DensityConfig, GROUPS, fejer_pair, one_level_estimate,
                               rmt_integral, rmt_integral_fourier, rmt_integral_time)
from heckesums.kloosterman import kloosterman, kloosterman_complex, mod_inverse
from heckesums.newform_sums import (SyntheticSpectrum, cardinality_estimate,
                                    inversion_pair_report)
from heckesums.oracles import newform_dim, ramanujan_tau
from heckesums.petersson import TruncationPolicy, WeightLevel, delta_full


@pytest.fixture
def report(capsys):
    def emit(n, ok, detail):
        with capsys.disabled():
            print(f"\ncriterion {n}: {'PASS' if ok else 'FAIL'} | {detail}")
        return ok
    return emit


def test_criterion_01_ramanujan_ratio(report):
    t0 = time.perf_counter()
    tau = ramanujan_tau(10)
    wl = WeightLevel(12, 1)
    policy = TruncationPolicy.tolerance(1e-12)
    base = delta_full(wl, 1, 1, policy).value
    worst = 0.0
    for m in range(2, 11):
        ratio = delta_full(wl, m, 1, policy).value / base
        worst = max(worst, abs(ratio - tau[m] * m ** -5.5))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-6 and elapsed <= 10
    assert report(1, ok, f"max |ratio - tau(m) m^-11/2| = {worst:.2e}, {elapsed:.2f} s")


def test_criterion_02_rank_one_identity(report):
    policy = TruncationPolicy.tolerance(1e-12)
    worst_excess = -math.inf
    for k in (12, 16, 18, 20, 22, 26):
        wl = WeightLevel(k, 1)
        D = {(m, n): delta_full(wl, m, n, policy) for m in range(1, 9) for n in range(1, 9)}
        a = D[1, 1]
        for m in range(1, 9):
            for n in range(1, 9):
                lhs = D[m, n]
                x, y = D[m, 1], D[n, 1]
                gap = abs(lhs.value * a.value - x.value * y.value)
                prop = (abs(lhs.value) * a.tail_bound + abs(a.value) * lhs.tail_bound
                        + lhs.tail_bound * a.tail_bound
                        + abs(x.value) * y.tail_bound + abs(y.value) * x.tail_bound
                        + x.tail_bound * y.tail_bound)
                worst_excess = max(worst_excess, gap - prop - 1e-8)
    ok = worst_excess <= 0
    assert report(2, ok, f"max(gap - allowance) = {worst_excess:.2e} over 6 weights, m,n <= 8")


def test_criterion_03_cardinality_round_trip(report):
    t0 = time.perf_counter()
    bad, worst = [], 0.0
    for k in (12, 16, 20):
        for N in range(1, 13):
            res = cardinality_estimate(k, N)
            dim = newform_dim(k, N)
            resid = abs(res.value - dim)
            worst = max(worst, resid)
            if round(res.value) != dim or resid >= 0.5:
                bad.append((k, N, res.value, dim))
    elapsed = time.perf_counter() - t0
    ok = not bad and elapsed <= 300
    assert report(3, ok, f"36 points, max residual {worst:.3f}, {elapsed:.1f} s, mismatches {bad}")


def _random_form(rng, M, primes):
    Mf = factor(M)
    unram = {p: rng.uniform(-2, 2) for p in primes if M % p}
    signs = {p: rng.choice((-1, 1)) for p in Mf.primes}
    return NewformLocalData.build(12, Mf, unram, signs)


def _six_identities(f, p, nu):
    chi = 0 if f.level.value % p == 0 else 1
    lam = f.lam(p)
    q = p ** nu
    out = [
        (xi(f, 1, 1), 1.0),
        (xi(f, q, q), (r_f(f, p) * (1 - chi / p**2)) ** -0.5),
        (xi(f, p, p), r_f(f, p) ** -0.5),
        (xi(f, q, q // p), -lam / math.sqrt(p) * xi(f, q, q)),
        (xi(f, p, 1), -lam / (math.sqrt(p) * (1 + chi / p)) * xi(f, p, p)),
        (xi(f, q, q // p**2), chi / p * xi(f, q, q)),
    ]
    return out


def test_criterion_04_xi_closed_form(report):
    rng = random.Random(20240604)
    worst = 0.0
    for _ in range(200):
        M, L = rng.randint(1, 100), rng.randint(1, 5000)
        f = _random_form(rng, M, set(factor(L).primes) | set(factor(M).primes))
        closed = xi_one_sum_closed(f, L)
        worst = max(worst, abs(xi_one_sum_direct(f, L) - closed) / abs(closed))
    worst_id = 0.0
    for _ in range(200):
        p = rng.choice(primes_up_to(50))
        M = rng.choice([1, p, p * p, 6, 35])
        nu = rng.randint(2, 5)
        f = _random_form(rng, M, [p])
        for got, want in _six_identities(f, p, nu):
            worst_id = max(worst_id, abs(got - want) / max(abs(want), 1e-300))
    ok = worst <= 1e-10 and worst_id <= 1e-12
    assert report(4, ok, f"lemma rel err {worst:.2e} (200 configs); identities rel err {worst_id:.2e}")


def test_criterion_05_inversion_round_trip(report):
    rng = random.Random(7)
    worst = 0.0
    for N in (1, 5, 25, 12, 36):
        for _ in range(5):
            spec = SyntheticSpectrum.random(12, N, [2, 3, 5, 7, 11, 13], rng)
            m, n = [x for x in (7, 11, 13, 1) if N % x][:2]
            r = inversion_pair_report(12, N, m, n, spec)
            worst = max(worst,
                        abs(r["forward"] - r["delta"]) / max(abs(r["delta"]), r["forward_scale"]),
                        abs(r["backward"] - r["target"]) / max(abs(r["target"]), r["backward_scale"]))
    ok = worst <= 1e-9
    assert report(5, ok, f"max relative round-trip error {worst:.2e} over N in 1, p, p^2, 12, 36")


def test_criterion_06_eta_suite(report):
    mismatches = [N for N in range(1, 100001) if eta(N) != eta_convolution(N)]
    A = artin_constant(1e-12)
    ref = 0.3739558136192022880547280543464164151116
    sandwich = all(euler_phi(N) * A <= eta(N) <= euler_phi(N) for N in range(1, 100001))
    # fit C on even k <= 20, then confirm on the full range k <= 30
    def ratio(k, N):
        return abs(newform_dim(k, N) - (k - 1) * eta(N) / 12) / (k * N) ** (2 / 3)
    C = max(ratio(k, N) for k in range(4, 21, 2) for N in range(1, 201))
    worst = max(ratio(k, N) for k in range(4, 31, 2) for N in range(1, 201))
    ok = not mismatches and abs(A - ref) <= 1e-10 and sandwich and worst <= C
    assert report(6, ok, f"eta mismatches {len(mismatches)}, |A-ref| {abs(A - ref):.1e}, "
                  f"sandwich {sandwich}, fitted C {C:.3f}, max ratio on k<=30 {worst:.3f}")


def _weil(m, n, c):
    return divisor_count_tau(c) * math.sqrt(math.gcd(math.gcd(m, n), c)) * math.sqrt(c)


def test_criterion_07_kloosterman_suite(report):
    rng = random.Random(99)
    fails = []
    for _ in range(500):
        c = rng.randint(1, 2000)
        m, n = rng.randint(0, 10**6), rng.randint(0, 10**6)
        z = kloosterman_complex(m, n, c)
        s = z.real
        if abs(z.imag) > 1e-9 * euler_phi(c):
            fails.append(("real", m, n, c))
        if abs(s - kloosterman(n, m, c)) > 1e-8:
            fails.append(("sym", m, n, c))
        if abs(s - kloosterman(m + c, n - c if n >= c else n + c, c)) > 1e-8:
            fails.append(("period", m, n, c))
        if abs(s) > _weil(m, n, c) + 1e-8:
            fails.append(("weil", m, n, c))
        # split c into coprime parts and check twisted multiplicativity
        f = factor(c).factors
        if len(f) >= 2:
            c1 = f[0][0] ** f[0][1]
            c2 = c // c1
            i1, i2 = mod_inverse(c1 % c2, c2), mod_inverse(c2 % c1, c1)
            prod = kloosterman(m * i2, n * i2, c1) * kloosterman(m * i1, n * i1, c2)
            if abs(s - prod) > 1e-8:
                fails.append(("mult", m, n, c))
    ok = not fails
    assert report(7, ok, f"500 random triples, c <= 2000; failures {fails[:5]}")


def test_criterion_08_bessel_suite(report):
    rng = np.random.default_rng(5)
    rec = 0.0
    for _ in range(1000):
        nu = int(rng.integers(1, 200))
        x = float(rng.uniform(1e-3, 300))
        r = bessel_j(nu - 1, x) + bessel_j(nu + 1, x) - 2 * nu / x * bessel_j(nu, x)
        rec = max(rec, abs(r))
    path = 0.0
    for _ in range(1000):
        nu = int(rng.integers(0, 40))
        x = float(rng.uniform(0.5, 12))
        a, b = _series(nu, x), _miller(nu, x)
        path = max(path, abs(a - b) / max(1.0, abs(a)))
    viol = 0
    for _ in range(1000):
        nu = int(rng.integers(1, 500))
        x = float(rng.uniform(0, 600))
        if abs(bessel_j(nu, x)) > bessel_j_bound(nu, x) * (1 + 1e-12) + 1e-300:
            viol += 1
    ok = rec <= 1e-9 and path <= 1e-10 and viol == 0
    assert report(8, ok, f"recurrence residual {rec:.1e}, series/Miller gap {path:.1e}, "
                  f"bound violations {viol}")


def test_criterion_09_rmt_kernels(report):
    gap = 0.0
    avg = 0.0
    for s in (0.5, 1.0, 1.9):
        phi = fejer_pair(s)
        vals = {}
        for g in GROUPS:
            t, f = rmt_integral_time(g, phi), rmt_integral_fourier(g, phi)
            gap = max(gap, abs(t - f))
            vals[g] = t
        avg = max(avg, abs(vals["O"] - 0.5 * (vals["SOeven"] + vals["SOodd"])))
    phi = fejer_pair(1.0)
    exact = [abs(rmt_integral(g, phi) - v) for g, v in (("U", 1.0), ("O", 1.5), ("Sp", 0.5))]
    ok = gap <= 1e-6 and avg <= 1e-10 and max(exact) <= 1e-10
    assert report(9, ok, f"time/Fourier gap {gap:.1e}, O-average gap {avg:.1e}, "
                  f"exact-value error {max(exact):.1e}")


def test_criterion_10_density_trend(report):
    t0 = time.perf_counter()
    phi = fejer_pair(1.0)
    W = {g: rmt_integral(g, phi) for g in ("O", "Sp", "SOodd")}
    rows = []
    for N in (101, 499, 1009):
        est = one_level_estimate(DensityConfig(12, N, 0.5), phi)
        rows.append((N, est.P_star_over_card, est.D1))
    ratios = [abs(r[1]) for r in rows]
    small = all(r <= 0.2 for r in ratios)
    monotone = all(b <= a for a, b in zip(ratios, ratios[1:]))
    near_O = all(abs(d - W["O"]) <= 0.2 for _, _, d in rows)
    D_last = rows[-1][2]
    far_Sp = abs(D_last - W["Sp"]) >= 0.3
    far_SOodd = abs(D_last - W["SOodd"]) >= 0.3
    elapsed = time.perf_counter() - t0
    ok = small and monotone and near_O and far_Sp and far_SOodd and elapsed <= 600
    detail = (f"|P*/H*| = {[f'{r:.2e}' for r in ratios]}, small {small}, non-increasing {monotone}, "
              f"|D1-O|<=0.2 {near_O}, |D1-Sp| = {abs(D_last - W['Sp']):.3f}, "
              f"|D1-SOodd| = {abs(D_last - W['SOodd']):.3f} (needs >= 0.3), {elapsed:.1f} s")
    assert report(10, ok, detail)
