"""Acceptance criteria 1-11 at their stated tolerances.

Each test appends one ``criterion N: PASS|FAIL ...`` line, printed in the
terminal summary.
"""

import functools
import time

import mpmath
import pytest

import conftest
from mulfree import experiments, limits, moments, ode, poly
from mulfree.limits import MuParams, NuParams
from mulfree.series import PowerSeries

BITS = 256
MU_S = ("-2", "-1", "-0.5", "0.5", "1", "2")
NU_BETA = (1, 3, -2, complex(-0.5, 1))
NU_GAMMA = ("0.25", "0.5", "1")
GRID = (25, 50, 100, 200)


def report(n, ok, detail):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'} {detail}"
    conftest.ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def rel(a, b):
    with mpmath.workprec(BITS):
        scale = max(abs(a), abs(b))
        return abs(a - b) / scale if scale else mpmath.mpf(0)


def pairwise(routes):
    vals = list(routes.values())
    return max(rel(x, y) for i, a in enumerate(vals) for b in vals[i + 1:] for x, y in zip(a, b))


def test_criterion_1_route_agreement():
    t0 = time.perf_counter()
    worst = mpmath.mpf(0)
    for s in MU_S:
        worst = max(worst, pairwise(limits.mu_moment_routes(MuParams(s), 20, BITS)))
    for beta in NU_BETA:
        for gamma in NU_GAMMA:
            worst = max(worst, pairwise(limits.nu_moment_routes(NuParams(beta, gamma), 20, BITS)))
    dt = time.perf_counter() - t0
    report(1, worst < 1e-25 and dt < 10, f"max pairwise relative gap {float(worst):.2e}, {dt:.1f}s")


def test_criterion_2_s_transform():
    t0 = time.perf_counter()
    worst = mpmath.mpf(0)
    for s in MU_S:
        S = limits.s_transform_from_moments(limits.mu_moments(MuParams(s), 11, BITS))
        worst = max(worst, S.max_abs_gap(limits.mu_s_series(MuParams(s), 10, BITS)))
    for beta in NU_BETA:
        for gamma in NU_GAMMA:
            p = NuParams(beta, gamma)
            S = limits.s_transform_from_moments(limits.nu_moments(p, 11, BITS))
            worst = max(worst, S.max_abs_gap(limits.nu_s_series(p, 10, BITS)))
    dt = time.perf_counter() - t0
    report(2, worst < 1e-20 and dt < 5, f"max coefficient gap {float(worst):.2e}, {dt:.1f}s")


def test_criterion_3_s_r_identity():
    cases = [moments.MomentSequence.from_tail([1] * 13, BITS)]
    cases += [limits.mu_moments(MuParams(s), 13, BITS) for s in MU_S]
    cases += [limits.nu_moments(NuParams(b, g), 13, BITS) for b in NU_BETA for g in NU_GAMMA]
    worst = mpmath.mpf(0)
    for m in cases:
        comp = limits.s_r_composite(limits.s_transform_from_moments(m), limits.r_transform(m))
        with mpmath.workprec(BITS):
            worst = max(worst, max(abs(comp[k] - (1 if k == 0 else 0)) for k in range(13)))
    kappa_gap = mpmath.mpf(0)
    for s in MU_S:
        R = limits.r_transform(limits.mu_moments(MuParams(s), 13, BITS))
        with mpmath.workprec(BITS):
            sv = mpmath.mpf(s)
            for k in range(1, 14):
                want = (sv * k) ** (k - 1) * mpmath.exp(sv * k / 2) / mpmath.factorial(k)
                kappa_gap = max(kappa_gap, abs(R[k - 1] - want))
    report(3, worst < 1e-20 and kappa_gap < 1e-20, f"S R(zS) - 1 {float(worst):.2e}, cumulant gap {float(kappa_gap):.2e}")


def test_criterion_4_hermite_ode_oracle():
    t0 = time.perf_counter()
    worst = mpmath.mpf(0)
    for n in (10, 20):
        for s in ("0.5", "-0.5", "1", "-1"):
            st = ode.hermite_finite_n_evolve(n, 8, s, steps=4096, prec=128)
            P = poly.mult_heat_apply(poly.unit_power(n, BITS), s, n)
            m = moments.moments_from_coeffs(P, 8)
            with mpmath.workprec(BITS):
                sv = mpmath.mpf(s)
                for k in range(1, 9):
                    # mult_heat_apply moments carry a factor exp(-s k/2) relative to sigma_k
                    worst = max(worst, rel(st.sigma[k - 1], mpmath.exp(sv * k / 2) * m[k]))
    dt = time.perf_counter() - t0
    report(4, worst < 1e-10 and dt < 30, f"max relative gap {float(worst):.2e}, {dt:.1f}s")


def test_criterion_5_laguerre_recursion_oracle():
    t0 = time.perf_counter()
    n = 8
    worst = mpmath.mpf(0)
    for b in (3, complex(-4, 2)):
        for st in ode.laguerre_recursion_evolve(n, b, 6, 10, BITS):
            m = moments.moments_from_coeffs(poly.laguerre_mult(n, b, st.s, BITS), 6)
            worst = max(worst, max(rel(a, w) for a, w in zip(st.sigma, m.values[1:])))
    dt = time.perf_counter() - t0
    report(5, worst < 1e-12 and dt < 10, f"max relative gap {float(worst):.2e}, {dt:.1f}s")


def test_criterion_6_limit_ode():
    closed, vs_nu = mpmath.mpf(0), mpmath.mpf(0)
    for beta in (1, 3, complex(-0.5, 1)):
        for gamma in ("0.25", "1"):
            st = ode.laguerre_limit_evolve(beta, 8, gamma, steps=256, prec=BITS)
            m = limits.nu_moments(NuParams(beta, gamma), 8, BITS)
            with mpmath.workprec(BITS):
                a, g = st.alpha, mpmath.mpf(gamma)
                g2 = 1 + a**2 * g
                g3 = 1 + (3 * a**2 + a**3) * g + mpmath.mpf(3) / 2 * a**4 * g**2
                closed = max(closed, abs(st.g[1] - g2), abs(st.g[2] - g3))
                vs_nu = max(vs_nu, max(abs(f - w) for f, w in zip(st.f, m.values[1:])))
    report(6, closed < 1e-10 and vs_nu < 1e-8, f"closed forms {float(closed):.2e}, f vs nu {float(vs_nu):.2e}")


@functools.lru_cache(maxsize=None)
def sweep(family, **params):
    cfg = experiments.ExperimentConfig(family=family, n_grid=GRID, k_max=3, **params)
    run = experiments.run_hermite_convergence if family == "hermite" else experiments.run_laguerre_convergence
    t0 = time.perf_counter()
    rep = run(cfg)
    return rep, time.perf_counter() - t0


def rate_summary(rep):
    ok, parts = True, []
    for k in (1, 2, 3):
        errs = [rep.error(n, k) for n in GRID]
        mono = all(b < a for a, b in zip(errs, errs[1:]))
        slope = rep.fitted_rate[k]
        good = slope is not None and -1.3 <= slope <= -0.7
        ok &= good
        parts.append(f"k={k} slope {slope:.3f}{'' if mono else ' (not monotone)'}")
    return ok, parts


def test_criterion_7_hermite_rate():
    ok, parts, total = True, [], 0.0
    for s in ("1", "-1"):
        rep, dt = sweep("hermite", s=s)
        total += dt
        good, p = rate_summary(rep)
        mono = all(
            all(b < a for a, b in zip(errs, errs[1:]))
            for errs in ([rep.error(n, k) for n in GRID] for k in (1, 2, 3))
        )
        ok &= good and mono
        parts.append(f"s={s}: " + ", ".join(p))
    report(7, ok and total < 300, "; ".join(parts) + f"; {total:.0f}s")


def test_criterion_8_laguerre_rate():
    ok, parts, total = True, [], 0.0
    for label, params in (("beta=1", dict(beta_re="1")), ("beta=-1/2+i", dict(beta_re="-0.5", beta_im="1"))):
        rep, dt = sweep("laguerre", gamma="0.5", **params)
        total += dt
        good, p = rate_summary(rep)
        ok &= good
        parts.append(f"{label}: " + ", ".join(p))
    report(8, ok and total < 300, "; ".join(parts) + f"; {total:.0f}s")


def test_criterion_9_support():
    cases = (
        ("hermite s=-1", sweep("hermite", s="-1")[0], "unitary"),
        ("hermite s=+1", sweep("hermite", s="1")[0], "positive"),
        ("laguerre Re b=-n/2", sweep("laguerre", gamma="0.5", beta_re="-0.5", beta_im="1")[0], "unitary"),
        ("laguerre b=n", sweep("laguerre", gamma="0.5", beta_re="1")[0], "positive"),
    )
    ok, parts = True, []
    for label, rep, mode in cases:
        sup = rep.support_reports
        assert set(sup) == set(GRID)
        if mode == "unitary":
            worst = max(r.max_unit_deviation for r in sup.values())
            good = worst <= 1e-10
        else:
            worst = max(r.max_imag_ratio for r in sup.values())
            good = worst <= 1e-10 and min(r.min_real_part for r in sup.values()) > 0
        ok &= good
        parts.append(f"{label} {worst:.1e}")
    report(9, ok, ", ".join(parts))


def coeff_rel(P, Q):
    with mpmath.workprec(BITS):
        return max(
            (abs(a - b) / max(abs(a), abs(b)) if max(abs(a), abs(b)) else mpmath.mpf(0))
            for a, b in zip(P.padded(max(P.degree, Q.degree)), Q.padded(max(P.degree, Q.degree)))
        )


def test_criterion_10_exact_symmetries():
    worst = {"palindrome": 0, "reversal": 0, "hermite semigroup": 0, "laguerre semigroup": 0}
    with mpmath.workprec(BITS):
        for n in range(1, 33):
            for s in ("-1.5", "-0.25", "0.5", "2"):
                P = poly.hermite_mult(n, s, BITS)
                rev = poly.reverse_reciprocal(P)
                flipped = poly.Polynomial(tuple((-1) ** n * c for c in rev.coeffs), BITS)
                worst["palindrome"] = max(worst["palindrome"], coeff_rel(flipped, P))
            for b, c in ((mpmath.mpf(n) / 3 + 1, n // 2), (mpmath.mpc(-n / 2, 1), n), (mpmath.mpf(2 * n), 3)):
                L = poly.laguerre_mult(n, b, c, BITS)
                rev = poly.reverse_reciprocal(L)
                want = poly.Polynomial(tuple((-1) ** (n + c) * a for a in rev.coeffs), BITS)
                worst["reversal"] = max(worst["reversal"], coeff_rel(poly.laguerre_mult(n, -n - b, c, BITS), want))
            s1, s2 = mpmath.mpf("0.7") / n, mpmath.mpf("-1.9") / n
            A, B = poly.hermite_mult(n, s1, BITS), poly.hermite_mult(n, s2, BITS)
            C = poly.hermite_mult(n, s1 + s2, BITS)
            worst["hermite semigroup"] = max(worst["hermite semigroup"], coeff_rel(poly.finite_free_mult_convolve(A, B, n), C))
            b = mpmath.mpc(-n / 2, n / 4)
            A, B = poly.laguerre_mult(n, b, 2, BITS), poly.laguerre_mult(n, b, 5, BITS)
            C = poly.laguerre_mult(n, b, 7, BITS)
            worst["laguerre semigroup"] = max(worst["laguerre semigroup"], coeff_rel(poly.finite_free_mult_convolve(A, B, n), C))
    ok = all(v < 1e-25 for v in worst.values())
    report(10, ok, ", ".join(f"{k} {float(v):.1e}" for k, v in worst.items()))


def test_criterion_11_measure_semigroups():
    worst = mpmath.mpf(0)
    for s1, s2 in (("0.5", "1"), ("-1", "-0.5"), ("2", "-1.25")):
        a = limits.mu_moments(MuParams(s1), 12, BITS)
        b = limits.mu_moments(MuParams(s2), 12, BITS)
        with mpmath.workprec(BITS):
            total = mpmath.mpf(s1) + mpmath.mpf(s2)
        c = limits.mu_moments(MuParams(total), 12, BITS)
        worst = max(worst, moments.max_relative_gap(limits.free_mult_convolve_moments(a, b, 12), c))
    for beta in NU_BETA:
        for g1, g2 in (("0.25", "0.5"), ("1", "0.5")):
            a = limits.nu_moments(NuParams(beta, g1), 12, BITS)
            b = limits.nu_moments(NuParams(beta, g2), 12, BITS)
            with mpmath.workprec(BITS):
                total = mpmath.mpf(g1) + mpmath.mpf(g2)
            c = limits.nu_moments(NuParams(beta, total), 12, BITS)
            worst = max(worst, moments.max_relative_gap(limits.free_mult_convolve_moments(a, b, 12), c))
    report(11, worst < 1e-15, f"max relative moment gap {float(worst):.2e}")
