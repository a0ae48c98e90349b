import mpmath
import pytest

from mulfree.limits import NuParams, nu_moments
from mulfree.moments import moments_from_coeffs
from mulfree.ode import (
    hermite_eta_gap,
    hermite_finite_n_evolve,
    hermite_limit_sigma,
    laguerre_limit_evolve,
    laguerre_recursion_evolve,
    phi_forcing,
    rk4,
    trajectory_to_csv,
)
from mulfree.poly import heat_polynomial, laguerre_mult

PREC = 256


def test_rk4_exponential():
    y, traj = rk4(lambda t, y: [y[0]], [mpmath.mpf(1)], mpmath.mpf(0), mpmath.mpf(1), 64, PREC, record=16)
    with mpmath.workprec(PREC):
        assert abs(y[0] - mpmath.e) < 1e-8
    assert len(traj) == 5
    with pytest.raises(ValueError):
        rk4(lambda t, y: y, [1], 0, 1, 0, PREC)


def test_rk4_fourth_order():
    m = moments_from_coeffs(heat_polynomial(10, 1, PREC), 4)
    errs = []
    with mpmath.workprec(PREC):
        for steps in (32, 64, 128):
            y = hermite_finite_n_evolve(10, 4, 1, steps=steps, prec=PREC).sigma
            errs.append(max(abs(a - b) for a, b in zip(y, m.values[1:])))
    for a, b in zip(errs, errs[1:]):
        assert 12 <= a / b <= 20


def test_first_moment_closed_form():
    # sigma_1' = (1 - 1/2n) sigma_1
    st = hermite_finite_n_evolve(8, 1, "0.5", steps=256, prec=PREC)
    with mpmath.workprec(PREC):
        assert abs(st.sigma[0] - mpmath.exp(mpmath.mpf("0.5") * (1 - mpmath.mpf(1) / 16))) < 1e-12


def test_inviscid_matches_limit_formula():
    st = hermite_finite_n_evolve(None, 6, "-0.75", steps=1024, prec=PREC)
    want = hermite_limit_sigma(6, "-0.75", PREC)
    with mpmath.workprec(PREC):
        assert max(abs(a - b) for a, b in zip(st.sigma, want)) < 1e-12
    assert st.n == float("inf")


def test_hermite_validation():
    with pytest.raises(ValueError):
        hermite_finite_n_evolve(10, 0, 1)
    with pytest.raises(ValueError):
        hermite_finite_n_evolve(0, 3, 1)


def test_eta_gap_halves_with_n():
    g10 = hermite_eta_gap(10, 3, 1, steps=128)
    g20 = hermite_eta_gap(20, 3, 1, steps=128)
    g40 = hermite_eta_gap(40, 3, 1, steps=128)
    assert g10[0] == 0
    for k in (1, 2):
        assert 1.7 < g10[k] / g20[k] < 2.3
        assert 1.7 < g20[k] / g40[k] < 2.3
    assert hermite_eta_gap(10, 3, 0) == [0, 0, 0]


def test_laguerre_recursion_matches_polynomials():
    n, b = 6, mpmath.mpc(-3, 1)
    states = laguerre_recursion_evolve(n, b, 5, 6, PREC)
    assert [st.s for st in states] == list(range(7))
    for st in states:
        m = moments_from_coeffs(laguerre_mult(n, b, st.s, PREC), 5)
        with mpmath.workprec(PREC):
            for a, w in zip(st.sigma, m.values[1:]):
                assert abs(a - w) <= mpmath.mpf(2) ** -180 * max(1, abs(w))


def test_laguerre_recursion_rejects_minus_n():
    with pytest.raises(ValueError):
        laguerre_recursion_evolve(4, -4, 3, 2)


def test_phi_forcing_low_orders():
    with mpmath.workprec(PREC):
        a = mpmath.mpf("-0.5")
        x = [mpmath.mpf(2), mpmath.mpf(3), mpmath.mpf(5)]
        phi = phi_forcing(x, a, PREC)
        assert phi[0] == 0
        # Phi_2 = alpha x_1 Bhat_1 = alpha x_1 (alpha x_1)
        assert abs(phi[1] - a * a * 4) < 1e-60


@pytest.mark.parametrize("gamma", ["0.25", "1"])
def test_limit_ode_closed_forms(gamma):
    st = laguerre_limit_evolve(2, 3, gamma, steps=256, prec=PREC)
    with mpmath.workprec(PREC):
        a, g = st.alpha, mpmath.mpf(gamma)
        assert abs(st.g[1] - (1 + a**2 * g)) < 1e-10
        assert abs(st.g[2] - (1 + (3 * a**2 + a**3) * g + mpmath.mpf(3) / 2 * a**4 * g**2)) < 1e-10


def test_limit_ode_matches_nu():
    st = laguerre_limit_evolve(1, 6, "0.5", steps=256, prec=PREC)
    m = nu_moments(NuParams(1, "0.5"), 6)
    with mpmath.workprec(PREC):
        assert max(abs(a - b) for a, b in zip(st.f, m.values[1:])) < 1e-8


def test_trajectory_csv():
    st = hermite_finite_n_evolve(5, 2, 1, steps=8, prec=128, record=4)
    lines = trajectory_to_csv(st.trajectory).strip().splitlines()
    assert lines[0] == "s_or_gamma,k,re,im"
    assert len(lines) == 1 + 3 * 2
