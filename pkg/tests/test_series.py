import itertools
import math

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mulfree.series import (
    BellTable,
    PowerSeries,
    bell_partial,
    bell_weighted,
    default_order,
    lagrange_coeff,
    lagrange_series,
    picard_fixed_point,
    ps_compose,
    ps_compose_inverse,
    ps_exp,
    ps_log,
    ps_mul,
    ps_pow,
    ps_reciprocal,
)

PREC = 192
TOL = mpmath.mpf(2) ** -150


def series(values, K=None):
    return PowerSeries.of(values, PREC, K)


def test_default_order():
    assert default_order(5) == 14


def test_exp_log_round_trip():
    a = series([0, 1, -0.5, 0.25, 2], 10)
    assert ps_log(ps_exp(a)).max_abs_gap(a) < TOL
    e = ps_exp(series([0, 1], 8))
    with mpmath.workprec(PREC):
        for k in range(9):
            assert abs(e[k] - mpmath.mpf(1) / math.factorial(k)) < TOL


def test_reciprocal():
    a = series([2, 1, 3], 9)
    one = ps_mul(a, ps_reciprocal(a))
    assert one.max_abs_gap(PowerSeries.constant(1, 9, PREC)) < TOL
    with pytest.raises(ValueError):
        ps_reciprocal(series([0, 1]))


def test_pow_binomial():
    p = ps_pow(series([1, 1], 7), 7)
    assert [complex(c) for c in p.coeffs] == [math.comb(7, j) for j in range(8)]


def test_truncation_uses_smaller_order():
    assert ps_mul(series([1, 1], 3), series([1, 1], 6)).K == 3
    assert series([1, 2, 3])[10] == 0


def test_compose():
    f = ps_exp(series([0, 1], 8))
    g = series([0, 1, 1], 8)
    h = ps_compose(f, g)
    assert h.max_abs_gap(ps_exp(g)) < TOL
    with pytest.raises(ValueError):
        ps_compose(f, series([1, 1], 8))


def test_lagrange_catalan():
    # psi = z (1 + psi)^2: coefficients are Catalan numbers
    phi = series([1, 2, 1], 12)
    cat = [math.comb(2 * k, k) // (k + 1) for k in range(1, 11)]
    assert [round(float(lagrange_coeff(phi, k).real)) for k in range(1, 11)] == cat


def test_lagrange_matches_picard():
    phi = series([1, 0.5, -0.25, 1j], 10)
    assert lagrange_series(phi, 10).max_abs_gap(picard_fixed_point(phi, 10)) < TOL


def test_lagrange_rejects_bad_input():
    with pytest.raises(ValueError):
        lagrange_coeff(series([0, 1], 4), 2)
    with pytest.raises(ValueError):
        lagrange_coeff(series([1, 1], 2), 5)


def test_compose_inverse_round_trip():
    psi = ps_exp(series([0, 1], 10)) - 1
    inv = ps_compose_inverse(psi)
    # inverse of e^u - 1 is log(1 + u)
    want = ps_log(series([1, 1], 10))
    assert inv.max_abs_gap(want) < TOL
    x = PowerSeries.variable(10, PREC)
    assert ps_compose(psi, inv).max_abs_gap(x) < TOL
    assert ps_compose(inv, psi).max_abs_gap(x) < TOL


def test_shift():
    a = series([1, 2, 3], 3)
    assert [complex(c) for c in a.shift(1).coeffs] == [0, 1, 2, 3]
    assert [complex(c) for c in a.shift(-1).coeffs] == [2, 3, 0, 0]


def brute_bell(ell, r, x):
    if r == 0:
        return 1 if ell == 0 else 0
    total = 0
    for parts in itertools.product(range(1, ell + 1), repeat=r):
        if sum(parts) == ell:
            total += math.prod(x[p - 1] for p in parts)
    return total


def test_bell_against_compositions():
    x = [2, -1, 3, 5, 7, -2]
    table = BellTable.build(x, 6, PREC)
    for ell in range(7):
        for r in range(ell + 1):
            assert complex(table.partial(ell, r)) == brute_bell(ell, r, x)
    assert bell_partial(6, 3, x) == table.partial(6, 3)
    with pytest.raises(ValueError):
        table.partial(2, 3)


@settings(max_examples=25, deadline=None)
@given(
    x=st.lists(st.integers(min_value=-5, max_value=5), min_size=1, max_size=6),
    r=st.integers(min_value=0, max_value=4),
)
def test_bell_generating_function(x, r):
    # B_{l,r} = [t^l] (sum x_m t^m)^r
    L = 7
    table = BellTable.build(x, L, PREC)
    power = ps_pow(series([0] + x, L), r)
    for ell in range(r, L + 1):
        assert abs(table.partial(ell, r) - power[ell]) == 0


def test_bell_weighted():
    x = [1, 2, 3]
    assert complex(bell_weighted(0, x, 5)) == 1
    # m = 2: y x_2 + y^2 x_1^2
    assert complex(bell_weighted(2, x, 3)) == 3 * 2 + 9 * 1
    # y = 1 and x_m = 1: number of compositions of m, 2^(m-1)
    assert complex(bell_weighted(6, [1] * 6, 1)) == 32
