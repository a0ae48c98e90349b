import math

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mulfree.scalar import (
    ENV_PRECISION,
    BigComplex,
    BigReal,
    env_precision,
    format_mpc,
    parse_mpc,
    required_bits,
)


def test_required_bits_floor():
    assert required_bits(0, 0) == 192


def test_required_bits_n100():
    # ceil(2 * (100 + 100 / ln 4)) + 64 = 345 + 64
    assert required_bits(100, 1.0) == 409
    needed = math.log2(math.comb(100, 50)) + 50 / math.log(2)
    assert required_bits(100, 1.0) >= needed + 64


def test_required_bits_n400_against_coefficient_maximum():
    bits = required_bits(400, 2.0)
    assert bits == 2019
    assert bits >= 2 * 400 + 64
    n, s = 400, 2 / 400
    with mpmath.workprec(128):
        biggest = max(
            mpmath.log(math.comb(n, j), 2) - s / 2 * (j * j - n * j) / mpmath.log(2) for j in range(n + 1)
        )
    assert bits >= biggest + 64


def test_required_bits_monotone():
    assert required_bits(50, 1) <= required_bits(51, 1) <= required_bits(51, 1.5)


def test_required_bits_rejects_negative():
    with pytest.raises(ValueError):
        required_bits(-1, 0)


def test_minimum_precision():
    with pytest.raises(ValueError):
        BigReal.of(1, 63)


def test_text_form():
    x = BigReal.of("1.2345e10", 256)
    assert str(x).endswith("@256")
    assert str(x).startswith("1.2345")
    assert BigReal.parse("1.2345e+10@256") == x


def test_parse_requires_annotation():
    with pytest.raises(ValueError):
        BigReal.parse("1.5")


@settings(max_examples=200, deadline=None)
@given(
    man=st.integers(min_value=-(2**300), max_value=2**300),
    exp=st.integers(min_value=-2000, max_value=2000),
    bits=st.sampled_from([64, 65, 100, 192, 256, 1000]),
)
def test_round_trip_bit_exact(man, exp, bits):
    with mpmath.workprec(bits):
        v = mpmath.mpf(man) * mpmath.mpf(2) ** exp
    x = BigReal(v, bits)
    y = BigReal.parse(str(x))
    assert y.precision_bits == bits
    assert y.value._mpf_ == x.value._mpf_


def test_round_trip_negative_and_zero():
    for text in ("-0.1", "0", "-3.75e-300"):
        x = BigReal.of(text, 128)
        assert BigReal.parse(str(x)).value == x.value


def test_promotion_to_larger_precision():
    a = BigReal.of(1, 64)
    b = BigReal.of(3, 300)
    assert (a + b).precision_bits == 300
    assert (b * a).precision_bits == 300
    c = BigComplex.of(1j, 80) + BigComplex.of(2, 200)
    assert c.precision_bits == 200


def test_division_precision_is_carried():
    third = BigReal.of(1, 400) / 3
    with mpmath.workprec(400):
        assert abs(third.value - mpmath.mpf(1) / 3) < mpmath.mpf(2) ** -398


def test_complex_parts_share_precision():
    z = BigComplex(BigReal.of(1, 64), BigReal.of(2, 128))
    assert z.re.precision_bits == z.im.precision_bits == 128


def test_complex_pair_round_trip():
    z = BigComplex.of(mpmath.mpc("0.1", "-2.5"), 256)
    assert BigComplex.parse(z.to_pair()) == z
    v, bits = parse_mpc(format_mpc(z.value, 256))
    assert bits == 256 and v == z.value


def test_complex_log_principal_branch():
    z = BigComplex.of(-1, 128).log()
    with mpmath.workprec(128):
        assert abs(z.im.value - mpmath.pi) < mpmath.mpf(2) ** -120


def test_real_log_rejects_nonpositive():
    with pytest.raises(ValueError):
        BigReal.of(-2, 64).log()


def test_transcendentals_within_two_ulp():
    x = BigReal.of("0.7", 200)
    with mpmath.workprec(400):
        ref = mpmath.exp(x.value)
    with mpmath.workprec(200):
        assert abs(x.exp().value - ref) <= 2 * mpmath.mpf(2) ** (-200) * abs(ref)


def test_complex_power():
    z = BigComplex.of(2j, 128) ** BigComplex.of(3, 128)
    assert abs(complex(z) - (-8j)) < 1e-30


def test_env_precision(monkeypatch):
    monkeypatch.setenv(ENV_PRECISION, "512")
    assert env_precision() == 512
    monkeypatch.setenv(ENV_PRECISION, "10")
    with pytest.raises(ValueError):
        env_precision()
    monkeypatch.delenv(ENV_PRECISION)
    assert env_precision() is None
