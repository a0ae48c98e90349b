"""Extended-precision real and complex scalars.

Values are backed by :mod:`mpmath`. Precision is carried explicitly by every
value (``precision_bits``) and every computation runs inside
``mpmath.workprec`` set from its operands, so no code path depends on the
ambient ``mpmath.mp.prec``.

The text form of a real is ``<decimal>@<bits>``, e.g. ``1.2345e+10@256``.
Enough digits are emitted that parsing at the same precision reproduces the
value bit for bit.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from fractions import Fraction
from numbers import Number
from typing import Union

import mpmath
from mpmath import libmp

MIN_BITS = 64
ENV_PRECISION = "MULFREE_PRECISION_BITS"

Scalar = Union["BigReal", "BigComplex", int, float, complex, str, mpmath.mpf, mpmath.mpc]


def required_bits(n: int, s_mag: float) -> int:
    """Mantissa width for a task at degree ``n`` and time scale ``s_mag``.

    Covers coefficient magnitudes up to ``binom(n, n//2) * exp(s_mag*n/2)``
    (about ``2**n * exp(s_mag*n/2)``) with 64 guard bits, squared to leave
    room for the cancellation in root finding and Newton's identities.
    """
    if n < 0 or s_mag < 0:
        raise ValueError("required_bits needs n >= 0 and s_mag >= 0")
    return max(192, math.ceil(2 * (n + s_mag * n / math.log(4))) + 64)


def env_precision() -> int | None:
    """Precision override from ``MULFREE_PRECISION_BITS``, if set."""
    raw = os.environ.get(ENV_PRECISION)
    if not raw:
        return None
    bits = int(raw)
    if bits < MIN_BITS:
        raise ValueError(f"{ENV_PRECISION}={bits} is below {MIN_BITS} bits")
    return bits


def _check_bits(bits: int) -> int:
    bits = int(bits)
    if bits < MIN_BITS:
        raise ValueError(f"precision_bits must be >= {MIN_BITS}, got {bits}")
    return bits


def _digits_for(bits: int) -> int:
    # d >= ceil(p*log10(2)) + 1 guarantees a decimal round trip
    return math.ceil(bits * math.log10(2)) + 1


def _format_mpf(x: mpmath.mpf, bits: int) -> str:
    sign, man, exp, _ = x._mpf_
    if not man:
        if x._mpf_ not in (libmp.fzero, libmp.fnzero):
            return f"{mpmath.nstr(x)}@{bits}"
        return f"0.0e+0@{bits}"
    value = Fraction(man) * (Fraction(2) ** exp)
    d = _digits_for(bits)
    e10 = math.floor((int(man).bit_length() - 1 + exp) * math.log10(2))
    # exact scaling; fix up a possible off-by-one in the float estimate
    for _ in range(3):
        scaled = value / (Fraction(10) ** (e10 - d + 1))
        digits = round(scaled)
        if digits >= 10**d:
            e10 += 1
        elif digits < 10 ** (d - 1):
            e10 -= 1
        else:
            break
    text = str(digits)
    mant = f"{text[0]}.{text[1:] or '0'}"
    return f"{'-' if sign else ''}{mant}e{e10:+d}@{bits}"


def _parse_mpf(text: str, bits: int) -> mpmath.mpf:
    frac = Fraction(text)
    mpf_ = libmp.from_rational(frac.numerator, frac.denominator, bits, libmp.round_nearest)
    return mpmath.mp.make_mpf(mpf_)


def _split_annotation(text: str) -> tuple[str, int]:
    body, sep, bits = text.strip().rpartition("@")
    if not sep:
        raise ValueError(f"missing '@bits' precision annotation in {text!r}")
    return body, _check_bits(int(bits))


@dataclass(frozen=True)
class BigReal:
    """Immutable real scalar with an explicit mantissa width."""

    value: mpmath.mpf
    precision_bits: int

    def __post_init__(self):
        bits = _check_bits(self.precision_bits)
        with mpmath.workprec(bits):
            v = mpmath.mpf(self.value)
        object.__setattr__(self, "precision_bits", bits)
        object.__setattr__(self, "value", v)

    @classmethod
    def of(cls, x, bits: int) -> BigReal:
        if isinstance(x, BigReal):
            return cls(x.value, bits)
        if isinstance(x, str):
            with mpmath.workprec(_check_bits(bits)):
                return cls(mpmath.mpf(x), bits)
        return cls(mpmath.mpf(x) if not isinstance(x, mpmath.mpf) else x, bits)

    @classmethod
    def parse(cls, text: str) -> BigReal:
        body, bits = _split_annotation(text)
        return cls(_parse_mpf(body, bits), bits)

    def __str__(self) -> str:
        return _format_mpf(self.value, self.precision_bits)

    def _binary(self, other, op):
        if isinstance(other, BigComplex):
            return NotImplemented
        if not isinstance(other, BigReal):
            other = BigReal.of(other, self.precision_bits)
        bits = max(self.precision_bits, other.precision_bits)
        with mpmath.workprec(bits):
            return BigReal(op(self.value, other.value), bits)

    def __add__(self, other):
        return self._binary(other, lambda a, b: a + b)

    __radd__ = __add__

    def __sub__(self, other):
        return self._binary(other, lambda a, b: a - b)

    def __rsub__(self, other):
        return self._binary(other, lambda a, b: b - a)

    def __mul__(self, other):
        return self._binary(other, lambda a, b: a * b)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self._binary(other, lambda a, b: a / b)

    def __rtruediv__(self, other):
        return self._binary(other, lambda a, b: b / a)

    def __neg__(self):
        return BigReal(-self.value, self.precision_bits)

    def __abs__(self):
        return BigReal(abs(self.value), self.precision_bits)

    def __float__(self):
        return float(self.value)

    def __eq__(self, other):
        if isinstance(other, BigReal):
            return self.value == other.value
        if isinstance(other, Number):
            return self.value == other
        return NotImplemented

    def __lt__(self, other):
        return self.value < (other.value if isinstance(other, BigReal) else other)

    def __le__(self, other):
        return self.value <= (other.value if isinstance(other, BigReal) else other)

    def __hash__(self):
        return hash(self.value)

    def exp(self) -> BigReal:
        with mpmath.workprec(self.precision_bits):
            return BigReal(mpmath.exp(self.value), self.precision_bits)

    def log(self) -> BigReal:
        if self.value <= 0:
            raise ValueError("log of a non-positive BigReal; use BigComplex")
        with mpmath.workprec(self.precision_bits):
            return BigReal(mpmath.log(self.value), self.precision_bits)

    def sqrt(self) -> BigReal:
        with mpmath.workprec(self.precision_bits):
            return BigReal(mpmath.sqrt(self.value), self.precision_bits)


@dataclass(frozen=True)
class BigComplex:
    """Immutable complex scalar; both parts share one precision."""

    re: BigReal
    im: BigReal

    def __post_init__(self):
        bits = max(self.re.precision_bits, self.im.precision_bits)
        if self.re.precision_bits != bits:
            object.__setattr__(self, "re", BigReal(self.re.value, bits))
        if self.im.precision_bits != bits:
            object.__setattr__(self, "im", BigReal(self.im.value, bits))

    @property
    def precision_bits(self) -> int:
        return self.re.precision_bits

    @property
    def value(self) -> mpmath.mpc:
        return mpmath.mp.make_mpc((self.re.value._mpf_, self.im.value._mpf_))

    @classmethod
    def of(cls, x, bits: int) -> BigComplex:
        if isinstance(x, BigComplex):
            return cls(BigReal(x.re.value, bits), BigReal(x.im.value, bits))
        if isinstance(x, BigReal):
            x = x.value
        with mpmath.workprec(_check_bits(bits)):
            z = mpmath.mpc(x)
        return cls(BigReal(z.real, bits), BigReal(z.imag, bits))

    @classmethod
    def parse(cls, pair) -> BigComplex:
        """Parse ``[re@p, im@p]`` (a list of two strings)."""
        re_text, im_text = pair
        return cls(BigReal.parse(re_text), BigReal.parse(im_text))

    def to_pair(self) -> list[str]:
        return [str(self.re), str(self.im)]

    def __str__(self) -> str:
        return f"({self.re}, {self.im})"

    def _binary(self, other, op):
        if not isinstance(other, BigComplex):
            other = BigComplex.of(other, self.precision_bits)
        bits = max(self.precision_bits, other.precision_bits)
        with mpmath.workprec(bits):
            return BigComplex.of(op(self.value, other.value), bits)

    def __add__(self, other):
        return self._binary(other, lambda a, b: a + b)

    __radd__ = __add__

    def __sub__(self, other):
        return self._binary(other, lambda a, b: a - b)

    def __rsub__(self, other):
        return self._binary(other, lambda a, b: b - a)

    def __mul__(self, other):
        return self._binary(other, lambda a, b: a * b)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self._binary(other, lambda a, b: a / b)

    def __rtruediv__(self, other):
        return self._binary(other, lambda a, b: b / a)

    def __pow__(self, other):
        return self._binary(other, mpmath.power)

    def __neg__(self):
        return BigComplex(-self.re, -self.im)

    def __abs__(self) -> BigReal:
        with mpmath.workprec(self.precision_bits):
            return BigReal(abs(self.value), self.precision_bits)

    def __complex__(self):
        return complex(self.value)

    def __eq__(self, other):
        if isinstance(other, BigComplex):
            return self.re == other.re and self.im == other.im
        if isinstance(other, Number):
            return self.value == other
        return NotImplemented

    def __hash__(self):
        return hash((self.re, self.im))

    def conjugate(self) -> BigComplex:
        return BigComplex(self.re, -self.im)

    def exp(self) -> BigComplex:
        with mpmath.workprec(self.precision_bits):
            return BigComplex.of(mpmath.exp(self.value), self.precision_bits)

    def log(self) -> BigComplex:
        """Principal branch."""
        with mpmath.workprec(self.precision_bits):
            return BigComplex.of(mpmath.log(self.value), self.precision_bits)


def to_mpc(x, bits: int) -> mpmath.mpc:
    """Coerce a number, string, or Big* value to ``mpc`` rounded to ``bits``."""
    if isinstance(x, BigComplex):
        x = x.value
    elif isinstance(x, BigReal):
        x = x.value
    with mpmath.workprec(bits):
        if isinstance(x, str):
            return mpmath.mpc(mpmath.mpmathify(x))
        return mpmath.mpc(x)


def is_real(z) -> bool:
    if isinstance(z, BigComplex):
        return z.im.value == 0
    return getattr(z, "imag", 0) == 0


def precision_of(*values) -> int:
    """Largest precision carried by the given Big* values (MIN_BITS if none)."""
    bits = [v.precision_bits for v in values if isinstance(v, (BigReal, BigComplex))]
    return max(bits, default=MIN_BITS)


def format_mpf(x, bits: int) -> str:
    with mpmath.workprec(bits):
        return _format_mpf(mpmath.mpf(x), bits)


def format_mpc(z, bits: int) -> list[str]:
    with mpmath.workprec(bits):
        z = mpmath.mpc(z)
    return [format_mpf(z.real, bits), format_mpf(z.imag, bits)]


def parse_mpc(pair) -> tuple[mpmath.mpc, int]:
    c = BigComplex.parse(pair)
    return c.value, c.precision_bits
