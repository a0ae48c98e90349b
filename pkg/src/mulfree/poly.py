"""Multiplicative Hermite/Laguerre families and the finite free ``⊠_n``.

Polynomials are stored in the monomial basis, lowest degree first, as
``mpmath.mpc`` values sharing one precision. Every operation here is a
coefficient-wise scaling, so all of them are exact up to one rounding per
coefficient.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import mpmath

from .scalar import BigComplex, format_mpc, parse_mpc, required_bits, to_mpc


@dataclass(frozen=True)
class Polynomial:
    """Degree-``n`` polynomial ``sum(coeffs[j] * x**j)``.

    Trailing zero coefficients are stripped on construction so that the
    leading coefficient is nonzero; the zero polynomial is rejected.
    """

    coeffs: tuple
    prec: int

    def __post_init__(self):
        with mpmath.workprec(self.prec):
            cs = [mpmath.mpc(c) for c in self.coeffs]
        while len(cs) > 1 and cs[-1] == 0:
            cs.pop()
        if not cs or cs[-1] == 0:
            raise ValueError("the zero polynomial has no degree")
        object.__setattr__(self, "coeffs", tuple(cs))

    @classmethod
    def from_values(cls, values: Iterable, prec: int) -> Polynomial:
        return cls(tuple(to_mpc(v, prec) for v in values), prec)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def leading(self) -> mpmath.mpc:
        return self.coeffs[-1]

    def coefficient(self, j: int) -> BigComplex:
        c = self.coeffs[j] if 0 <= j <= self.degree else mpmath.mpc(0)
        return BigComplex.of(c, self.prec)

    def padded(self, n: int) -> list:
        """Coefficient list of length ``n + 1`` (zero padded)."""
        if self.degree > n:
            raise ValueError(f"degree {self.degree} exceeds n={n}")
        return list(self.coeffs) + [mpmath.mpc(0)] * (n - self.degree)

    def __call__(self, x):
        with mpmath.workprec(self.prec):
            x = mpmath.mpc(x)
            acc = mpmath.mpc(0)
            for c in reversed(self.coeffs):
                acc = acc * x + c
            return acc

    def with_prec(self, prec: int) -> Polynomial:
        return Polynomial(self.coeffs, prec)

    def to_json(self) -> str:
        return json.dumps([format_mpc(c, self.prec) for c in self.coeffs])

    @classmethod
    def from_json(cls, text: str) -> Polynomial:
        pairs = json.loads(text)
        parsed = [parse_mpc(p) for p in pairs]
        prec = max(bits for _, bits in parsed)
        return cls(tuple(v for v, _ in parsed), prec)


@dataclass(frozen=True)
class HermiteParams:
    n: int
    s: complex | BigComplex | str | float

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("degree must be nonnegative")

    def polynomial(self, prec: int | None = None) -> Polynomial:
        return hermite_mult(self.n, self.s, prec)


@dataclass(frozen=True)
class LaguerreParams:
    n: int
    b: complex | BigComplex | str | float
    c: int

    def __post_init__(self):
        if self.n < 0 or self.c < 0:
            raise ValueError("n and c must be nonnegative")

    def polynomial(self, prec: int | None = None) -> Polynomial:
        return laguerre_mult(self.n, self.b, self.c, prec)


def _abs_float(x) -> float:
    if isinstance(x, BigComplex):
        x = x.value
    return float(abs(mpmath.mpc(x)))


def hermite_bits(n: int, s) -> int:
    """Default precision for ``H*_n(x; s)``; ``n*|s|`` is the time scale."""
    return required_bits(n, n * _abs_float(s))


def laguerre_bits(n: int, b, c: int) -> int:
    """Default precision for ``L*_n(x; b, c)``.

    The weight ``(j+b)**c`` spans ``c*log(max|j+b| / min|j+b|)`` nats, which
    is converted to a Hermite-equivalent time scale. The extra ``n - c`` bits
    pay for dividing out the exact ``(x-1)**(n-c)`` factor before root finding.
    """
    with mpmath.workprec(64):
        bb = mpmath.mpc(b.value if isinstance(b, BigComplex) else b)
        mags = [abs(j + bb) for j in range(n + 1)]
    mags = [float(m) for m in mags if m != 0]
    spread = math.log(max(mags) / min(mags)) if mags and n else 0.0
    s_mag = 1.0 + (2.0 * c * spread / n if n else 0.0)
    return required_bits(n, s_mag) + max(n - c, 0)


def unit_power(n: int, prec: int) -> Polynomial:
    """``(x - 1)**n``."""
    with mpmath.workprec(prec):
        return Polynomial(tuple(mpmath.mpc((-1) ** (n - j) * math.comb(n, j)) for j in range(n + 1)), prec)


def hermite_mult(n: int, s, prec: int | None = None) -> Polynomial:
    """Multiplicative Hermite polynomial ``H*_n(x; s)``.

    Coefficient ``j`` is ``(-1)**(n-j) * binom(n, j) * exp(-(s/2) * (j**2 - n*j))``.
    """
    if n < 0:
        raise ValueError("degree must be nonnegative")
    prec = prec or hermite_bits(n, s)
    with mpmath.workprec(prec):
        s = to_mpc(s, prec)
        half = s / 2
        cs = [
            (-1) ** (n - j) * math.comb(n, j) * mpmath.exp(-half * (j * j - n * j))
            for j in range(n + 1)
        ]
    return Polynomial(tuple(cs), prec)


def heat_polynomial(n: int, s, prec: int | None = None) -> Polynomial:
    """``P_n(x; s) = exp(-(s/2n) (x d/dx)**2) (x-1)**n``.

    This is the polynomial whose power sums obey the finite-``n`` moment ODE;
    it equals ``H*_n(exp(-s/2) x; s/n)``.
    """
    if n < 1:
        raise ValueError("heat_polynomial needs n >= 1")
    prec = prec or required_bits(n, _abs_float(s))
    with mpmath.workprec(prec):
        s = to_mpc(s, prec)
        rate = s / (2 * n)
        cs = [(-1) ** (n - j) * math.comb(n, j) * mpmath.exp(-rate * j * j) for j in range(n + 1)]
    return Polynomial(tuple(cs), prec)


def _weight_power(base: mpmath.mpc, c: int) -> mpmath.mpc:
    if c == 0:
        return mpmath.mpc(1)
    if base == 0:
        return mpmath.mpc(0)
    if base.imag == 0:
        # integer exponent: mpmath uses exact binary powering here
        return mpmath.mpc(mpmath.power(base.real, c))
    return mpmath.exp(c * mpmath.log(base))


def laguerre_mult(n: int, b, c: int, prec: int | None = None) -> Polynomial:
    """Multiplicative Laguerre polynomial ``L*_n(x; b, c) = (x d/dx + b)**c (x-1)**n``.

    Coefficient ``j`` is ``(-1)**(n-j) * binom(n, j) * (j + b)**c``.

    Raises
    ------
    ValueError
        If ``b == -n`` and ``c >= 1`` (the leading coefficient vanishes).
    """
    if n < 0 or c < 0:
        raise ValueError("n and c must be nonnegative")
    prec = prec or laguerre_bits(n, b, c)
    with mpmath.workprec(prec):
        bb = to_mpc(b, prec)
        if c >= 1 and bb + n == 0:
            raise ValueError("b = -n makes the leading coefficient vanish")
        cs = [(-1) ** (n - j) * math.comb(n, j) * _weight_power(j + bb, c) for j in range(n + 1)]
    return Polynomial(tuple(cs), prec)


def mult_heat_apply(P: Polynomial, s, n: int) -> Polynomial:
    """Apply ``exp(-(s/2n)((x d/dx)**2 - n x d/dx))`` to ``P`` (degree <= n).

    Coefficient ``j`` is multiplied by ``exp(-(s/2n) j**2 + (s/2) j)``; the
    result equals ``P ⊠_n H*_n(x; s/n)``.
    """
    coeffs = P.padded(n)
    with mpmath.workprec(P.prec):
        s = to_mpc(s, P.prec)
        out = [a * mpmath.exp(-s * j * j / (2 * n) + s * j / 2) for j, a in enumerate(coeffs)]
    return Polynomial(tuple(out), P.prec)


def xdx_plus_b_power_apply(P: Polynomial, b, c: int, n: int) -> Polynomial:
    """Apply ``(x d/dx + b)**c``; coefficient ``j`` is scaled by ``(j + b)**c``."""
    if c < 0:
        raise ValueError("c must be nonnegative")
    coeffs = P.padded(n)
    with mpmath.workprec(P.prec):
        bb = to_mpc(b, P.prec)
        out = [a * _weight_power(j + bb, c) for j, a in enumerate(coeffs)]
    return Polynomial(tuple(out), P.prec)


def finite_free_mult_convolve(P: Polynomial, Q: Polynomial, n: int) -> Polynomial:
    """Finite free multiplicative convolution ``P ⊠_n Q``.

    ``result_j = (-1)**(n-j) * p_j * q_j / binom(n, j)``. Inputs of degree
    below ``n`` are zero padded and the formula applied verbatim.
    """
    prec = max(P.prec, Q.prec)
    ps, qs = P.padded(n), Q.padded(n)
    with mpmath.workprec(prec):
        out = [(-1) ** (n - j) * p * q / math.comb(n, j) for j, (p, q) in enumerate(zip(ps, qs))]
    return Polynomial(tuple(out), prec)


def reverse_reciprocal(P: Polynomial) -> Polynomial:
    """``x**n P(1/x)``: the coefficient array reversed."""
    if P.coeffs[0] == 0:
        raise ValueError("reversal would drop the degree (P(0) = 0)")
    return Polynomial(tuple(reversed(P.coeffs)), P.prec)


def max_relative_gap(a: Polynomial | Sequence, b: Polynomial | Sequence) -> mpmath.mpf:
    """Largest ``|a_j - b_j| / max(|a_j|, |b_j|)`` over all coefficients."""
    ac = list(a.coeffs) if isinstance(a, Polynomial) else list(a)
    bc = list(b.coeffs) if isinstance(b, Polynomial) else list(b)
    size = max(len(ac), len(bc))
    ac += [mpmath.mpc(0)] * (size - len(ac))
    bc += [mpmath.mpc(0)] * (size - len(bc))
    prec = max(getattr(a, "prec", 53), getattr(b, "prec", 53))
    worst = mpmath.mpf(0)
    with mpmath.workprec(prec):
        for x, y in zip(ac, bc):
            scale = max(abs(x), abs(y))
            if scale:
                worst = max(worst, abs(x - y) / scale)
    return worst
