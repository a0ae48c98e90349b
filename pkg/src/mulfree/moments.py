"""Moments of zero distributions, from roots or directly from coefficients."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Sequence

import mpmath

from .poly import Polynomial, heat_polynomial, hermite_mult
from .roots import RootSet
from .scalar import BigComplex, format_mpf, required_bits, to_mpc


@dataclass(frozen=True)
class MomentSequence:
    """Moments ``m_0..m_K`` (``m_0 = 1``) stored as ``mpc`` at ``prec`` bits."""

    values: tuple
    prec: int

    def __post_init__(self):
        with mpmath.workprec(self.prec):
            vals = tuple(mpmath.mpc(v) for v in self.values)
        if not vals:
            raise ValueError("a moment sequence needs m_0")
        if vals[0] != 1:
            raise ValueError(f"m_0 must be 1, got {vals[0]}")
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_tail(cls, tail: Sequence, prec: int) -> MomentSequence:
        """Build from ``m_1..m_K``."""
        return cls((mpmath.mpc(1),) + tuple(tail), prec)

    @property
    def K(self) -> int:
        return len(self.values) - 1

    def __getitem__(self, k: int) -> mpmath.mpc:
        return self.values[k]

    def __len__(self) -> int:
        return len(self.values)

    def big(self, k: int) -> BigComplex:
        return BigComplex.of(self.values[k], self.prec)

    def truncate(self, K: int) -> MomentSequence:
        return MomentSequence(self.values[: K + 1], self.prec)

    def conjugate(self) -> MomentSequence:
        """Moments ``m_{-k}`` of a measure on the unit circle (``conj(m_k)``)."""
        with mpmath.workprec(self.prec):
            return MomentSequence(tuple(mpmath.conj(v) for v in self.values), self.prec)

    def to_csv(self) -> str:
        return moments_to_csv(self)


def moments_from_roots(R: RootSet, K: int) -> MomentSequence:
    """``m_k = (1/n) sum_j z_j**k`` for ``k = 0..K``."""
    if K < 0:
        raise ValueError("K must be nonnegative")
    n = len(R.roots)
    if n == 0:
        raise ValueError("empty root set")
    with mpmath.workprec(R.prec + 16):
        sums = [mpmath.mpc(0)] * K
        for z in R.roots:
            w = mpmath.mpc(1)
            for k in range(K):
                w *= z
                sums[k] += w
        tail = tuple(s / n for s in sums)
    return MomentSequence.from_tail(tail, R.prec)


def power_sums(coeffs: Sequence, K: int, prec: int) -> list:
    """Newton's identities: power sums ``p_1..p_K`` of the roots.

    ``e_k = (-1)**k a_{n-k} / a_n`` and
    ``p_k = (-1)**(k-1) k e_k + sum_{i<k} (-1)**(k-1+i) e_{k-i} p_i``.
    """
    n = len(coeffs) - 1
    with mpmath.workprec(prec):
        lead = mpmath.mpc(coeffs[n])
        e = [mpmath.mpc(1)] + [
            (-1) ** k * mpmath.mpc(coeffs[n - k]) / lead if k <= n else mpmath.mpc(0) for k in range(1, K + 1)
        ]
        p = [mpmath.mpc(n)]
        for k in range(1, K + 1):
            acc = (-1) ** (k - 1) * k * e[k]
            for i in range(1, k):
                term = e[k - i] * p[i]
                acc += term if (k - 1 + i) % 2 == 0 else -term
            p.append(acc)
    return p[1:]


def moments_from_coeffs(P: Polynomial, K: int) -> MomentSequence:
    """Zero-distribution moments of ``P`` via Newton's identities.

    The recurrence cancels heavily, so it runs at twice the working precision
    when ``K > n/2``.
    """
    if K < 0:
        raise ValueError("K must be nonnegative")
    n = P.degree
    if n < 1:
        raise ValueError("moments need degree >= 1")
    work = P.prec * 2 if K > n / 2 else P.prec + 32
    ps = power_sums(P.coeffs, K, work)
    with mpmath.workprec(work):
        tail = tuple(pk / n for pk in ps)
    return MomentSequence.from_tail(tail, P.prec)


def hermite_moment_bridge(n: int, s, K: int, prec: int | None = None) -> tuple[MomentSequence, MomentSequence]:
    """Two routes to the moments of the zeros of ``H*_n(x; s/n)``.

    Returns ``(direct, bridged)``: ``direct`` from ``H*_n(x; s/n)`` itself and
    ``bridged = exp(-s k/2) * sigma_{k;n}(s)`` from the heat-flow polynomial
    ``P_n(x; s)``. The two agree to working precision.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    prec = prec or required_bits(n, float(abs(to_mpc(s, 64))))
    with mpmath.workprec(prec):
        s = to_mpc(s, prec)
        direct = moments_from_coeffs(hermite_mult(n, s / n, prec), K)
        sigma = moments_from_coeffs(heat_polynomial(n, s, prec), K)
        bridged = tuple(mpmath.exp(-s * k / 2) * sigma[k] for k in range(1, K + 1))
    return direct, MomentSequence.from_tail(bridged, prec)


def max_relative_gap(a: MomentSequence | Sequence, b: MomentSequence | Sequence, start: int = 0) -> mpmath.mpf:
    """``max_k |a_k - b_k| / max(1, |b_k|)`` over the common range."""
    av = a.values if isinstance(a, MomentSequence) else tuple(a)
    bv = b.values if isinstance(b, MomentSequence) else tuple(b)
    prec = max(getattr(a, "prec", 64), getattr(b, "prec", 64))
    worst = mpmath.mpf(0)
    with mpmath.workprec(prec):
        for x, y in list(zip(av, bv))[start:]:
            worst = max(worst, abs(x - y) / max(1, abs(y)))
    return worst


def moments_to_csv(m: MomentSequence | Sequence, prec: int | None = None) -> str:
    """CSV with columns ``k,re,im`` (``k`` starts at 0)."""
    values = m.values if isinstance(m, MomentSequence) else tuple(m)
    bits = prec or getattr(m, "prec", 64)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["k", "re", "im"])
    with mpmath.workprec(bits):
        for k, v in enumerate(values):
            v = mpmath.mpc(v)
            w.writerow([k, format_mpf(v.real, bits), format_mpf(v.imag, bits)])
    return buf.getvalue()
