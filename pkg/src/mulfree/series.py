"""Truncated power series, ordinary Bell polynomials, and Lagrange inversion.

All series carry an explicit truncation order ``K`` (coefficients
``c_0..c_K``); no operation reads or writes past it. Products of two series
are truncated to the smaller order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import mpmath

from .scalar import BigComplex, to_mpc


def default_order(k_moments: int) -> int:
    """Truncation order that shields moment ``k_moments`` from truncation."""
    return 2 * k_moments + 4


@dataclass(frozen=True)
class PowerSeries:
    """``sum_{k<=K} coeffs[k] * u**k`` with ``mpc`` coefficients at ``prec`` bits."""

    coeffs: tuple
    prec: int

    def __post_init__(self):
        if not self.coeffs:
            raise ValueError("a power series needs at least c_0")
        with mpmath.workprec(self.prec):
            object.__setattr__(self, "coeffs", tuple(mpmath.mpc(c) for c in self.coeffs))

    @classmethod
    def of(cls, values: Sequence, prec: int, K: int | None = None) -> PowerSeries:
        vals = [to_mpc(v, prec) for v in values]
        if K is not None:
            vals = (vals + [mpmath.mpc(0)] * (K + 1))[: K + 1]
        return cls(tuple(vals), prec)

    @classmethod
    def constant(cls, c, K: int, prec: int) -> PowerSeries:
        return cls.of([c], prec, K)

    @classmethod
    def variable(cls, K: int, prec: int) -> PowerSeries:
        """The series ``u`` (identity map)."""
        return cls.of([0, 1], prec, K)

    @property
    def K(self) -> int:
        return len(self.coeffs) - 1

    def __getitem__(self, k: int) -> mpmath.mpc:
        return self.coeffs[k] if 0 <= k <= self.K else mpmath.mpc(0)

    def big(self, k: int) -> BigComplex:
        return BigComplex.of(self[k], self.prec)

    def truncate(self, K: int) -> PowerSeries:
        return PowerSeries.of(self.coeffs[: K + 1], self.prec, K)

    def _align(self, other):
        if not isinstance(other, PowerSeries):
            other = PowerSeries.constant(other, self.K, self.prec)
        return other, min(self.K, other.K), max(self.prec, other.prec)

    def __add__(self, other):
        other, K, prec = self._align(other)
        with mpmath.workprec(prec):
            return PowerSeries(tuple(self[k] + other[k] for k in range(K + 1)), prec)

    __radd__ = __add__

    def __neg__(self):
        return PowerSeries(tuple(-c for c in self.coeffs), self.prec)

    def __sub__(self, other):
        return self + (-other if isinstance(other, PowerSeries) else -to_mpc(other, self.prec))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, PowerSeries):
            with mpmath.workprec(self.prec):
                c = to_mpc(other, self.prec)
                return PowerSeries(tuple(c * a for a in self.coeffs), self.prec)
        return ps_mul(self, other)

    __rmul__ = __mul__

    def shift(self, m: int) -> PowerSeries:
        """Multiply by ``u**m`` (``m >= 0``) or drop the first ``-m`` terms, same order."""
        K = self.K
        if m >= 0:
            vals = [mpmath.mpc(0)] * m + list(self.coeffs)
        else:
            vals = list(self.coeffs[-m:])
        return PowerSeries.of(vals, self.prec, K)

    def max_abs_gap(self, other: PowerSeries, upto: int | None = None) -> mpmath.mpf:
        K = min(self.K, other.K) if upto is None else upto
        with mpmath.workprec(max(self.prec, other.prec)):
            return max(abs(self[k] - other[k]) for k in range(K + 1))


def ps_mul(a: PowerSeries, b: PowerSeries) -> PowerSeries:
    """Truncated Cauchy product ``c_k = sum_i a_i b_{k-i}``."""
    K = min(a.K, b.K)
    prec = max(a.prec, b.prec)
    with mpmath.workprec(prec):
        out = []
        for k in range(K + 1):
            out.append(mpmath.fsum((a[i] * b[k - i] for i in range(k + 1))))
    return PowerSeries(tuple(out), prec)


def ps_exp(a: PowerSeries) -> PowerSeries:
    """``exp(a)`` by ``b_k = (1/k) sum_{j=1}^k j a_j b_{k-j}``; ``b_0 = exp(a_0)``."""
    with mpmath.workprec(a.prec):
        b = [mpmath.exp(a[0])]
        for k in range(1, a.K + 1):
            b.append(mpmath.fsum((j * a[j] * b[k - j] for j in range(1, k + 1))) / k)
    return PowerSeries(tuple(b), a.prec)


def ps_log(a: PowerSeries) -> PowerSeries:
    """Principal ``log(a)``; requires ``a_0 != 0``."""
    if a[0] == 0:
        raise ValueError("log needs a nonzero constant term")
    with mpmath.workprec(a.prec):
        out = [mpmath.log(a[0])]
        for k in range(1, a.K + 1):
            acc = mpmath.fsum((j * out[j] * a[k - j] for j in range(1, k)))
            out.append((a[k] - acc / k) / a[0])
    return PowerSeries(tuple(out), a.prec)


def ps_reciprocal(a: PowerSeries) -> PowerSeries:
    """``1/a``; requires ``a_0 != 0``."""
    if a[0] == 0:
        raise ValueError("reciprocal needs a nonzero constant term")
    with mpmath.workprec(a.prec):
        inv0 = 1 / a[0]
        out = [inv0]
        for k in range(1, a.K + 1):
            out.append(-inv0 * mpmath.fsum((a[j] * out[k - j] for j in range(1, k + 1))))
    return PowerSeries(tuple(out), a.prec)


def ps_pow(a: PowerSeries, k: int) -> PowerSeries:
    """``a**k`` for integer ``k >= 0`` by binary powering."""
    if k < 0:
        raise ValueError("ps_pow needs k >= 0")
    result = PowerSeries.constant(1, a.K, a.prec)
    base = a
    while k:
        if k & 1:
            result = ps_mul(result, base)
        k >>= 1
        if k:
            base = ps_mul(base, base)
    return result


def ps_compose(f: PowerSeries, g: PowerSeries) -> PowerSeries:
    """``f(g(u))``; requires ``g_0 = 0`` so that truncation is exact."""
    if g[0] != 0:
        raise ValueError("composition needs g(0) = 0")
    K = min(f.K, g.K)
    prec = max(f.prec, g.prec)
    g = g.truncate(K)
    result = PowerSeries.constant(f[K], K, prec)
    for j in range(K - 1, -1, -1):
        result = ps_mul(result, g) + f[j]
    return result


def lagrange_coeff(phi: PowerSeries, k: int) -> mpmath.mpc:
    """``(1/k) [u**(k-1)] phi(u)**k``: the ``k``-th coefficient of the solution of ``psi = z phi(psi)``."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if phi[0] == 0:
        raise ValueError("Lagrange inversion needs phi(0) != 0")
    if phi.K < k - 1:
        raise ValueError(f"phi is truncated at order {phi.K} < {k - 1}")
    power = ps_pow(phi.truncate(k - 1), k)
    with mpmath.workprec(phi.prec):
        return power[k - 1] / k


def lagrange_series(phi: PowerSeries, K: int) -> PowerSeries:
    """Series ``psi(z)`` through order ``K`` solving ``psi = z phi(psi)``."""
    return PowerSeries.of([0] + [lagrange_coeff(phi, k) for k in range(1, K + 1)], phi.prec, K)


def ps_compose_inverse(psi: PowerSeries) -> PowerSeries:
    """Compositional inverse of ``psi`` (``psi_0 = 0``, ``psi_1 != 0``).

    With ``psi(u) = u / phi(u)``, the inverse solves ``w = z phi(w)``, so its
    coefficients come from :func:`lagrange_coeff` with ``phi = u / psi``.
    """
    if psi[0] != 0:
        raise ValueError("inverse needs psi(0) = 0")
    if psi[1] == 0:
        raise ValueError("inverse needs psi'(0) != 0")
    quotient = psi.shift(-1).truncate(psi.K - 1) if psi.K >= 1 else psi
    phi = ps_reciprocal(quotient)
    return lagrange_series(phi, psi.K)


def picard_fixed_point(phi: PowerSeries, K: int) -> PowerSeries:
    """Solve ``psi = z phi(psi)`` by fixed-point iteration; one order per sweep."""
    psi = PowerSeries.of([0], phi.prec, K)
    phi = phi.truncate(K)
    for _ in range(K):
        psi = ps_compose(phi, psi).shift(1)
    return psi


# ---------------------------------------------------------------------------
# ordinary Bell polynomials


def _x_at(x: Sequence, m: int):
    # x is indexed from 1: x[0] holds x_1
    return x[m - 1] if 1 <= m <= len(x) else 0


@dataclass(frozen=True)
class BellTable:
    """Partial ordinary Bell values ``table[l][r]`` for ``0 <= r <= l <= L``.

    ``B_{l,r} = sum_{m=1}^{l-r+1} x_m B_{l-m,r-1}`` with ``B_{0,0} = 1`` and
    ``B_{l,0} = 0`` for ``l >= 1``.
    """

    table: tuple
    prec: int

    @classmethod
    def build(cls, x: Sequence, L: int, prec: int) -> BellTable:
        with mpmath.workprec(prec):
            xs = [to_mpc(_x_at(x, m), prec) for m in range(1, L + 1)]
            rows = [[mpmath.mpc(1)]]
            for ell in range(1, L + 1):
                row = [mpmath.mpc(0)]
                for r in range(1, ell + 1):
                    acc = mpmath.mpc(0)
                    for m in range(1, ell - r + 2):
                        prev = rows[ell - m]
                        if r - 1 < len(prev):
                            acc += xs[m - 1] * prev[r - 1]
                    row.append(acc)
                rows.append(row)
        return cls(tuple(tuple(r) for r in rows), prec)

    @property
    def L(self) -> int:
        return len(self.table) - 1

    def partial(self, ell: int, r: int) -> mpmath.mpc:
        if not 0 <= r <= ell <= self.L:
            raise ValueError(f"need 0 <= r <= l <= {self.L}, got l={ell}, r={r}")
        return self.table[ell][r]

    def weighted(self, m: int, y) -> mpmath.mpc:
        """``sum_{r=0}^m y**r B_{m,r}``; equals 1 at ``m = 0``."""
        with mpmath.workprec(self.prec):
            y = to_mpc(y, self.prec)
            acc = mpmath.mpc(0)
            for r in range(m, -1, -1):
                acc = acc * y + self.table[m][r]
            return acc


def bell_partial(ell: int, r: int, x: Sequence, prec: int = 192) -> mpmath.mpc:
    """Partial ordinary Bell polynomial ``B_{l,r}(x_1, x_2, ...)``; ``x[0]`` is ``x_1``."""
    if not 0 <= r <= ell:
        raise ValueError("need 0 <= r <= l")
    return BellTable.build(x, ell, prec).partial(ell, r)


def bell_weighted(m: int, x: Sequence, y, prec: int = 192) -> mpmath.mpc:
    """Weighted complete ordinary Bell polynomial ``sum_{r=0}^m y**r B_{m,r}(x)``."""
    if m < 0:
        raise ValueError("m must be >= 0")
    return BellTable.build(x, m, prec).weighted(m, y)
