"""Limit laws: the free multiplicative normal ``mu^(s)`` and Poisson ``nu_{beta,gamma}``.

Every closed form is computed along each of its independent routes and the
routes are compared; disagreement raises :class:`RouteMismatch`. Transforms
(S, R) are handled as truncated power series.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import mpmath

from .moments import MomentSequence
from .scalar import BigComplex, to_mpc
from .series import (
    PowerSeries,
    lagrange_coeff,
    ps_compose,
    ps_compose_inverse,
    ps_exp,
    ps_mul,
    ps_reciprocal,
)

DEFAULT_BITS = 256


class RouteMismatch(ArithmeticError):
    """Two closed-form routes for the same quantity disagree."""


class IdentityViolation(ArithmeticError):
    """A transform identity fails beyond tolerance."""


@dataclass(frozen=True)
class MuParams:
    s: complex | float | str | BigComplex


@dataclass(frozen=True)
class NuParams:
    beta: complex | float | str | BigComplex
    gamma: float | str

    def __post_init__(self):
        with mpmath.workprec(DEFAULT_BITS):
            if to_mpc(self.beta, DEFAULT_BITS) == -1:
                raise ValueError("beta = -1 is excluded")
            if mpmath.mpf(self.gamma) < 0:
                raise ValueError("gamma must be nonnegative")

    def alpha(self, prec: int = DEFAULT_BITS) -> mpmath.mpc:
        with mpmath.workprec(prec):
            return -1 / (1 + to_mpc(self.beta, prec))


@dataclass(frozen=True)
class CumulantSequence:
    """Free cumulants ``kappa_1..kappa_K``; indexing starts at 1."""

    values: tuple
    prec: int

    @property
    def K(self) -> int:
        return len(self.values)

    def __getitem__(self, k: int) -> mpmath.mpc:
        if k < 1:
            raise IndexError("cumulants are indexed from 1")
        return self.values[k - 1]


def _tolerance(prec: int) -> mpmath.mpf:
    return mpmath.mpf(2) ** (-(prec // 2))


def _agree(name: str, routes: dict, prec: int, tol=None) -> None:
    tol = _tolerance(prec) if tol is None else tol
    items = list(routes.items())
    with mpmath.workprec(prec):
        for i in range(len(items)):
            for j in range(i + 1, len(items)):
                (na, va), (nb, vb) = items[i], items[j]
                for k, (x, y) in enumerate(zip(va, vb), start=1):
                    scale = max(abs(x), abs(y), mpmath.mpf(2) ** (-prec))
                    if abs(x - y) > tol * scale:
                        raise RouteMismatch(f"{name}: {na} vs {nb} differ at k={k}: {x} vs {y}")


def gen_binomial(top: int, r: int) -> int:
    """``binom(top, r)`` for any integer ``top`` and ``r >= 0`` (falling factorial / r!)."""
    if r < 0:
        return 0
    num = 1
    for i in range(r):
        num *= top - i
    return num // math.factorial(r)


def laguerre_assoc(n: int, alpha: int, x) -> mpmath.mpc:
    """Associated Laguerre ``L_n^(alpha)(x) = sum_j binom(n+alpha, n-j) (-x)**j / j!`` (explicit sum)."""
    if n < 0:
        raise ValueError("n must be >= 0")
    acc = mpmath.mpc(0)
    for j in range(n + 1):
        acc += gen_binomial(n + alpha, n - j) * (-x) ** j / math.factorial(j)
    return acc


# ---------------------------------------------------------------------------
# free multiplicative normal


def _mu_phi(s, K: int, prec: int) -> PowerSeries:
    """``(1+u) exp(s u)`` through order ``K``."""
    e = ps_exp(PowerSeries.of([0, s], prec, K))
    return ps_mul(PowerSeries.of([1, 1], prec, K), e)


def mu_moment_routes(p: MuParams, K: int, prec: int = DEFAULT_BITS) -> dict:
    """``m_1..m_K`` of ``mu^(s)`` along three independent routes."""
    with mpmath.workprec(prec):
        s = to_mpc(p.s, prec)
        phi = _mu_phi(s, max(K - 1, 0), prec)
        lagrange = [mpmath.exp(s * k / 2) * lagrange_coeff(phi, k) for k in range(1, K + 1)]
        binomial = [
            mpmath.exp(s * k / 2) / k * mpmath.fsum(
                math.comb(k, j + 1) * (s * k) ** j / math.factorial(j) for j in range(k)
            )
            for k in range(1, K + 1)
        ]
        laguerre = [mpmath.exp(s * k / 2) / k * laguerre_assoc(k - 1, 1, -k * s) for k in range(1, K + 1)]
    return {"lagrange": lagrange, "binomial": binomial, "laguerre": laguerre}


def mu_moments(p: MuParams, K: int, prec: int = DEFAULT_BITS) -> MomentSequence:
    """Moments of ``mu^(s)``; checks all three routes and returns the Lagrange one."""
    if K < 0:
        raise ValueError("K must be >= 0")
    routes = mu_moment_routes(p, K, prec)
    _agree("mu_moments", routes, prec)
    return MomentSequence.from_tail(routes["lagrange"], prec)


def mu_cumulants(p: MuParams, K: int, prec: int = DEFAULT_BITS) -> CumulantSequence:
    """``kappa_k = (s k)**(k-1) exp(s k/2) / k!``."""
    if K < 1:
        raise ValueError("K must be >= 1")
    with mpmath.workprec(prec):
        s = to_mpc(p.s, prec)
        vals = tuple(
            ((s * k) ** (k - 1) if k > 1 else mpmath.mpc(1)) * mpmath.exp(s * k / 2) / math.factorial(k)
            for k in range(1, K + 1)
        )
    return CumulantSequence(vals, prec)


def mu_s_series(p: MuParams, K: int, prec: int = DEFAULT_BITS) -> PowerSeries:
    """``exp(-s (z + 1/2))`` through order ``K``."""
    with mpmath.workprec(prec):
        s = to_mpc(p.s, prec)
        c = mpmath.exp(-s / 2)
        return PowerSeries.of([c * (-s) ** k / math.factorial(k) for k in range(K + 1)], prec)


def lambert_w_series(K: int, prec: int = DEFAULT_BITS) -> PowerSeries:
    """Principal Lambert ``W_0`` as a formal series, by reverting ``w exp(w)``."""
    f = ps_mul(PowerSeries.variable(K, prec), ps_exp(PowerSeries.variable(K, prec)))
    return ps_compose_inverse(f)


def mu_r_series_lambert(p: MuParams, K: int, prec: int = DEFAULT_BITS) -> PowerSeries:
    """``W_0(-s e^{s/2} w) / (-s w)`` through order ``K`` (``R == 1`` at ``s = 0``)."""
    with mpmath.workprec(prec):
        s = to_mpc(p.s, prec)
        if s == 0:
            return PowerSeries.constant(1, K, prec)
        W = lambert_w_series(K + 1, prec)
        a = -s * mpmath.exp(s / 2)
        # W(a w) / (-s w) = sum_k W_k a**k w**(k-1) / (-s)
        return PowerSeries.of([W[k + 1] * a ** (k + 1) / (-s) for k in range(K + 1)], prec)


# ---------------------------------------------------------------------------
# free multiplicative Poisson


def _nu_exponent(beta, gamma, scale, K: int, prec: int) -> PowerSeries:
    """``-scale * gamma / (1 + beta + t)`` through order ``K``."""
    c = 1 + beta
    return PowerSeries.of([-scale * gamma / c * (-1 / c) ** j for j in range(K + 1)], prec)


def laguerre_minus_one(n: int, c) -> mpmath.mpc:
    """``L_n^(-1)(c) = sum_{j=1}^n binom(n-1, n-j) (-c)**j / j!``, with ``L_0^(-1) = 1``."""
    if n == 0:
        return mpmath.mpc(1)
    return mpmath.fsum(math.comb(n - 1, n - j) * (-c) ** j / math.factorial(j) for j in range(1, n + 1))


def nu_moment_routes(p: NuParams, K: int, prec: int = DEFAULT_BITS) -> dict:
    """``m_1..m_K`` of ``nu_{beta,gamma}`` by series extraction and by the Laguerre sum."""
    with mpmath.workprec(prec):
        beta = to_mpc(p.beta, prec)
        gamma = mpmath.mpf(p.gamma)
        order = max(K - 1, 0)
        phi = ps_mul(PowerSeries.of([1, 1], prec, order), ps_exp(_nu_exponent(beta, gamma, 1, order, prec)))
        lagrange = [lagrange_coeff(phi, k) for k in range(1, K + 1)]
        c = 1 + beta
        laguerre = []
        for k in range(1, K + 1):
            arg = k * gamma / c
            total = mpmath.fsum(
                math.comb(k, j + 1) * (-1 / c) ** j * laguerre_minus_one(j, arg) for j in range(k)
            )
            laguerre.append(mpmath.exp(-arg) / k * total)
    return {"lagrange": lagrange, "laguerre": laguerre}


def nu_moments(p: NuParams, K: int, prec: int = DEFAULT_BITS) -> MomentSequence:
    """Moments of ``nu_{beta,gamma}``; checks both routes and returns the series one."""
    if K < 0:
        raise ValueError("K must be >= 0")
    routes = nu_moment_routes(p, K, prec)
    _agree("nu_moments", routes, prec)
    return MomentSequence.from_tail(routes["lagrange"], prec)


def nu_cumulant_routes(p: NuParams, K: int, prec: int = DEFAULT_BITS) -> dict:
    with mpmath.workprec(prec):
        beta = to_mpc(p.beta, prec)
        gamma = mpmath.mpf(p.gamma)
        c = 1 + beta
        series = []
        closed = []
        for k in range(1, K + 1):
            e = ps_exp(_nu_exponent(beta, gamma, k, k - 1, prec))
            series.append(e[k - 1] / k)
            arg = k * gamma / c
            closed.append(mpmath.exp(-arg) / k * (-1 / c) ** (k - 1) * laguerre_minus_one(k - 1, arg))
    return {"series": series, "laguerre": closed}


def nu_cumulants(p: NuParams, K: int, prec: int = DEFAULT_BITS) -> CumulantSequence:
    """``kappa_k = (1/k) [t**(k-1)] exp(-k gamma / (1 + beta + t))``; ``kappa_1 = exp(-gamma/(1+beta))``."""
    if K < 1:
        raise ValueError("K must be >= 1")
    routes = nu_cumulant_routes(p, K, prec)
    _agree("nu_cumulants", routes, prec)
    return CumulantSequence(tuple(routes["series"]), prec)


def nu_s_series(p: NuParams, K: int, prec: int = DEFAULT_BITS) -> PowerSeries:
    """``exp(gamma / (beta + 1 + y))`` through order ``K``."""
    with mpmath.workprec(prec):
        beta = to_mpc(p.beta, prec)
        gamma = mpmath.mpf(p.gamma)
        return ps_exp(_nu_exponent(beta, gamma, -1, K, prec))


# ---------------------------------------------------------------------------
# transforms


def _psi(m: MomentSequence) -> PowerSeries:
    """``psi(t) = sum_{k>=1} m_k t**k`` through order ``K``."""
    return PowerSeries.of((0,) + tuple(m.values[1:]), m.prec, m.K)


def s_transform_from_moments(m: MomentSequence) -> PowerSeries:
    """S-transform through order ``K-1`` from ``S(psi(t)) = t (1 + psi) / psi``."""
    if m.K < 1:
        raise ValueError("need at least m_1")
    if m[1] == 0:
        raise ValueError("S-transform needs m_1 != 0")
    chi = ps_compose_inverse(_psi(m))
    # S(y) = (1 + y) * chi(y) / y
    ratio = chi.shift(-1).truncate(m.K - 1)
    return ps_mul(PowerSeries.of([1, 1], m.prec, m.K - 1), ratio)


def moments_from_s_transform(S: PowerSeries, K: int) -> MomentSequence:
    """``m_k = (1/k) [y**(k-1)] ((1 + y) / S(y))**k``."""
    if S[0] == 0:
        raise ValueError("S(0) must be nonzero")
    if S.K < K - 1:
        raise ValueError(f"S is truncated at order {S.K} < {K - 1}")
    order = max(K - 1, 0)
    phi = ps_mul(PowerSeries.of([1, 1], S.prec, order), ps_reciprocal(S.truncate(order)))
    return MomentSequence.from_tail([lagrange_coeff(phi, k) for k in range(1, K + 1)], S.prec)


def r_transform(m: MomentSequence) -> PowerSeries:
    """R-transform through order ``K-1`` from ``M(t) = 1 + t M R(t M)``.

    ``R = (psi / (t (1 + psi))) o w^{-1}`` with ``w(t) = t M(t)``.
    """
    K = m.K
    if K < 1:
        raise ValueError("need at least m_1")
    psi = _psi(m)
    order = K - 1
    one_plus = psi + 1
    inner = ps_mul(psi.shift(-1).truncate(order), ps_reciprocal(one_plus.truncate(order)))
    w = ps_mul(PowerSeries.variable(order, m.prec), one_plus.truncate(order)) if order >= 1 else None
    if w is None:
        return inner
    return ps_compose(inner, ps_compose_inverse(w))


def s_r_composite(S: PowerSeries, R: PowerSeries) -> PowerSeries:
    """``S(z) R(z S(z))`` truncated to the common order."""
    order = min(S.K, R.K)
    S = S.truncate(order)
    zS = S.shift(1)
    return ps_mul(S, ps_compose(R.truncate(order), zS))


def r_transform_checks(m: MomentSequence, tol=None) -> PowerSeries:
    """R-transform of ``m``, verified through ``S(z) R(z S(z)) = 1``.

    Raises
    ------
    IdentityViolation
        If any coefficient of ``S(z) R(z S(z)) - 1`` exceeds ``tol``.
    """
    R = r_transform(m)
    S = s_transform_from_moments(m)
    comp = s_r_composite(S, R)
    tol = _tolerance(m.prec) if tol is None else tol
    with mpmath.workprec(m.prec):
        dev = max(abs(comp[k] - (1 if k == 0 else 0)) for k in range(comp.K + 1))
    if dev > tol:
        raise IdentityViolation(f"S(z) R(z S(z)) deviates from 1 by {mpmath.nstr(dev, 5)}")
    return R


def moments_from_r_transform(R: PowerSeries, K: int) -> MomentSequence:
    """Invert ``M = 1 + t M R(t M)``: ``m_k = (1/(k+1)) [u**k] (1 + u R(u))**(k+1)``."""
    if R.K < K - 1:
        raise ValueError(f"R is truncated at order {R.K} < {K - 1}")
    # 1 + u R(u) through order K
    phi = PowerSeries.of([1] + list(R.coeffs[:K]), R.prec, K)
    return MomentSequence.from_tail([lagrange_coeff(phi, k + 1) for k in range(1, K + 1)], R.prec)


def r_series_from_cumulants(kappa: CumulantSequence) -> PowerSeries:
    """``R(w) = sum_k kappa_k w**(k-1)``."""
    return PowerSeries.of(list(kappa.values), kappa.prec)


def free_mult_convolve_moments(a: MomentSequence, b: MomentSequence, K: int) -> MomentSequence:
    """Moments of ``a ⊠ b`` by multiplying S-transforms."""
    if min(a.K, b.K) < K:
        raise ValueError("inputs are truncated below K")
    Sa = s_transform_from_moments(a.truncate(K))
    Sb = s_transform_from_moments(b.truncate(K))
    return moments_from_s_transform(ps_mul(Sa, Sb), K)


def nu_implicit_sigma_residual(p: NuParams, K: int, prec: int = DEFAULT_BITS) -> mpmath.mpf:
    """Largest coefficient of ``psi/(1+psi) exp(gamma/(beta+1+psi)) - z`` through order ``K``.

    With ``z = 1/x`` and ``Sigma(x) = 1 + psi(z)``, this is the implicit
    relation ``x = Sigma/(Sigma-1) exp(-gamma/(beta+Sigma))`` solved for ``z``.
    """
    m = nu_moments(p, K, prec)
    psi = _psi(m)
    with mpmath.workprec(prec):
        beta = to_mpc(p.beta, prec)
        gamma = mpmath.mpf(p.gamma)
        order = K - 1
        q = psi.shift(-1).truncate(order)
        ratio = ps_mul(q, ps_reciprocal((psi + 1).truncate(order)))
        denom = (psi + (beta + 1)).truncate(order)
        expo = ps_exp(ps_reciprocal(denom) * gamma)
        lhs = PowerSeries.of([0] + list(ps_mul(ratio, expo).coeffs), prec, K)
        resid = lhs - PowerSeries.variable(K, prec)
        return max(abs(c) for c in resid.coeffs)


def nu_implicit_sigma_check(p: NuParams, K: int, prec: int = DEFAULT_BITS, tol=None) -> bool:
    """True if the moments of ``nu`` satisfy the implicit Sigma relation through order ``K``."""
    tol = _tolerance(prec) if tol is None else tol
    return nu_implicit_sigma_residual(p, K, prec) <= tol


def unitary_modulus_ok(m: MomentSequence, slack=None) -> bool:
    """``|m_k| <= 1`` for all ``k`` (moments of a measure on the unit circle)."""
    slack = _tolerance(m.prec) if slack is None else slack
    with mpmath.workprec(m.prec):
        return all(abs(v) <= 1 + slack for v in m.values)
