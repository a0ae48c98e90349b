"""Moment evolution systems: Hermite ODEs, the Laguerre difference recursion, and its limit ODE.

Continuous systems are integrated with classical fixed-step RK4 at a
configurable precision; all right-hand sides are polynomial in the state.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import mpmath

from .scalar import format_mpf, to_mpc
from .series import BellTable, PowerSeries, lagrange_coeff, ps_exp, ps_mul

DEFAULT_BITS = 128
INF = math.inf


@dataclass(frozen=True)
class HermiteOdeState:
    """``sigma_1..sigma_K`` at time ``s``; ``n = inf`` marks the limiting system."""

    sigma: tuple
    s: object
    n: float
    trajectory: tuple = field(default=(), compare=False)


@dataclass(frozen=True)
class LaguerreEvolState:
    sigma: tuple
    s: int
    n: int
    b: object


@dataclass(frozen=True)
class LaguerreLimitState:
    """``g_1..g_K`` at ``gamma`` and the matching moments ``f_k = exp(alpha gamma k) g_k``."""

    g: tuple
    f: tuple
    gamma: object
    alpha: object
    trajectory: tuple = field(default=(), compare=False)


def rk4(
    rhs: Callable[[object, list], list],
    y0: Sequence,
    t0,
    t1,
    steps: int,
    prec: int,
    record: int = 0,
) -> tuple[list, list]:
    """Classical RK4 from ``t0`` to ``t1``; returns ``(y(t1), trajectory)``.

    ``record > 0`` stores ``(t, y)`` every ``record`` steps (and at both ends).
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    with mpmath.workprec(prec):
        h = (t1 - t0) / steps
        y = list(y0)
        traj = [(t0, tuple(y))] if record else []
        for i in range(steps):
            t = t0 + i * h
            k1 = rhs(t, y)
            k2 = rhs(t + h / 2, [a + h / 2 * b for a, b in zip(y, k1)])
            k3 = rhs(t + h / 2, [a + h / 2 * b for a, b in zip(y, k2)])
            k4 = rhs(t + h, [a + h * b for a, b in zip(y, k3)])
            y = [a + h / 6 * (p + 2 * q + 2 * r + w) for a, p, q, r, w in zip(y, k1, k2, k3, k4)]
            if record and ((i + 1) % record == 0 or i + 1 == steps):
                traj.append((t0 + (i + 1) * h, tuple(y)))
    return y, traj


def _number(x, prec: int):
    z = to_mpc(x, prec)
    return z.real if z.imag == 0 else z


# ---------------------------------------------------------------------------
# Hermite


def _hermite_rhs(n: float, K: int):
    # sigma_k' = (k - k**2/2n) sigma_k + (k/2) sum_{0<j<k} sigma_j sigma_{k-j}
    lin = [mpmath.mpf(k) - (0 if n == INF else mpmath.mpf(k * k) / (2 * n)) for k in range(K + 1)]
    half = [mpmath.mpf(k) / 2 for k in range(K + 1)]

    def rhs(_t, y):
        sig = [None] + list(y)
        out = []
        for k in range(1, K + 1):
            conv = 0
            for j in range(1, (k + 1) // 2):
                conv += sig[j] * sig[k - j]
            conv *= 2
            if k % 2 == 0:
                conv += sig[k // 2] * sig[k // 2]
            out.append(lin[k] * sig[k] + half[k] * conv)
        return out

    return rhs


def hermite_finite_n_evolve(
    n: float | None,
    K: int,
    s_target,
    steps: int = 4096,
    prec: int = DEFAULT_BITS,
    record: int = 0,
) -> HermiteOdeState:
    """Integrate ``sigma_k' = (k/2) sum_{j=0}^k sigma_j sigma_{k-j} - (k**2/2n) sigma_k`` from all-ones.

    ``n = None`` or ``inf`` drops the dissipation term (limiting system).
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    n = INF if n is None else n
    if n != INF and n < 1:
        raise ValueError("n must be >= 1")
    with mpmath.workprec(prec):
        rhs = _with_prec(_hermite_rhs(n, K), prec)
        s1 = _number(s_target, prec)
        y, traj = rk4(rhs, [mpmath.mpf(1)] * K, mpmath.mpf(0), s1, steps, prec, record)
    return HermiteOdeState(tuple(y), s1, n, tuple(traj))


def _with_prec(rhs, prec):
    def wrapped(t, y):
        with mpmath.workprec(prec):
            return rhs(t, y)

    return wrapped


def hermite_limit_sigma(K: int, s, prec: int = DEFAULT_BITS) -> list:
    """``sigma_{k;inf}(s) = exp(k s) (1/k) [u**(k-1)] ((1+u)**k exp(s k u))``."""
    with mpmath.workprec(prec):
        s = _number(s, prec)
        phi = ps_mul(PowerSeries.of([1, 1], prec, K), ps_exp(PowerSeries.of([0, s], prec, K)))
        return [mpmath.exp(k * s) * lagrange_coeff(phi, k) for k in range(1, K + 1)]


def _eta_rhs(n: float, K: int):
    def rhs(t, y):
        eta = [1] + list(y)
        out = []
        for k in range(1, K + 1):
            if n == INF:
                terms = (eta[j] * eta[k - j] for j in range(1, k))
            else:
                terms = (mpmath.exp(j * (k - j) * t / n) * eta[j] * eta[k - j] for j in range(1, k))
            out.append(mpmath.mpf(k) / 2 * mpmath.fsum(terms))
        return out

    return rhs


def hermite_eta_gap(
    n: int,
    K: int,
    s_target,
    steps: int = 512,
    record: int = 8,
    prec: int = DEFAULT_BITS,
) -> list:
    """Sup over a grid on ``[-|s|, |s|]`` of ``|eta_{k;n} - eta_{k;inf}|`` for ``k = 1..K``.

    ``sigma_{k;n}(s) = exp((k - k**2/2n) s) eta_{k;n}(s)``; both eta systems
    are integrated outward from ``s = 0`` in each direction.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    with mpmath.workprec(prec):
        A = abs(mpmath.mpf(s_target))
        gaps = [mpmath.mpf(0)] * K
        if A == 0:
            return gaps
        for end in (A, -A):
            _, fin = rk4(_with_prec(_eta_rhs(n, K), prec), [mpmath.mpf(1)] * K, mpmath.mpf(0), end, steps, prec, record)
            _, lim = rk4(_with_prec(_eta_rhs(INF, K), prec), [mpmath.mpf(1)] * K, mpmath.mpf(0), end, steps, prec, record)
            for (_, a), (_, b) in zip(fin, lim):
                for k in range(K):
                    gaps[k] = max(gaps[k], abs(a[k] - b[k]))
    return gaps


# ---------------------------------------------------------------------------
# Laguerre


def laguerre_recursion_step(sigma: Sequence, n: int, b, prec: int) -> list:
    """One step ``sigma_k(s+1) = sigma_k(s) - (1/(b+n)) sum_j j sigma_j Bhat_{k-j}(sigma; -n/(b+n))``."""
    K = len(sigma)
    with mpmath.workprec(prec):
        b = to_mpc(b, prec)
        inv = 1 / (b + n)
        y = -n * inv
        table = BellTable.build(list(sigma), K - 1, prec)
        weighted = [table.weighted(m, y) for m in range(K)]
        out = []
        for k in range(1, K + 1):
            acc = mpmath.fsum(j * sigma[j - 1] * weighted[k - j] for j in range(1, k + 1))
            out.append(sigma[k - 1] - inv * acc)
    return out


def laguerre_recursion_evolve(n: int, b, K: int, c_max: int, prec: int = DEFAULT_BITS) -> list:
    """States for ``s = 0..c_max`` of the exact moment recursion of ``(x d/dx + b)**s (x-1)**n``."""
    if K < 1:
        raise ValueError("K must be >= 1")
    with mpmath.workprec(prec):
        bb = to_mpc(b, prec)
        if bb + n == 0:
            raise ValueError("b = -n is excluded")
        sigma = [mpmath.mpc(1)] * K
        states = [LaguerreEvolState(tuple(sigma), 0, n, bb)]
        for s in range(1, c_max + 1):
            sigma = laguerre_recursion_step(sigma, n, bb, prec)
            states.append(LaguerreEvolState(tuple(sigma), s, n, bb))
    return states


def phi_forcing(x: Sequence, alpha, prec: int) -> list:
    """``Phi_k(x; alpha) = alpha sum_{j=1}^{k-1} j x_j Bhat_{k-j}(x; alpha)`` for ``k = 1..len(x)``."""
    K = len(x)
    with mpmath.workprec(prec):
        table = BellTable.build(list(x), K, prec)
        weighted = [table.weighted(m, alpha) for m in range(K)]
        return [alpha * mpmath.fsum(j * x[j - 1] * weighted[k - j] for j in range(1, k)) for k in range(1, K + 1)]


def laguerre_limit_evolve(
    beta,
    K: int,
    gamma_target,
    steps: int = 256,
    prec: int = DEFAULT_BITS,
    record: int = 0,
) -> LaguerreLimitState:
    """Integrate ``g_k' = Phi_k(g; alpha)``, ``g(0) = 1``, with ``alpha = -1/(1+beta)``."""
    if K < 1:
        raise ValueError("K must be >= 1")
    with mpmath.workprec(prec):
        beta = _number(beta, prec)
        if beta == -1:
            raise ValueError("beta = -1 is excluded")
        alpha = -1 / (1 + beta)
        gamma = mpmath.mpf(gamma_target)

        def rhs(_t, y):
            return phi_forcing(y, alpha, prec)

        g, traj = rk4(_with_prec(rhs, prec), [mpmath.mpf(1)] * K, mpmath.mpf(0), gamma, steps, prec, record)
        f = [mpmath.exp(alpha * gamma * k) * g[k - 1] for k in range(1, K + 1)]
    return LaguerreLimitState(tuple(g), tuple(f), gamma, alpha, tuple(traj))


def trajectory_to_csv(traj: Sequence, prec: int = 64) -> str:
    """CSV with columns ``s_or_gamma,k,re,im``; ``traj`` holds ``(t, (y_1..y_K))`` pairs."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["s_or_gamma", "k", "re", "im"])
    with mpmath.workprec(prec):
        for t, ys in traj:
            tt = mpmath.mpc(t)
            for k, v in enumerate(ys, start=1):
                v = mpmath.mpc(v)
                w.writerow([format_mpf(tt.real, prec), k, format_mpf(v.real, prec), format_mpf(v.imag, prec)])
    return buf.getvalue()
