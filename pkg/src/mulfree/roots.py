"""Simultaneous root finding (Aberth-Ehrlich) and support diagnostics.

The inner loop runs on :mod:`gmpy2` (MPFR/MPC) numbers, which are several
times faster than mpmath objects for the Horner sweeps that dominate the
cost; inputs and outputs are ``mpmath.mpc``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Sequence

import gmpy2
import mpmath
from mpmath import libmp

from .poly import Polynomial
from .scalar import format_mpf

# irrational angular offset for the initial circle (golden-ratio fraction)
_OFFSET = (math.sqrt(5.0) - 1.0) / 2.0


class NonConvergence(RuntimeError):
    """Raised when the iteration budget is exhausted; ``best`` holds the last iterate."""

    def __init__(self, message: str, best: RootSet):
        super().__init__(message)
        self.best = best


@dataclass(frozen=True)
class RootSet:
    """Roots of a polynomial with relative backward-error residuals.

    ``residuals[i]`` is ``|P(z_i)| / sum_j |a_j| |z_i|**j``.
    """

    roots: tuple
    residuals: tuple
    iterations: int
    prec: int

    def __len__(self) -> int:
        return len(self.roots)

    @classmethod
    def from_values(cls, values: Sequence, prec: int = 192) -> RootSet:
        with mpmath.workprec(prec):
            rs = tuple(mpmath.mpc(v) for v in values)
        return cls(rs, tuple(mpmath.mpf(0) for _ in rs), 0, prec)

    def to_csv(self) -> str:
        return roots_to_csv(self)


@dataclass(frozen=True)
class SupportReport:
    mode: str
    max_unit_deviation: float
    max_imag_ratio: float
    min_real_part: float


# ---------------------------------------------------------------------------
# mpmath <-> gmpy2 conversion


def _mpf_to_gmp(x: mpmath.mpf):
    sign, man, exp, _ = x._mpf_
    if not man:
        return gmpy2.mpfr(0)
    v = gmpy2.mul_2exp(gmpy2.mpfr(gmpy2.mpz(man)), exp)
    return -v if sign else v


def _to_gmp(z: mpmath.mpc):
    return gmpy2.mpc(_mpf_to_gmp(z.real), _mpf_to_gmp(z.imag))


def _gmp_to_raw(x):
    if x == 0:
        return libmp.fzero
    man, exp = x.as_mantissa_exp()
    return libmp.from_man_exp(int(man), int(exp))


# exact conversions: no rounding to the ambient mpmath precision
def _gmp_to_mpf(x) -> mpmath.mpf:
    return mpmath.mp.make_mpf(_gmp_to_raw(x))


def _from_gmp(z) -> mpmath.mpc:
    return mpmath.mp.make_mpc((_gmp_to_raw(z.real), _gmp_to_raw(z.imag)))


def _ctx(prec: int):
    return gmpy2.context(gmpy2.get_context(), precision=prec)


# ---------------------------------------------------------------------------
# kernel


def _horner(a, z, absa):
    """Return ``(P(z), P'(z), sum |a_j| |z|**j)``."""
    n = len(a) - 1
    p = a[n]
    d = gmpy2.mpc(0)
    sc = absa[n]
    r = abs(z)
    for j in range(n - 1, -1, -1):
        d = d * z + p
        p = p * z + a[j]
        sc = sc * r + absa[j]
    return p, d, sc


def _initial_guesses(a, absa):
    n = len(a) - 1
    radius = (absa[0] / absa[n]) ** (gmpy2.mpfr(1) / n)
    return [
        radius * gmpy2.mpc(complex(math.cos(2 * math.pi * (k + _OFFSET) / n), math.sin(2 * math.pi * (k + _OFFSET) / n)))
        for k in range(n)
    ]


def _aberth(a, prec: int, max_iter: int):
    """Jacobi-style Aberth iteration; returns ``(roots, iterations, converged)``.

    A root is frozen once its correction is below ``2**(-prec/2)`` relative or
    its residual hits the rounding floor of the evaluation.
    """
    n = len(a) - 1
    absa = [abs(c) for c in a]
    z = _initial_guesses(a, absa)
    step_tol = gmpy2.mpfr(2) ** (-(prec // 2))
    floor = gmpy2.mpfr(2) ** (-(prec - 20))
    one = gmpy2.mpfr(1)
    active = list(range(n))
    it = 0
    while active and it < max_iter:
        it += 1
        new_z = list(z)
        still = []
        for i in active:
            zi = z[i]
            p, d, sc = _horner(a, zi, absa)
            if abs(p) <= floor * sc:
                continue
            ratio = p / d
            acc = gmpy2.mpc(0)
            for j in range(n):
                if j != i:
                    acc += one / (zi - z[j])
            w = ratio / (one - ratio * acc)
            new_z[i] = zi - w
            if abs(w) > step_tol * max(one, abs(zi)):
                still.append(i)
        z = new_z
        active = still
    return z, it, not active


def _polish(a, z, steps: int):
    absa = [abs(c) for c in a]
    for _ in range(steps):
        p, d, _ = _horner(a, z, absa)
        if p == 0 or d == 0:
            break
        cand = z - p / d
        pc, _, _ = _horner(a, cand, absa)
        if abs(pc) >= abs(p):
            break
        z = cand
    return z


def _residual(a, z):
    absa = [abs(c) for c in a]
    p, _, sc = _horner(a, z, absa)
    return abs(p) / sc if sc else abs(p)


def _divide_unit(coeffs, m: int):
    """Divide by ``(x - 1)**m`` by synthetic division; returns the quotient."""
    a = list(coeffs)
    for _ in range(m):
        n = len(a) - 1
        q = [None] * n
        q[n - 1] = a[n]
        for j in range(n - 1, 0, -1):
            q[j - 1] = a[j] + q[j]
        a = q
    return a


def find_roots(
    P: Polynomial,
    tol: float | None = None,
    max_iter: int | None = None,
    *,
    unit_multiplicity: int = 0,
    polish: int = 2,
    retry: bool = True,
) -> RootSet:
    """All roots of ``P`` by Aberth-Ehrlich iteration at ``P.prec`` bits.

    Parameters
    ----------
    P : Polynomial
        Degree at least 1.
    tol : float, optional
        Residual tolerance; defaults to ``2**(-P.prec/3)``.
    max_iter : int, optional
        Iteration budget; defaults to ``500 + 5 * degree``.
    unit_multiplicity : int
        Known multiplicity of the root ``x = 1``. That factor is divided out
        exactly and the corresponding roots are reported as exactly 1.
        Exact multiple roots otherwise cost a factor ``m`` in attainable
        accuracy.
    polish : int
        Newton steps applied to each root afterwards (kept only if they
        reduce ``|P|``).
    retry : bool
        On failure, retry once at twice the working precision.

    Raises
    ------
    NonConvergence
        If any root misses ``tol`` after the retry.
    """
    n = P.degree
    if n < 1:
        raise ValueError("find_roots needs degree >= 1")
    if not 0 <= unit_multiplicity <= n:
        raise ValueError("unit_multiplicity out of range")
    prec = P.prec
    tol = mpmath.mpf(2) ** (-(prec / 3)) if tol is None else mpmath.mpf(tol)
    if tol <= 0:
        raise ValueError("tol must be positive")
    max_iter = max_iter or 500 + 5 * n
    try:
        return _solve(P, prec, tol, max_iter, unit_multiplicity, polish)
    except NonConvergence:
        if not retry:
            raise
        return _solve(P, 2 * prec, tol, max_iter, unit_multiplicity, polish)


def _solve(P: Polynomial, prec: int, tol, max_iter: int, unit_m: int, polish: int) -> RootSet:
    with _ctx(prec):
        full = [_to_gmp(c) for c in P.coeffs]
        # exact zero roots
        zeros = 0
        while full[zeros] == 0:
            zeros += 1
        a = full[zeros:]
        q = _divide_unit(a, unit_m) if unit_m else a
        found = []
        it = 0
        converged = True
        if len(q) > 1:
            found, it, converged = _aberth(q, prec, max_iter)
            found = [_polish(q, z, polish) for z in found]
        roots = [gmpy2.mpc(0)] * zeros + [gmpy2.mpc(1)] * unit_m + found
        residuals = [gmpy2.mpfr(0)] * (zeros + unit_m) + [_residual(q, z) for z in found]
        tol_g = _mpf_to_gmp(mpmath.mpf(tol))
        ok = converged and all(r <= tol_g for r in residuals)
        out = RootSet(
            tuple(_from_gmp(z) for z in roots),
            tuple(_gmp_to_mpf(r) for r in residuals),
            it,
            prec,
        )
    if not ok:
        worst = max(out.residuals)
        raise NonConvergence(
            f"degree {P.degree}: residual {mpmath.nstr(worst, 5)} after {it} iterations at {prec} bits", out
        )
    return out


# ---------------------------------------------------------------------------
# diagnostics


def classify_support(R: RootSet, mode: str) -> SupportReport:
    """Distance of the roots from the unit circle and from the positive axis."""
    if mode not in ("positive", "unitary", "general"):
        raise ValueError(f"unknown mode {mode!r}")
    with mpmath.workprec(R.prec):
        unit = max((abs(abs(z) - 1) for z in R.roots), default=mpmath.mpf(0))
        imag = max((abs(z.imag) / abs(z) if z != 0 else mpmath.mpf(0) for z in R.roots), default=mpmath.mpf(0))
        min_re = min((z.real for z in R.roots), default=mpmath.mpf(0))
    return SupportReport(mode, float(unit), float(imag), float(min_re))


def reciprocal_pairing(R: RootSet, tol: float) -> bool:
    """True if ``{1/z}`` matches ``{z}`` as multisets under greedy nearest matching."""
    with mpmath.workprec(R.prec):
        if any(z == 0 for z in R.roots):
            return False
        pool = list(R.roots)
        for z in R.roots:
            w = 1 / z
            k = min(range(len(pool)), key=lambda i: abs(pool[i] - w))
            if abs(pool[k] - w) > tol * max(1, abs(w)):
                return False
            pool.pop(k)
    return True


def vieta_gaps(P: Polynomial, R: RootSet) -> tuple[mpmath.mpf, mpmath.mpf]:
    """Relative errors of the root sum and root product against the coefficients."""
    n = P.degree
    with mpmath.workprec(max(P.prec, R.prec)):
        a = P.coeffs
        total = mpmath.fsum(R.roots)
        prod = mpmath.fprod(R.roots)
        want_sum = -a[n - 1] / a[n]
        want_prod = (-1) ** n * a[0] / a[n]
        gs = abs(total - want_sum) / max(1, abs(want_sum))
        gp = abs(prod - want_prod) / max(1, abs(want_prod))
    return gs, gp


def sorted_roots(R: RootSet) -> list[tuple[mpmath.mpc, mpmath.mpf]]:
    """``(root, residual)`` pairs ordered by argument, then modulus."""
    with mpmath.workprec(R.prec):
        pairs = list(zip(R.roots, R.residuals))
        return sorted(pairs, key=lambda p: (mpmath.arg(p[0]), abs(p[0])))


def roots_to_csv(R: RootSet) -> str:
    """CSV with columns ``index,re,im,abs,arg,residual``, ordered by argument then modulus."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["index", "re", "im", "abs", "arg", "residual"])
    bits = R.prec
    with mpmath.workprec(bits):
        for i, (z, res) in enumerate(sorted_roots(R)):
            w.writerow(
                [
                    i,
                    format_mpf(z.real, bits),
                    format_mpf(z.imag, bits),
                    format_mpf(abs(z), bits),
                    format_mpf(mpmath.arg(z), bits),
                    mpmath.nstr(res, 6),
                ]
            )
    return buf.getvalue()
