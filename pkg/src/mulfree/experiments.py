"""Convergence sweeps and the identity suite behind the command-line tool."""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import mpmath

from . import limits, moments, ode, poly, roots
from .scalar import env_precision, format_mpc, format_mpf, required_bits, to_mpc

SUPPORT_TOL = 1e-10
# errors below this multiple of the working-precision noise floor are excluded from the fit
NOISE_MARGIN = 1e3


@dataclass(frozen=True)
class ExperimentConfig:
    family: str
    n_grid: tuple
    k_max: int = 3
    s: str = "1"
    beta_re: str = "1"
    beta_im: str = "0"
    gamma: str = "0.5"
    precision_bits: int | None = None
    exploratory: bool = False
    with_roots: bool = True
    jobs: int = 1

    def __post_init__(self):
        if self.family not in ("hermite", "laguerre"):
            raise ValueError(f"unknown family {self.family!r}")
        grid = tuple(int(n) for n in self.n_grid)
        if not grid or any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("n_grid must be nonempty and strictly increasing")
        if grid[0] < 1:
            raise ValueError("degrees must be >= 1")
        if self.k_max < 1:
            raise ValueError("k_max must be >= 1")
        object.__setattr__(self, "n_grid", grid)

    @property
    def beta(self) -> complex:
        return complex(float(self.beta_re), float(self.beta_im))

    def hermite_mode(self) -> str:
        s = to_mpc(self.s, 64)
        if s.imag != 0:
            if not self.exploratory:
                raise ValueError("complex s needs --exploratory")
            return "general"
        return "unitary" if s.real < 0 else "positive"

    def laguerre_mode(self) -> str:
        re, im = Fraction(self.beta_re), Fraction(self.beta_im)
        if re == Fraction(-1, 2):
            return "unitary"
        if im == 0 and not -1 <= re <= 0:
            return "positive"
        if not self.exploratory:
            raise ValueError("beta must be real outside [-1, 0] or have real part -1/2 (else use --exploratory)")
        return "general"


@dataclass(frozen=True)
class Row:
    n: int
    k: int
    empirical: object
    roots_moment: object
    limit: object
    error: object
    prec: int

    def as_strings(self) -> list:
        def pair(z):
            return ["", ""] if z is None else format_mpc(z, self.prec)

        return [self.n, self.k, *pair(self.empirical), *pair(self.roots_moment), *pair(self.limit), format_mpf(self.error, self.prec), self.prec]


ROW_HEADER = ["n", "k", "empirical_re", "empirical_im", "roots_re", "roots_im", "limit_re", "limit_im", "abs_error", "precision_bits"]


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    rows: list
    fitted_rate: dict
    support_reports: dict
    status: str = "certified"
    failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def error(self, n: int, k: int):
        for r in self.rows:
            if r.n == n and r.k == k:
                return r.error
        raise KeyError((n, k))

    def to_json(self) -> str:
        cfg = self.config
        doc = {
            "family": cfg.family,
            "status": self.status,
            "n_grid": list(cfg.n_grid),
            "k_max": cfg.k_max,
            "parameters": {"s": cfg.s} if cfg.family == "hermite" else {"beta_re": cfg.beta_re, "beta_im": cfg.beta_im, "gamma": cfg.gamma},
            "rows": [dict(zip(ROW_HEADER, r.as_strings())) for r in self.rows],
            "fitted_rate": {str(k): v for k, v in self.fitted_rate.items()},
            "support_reports": {str(n): vars(s) for n, s in self.support_reports.items()},
            "failures": self.failures,
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"

    def to_csv(self) -> str:
        import csv
        import io

        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(ROW_HEADER)
        for r in self.rows:
            w.writerow(r.as_strings())
        return buf.getvalue()


def fit_rate(ns, errors, floors) -> float | None:
    """Least-squares slope of ``log(error)`` against ``log(n)``, skipping errors near the noise floor."""
    pts = [(math.log(n), float(mpmath.log(e))) for n, e, f in zip(ns, errors, floors) if e > NOISE_MARGIN * f]
    if len(pts) < 2:
        return None
    mx = sum(x for x, _ in pts) / len(pts)
    my = sum(y for _, y in pts) / len(pts)
    sxx = sum((x - mx) ** 2 for x, _ in pts)
    return sum((x - mx) * (y - my) for x, y in pts) / sxx


def _per_degree(s, n: int, prec: int = 256):
    """``s / n`` at ``prec`` bits."""
    with mpmath.workprec(prec):
        return to_mpc(s, prec) / n


def _precision(default: int, override: int | None) -> int:
    return override or env_precision() or default


def laguerre_parameters(n: int, cfg: ExperimentConfig) -> tuple[complex | float, int]:
    """``(b_n, c_n)``: ``b_n = beta n`` (or ``-n/2 + i Im(beta) n`` on the unitary line), ``c_n = floor(gamma n)``."""
    c = math.floor(Fraction(cfg.gamma) * n)
    if cfg.laguerre_mode() == "unitary":
        b = complex(-n / 2, float(Fraction(cfg.beta_im) * n))
    else:
        re, im = Fraction(cfg.beta_re) * n, Fraction(cfg.beta_im) * n
        b = float(re) if im == 0 else complex(float(re), float(im))
    return b, c


def _hermite_cell(args):
    n, s, K, override, with_roots, mode = args
    s_n = _per_degree(s, n)
    prec = _precision(poly.hermite_bits(n, s_n), override)
    P = poly.hermite_mult(n, s_n, prec)
    return _measure(P, K, n if s_n == 0 else 0, with_roots, mode)


def _laguerre_cell(args):
    n, b, c, K, override, with_roots, mode = args
    prec = _precision(poly.laguerre_bits(n, b, c), override)
    P = poly.laguerre_mult(n, b, c, prec)
    return _measure(P, K, max(P.degree - c, 0), with_roots, mode)


def _measure(P, K, unit_m, with_roots, mode):
    newton = moments.moments_from_coeffs(P, K)
    if not with_roots:
        return P.prec, newton.values, None, None
    R = roots.find_roots(P, unit_multiplicity=unit_m)
    from_roots = moments.moments_from_roots(R, K)
    return R.prec, newton.values, from_roots.values, roots.classify_support(R, mode)


def _map(fn: Callable, tasks: list, jobs: int) -> list:
    if jobs <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    # process pool: each worker has its own interpreter state; map preserves order
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, tasks))


def _assemble(cfg: ExperimentConfig, cells: list, limit: moments.MomentSequence, mode: str, status: str) -> ExperimentReport:
    rows, supports, failures = [], {}, []
    for n, (prec, newton, from_roots, support) in zip(cfg.n_grid, cells):
        bits = max(prec, limit.prec)
        with mpmath.workprec(bits):
            for k in range(1, cfg.k_max + 1):
                err = abs(newton[k] - limit[k])
                rows.append(Row(n, k, newton[k], None if from_roots is None else from_roots[k], limit[k], err, bits))
        if support is not None:
            supports[n] = support
            if status == "certified" and not support_ok(support, mode):
                failures.append(f"support n={n}: {support}")
    rates = {}
    for k in range(1, cfg.k_max + 1):
        sel = [r for r in rows if r.k == k]
        rates[k] = fit_rate([r.n for r in sel], [r.error for r in sel], [mpmath.mpf(2) ** (-r.prec) for r in sel])
    return ExperimentReport(cfg, rows, rates, supports, status, failures)


def support_ok(rep: roots.SupportReport, mode: str, tol: float = SUPPORT_TOL) -> bool:
    if mode == "unitary":
        return rep.max_unit_deviation <= tol
    if mode == "positive":
        return rep.max_imag_ratio <= tol and rep.min_real_part > 0
    return True


def run_hermite_convergence(cfg: ExperimentConfig) -> ExperimentReport:
    """Moments of the zeros of ``H*_n(x; s/n)`` against ``mu^(s)`` over ``cfg.n_grid``."""
    if cfg.family != "hermite":
        raise ValueError("config family must be hermite")
    mode = cfg.hermite_mode()
    status = "conjectural" if mode == "general" else "certified"
    limit = limits.mu_moments(limits.MuParams(cfg.s), cfg.k_max, max(256, required_bits(cfg.n_grid[-1], 1)))
    tasks = [(n, cfg.s, cfg.k_max, cfg.precision_bits, cfg.with_roots, mode) for n in cfg.n_grid]
    return _assemble(cfg, _map(_hermite_cell, tasks, cfg.jobs), limit, mode, status)


def run_laguerre_convergence(cfg: ExperimentConfig) -> ExperimentReport:
    """Moments of the zeros of ``L*_n(x; b_n, c_n)`` against ``nu_{beta,gamma}``."""
    if cfg.family != "laguerre":
        raise ValueError("config family must be laguerre")
    mode = cfg.laguerre_mode()
    status = "conjectural" if mode == "general" else "certified"
    limit = limits.nu_moments(limits.NuParams(cfg.beta, cfg.gamma), cfg.k_max, max(256, required_bits(cfg.n_grid[-1], 1)))
    tasks = []
    for n in cfg.n_grid:
        b, c = laguerre_parameters(n, cfg)
        tasks.append((n, b, c, cfg.k_max, cfg.precision_bits, cfg.with_roots, mode))
    return _assemble(cfg, _map(_laguerre_cell, tasks, cfg.jobs), limit, mode, status)


def export_roots(cfg: ExperimentConfig) -> str:
    """Root CSV for the single degree in ``cfg.n_grid``."""
    if len(cfg.n_grid) != 1:
        raise ValueError("root export needs exactly one degree")
    n = cfg.n_grid[0]
    if cfg.family == "hermite":
        cfg.hermite_mode()
        s_n = _per_degree(cfg.s, n)
        P = poly.hermite_mult(n, s_n, _precision(poly.hermite_bits(n, s_n), cfg.precision_bits))
        unit_m = n if s_n == 0 else 0
    else:
        b, c = laguerre_parameters(n, cfg)
        P = poly.laguerre_mult(n, b, c, _precision(poly.laguerre_bits(n, b, c), cfg.precision_bits))
        unit_m = max(n - c, 0)
    return roots.roots_to_csv(roots.find_roots(P, unit_multiplicity=unit_m))


# ---------------------------------------------------------------------------
# identity suite


@dataclass(frozen=True)
class IdentityResult:
    name: str
    max_deviation: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.max_deviation <= self.tolerance


def _rel(a, b):
    scale = max(abs(a), abs(b))
    return abs(a - b) / scale if scale else mpmath.mpf(0)


def _coeff_gap(P, Q):
    return poly.max_relative_gap(P, Q)


def _hermite_palindrome(fault: bool) -> float:
    worst = mpmath.mpf(0)
    for n in range(1, 17):
        for s in (-2, -1, 0, 1, 2):
            P = poly.hermite_mult(n, s, 256)
            if fault and n == 8 and s == 1:
                cs = list(P.coeffs)
                cs[3] *= 1 + mpmath.mpf("1e-6")
                P = poly.Polynomial(tuple(cs), P.prec)
            rev = poly.reverse_reciprocal(P)
            with mpmath.workprec(256):
                for a, b in zip(rev.coeffs, P.coeffs):
                    worst = max(worst, _rel(a, (-1) ** n * b))
    return float(worst)


def _laguerre_reversal() -> float:
    worst = mpmath.mpf(0)
    for n in (4, 9, 16, 32):
        for b, c in ((3, 2), (complex(-n / 2, 1.5), 5), (0.25, 7)):
            P = poly.laguerre_mult(n, b, c, 256)
            Q = poly.laguerre_mult(n, -n - to_mpc(b, 256), c, 256)
            rev = poly.reverse_reciprocal(P)
            with mpmath.workprec(256):
                for a, q in zip(rev.coeffs, Q.coeffs):
                    worst = max(worst, _rel((-1) ** (n + c) * a, q))
    return float(worst)


def _hermite_semigroup() -> float:
    worst = mpmath.mpf(0)
    for n in (5, 16, 32):
        for s1, s2 in ((1, 2), (-1, 0.5), (-2, -1)):
            A = poly.hermite_mult(n, _per_degree(s1, n), 256)
            B = poly.hermite_mult(n, _per_degree(s2, n), 256)
            C = poly.hermite_mult(n, _per_degree(s1 + s2, n), 256)
            worst = max(worst, _coeff_gap(poly.finite_free_mult_convolve(A, B, n), C))
    return float(worst)


def _laguerre_semigroup() -> float:
    worst = mpmath.mpf(0)
    for n in (5, 16, 32):
        for b in (3, complex(-n / 2, 2)):
            for c1, c2 in ((1, 2), (3, 4)):
                A = poly.laguerre_mult(n, b, c1, 256)
                B = poly.laguerre_mult(n, b, c2, 256)
                C = poly.laguerre_mult(n, b, c1 + c2, 256)
                worst = max(worst, _coeff_gap(poly.finite_free_mult_convolve(A, B, n), C))
    return float(worst)


def _operator_equivalence() -> float:
    worst = mpmath.mpf(0)
    for n in (6, 12):
        P = poly.laguerre_mult(n, 1.5, 2, 256)
        for s in (-1, 0.5):
            lhs = poly.mult_heat_apply(P, s, n)
            rhs = poly.finite_free_mult_convolve(P, poly.hermite_mult(n, _per_degree(s, n), 256), n)
            worst = max(worst, _coeff_gap(lhs, rhs))
        Q = poly.hermite_mult(n, 0.3, 256)
        lhs = poly.xdx_plus_b_power_apply(Q, 2, 3, n)
        rhs = poly.finite_free_mult_convolve(Q, poly.laguerre_mult(n, 2, 3, 256), n)
        worst = max(worst, _coeff_gap(lhs, rhs))
    return float(worst)


def _route_agreement() -> float:
    worst = mpmath.mpf(0)
    with mpmath.workprec(256):
        for s in (-2, -1, -0.5, 0.5, 1, 2):
            r = limits.mu_moment_routes(limits.MuParams(s), 20, 256)
            worst = max(worst, _max_route_gap(r))
        for beta in (1, 3, -2, complex(-0.5, 1)):
            for gamma in (0.25, 0.5, 1):
                p = limits.NuParams(beta, gamma)
                worst = max(worst, _max_route_gap(limits.nu_moment_routes(p, 20, 256)))
                worst = max(worst, _max_route_gap(limits.nu_cumulant_routes(p, 20, 256)))
    return float(worst)


def _max_route_gap(routes: dict):
    vals = list(routes.values())
    worst = mpmath.mpf(0)
    for a in vals:
        for b in vals:
            for x, y in zip(a, b):
                worst = max(worst, _rel(x, y))
    return worst


def _s_transforms() -> float:
    worst = mpmath.mpf(0)
    with mpmath.workprec(256):
        for s in (-1, 0.5, 1):
            S = limits.s_transform_from_moments(limits.mu_moments(limits.MuParams(s), 11))
            worst = max(worst, S.max_abs_gap(limits.mu_s_series(limits.MuParams(s), 10)))
        for beta, gamma in ((1, 0.5), (complex(-0.5, 1), 0.25)):
            p = limits.NuParams(beta, gamma)
            S = limits.s_transform_from_moments(limits.nu_moments(p, 11))
            worst = max(worst, S.max_abs_gap(limits.nu_s_series(p, 10)))
    return float(worst)


def _s_r_identity() -> float:
    worst = mpmath.mpf(0)
    seqs = [moments.MomentSequence((1,) * 14, 256)]
    seqs += [limits.mu_moments(limits.MuParams(s), 13) for s in (-1, 0.5, 1)]
    seqs += [limits.nu_moments(limits.NuParams(b, g), 13) for b in (1, complex(-0.5, 1)) for g in (0.25, 1)]
    with mpmath.workprec(256):
        for m in seqs:
            comp = limits.s_r_composite(limits.s_transform_from_moments(m), limits.r_transform(m))
            worst = max(worst, max(abs(comp[k] - (1 if k == 0 else 0)) for k in range(comp.K + 1)))
        for s in (-1, 0.5, 1):
            R = limits.r_transform(limits.mu_moments(limits.MuParams(s), 13))
            kap = limits.mu_cumulants(limits.MuParams(s), 13)
            worst = max(worst, max(_rel(R[k - 1], kap[k]) for k in range(1, 13)))
    return float(worst)


def _measure_semigroups() -> float:
    worst = mpmath.mpf(0)
    with mpmath.workprec(256):
        for s1, s2 in ((0.5, 0.5), (-1, 0.25)):
            conv = limits.free_mult_convolve_moments(limits.mu_moments(limits.MuParams(s1), 12), limits.mu_moments(limits.MuParams(s2), 12), 12)
            worst = max(worst, moments.max_relative_gap(conv, limits.mu_moments(limits.MuParams(s1 + s2), 12)))
        for beta in (1, complex(-0.5, 1)):
            a = limits.nu_moments(limits.NuParams(beta, 0.25), 12)
            b = limits.nu_moments(limits.NuParams(beta, 0.5), 12)
            conv = limits.free_mult_convolve_moments(a, b, 12)
            worst = max(worst, moments.max_relative_gap(conv, limits.nu_moments(limits.NuParams(beta, 0.75), 12)))
    return float(worst)


def _implicit_sigma() -> float:
    return float(max(limits.nu_implicit_sigma_residual(limits.NuParams(b, g), 10) for b, g in ((1, 0.5), (complex(-0.5, 1), 0.3), (3, 0))))


def _hermite_bridge() -> float:
    worst = mpmath.mpf(0)
    for n, s in ((10, -1), (7, 0.5)):
        d, b = moments.hermite_moment_bridge(n, s, 4, 256)
        worst = max(worst, moments.max_relative_gap(d, b))
    return float(worst)


def _hermite_ode(steps: int) -> float:
    worst = mpmath.mpf(0)
    for n, s in ((10, 0.5), (10, -1)):
        st = ode.hermite_finite_n_evolve(n, 8, s, steps)
        m = moments.moments_from_coeffs(poly.heat_polynomial(n, s, 256), 8)
        with mpmath.workprec(256):
            worst = max(worst, max(_rel(a, b) for a, b in zip(st.sigma, m.values[1:])))
    return float(worst)


def _laguerre_recursion() -> float:
    worst = mpmath.mpf(0)
    for b in (3, complex(-4, 2)):
        states = ode.laguerre_recursion_evolve(8, b, 6, 10)
        for st in states:
            m = moments.moments_from_coeffs(poly.laguerre_mult(8, b, st.s, 256), 6)
            with mpmath.workprec(256):
                worst = max(worst, max(_rel(a, c) for a, c in zip(st.sigma, m.values[1:])))
    return float(worst)


def _laguerre_limit() -> float:
    worst = mpmath.mpf(0)
    for gamma in (0.25, 1):
        st = ode.laguerre_limit_evolve(1, 8, gamma, 128)
        a, g = st.alpha, mpmath.mpf(gamma)
        with mpmath.workprec(128):
            worst = max(worst, abs(st.g[1] - (1 + a**2 * g)))
            worst = max(worst, abs(st.g[2] - (1 + (3 * a**2 + a**3) * g + mpmath.mpf(3) / 2 * a**4 * g**2)))
            nu = limits.nu_moments(limits.NuParams(1, gamma), 8)
            worst = max(worst, max(abs(x - y) for x, y in zip(st.f, nu.values[1:])))
    return float(worst)


def identity_checks(steps: int = 2048) -> dict:
    """Name -> ``(check, tolerance)``; each check returns its maximum deviation."""
    return {
        "hermite_palindrome": (_hermite_palindrome, 1e-25),
        "laguerre_reversal": (lambda fault=False: _laguerre_reversal(), 1e-25),
        "hermite_semigroup": (lambda fault=False: _hermite_semigroup(), 1e-25),
        "laguerre_semigroup": (lambda fault=False: _laguerre_semigroup(), 1e-25),
        "operator_as_convolution": (lambda fault=False: _operator_equivalence(), 1e-25),
        "closed_form_routes": (lambda fault=False: _route_agreement(), 1e-25),
        "s_transform_series": (lambda fault=False: _s_transforms(), 1e-20),
        "s_r_identity": (lambda fault=False: _s_r_identity(), 1e-20),
        "measure_semigroups": (lambda fault=False: _measure_semigroups(), 1e-15),
        "implicit_sigma_relation": (lambda fault=False: _implicit_sigma(), 1e-25),
        "hermite_moment_bridge": (lambda fault=False: _hermite_bridge(), 1e-20),
        "hermite_ode_oracle": (lambda fault=False: _hermite_ode(steps), 1e-10),
        "laguerre_recursion_oracle": (lambda fault=False: _laguerre_recursion(), 1e-12),
        "laguerre_limit_ode": (lambda fault=False: _laguerre_limit(), 1e-8),
    }


def run_identity_suite(inject_fault: str | None = None, steps: int = 2048) -> list:
    """Run every identity check; ``inject_fault`` perturbs the named check's input."""
    out = []
    for name, (check, tol) in identity_checks(steps).items():
        dev = check(fault=(name == inject_fault))
        out.append(IdentityResult(name, dev, tol))
    return out


def identity_summary_json(results: list) -> str:
    doc = {
        "passed": all(r.passed for r in results),
        "identities": [
            {"name": r.name, "max_deviation": float(f"{r.max_deviation:.6e}"), "tolerance": r.tolerance, "passed": r.passed}
            for r in results
        ],
    }
    return json.dumps(doc, indent=2) + "\n"
