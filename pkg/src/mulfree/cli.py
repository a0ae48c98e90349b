"""Command-line entry point: ``mulfree {hermite,laguerre,identities,roots}``.

Exit codes: 0 all assertions passed, 2 a numerical assertion failed,
3 the root finder did not converge.
"""

from __future__ import annotations

import argparse
import sys

from . import experiments
from .limits import IdentityViolation, RouteMismatch
from .roots import NonConvergence

EXIT_OK = 0
EXIT_ASSERTION = 2
EXIT_NONCONVERGENCE = 3


def _grid(text: str) -> tuple:
    return tuple(int(t) for t in text.replace(" ", "").split(",") if t)


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n-grid", type=_grid, required=True, help="comma-separated increasing degrees")
    p.add_argument("--k-max", type=int, default=3)
    p.add_argument("--precision-bits", type=int, default=None, help="override the automatic precision")
    p.add_argument("--jobs", type=int, default=1, help="degrees processed concurrently")
    p.add_argument("--out", default="-", help="output path ('-' for stdout)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--exploratory", action="store_true", help="allow parameters outside the certified regimes")
    p.add_argument("--no-roots", action="store_true", help="skip root finding (Newton-identity moments only)")


def _family_params(p: argparse.ArgumentParser) -> None:
    p.add_argument("--s", default="1", help="Hermite time parameter (complex allowed with --exploratory)")
    p.add_argument("--beta-re", default="1")
    p.add_argument("--beta-im", default="0")
    p.add_argument("--gamma", default="0.5")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mulfree", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    h = sub.add_parser("hermite", help="zeros of H*_n(x; s/n) against the free multiplicative normal law")
    _common(h)
    h.add_argument("--s", default="1")

    lg = sub.add_parser("laguerre", help="zeros of L*_n(x; b_n, floor(gamma n)) against the free multiplicative Poisson law")
    _common(lg)
    lg.add_argument("--beta-re", default="1")
    lg.add_argument("--beta-im", default="0")
    lg.add_argument("--gamma", default="0.5")

    ident = sub.add_parser("identities", help="run the exact-identity and oracle suite")
    ident.add_argument("--steps", type=int, default=2048, help="RK4 steps for the Hermite ODE oracle")
    ident.add_argument("--out", default="-")
    ident.add_argument("--format", choices=("json",), default="json")
    ident.add_argument("--inject-fault", default=None, help=argparse.SUPPRESS)

    r = sub.add_parser("roots", help="export the zeros of one polynomial as CSV")
    r.add_argument("--family", choices=("hermite", "laguerre"), default="hermite")
    r.add_argument("--n-grid", type=_grid, required=True, help="a single degree")
    _family_params(r)
    r.add_argument("--precision-bits", type=int, default=None)
    r.add_argument("--out", default="-")
    r.add_argument("--format", choices=("csv",), default="csv")
    r.add_argument("--exploratory", action="store_true")
    return parser


def _write(path: str, text: str) -> None:
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)


def _summary(report: experiments.ExperimentReport) -> str:
    lines = [f"status: {report.status}"]
    for k, rate in report.fitted_rate.items():
        lines.append(f"k={k}: fitted rate {'n/a' if rate is None else f'{rate:.4f}'}")
    for n, s in report.support_reports.items():
        lines.append(
            f"n={n}: unit deviation {s.max_unit_deviation:.3e}, imag ratio {s.max_imag_ratio:.3e}, min real {s.min_real_part:.3e}"
        )
    lines.extend(f"FAILED {f}" for f in report.failures)
    return "\n".join(lines) + "\n"


def _config(args, family: str) -> experiments.ExperimentConfig:
    kw = dict(
        family=family,
        n_grid=args.n_grid,
        precision_bits=args.precision_bits,
        exploratory=args.exploratory,
    )
    if family == "hermite":
        kw["s"] = args.s
    else:
        kw.update(beta_re=args.beta_re, beta_im=args.beta_im, gamma=args.gamma)
    for name in ("k_max", "jobs"):
        if hasattr(args, name):
            kw[name] = getattr(args, name)
    if hasattr(args, "no_roots"):
        kw["with_roots"] = not args.no_roots
    return experiments.ExperimentConfig(**kw)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "identities":
            results = experiments.run_identity_suite(args.inject_fault, args.steps)
            _write(args.out, experiments.identity_summary_json(results))
            return EXIT_OK if all(r.passed for r in results) else EXIT_ASSERTION
        if args.command == "roots":
            _write(args.out, experiments.export_roots(_config(args, args.family)))
            return EXIT_OK
        cfg = _config(args, args.command)
        run = experiments.run_hermite_convergence if args.command == "hermite" else experiments.run_laguerre_convergence
        report = run(cfg)
        _write(args.out, report.to_json() if args.format == "json" else report.to_csv())
        sys.stderr.write(_summary(report))
        return EXIT_OK if report.ok else EXIT_ASSERTION
    except NonConvergence as exc:
        sys.stderr.write(f"non-convergence: {exc}\n")
        return EXIT_NONCONVERGENCE
    except (RouteMismatch, IdentityViolation) as exc:
        sys.stderr.write(f"assertion failed: {exc}\n")
        return EXIT_ASSERTION
    except ValueError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_ASSERTION


if __name__ == "__main__":
    sys.exit(main())
