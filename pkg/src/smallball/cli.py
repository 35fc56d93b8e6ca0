"""Command-line front end: evaluate, estimate, compare, eigensolve, tabulate.

Subcommands
    eval      exact CDF (inversion or Monte Carlo) at one or more r values
    asymp     saddle-point probability estimates
    logasymp  saddle-point logarithmic estimates
    spectrum  materialize a spectrum (catalog family or kernel eigensolve)
    compare   ratio tables for two spectra over an r-grid
    rcalpha   closed-form log-asymptotics of the exp(-C|xi|^alpha) family

Data goes to --out (default stdout) as CSV or JSON; diagnostics go to
stderr.  Exit codes: 0 success, 1 usage/domain error, 2 out-of-regime.
Identical configurations (including seeds) produce byte-identical output.
"""

from __future__ import annotations

import argparse
import json
import sys

from .comparison import exact_ratio_check, loglevel_ratio, ratio_product
from .errors import (
    OutOfRegimeError,
    SmallBallError,
    UsageError,
)
from .exactdist import CdfResult, cdf_inversion, cdf_monte_carlo
from .saddle import small_ball_estimate, log_small_ball_estimate, solve_saddle
from .slowvary import RcAlphaParams, rc_alpha_log_asymp
from .spectra import (
    catalog,
    kernel_from_json,
    nystrom_spectrum,
    spectrum_from_json,
    spectrum_to_json,
)

__all__ = ["main"]


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors must exit 1, not argparse's 2
        raise UsageError(message)


def _float_list(text: str) -> list[float]:
    try:
        return [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise UsageError(f"bad numeric list '{text}'") from exc


def _load_spectrum(path: str):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read spectrum file {path}: {exc}") from exc
    try:
        return spectrum_from_json(text)
    except json.JSONDecodeError as exc:
        raise UsageError(
            f"malformed JSON in {path}: line {exc.lineno} column {exc.colno}: {exc.msg}"
        ) from exc


def _emit(lines_or_obj, fmt: str, out_path: str | None):
    if fmt == "csv":
        payload = "\n".join(lines_or_obj) + "\n"
    else:
        payload = json.dumps(lines_or_obj, sort_keys=True, indent=2) + "\n"
    if out_path is None or out_path == "-":
        sys.stdout.write(payload)
    else:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(payload)


def _rows_csv(header: list[str], rows: list[list[str]]) -> list[str]:
    return [",".join(header)] + [",".join(row) for row in rows]


def _rows_json(header: list[str], rows: list[list[str]]):
    def parse(cell: str):
        try:
            return json.loads(cell)
        except json.JSONDecodeError:
            return cell

    return {"rows": [dict(zip(header, map(parse, row))) for row in rows]}


def _build_parser() -> _Parser:
    p = _Parser(prog="smallball", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--out", default=None, help="output path (default stdout)")
        sp.add_argument("--format", choices=("csv", "json"), default="csv")

    sp = sub.add_parser("eval", help="exact CDF of the squared norm")
    sp.add_argument("--spectrum", required=True)
    sp.add_argument("--r", required=True, type=_float_list, help="comma-separated thresholds")
    sp.add_argument("--method", choices=("inversion", "monte_carlo"), default="inversion")
    sp.add_argument("--tol", type=float, default=1e-10)
    sp.add_argument("--samples", type=int, default=10**6)
    sp.add_argument("--seed", type=int, default=0)
    common(sp)

    for name in ("asymp", "logasymp"):
        sp = sub.add_parser(name, help=f"saddle-point {'log-' if name == 'logasymp' else ''}estimate")
        sp.add_argument("--spectrum", required=True)
        sp.add_argument("--r", required=True, type=_float_list)
        common(sp)

    sp = sub.add_parser("spectrum", help="materialize a spectrum as JSON")
    sp.add_argument("--catalog", help="family name: brownian|power|stretched_exp|explicit")
    sp.add_argument("--kernel", help="kernel JSON file to eigensolve")
    sp.add_argument("--nodes", type=int, default=200)
    sp.add_argument("--truncate", type=int, default=None)
    sp.add_argument("--scale", type=float, default=None)
    sp.add_argument("--exponent", type=float, default=None)
    sp.add_argument("--C", type=float, default=None)
    sp.add_argument("--alpha", type=float, default=None)
    sp.add_argument("--head", type=int, default=None)
    sp.add_argument("--values", type=_float_list, default=None)
    sp.add_argument("--out", default=None)

    sp = sub.add_parser("compare", help="comparison tables for two spectra")
    sp.add_argument("--a", required=True)
    sp.add_argument("--b", required=True)
    sp.add_argument("--r-grid", required=True, type=_float_list, dest="r_grid")
    sp.add_argument("--mode", choices=("exact", "log", "both"), default="both")
    common(sp)

    sp = sub.add_parser("rcalpha", help="closed-form log-asymptotics table")
    sp.add_argument("--C", required=True, type=float)
    sp.add_argument("--alpha", required=True, type=float)
    sp.add_argument("--eps-grid", required=True, type=_float_list, dest="eps_grid")
    common(sp)
    return p


def _cmd_eval(args) -> list[CdfResult]:
    spec = _load_spectrum(args.spectrum)
    results = []
    for r in args.r:
        if args.method == "inversion":
            results.append(cdf_inversion(spec, r, tol=args.tol))
        else:
            results.append(cdf_monte_carlo(spec, r, args.samples, args.seed))
    return results


def _cmd_estimates(args, log_form: bool):
    spec = _load_spectrum(args.spectrum)
    rows = []
    for r in args.r:
        if log_form:
            v = log_small_ball_estimate(spec, r)
            st = solve_saddle(spec, r)
            rows.append([repr(float(r)), repr(float(v)), "log_saddle", repr(abs(st.L1 + r)), "0", "0.0"])
        else:
            est = small_ball_estimate(spec, r)
            rows.append(est.csv_row())
    return rows


def _cmd_spectrum(args) -> str:
    if (args.catalog is None) == (args.kernel is None):
        raise UsageError("spectrum: give exactly one of --catalog or --kernel")
    if args.kernel is not None:
        try:
            with open(args.kernel, "r", encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise UsageError(f"cannot read kernel file {args.kernel}: {exc}") from exc
        try:
            spec = nystrom_spectrum(kernel_from_json(text), args.nodes)
        except json.JSONDecodeError as exc:
            raise UsageError(
                f"malformed JSON in {args.kernel}: line {exc.lineno} column {exc.colno}: {exc.msg}"
            ) from exc
        return spectrum_to_json(spec)
    params = {}
    for key in ("truncate", "scale", "exponent", "C", "alpha", "head", "values"):
        val = getattr(args, key)
        if val is not None:
            params[key] = val
    return spectrum_to_json(catalog(args.catalog, **params))


def _cmd_compare(args) -> list[str]:
    a = _load_spectrum(args.a)
    b = _load_spectrum(args.b)
    if args.mode == "exact":
        report = exact_ratio_check(a, b, args.r_grid)
        return report.csv_lines()
    if args.mode == "log":
        report = loglevel_ratio(a, b, args.r_grid)
        return report.csv_lines()
    product = ratio_product(a, b)
    log_report = loglevel_ratio(a, b, args.r_grid)
    if product.divergent:
        return log_report.csv_lines()
    exact_report = exact_ratio_check(a, b, args.r_grid)
    merged = ComparisonMerge(exact_report, log_report)
    return merged.csv_lines()


class ComparisonMerge:
    """Exact and log columns side by side for the 'both' compare mode."""

    def __init__(self, exact, log):
        self.exact = exact
        self.log = log

    def csv_lines(self) -> list[str]:
        lines = [f"# {self.exact.product.header_text()}"]
        if self.log.growth_warning:
            lines.append("# warning: growth condition gate failed (heuristic)")
        lines.append("r,P_a,P_b,exact_ratio,logP_a,logP_b,log_ratio")
        for i, r in enumerate(self.exact.r_grid):
            cells = [
                repr(float(r)),
                repr(float(self.exact.p_a[i])),
                repr(float(self.exact.p_b[i])),
                repr(float(self.exact.exact_ratios[i])),
                repr(float(self.log.log_a[i])),
                repr(float(self.log.log_b[i])),
                repr(float(self.log.log_ratios[i])),
            ]
            lines.append(",".join(cells))
        return lines


def _cmd_rcalpha(args):
    params = RcAlphaParams(C=args.C, alpha=args.alpha)
    rows = []
    for eps in args.eps_grid:
        v = rc_alpha_log_asymp(params, eps)
        rows.append(
            [repr(float(args.alpha)), repr(float(args.C)), repr(float(eps)), repr(float(v)), params.case]
        )
    return rows


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "eval":
            results = _cmd_eval(args)
            header = CdfResult.csv_header()
            rows = [res.csv_row() for res in results]
            out = _rows_csv(header, rows) if args.format == "csv" else _rows_json(header, rows)
            _emit(out, args.format, args.out)
        elif args.command in ("asymp", "logasymp"):
            rows = _cmd_estimates(args, log_form=args.command == "logasymp")
            header = CdfResult.csv_header()
            out = _rows_csv(header, rows) if args.format == "csv" else _rows_json(header, rows)
            _emit(out, args.format, args.out)
        elif args.command == "spectrum":
            text = _cmd_spectrum(args)
            if args.out is None or args.out == "-":
                sys.stdout.write(text + "\n")
            else:
                with open(args.out, "w", encoding="utf-8") as fh:
                    fh.write(text + "\n")
        elif args.command == "compare":
            lines = _cmd_compare(args)
            if args.format == "json":
                _emit({"lines": lines}, "json", args.out)
            else:
                _emit(lines, "csv", args.out)
        elif args.command == "rcalpha":
            rows = _cmd_rcalpha(args)
            header = ["alpha", "C", "epsilon", "log_asymp", "case"]
            out = _rows_csv(header, rows) if args.format == "csv" else _rows_json(header, rows)
            _emit(out, args.format, args.out)
        return 0
    except OutOfRegimeError as exc:
        print(f"smallball: out of regime: {exc}", file=sys.stderr)
        return 2
    except SmallBallError as exc:
        print(f"smallball: error: {exc}", file=sys.stderr)
        return 1
    except json.JSONDecodeError as exc:
        print(
            f"smallball: malformed JSON: line {exc.lineno} column {exc.colno}: {exc.msg}",
            file=sys.stderr,
        )
        return 1


if __name__ == "__main__":
    sys.exit(main())
