"""Command-line experiment runner.

Every subcommand writes one CSV or JSON payload (stdout or ``--out``).  With
``--out`` a sidecar ``<out>.manifest.json`` records the configuration, wall
time, precision and guard incidents.  Payloads never contain worker counts,
chunk sizes or timings, so reruns are byte-identical.

Exit codes: 0 success, 1 usage error, 2 numeric failure (guard, precision,
tolerance).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import time

from . import __version__, stats
from .birkhoff import SummandKind, prefix_stream
from .cf import GRAMMAR, as_source, iter_convergents, parse_alpha
from .constants import full_period_integral, v_constant
from .errors import (
    HypothesisViolated,
    NotQuadratic,
    PrecisionExhausted,
    SingularitySuspect,
    SpecParseError,
    ToleranceNotMet,
    TruncationFlagged,
    Unsupported,
)
from .rotation import DEFAULT_CHUNK_SIZE, default_precision

USAGE_ERRORS = (SpecParseError, ValueError, Unsupported, HypothesisViolated, NotQuadratic, TruncationFlagged)
NUMERIC_ERRORS = (SingularitySuspect, PrecisionExhausted, ToleranceNotMet)

CSV_SCHEMAS = """\
CSV columns (sums dimensionless, logarithms natural):
  cf                k,a,p,q          (row 0 holds a0 and p0/q0 = a0/1)
  sudler            N,logP,err       (N,S,err for other summands)
  moments           M,mean,variance,min,max,argmin,argmax
  dioph-sum         M,sum
  sigma2            M,sum,ratio      (ratio = sum / log M)
  clt, ae-levy      p,quantile
  symmetry          k,q_k,value,argmax
  extremes          k,q_k,max,argmax,min,argmin,predicted,ratio,error_scale
  birkhoff-predict  M,H,mean_main,variance_main,truncated
  bu                M,mean,variance,ratio,predicted_variance,predicted_ratio
  vconst            V,full_period"""


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n{GRAMMAR}\n")
        sys.exit(1)


def parse_grid(text: str) -> list[int]:
    """``dyadic:10:20`` for 2^10..2^20, or a comma-separated list."""
    if text.startswith("dyadic:"):
        _, lo, hi = text.split(":")
        grid = [2**j for j in range(int(lo), int(hi) + 1)]
    else:
        grid = [int(float(t)) for t in text.split(",") if t.strip()]
    if not grid or any(M < 1 for M in grid) or any(b <= a for a, b in zip(grid, grid[1:])):
        raise UsageError(f"grid must be strictly increasing positive integers: {text!r}")
    return grid


def parse_seeds(text: str) -> list[int]:
    """``lo:hi`` for range(lo, hi), or a comma-separated list."""
    if ":" in text:
        lo, hi = text.split(":")
        return list(range(int(lo), int(hi)))
    return [int(t) for t in text.split(",") if t.strip()]


def _int(text: str) -> int:
    return int(float(text)) if "e" in text.lower() else int(text)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="sudlerlab", description="Sudler products and Birkhoff sums along irrational rotations.",
                epilog=GRAMMAR + "\n\n" + CSV_SCHEMAS, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--alpha", default="golden", help="alpha spec (see grammar below)")
    common.add_argument("--format", choices=("csv", "json"), default="json")
    common.add_argument("--out", help="output file (default stdout)")
    common.add_argument("--workers", type=int, help="worker threads (default $SUDLERLAB_WORKERS or 1)")
    common.add_argument("--chunk-size", type=_int, default=DEFAULT_CHUNK_SIZE)
    common.add_argument("--precision-bits", type=int)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, help_text):
        return sub.add_parser(name, parents=[common], help=help_text, epilog=GRAMMAR + "\n\n" + CSV_SCHEMAS,
                              formatter_class=argparse.RawDescriptionHelpFormatter)

    s = add("cf", "partial quotients and convergents")
    s.add_argument("--k", type=int, required=True)
    s = add("sudler", "prefix sums S_N for N = 1..max-n")
    s.add_argument("--max-n", "--M", dest="M", type=_int, required=True)
    s.add_argument("--summand", choices=SummandKind.NAMES, default="log_sudler")
    s.add_argument("--a", type=float, default=0.0)
    s.add_argument("--b", type=float, default=0.5)
    s.add_argument("--binary", help="also write little-endian (int64 N, float64 value) records here")
    s = add("moments", "temporal mean and variance")
    s.add_argument("--M", "--max-n", dest="M", type=_int)
    s.add_argument("--grid")
    s.add_argument("--summand", choices=SummandKind.NAMES, default="log_sudler")
    s.add_argument("--a", type=float, default=0.0)
    s.add_argument("--b", type=float, default=0.5)
    s = add("dioph-sum", "sum of 1/(8 pi^2 m^2 ||m alpha||^2)")
    s.add_argument("--M", "--max-n", dest="M", type=_int)
    s.add_argument("--grid")
    s = add("sigma2", "slope of the Diophantine sum against log M")
    s.add_argument("--grid", default="dyadic:10:20")
    s = add("clt", "KS distance of normalized log P_N to the standard normal")
    s.add_argument("--M", "--max-n", dest="M", type=_int, required=True)
    s.add_argument("--sigma2", type=float, help="default: closed form when known")
    s = add("symmetry", "max |log P_N + log P_{q_k-N-1} - log q_k|")
    s.add_argument("--k", type=int, required=True)
    s = add("extremes", "extremes of log P_N over [0, q_k)")
    s.add_argument("--k", type=int, required=True)
    s = add("birkhoff-predict", "Fourier main terms of A_M and B_M^2")
    s.add_argument("--M", "--max-n", dest="M", type=_int, required=True)
    s.add_argument("--summand", choices=("sawtooth", "indicator", "log_sudler", "zero"), default="sawtooth")
    s.add_argument("--a", type=float, default=0.0)
    s.add_argument("--b", type=float, default=0.5)
    s.add_argument("--cutoff", type=_int, help="Fourier cutoff (default: the Fejer H)")
    s.add_argument("--degree", type=int, help="override the declared growth degree")
    s.add_argument("--allow-truncated", action="store_true")
    s = add("bu", "indicator variance B_M^2 / log M over a grid")
    s.add_argument("--length", type=float, default=0.5)
    s.add_argument("--a", type=float, default=0.0)
    s.add_argument("--grid", default="dyadic:10:20")
    s = add("vconst", "the constant V")
    s.add_argument("--tol", type=float, default=1e-10)
    s = add("ae-levy", "squared partial quotients of random alpha against the Levy law")
    s.add_argument("--seeds", default="0:500", help="lo:hi or a comma list")
    s.add_argument("--seed", type=int, help="single seed (overrides --seeds)")
    s.add_argument("--k", type=int, default=10**4)
    s.add_argument("--bits", type=int)
    return p


def _kind(args) -> SummandKind:
    if args.summand == "indicator":
        return SummandKind.indicator(args.a, args.b)
    return SummandKind(args.summand)


def _M_or_grid(args) -> list[int]:
    if args.grid:
        return parse_grid(args.grid)
    if args.M is None:
        raise UsageError("give --M or --grid")
    if args.M < 1:
        raise UsageError("M must be >= 1")
    return [args.M]


def _bits(args, M: int) -> int:
    return args.precision_bits or default_precision(M)


def _kw(args, M: int) -> dict:
    return {"bits": _bits(args, M), "chunk_size": args.chunk_size, "workers": args.workers}


class Result:
    """Payload pieces: a header dict and rows for CSV; JSON merges both."""

    def __init__(self, report_type, header, columns=None, rows=None, json_body=None, precision=None):
        self.report_type = report_type
        self.header = header
        self.columns = columns or []
        self.rows = rows or []
        self.json_body = json_body
        self.precision = precision


def run_cf(args):
    src = parse_alpha(args.alpha)
    if args.k < 1:
        raise UsageError("k must be >= 1")
    rows = []
    quotients = [src.a0]
    it = src.iter_quotients()
    for conv in iter_convergents(src):
        rows.append([conv.k, quotients[conv.k], conv.p, conv.q])
        if conv.k == args.k:
            break
        quotients.append(next(it))
    return Result("cf", {"k": args.k}, ["k", "a", "p", "q"], rows)


def run_sudler(args):
    kind = _kind(args)
    series = prefix_stream(kind, args.alpha, args.M, **_kw(args, args.M))
    if args.binary:
        series.write_binary(args.binary)
    name = "logP" if kind.name == "log_sudler" else "S"
    rows = [[n, v, e] for n, v, e in zip(range(1, args.M + 1), series.values.tolist(), series.err.tolist())]
    return Result("sudler", {"M": args.M, "summand": str(kind)}, ["N", name, "err"], rows,
                  precision=series.precision_bits)


def run_moments(args):
    grid = _M_or_grid(args)
    series = prefix_stream(_kind(args), args.alpha, grid[-1], **_kw(args, grid[-1]))
    cols = ["M", "mean", "variance", "min", "max", "argmin", "argmax"]
    reports = [stats.temporal_moments(series, M) for M in grid]
    rows = [[getattr(r, c) for c in cols] for r in reports]
    body = {"reports": [r.to_dict() for r in reports]}
    return Result("moments", {"grid": grid, "summand": str(series.kind)}, cols, rows, body, series.precision_bits)


def run_dioph(args):
    grid = _M_or_grid(args)
    prefix = stats.diophantine_prefix(args.alpha, grid[-1], **_kw(args, grid[-1]))
    rows = [[M, float(prefix[M - 1])] for M in grid]
    return Result("dioph-sum", {"grid": grid}, ["M", "sum"], rows, precision=_bits(args, grid[-1]))


def run_sigma2(args):
    grid = parse_grid(args.grid)
    est = stats.sigma2_estimate(args.alpha, grid, **_kw(args, grid[-1]))
    try:
        closed = stats.sigma2_closed_form(str(as_source(args.alpha)))
    except Unsupported:
        closed = None
    return Result("sigma2", {"grid": grid, "slope": est.slope, "intercept": est.intercept, "closed_form": closed},
                  ["M", "sum", "ratio"], [list(p) for p in est.per_point], precision=_bits(args, grid[-1]))


def _distribution(report_type, header, report, precision=None):
    rows = [list(q) for q in report.quantiles]
    body = report.to_dict()
    return Result(report_type, {**header, "ks_distance": report.ks_distance, "reference": report.reference,
                                "count": report.count}, ["p", "quantile"], rows, body, precision)


def run_clt(args):
    sigma2 = args.sigma2 if args.sigma2 is not None else stats.sigma2_closed_form(str(as_source(args.alpha)))
    series = prefix_stream(SummandKind.log_sudler(), args.alpha, args.M, **_kw(args, args.M))
    report = stats.clt_report(series, args.M, sigma2)
    return _distribution("clt", {"M": args.M, "sigma2": sigma2}, report, series.precision_bits)


def _k_check(args, fn, cols, report_type):
    r = fn(args.alpha, args.k, chunk_size=args.chunk_size, workers=args.workers, bits=args.precision_bits)
    d = r.to_dict()
    return Result(report_type, {"k": args.k}, cols, [[d[c] for c in cols]], d, _bits(args, d["q_k"]))


def run_symmetry(args):
    return _k_check(args, stats.symmetry_check, ["k", "q_k", "value", "argmax"], "symmetry")


def run_extremes(args):
    cols = ["k", "q_k", "max", "argmax", "min", "argmin", "predicted", "ratio", "error_scale"]
    return _k_check(args, stats.extreme_check, cols, "extremes")


def run_predict(args):
    src = as_source(args.alpha)
    degree = args.degree if args.degree is not None else stats.declared_degree(src)
    cutoff = args.cutoff or max(stats.fejer_cutoff(args.M, degree) - 1, 1)
    models = {
        "sawtooth": lambda: stats.FourierModel.sawtooth(cutoff),
        "indicator": lambda: stats.FourierModel.indicator(args.a, args.b, cutoff),
        "log_sudler": lambda: stats.FourierModel.log_sudler(cutoff),
        "zero": lambda: stats.FourierModel.zero(cutoff),
    }
    pred = stats.predicted_birkhoff_moments(models[args.summand](), src, args.M, degree, args.allow_truncated,
                                            chunk_size=args.chunk_size, workers=args.workers)
    d = pred.to_dict()
    cols = ["M", "H", "mean_main", "variance_main", "truncated"]
    return Result("birkhoff-predict", {"summand": args.summand, "cutoff": cutoff}, cols, [[d[c] for c in cols]], d,
                  default_precision(max(cutoff, args.M)))


def run_bu(args):
    grid = parse_grid(args.grid)
    pts = stats.bu_variance_check(args.alpha, args.length, grid, a=args.a, **_kw(args, grid[-1]))
    cols = ["M", "mean", "variance", "ratio", "predicted_variance", "predicted_ratio"]
    rows = [[getattr(p, c) for c in cols] for p in pts]
    return Result("bu", {"grid": grid, "length": args.length, "a": args.a}, cols, rows,
                  precision=_bits(args, grid[-1]))


def run_vconst(args):
    V = v_constant(args.tol)
    full = full_period_integral(args.tol)
    return Result("vconst", {"tol": args.tol}, ["V", "full_period"], [[V, full]], {"V": V, "full_period": full})


def run_ae(args):
    seeds = [args.seed] if args.seed is not None else parse_seeds(args.seeds)
    report = stats.ae_experiment(seeds, args.k, args.bits, workers=args.workers)
    return _distribution("ae-levy", {"k": args.k, "seeds": [seeds[0], seeds[-1], len(seeds)]}, report,
                         report.extra["bits"])


COMMANDS = {
    "cf": run_cf, "sudler": run_sudler, "moments": run_moments, "dioph-sum": run_dioph, "sigma2": run_sigma2,
    "clt": run_clt, "symmetry": run_symmetry, "extremes": run_extremes, "birkhoff-predict": run_predict,
    "bu": run_bu, "vconst": run_vconst, "ae-levy": run_ae,
}
NO_ALPHA = {"vconst", "ae-levy"}


def render(result: Result, args) -> str:
    if args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(result.columns)
        w.writerows(result.rows)
        return buf.getvalue()
    payload = {"report_type": result.report_type}
    if args.command not in NO_ALPHA:
        payload["alpha_spec"] = args.alpha
    payload.update(result.header)
    if result.json_body is not None:
        payload.update({k: v for k, v in result.json_body.items() if k not in payload})
    else:
        payload["columns"] = result.columns
        payload["rows"] = result.rows
    payload["version"] = __version__
    payload["precision_bits"] = result.precision
    return json.dumps(stats._plain(payload), indent=1) + "\n"


def _check_writable(path):
    if path is None:
        return
    d = os.path.dirname(os.path.abspath(path))
    if not os.path.isdir(d) or not os.access(d, os.W_OK):
        raise UsageError(f"cannot write to {path}")


def _write_manifest(args, started, precision, incidents, status):
    if not args.out:
        return
    config = {k: v for k, v in vars(args).items()}
    manifest = {
        "version": __version__, "output": os.path.basename(args.out), "config": config,
        "wall_time_s": round(time.time() - started, 6), "precision_bits": precision,
        "guard_incidents": incidents, "status": status,
    }
    with open(args.out + ".manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=1)
        fh.write("\n")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    started = time.time()
    try:
        _check_writable(args.out)
        _check_writable(getattr(args, "binary", None))
        if args.command not in NO_ALPHA:
            parse_alpha(args.alpha)
        result = COMMANDS[args.command](args)
    except (UsageError, *USAGE_ERRORS) as exc:
        sys.stderr.write(f"sudlerlab: error: {exc}\n")
        if not isinstance(exc, SpecParseError):  # spec errors already carry the grammar
            sys.stderr.write(GRAMMAR + "\n")
        return 1
    except NUMERIC_ERRORS as exc:
        sys.stderr.write(f"sudlerlab: numeric failure: {exc}\n")
        _write_manifest(args, started, args.precision_bits, int(isinstance(exc, SingularitySuspect)), "failed")
        return 2
    text = render(result, args)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    _write_manifest(args, started, result.precision, 0, "ok")
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
