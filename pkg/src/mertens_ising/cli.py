"""Command-line entry point: ``mertens-ising <subcommand> ...``.

Exit codes: 0 success, 1 bad usage, 2 domain/input error, 3 failed internal
cross-check (method disagreement, violated theorem bound).
"""
from __future__ import annotations

import argparse
import contextlib
import csv
import json
import logging
import re
import sys
from pathlib import Path

from . import __version__, _accel
from ._fmt import DEFAULT_PRECISION, format_number
from .bounds import (
    BOUND_NAMES,
    CLASSICAL_DOMAIN,
    THEOREM_BOUNDS,
    BoundDomainError,
    bound_value,
    fluctuation_coefficients,
    make_bound,
)
from .checkpoint import CheckpointIntegrityError, checkpoint_read, checkpoint_write
from .ensemble_mc import (
    VIOLATION_COLUMNS,
    RandomSequenceModel,
    ensemble_moments,
    mertens_trajectory_compare,
    violation_rate,
    violation_row,
)
from .mobius_core import DEFAULT_SEGMENT, MertensTable, mertens_extend, mertens_prefix, mertens_recurrence
from .transfer_matrix import (
    ModelParams,
    build_matrix,
    eigenvalues,
    partition_bruteforce,
    partition_transfer,
)
from .verify_harness import CSV_COLUMNS, TheoremViolationError, crossover, parse_bound_spec, sweep

log = logging.getLogger("mertens_ising")

EXIT_USAGE = 1
EXIT_DOMAIN = 2
EXIT_CROSSCHECK = 3


class CrossCheckError(RuntimeError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


_INT_RE = re.compile(r"^\s*(?:(\d+)\s*\*\s*)?(\d+)\s*\^\s*(\d+)\s*$")


def parse_count(text: str) -> int:
    """Positive integer; also accepts ``10^6``, ``2*10^6``, ``1e6`` and ``1_000_000``."""
    m = _INT_RE.match(text)
    if m:
        mult = int(m.group(1) or 1)
        value = mult * int(m.group(2)) ** int(m.group(3))
    else:
        try:
            value = int(text.replace("_", ""))
        except ValueError:
            try:
                f = float(text)
            except ValueError:
                raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
            if not f.is_integer():
                raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
            value = int(f)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1: {text!r}")
    return value


def parse_threads(text: str) -> int | None:
    if text == "max":
        return _accel.max_threads()
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError("threads must be a positive integer or 'max'") from None
    if value < 1:
        raise argparse.ArgumentTypeError("threads must be >= 1")
    return value


# ---------------------------------------------------------------- subcommands


def cmd_mertens(args, out) -> int:
    n = args.n
    results = {}
    if args.method in ("sieve", "both"):
        table = None
        if args.checkpoint and Path(args.checkpoint).exists():
            ck = checkpoint_read(args.checkpoint)
            if ck.n == n:
                results["sieve"] = ck.m
            elif ck.n < n:
                log.info("resuming from checkpoint n=%d", ck.n)
                table = mertens_extend(ck, n, args.segment_size, args.threads)
        if "sieve" not in results:
            if table is None:
                method = "segmented-sieve" if args.checkpoint else "linear-sieve"
                table = mertens_prefix(n, method=method, segment_size=args.segment_size, threads=args.threads)
            results["sieve"] = table.at(n)
            if args.checkpoint:
                _maybe_checkpoint(table, args.checkpoint)
    if args.method in ("recurrence", "both"):
        results["recurrence"] = mertens_recurrence(n)
    values = set(results.values())
    if len(values) != 1:
        raise CrossCheckError(f"methods disagree for M({n}): {results}")
    out.write(f"{values.pop()}\n")
    return 0


def _maybe_checkpoint(table: MertensTable, path: str) -> None:
    p = Path(path)
    if p.exists():
        try:
            if checkpoint_read(p).n > table.end:
                return
        except CheckpointIntegrityError:
            pass
    checkpoint_write(table, p)


def cmd_partition(args, out) -> int:
    if args.beta is not None:
        params = ModelParams.from_beta(args.beta, x=args.x)
    else:
        params = ModelParams(args.x, args.y)
    q = partition_transfer(args.n, params)
    p = args.precision
    if q.log_domain:
        out.write("Q=overflow (log-domain result)\n")
    else:
        out.write(f"Q={format_number(q.value, p)}\n")
    out.write(f"lnQ={format_number(q.log_value, p)}\n")
    if args.eigen:
        spec = eigenvalues(build_matrix(params))
        vals = ",".join(format_number(v, p) if not spec.is_complex else str(v) for v in spec)
        out.write(f"eigenvalues={vals}{' (complex pair)' if spec.is_complex else ''}\n")
    if args.check_bruteforce:
        brute = partition_bruteforce(args.n, params)
        rel = abs(q.value - brute) / brute
        ok = rel <= 1e-9
        out.write(f"bruteforce={format_number(brute, p)}\n")
        out.write(f"check={'OK' if ok else 'FAILED'} rel_err={rel:.3g}\n")
        if not ok:
            raise CrossCheckError(f"transfer matrix {q.value!r} vs enumeration {brute!r}")
    return 0


def _bound_defaults(args) -> dict:
    return {"beta": args.beta, "alpha": args.alpha, "p": args.p}


def cmd_bounds(args, out) -> int:
    p = args.precision
    if args.list:
        for name in BOUND_NAMES:
            probe = make_bound(name)
            kind = "theorem" if name in THEOREM_BOUNDS else "conditional"
            params = ",".join(probe.params) or "-"
            out.write(f"{name}\tparams={params}\tvalid_from={CLASSICAL_DOMAIN.get(name, 1)}\t{kind}\n")
        return 0
    if args.n is None:
        raise ValueError("bounds needs n (or --list)")
    specs = list(BOUND_NAMES) if args.all or not args.bound else args.bound
    defs = [parse_bound_spec(s, **_bound_defaults(args)) for s in specs]
    m = mertens_prefix(args.n).last if args.compare else None

    if len(defs) == 1 and not args.compare and not args.all:
        out.write(format_number(bound_value(defs[0], args.n), p) + "\n")
        return 0

    rows = []
    for d in defs:
        try:
            value = bound_value(d, args.n)
        except BoundDomainError:
            rows.append({"n": args.n, "M": m if m is not None else "", "bound_name": d.name,
                         "params": d.params_text, "value": "domain-error", "ratio": "", "satisfied": ""})
            continue
        ratio = abs(m) / value if m is not None else None
        rows.append({
            "n": args.n,
            "M": m if m is not None else "",
            "bound_name": d.name,
            "params": d.params_text,
            "value": format_number(value, p),
            "ratio": format_number(ratio, p) if ratio is not None else "",
            "satisfied": ("true" if abs(m) <= value else "false") if m is not None else "",
        })
    _write_rows(out, rows, CSV_COLUMNS, args.format)
    return 0


def _write_rows(out, rows, columns, fmt) -> None:
    if fmt == "json":
        json.dump(rows, out, indent=2)
        out.write("\n")
        return
    writer = csv.DictWriter(out, fieldnames=columns, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)


def cmd_sweep(args, out) -> int:
    specs = args.bound or list(BOUND_NAMES)
    defs = [parse_bound_spec(s, **_bound_defaults(args)) for s in specs]
    report = sweep(args.limit, args.grid, defs, threads=args.threads)
    if args.format == "json":
        report.write_json(out, args.precision)
    elif args.format == "summary":
        out.write("\n".join(report.summary_lines(args.precision)) + "\n")
    else:
        report.write_csv(out, args.precision)
    if args.gnuplot_dir:
        report.write_gnuplot(args.gnuplot_dir, args.precision)
    for line in report.summary_lines(args.precision):
        log.info("%s", line)
    report.check_theorems()
    return 0


def _model(args, n: int) -> RandomSequenceModel:
    if args.model == "canonical":
        return RandomSequenceModel.canonical(args.beta if args.beta is not None else 0.0, n, args.seed)
    if args.beta not in (None, 0.0):
        raise ValueError("--beta applies only to --model canonical")
    return RandomSequenceModel.uniform3(n, args.seed)


def cmd_simulate(args, out) -> int:
    model = _model(args, args.n)
    specs = args.bound or ["rw_cheb", "rw_clt"]
    rows = []
    for spec in specs:
        d = parse_bound_spec(spec, alpha=args.alpha, p=args.p)
        res = violation_rate(model, d, args.trials, threads=args.threads)
        row = violation_row(model, d, res)
        row["beta"] = format_number(row["beta"], args.precision)
        row["rate"] = format_number(row["rate"], args.precision)
        row["ci"] = format_number(row["ci"], args.precision)
        rows.append(row)
    _write_rows(out, rows, VIOLATION_COLUMNS, args.format)
    return 0


def cmd_moments(args, out) -> int:
    model = _model(args, args.n)
    stats = ensemble_moments(model, args.samples, threads=args.threads)
    a, b = fluctuation_coefficients(model.beta)
    p = args.precision
    row = {
        "model": model.kind,
        "n": model.n,
        "beta": format_number(model.beta, p),
        "samples": stats.samples,
        "mean": format_number(stats.mean, p),
        "variance": format_number(stats.variance, p),
        "std_error_mean": format_number(stats.std_error_mean, p),
        "variance_std_error": format_number(stats.variance_std_error, p),
        "expected_mean": format_number(a * model.n, p),
        "expected_variance": format_number(b * model.n, p),
    }
    _write_rows(out, [row], list(row), args.format)
    return 0


def cmd_trajectory(args, out) -> int:
    model = _model(args, args.limit)
    report = mertens_trajectory_compare(args.limit, model, args.trials, args.alpha, threads=args.threads)
    p = args.precision
    rows = [{k: format_number(v, p) for k, v in r.items()} for r in report.rows()]
    _write_rows(out, rows, ["i", "M", "actual_scaled", "envelope", "envelope_scaled"], args.format)
    if args.format != "json":
        out.write(f"# fraction_below={format_number(report.fraction_below, p)}\n")
    return 0


def cmd_crossover(args, out) -> int:
    a = parse_bound_spec(args.a, **_bound_defaults(args))
    b = parse_bound_spec(args.b, **_bound_defaults(args))
    res = crossover(a, b, args.lo, args.hi)
    if res.reason:
        out.write(f"# {res.reason}\n")
    for n in res.crossings:
        out.write(f"{n}\n")
    return 0


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threads", type=parse_threads, default=None,
                        help="worker cap (integer or 'max'); falls back to $MERTENS_THREADS")
    common.add_argument("--precision", type=int, default=DEFAULT_PRECISION, help="significant digits for reals")
    common.add_argument("-o", "--output", default=None, help="write results here instead of stdout")
    common.add_argument("-q", "--quiet", action="store_true", help="do not log the config line")

    bound_params = argparse.ArgumentParser(add_help=False)
    bound_params.add_argument("--beta", type=float, default=None)
    bound_params.add_argument("--alpha", type=float, default=None)
    bound_params.add_argument("--p", type=float, default=None)

    parser = _Parser(prog="mertens-ising", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("mertens", parents=[common], help="compute M(n)")
    p.add_argument("n", type=parse_count)
    p.add_argument("--method", choices=("sieve", "recurrence", "both"), default="sieve")
    p.add_argument("--checkpoint", default=None, help="resume from / save to this checkpoint file")
    p.add_argument("--segment-size", type=parse_count, default=DEFAULT_SEGMENT)
    p.set_defaults(func=cmd_mertens)

    p = sub.add_parser("partition", parents=[common], help="partition function Q_n of the 3-state chain")
    p.add_argument("n", type=parse_count)
    p.add_argument("--x", type=float, default=1.0, help="coupling weight exp(J/2kT)")
    p.add_argument("--y", type=float, default=1.0, help="field weight exp(xi h/kT)")
    p.add_argument("--beta", type=float, default=None, help="set y = exp(beta)")
    p.add_argument("--eigen", action="store_true", help="also print transfer-matrix eigenvalues")
    p.add_argument("--check-bruteforce", action="store_true", help="compare with full enumeration (n <= 14)")
    p.set_defaults(func=cmd_partition)

    p = sub.add_parser("bounds", parents=[common, bound_params], help="evaluate upper bounds at n")
    p.add_argument("n", type=parse_count, nargs="?")
    p.add_argument("--list", action="store_true", help="list available bounds")
    p.add_argument("--bound", action="append", metavar="SPEC", help="name or name:key=val,...")
    p.add_argument("--all", action="store_true", help="evaluate every bound")
    p.add_argument("--compare", action="store_true", help="also compute M(n) and check each bound")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("sweep", parents=[common, bound_params], help="check bounds against M(n) on a grid")
    p.add_argument("limit", type=parse_count)
    p.add_argument("--grid", default="powers", help="all | powers | geometric:R | arithmetic:S")
    p.add_argument("--bound", action="append", metavar="SPEC")
    p.add_argument("--gnuplot-dir", default=None)
    p.set_defaults(func=cmd_sweep)

    def add_model(p):
        p.add_argument("--model", choices=("uniform3", "canonical"), default="uniform3")
        p.add_argument("--beta", type=float, default=None)
        p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("simulate", parents=[common], help="empirical violation rates of probabilistic bounds")
    add_model(p)
    p.add_argument("--n", type=parse_count, required=True)
    p.add_argument("--trials", type=parse_count, default=10_000)
    p.add_argument("--bound", action="append", metavar="SPEC")
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--p", type=float, default=None)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("moments", parents=[common], help="Monte Carlo mean and variance of U = sum s_i")
    add_model(p)
    p.add_argument("--n", type=parse_count, required=True)
    p.add_argument("--samples", type=parse_count, default=100_000)
    p.set_defaults(func=cmd_moments)

    p = sub.add_parser("trajectory", parents=[common], help="|M(i)| against random-sequence envelopes")
    add_model(p)
    p.add_argument("--limit", type=parse_count, required=True)
    p.add_argument("--trials", type=parse_count, default=1000)
    p.add_argument("--alpha", type=float, default=0.05)
    p.set_defaults(func=cmd_trajectory)

    p = sub.add_parser("crossover", parents=[common, bound_params], help="where two bounds cross")
    p.add_argument("a", help="bound spec")
    p.add_argument("b", help="bound spec")
    p.add_argument("--lo", type=parse_count, default=2)
    p.add_argument("--hi", type=parse_count, default=10**6)
    p.set_defaults(func=cmd_crossover)

    for name, p in sub.choices.items():
        choices = ("csv", "json", "summary") if name == "sweep" else ("csv", "json")
        p.add_argument("--format", choices=choices, default="csv")
    return parser


def _config_line(args) -> str:
    cfg = {k: v for k, v in vars(args).items() if k not in ("func",)}
    cfg["backend"] = _accel.backend_name()
    return json.dumps(cfg, sort_keys=True, default=str)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    # own handler so the config line appears even if the root logger is configured elsewhere
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("# %(message)s"))
    log.addHandler(handler)
    log.setLevel(logging.WARNING if args.quiet else logging.INFO)
    log.propagate = False

    try:
        args.threads = _accel.set_threads(args.threads)
        log.info("config %s", _config_line(args))
        with contextlib.ExitStack() as stack:
            if args.output:
                out = stack.enter_context(open(args.output, "w", encoding="utf-8", newline=""))
            else:
                out = sys.stdout
            return args.func(args, out)
    except (CrossCheckError, TheoremViolationError) as exc:
        print(f"cross-check failed: {exc}", file=sys.stderr)
        return EXIT_CROSSCHECK
    except (ValueError, OverflowError, FileNotFoundError, CheckpointIntegrityError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    finally:
        log.removeHandler(handler)


if __name__ == "__main__":
    sys.exit(main())
