"""Command-line front end.

Every command writes one result document: the command name, the seed, the
fully resolved parameters and a list of flat records. ``--format json``
writes it as a JSON object. ``--format csv`` writes ``# key: value`` header
lines (values JSON-encoded) followed by a CSV table of the records. Cells are
JSON literals, so both encodings carry identical values.

Exit codes: 0 success, 1 usage error, 2 numerical failure, 3 validation failure.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import math
import sys

import numpy as np

from . import cavity, feasibility, optimizer
from .errors import DegenerateFilterError, ParameterDomainError, QuadratureError, RowError, TruncationError
from .units import angular_to_mhz, mhz_to_angular, round_distance
from .validation import run_validation

EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL, EXIT_VALIDATION = 0, 1, 2, 3
DEFAULT_LEVELS = (2.0, 2.05, 2.1, 2.15)
BOUNDARY_ETAS = (1.0, 0.9, 0.8, 0.756, 0.7, 0.6, 0.5, 0.395, 0.3, 0.2, 0.15, 0.1, 0.092)
CONTOUR_ETAS = (1.0, 0.95, 0.9, 0.85, 0.8, 0.75, 0.7, 0.65, 0.6, 0.55, 0.5, 0.45, 0.4, 0.37)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _float_list(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


# ---------------------------------------------------------------- encoding


def _cell(value):
    if isinstance(value, np.generic):
        value = value.item()
    if value is None:
        return ""
    if isinstance(value, str):
        # quote strings that would otherwise read back as numbers or JSON
        return json.dumps(value) if _looks_like_json(value) else value
    return json.dumps(value)


def _looks_like_json(text):
    try:
        json.loads(text)
    except json.JSONDecodeError:
        return text == ""
    return True


def _uncell(text):
    if text == "":
        return None
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def _plain(obj):
    """numpy scalars and tuples to JSON-native types."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def encode(document, fmt):
    document = _plain(document)
    if fmt == "json":
        return json.dumps(document, indent=2, sort_keys=False) + "\n"
    out = io.StringIO()
    for key in ("command", "seed", "parameters"):
        out.write(f"# {key}: {json.dumps(document[key])}\n")
    for key, value in document.items():
        if key not in ("command", "seed", "parameters", "records"):
            out.write(f"# {key}: {json.dumps(value)}\n")
    records = document["records"]
    columns = []
    for rec in records:
        columns += [k for k in rec if k not in columns]
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(columns)
    for rec in records:
        writer.writerow([_cell(rec.get(k)) for k in columns])
    return out.getvalue()


def decode(text):
    """Inverse of :func:`encode` for either format."""
    stripped = text.lstrip()
    if stripped.startswith("{"):
        return json.loads(text)
    document = {}
    lines = text.splitlines()
    body = []
    for line in lines:
        if line.startswith("# "):
            key, _, value = line[2:].partition(": ")
            document[key] = json.loads(value)
        else:
            body.append(line)
    rows = list(csv.reader(body))
    columns, data = rows[0], rows[1:]
    document["records"] = [dict(zip(columns, map(_uncell, row))) for row in data]
    return document


def read_result(path):
    with open(path) as fh:
        return decode(fh.read())


# ---------------------------------------------------------------- helpers


def _resolve_row(args):
    rows = feasibility.load_rows(args.config)
    if args.row not in rows:
        raise UsageError(f"unknown row {args.row!r}; known rows: {', '.join(rows)}")
    return rows[args.row]


def _rows(args):
    rows = feasibility.load_rows(args.config)
    if args.row is None:
        if args.config is None:
            return feasibility.default_rows()
        return list(rows.values())
    return [_resolve_row(args)]


def _pins(args):
    pins = {}
    for name in ("alpha", "nu", "gamma", "b"):
        value = getattr(args, name, None)
        if value is not None:
            pins[name] = value
    return pins


def _opt_record(result, problem):
    rec = {"eta": problem.eta, "T": problem.T, "coherence": problem.coherence}
    rec.update({k: result.params[k] for k in optimizer.PARAMETERS})
    rec.update({
        "chsh": result.value,
        "mean_photons": result.params["alpha"] ** 2,
        "violation": bool(result.value > 2.0 + optimizer.VIOLATION_FLOOR),
        "converged": result.converged,
    })
    return rec


def _template(args):
    if args.family == "ideal":
        return optimizer.ideal_problem(1.0, 1.0, seed=args.seed, n_starts=args.n_starts)
    return optimizer.realistic_problem(1.0, 1.0, visibility=args.V, alpha=args.alpha,
                                       seed=args.seed, n_starts=args.n_starts)


# ---------------------------------------------------------------- commands


def cmd_ideal_opt(args):
    problem = optimizer.ideal_problem(args.eta, args.T, fixed=_pins(args), seed=args.seed, n_starts=args.n_starts)
    result = optimizer.optimize_chsh(problem)
    return [_opt_record(result, problem)], {}


def cmd_realistic_opt(args):
    V = args.V
    if args.row is not None:
        row = _resolve_row(args)
        V = feasibility.row_record(row).V
        args.alpha = row.alpha_target
        args.V = V
    fixed = _pins(args)
    problem = optimizer.OptimizationProblem(eta=args.eta, T=args.T, coherence=V, fixed=fixed,
                                            seed=args.seed, n_starts=args.n_starts)
    result = optimizer.optimize_chsh(problem)
    return [_opt_record(result, problem)], {}


def _curve_records(curve, family):
    records = []
    for s in curve.samples:
        records.append({
            "family": family,
            "level": s.level,
            "eta": s.eta,
            "T": s.transmission,
            "chsh": s.value,
            "eberhard_T": optimizer.eberhard_reference(s.eta) if s.eta > 0 else None,
        })
    return records


def cmd_boundary(args):
    etas = args.etas or list(BOUNDARY_ETAS)
    curve = optimizer.contour(2.0, etas, _template(args), width=args.width, workers=args.workers)
    return _curve_records(curve, args.family), {"etas": etas}


def cmd_contour(args):
    etas = args.etas or list(CONTOUR_ETAS)
    levels = args.levels or list(DEFAULT_LEVELS)
    records = []
    for level in levels:
        curve = optimizer.contour(level, etas, _template(args), width=args.width, workers=args.workers)
        records += _curve_records(curve, args.family)
    return records, {"etas": etas, "levels": levels}


def cmd_visibility(args):
    records = feasibility.table2_pipeline(_rows(args), truncation=not args.no_truncation, workers=args.workers)
    return [r.as_dict() for r in records], {}


def cmd_pe_scan(args):
    grid = np.logspace(math.log10(args.gk_min), math.log10(args.gk_max), args.points)
    records = []
    for g_over_delta in args.gOverDelta:
        for x, pe in cavity.pe_scan(args.panel, g_over_delta, grid, alpha_tilde=args.alpha):
            records.append({"panel": args.panel, "gOverDelta": g_over_delta, "g_over_kappa": x,
                            "max_pe": pe, "log10_max_pe": math.log10(pe) if pe > 0 else None})
    return records, {"g_over_kappa": grid.tolist()}


def cmd_gamma_search(args):
    records = []
    for row in _rows(args):
        try:
            res = cavity.gamma_01_search(row.params(), row.alpha_target, p_target=args.p_target)
        except (QuadratureError, DegenerateFilterError) as exc:
            raise RowError(row.name, exc) from exc
        records.append({
            "row": row.name,
            "p_target": args.p_target,
            "found": res.found,
            "gamma01_MHz": None if res.gamma is None else angular_to_mhz(res.gamma),
            "max_pe": res.max_pe,
            "reason": res.reason,
        })
    return records, {}


def cmd_distance(args):
    budget = feasibility.TimingBudget(dt_at_m=args.dt_at_m, dt_at_c=args.dt_at_c, dt_ph_c=args.dt_ph_c)
    gamma = mhz_to_angular(args.gammaL_MHz)
    d = feasibility.min_distance(budget, gamma)
    record = {
        "gammaL_MHz": args.gammaL_MHz,
        "pulse_duration_us": feasibility.pulse_duration(gamma),
        "atomic_time_us": budget.atomic_time,
        "gammaLm_MHz": angular_to_mhz(budget.gamma_Lm),
        "d_min_m": d,
        "d_min_rounded_m": round_distance(d),
    }
    return [record], {}


def cmd_validate(args):
    report = run_validation(n_max=args.n_max, draws=args.draws, seed=args.seed)
    records = [
        {"check": c["check"], "max_deviation": c["max_deviation"], "tolerance": c["tolerance"],
         "passed": c["passed"], "worst_case": json.dumps(c["worst_case"], sort_keys=True)}
        for c in report["checks"]
    ]
    return records, {"passed": report["passed"]}


# ---------------------------------------------------------------- parser


def build_parser():
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="multistart / draw seed")
    common.add_argument("--format", choices=("csv", "json"), default="json")
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("--config", help="INI file of named cavity rows (default: packaged rows)")

    channel = _Parser(add_help=False)
    channel.add_argument("--eta", type=float, default=1.0, help="detector efficiency")
    channel.add_argument("--T", type=float, default=1.0, help="line power transmittance")
    channel.add_argument("--n-starts", type=int, default=optimizer.DEFAULT_STARTS)

    pins = _Parser(add_help=False)
    for name in ("nu", "gamma", "b"):
        pins.add_argument(f"--{name}", type=float, help=f"pin {name}")

    curves = _Parser(add_help=False)
    curves.add_argument("--V", type=float, default=0.727, help="coherence of the realistic family")
    curves.add_argument("--alpha", type=float, default=2.1, help="field magnitude of the realistic family")
    curves.add_argument("--etas", type=_float_list, help="comma-separated efficiency grid")
    curves.add_argument("--width", type=float, default=optimizer.BISECTION_WIDTH)
    curves.add_argument("--n-starts", type=int, default=16)
    curves.add_argument("--workers", type=int, default=None)

    rowsel = _Parser(add_help=False)
    rowsel.add_argument("--row", help="row name from the config file (default: all rows)")

    parser = _Parser(prog="hybridbell", description="Hybrid atom-photon Bell test calculator.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("ideal-opt", parents=[common, channel, pins], help="optimise the ideal state")
    p.add_argument("--alpha", type=float, help="pin the field magnitude")
    p.set_defaults(func=cmd_ideal_opt)

    p = sub.add_parser("realistic-opt", parents=[common, channel, pins, rowsel],
                       help="optimise at fixed field magnitude and visibility")
    p.add_argument("--alpha", type=float, default=2.1)
    p.add_argument("--V", type=float, default=0.727, help="production visibility (overridden by --row)")
    p.set_defaults(func=cmd_realistic_opt)

    p = sub.add_parser("boundary", parents=[common, curves], help="critical line T*(eta)")
    p.add_argument("--family", choices=("ideal", "realistic"), default="ideal")
    p.set_defaults(func=cmd_boundary)

    p = sub.add_parser("contour", parents=[common, curves], help="level lines of the optimised CHSH value")
    p.add_argument("--family", choices=("ideal", "realistic"), default="realistic")
    p.add_argument("--levels", type=_float_list)
    p.set_defaults(func=cmd_contour)

    p = sub.add_parser("visibility", parents=[common, rowsel], help="source table per row")
    p.add_argument("--no-truncation", action="store_true", help="skip the finite-window correction")
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(func=cmd_visibility)

    p = sub.add_parser("pe-scan", parents=[common], help="max excitation probability versus g/kappa")
    p.add_argument("--panel", choices=("left", "right"), default="right")
    p.add_argument("--gOverDelta", type=_float_list, default=[0.01, 0.001])
    p.add_argument("--gk-min", type=float, default=0.1)
    p.add_argument("--gk-max", type=float, default=10.0)
    p.add_argument("--points", type=int, default=21)
    p.add_argument("--alpha", type=float, default=2.1, help="output field magnitude")
    p.set_defaults(func=cmd_pe_scan)

    p = sub.add_parser("gamma-search", parents=[common, rowsel], help="bandwidth at the excitation target")
    p.add_argument("--p-target", type=float, default=0.1)
    p.set_defaults(func=cmd_gamma_search)

    p = sub.add_parser("distance", parents=[common], help="minimum propagation distance")
    p.add_argument("--gammaL-MHz", type=float, required=True, dest="gammaL_MHz")
    p.add_argument("--dt-at-m", type=float, default=1.0, help="atomic measurement time (us)")
    p.add_argument("--dt-at-c", type=float, default=0.0, help="atomic setting-choice time (us)")
    p.add_argument("--dt-ph-c", type=float, default=0.0, help="photonic setting-choice time (us)")
    p.set_defaults(func=cmd_distance)

    p = sub.add_parser("validate", parents=[common], help="closed form versus number-basis oracle")
    p.add_argument("--n-max", type=int, default=64)
    p.add_argument("--draws", type=int, default=100)
    p.set_defaults(func=cmd_validate)
    return parser


_NOT_PARAMETERS = {"func", "out", "format", "command", "seed"}


def run(argv=None):
    """Parse, execute and write. Returns ``(exit_code, document or None)``."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # --help (0) or a usage error (1)
        return (exc.code if isinstance(exc.code, int) else EXIT_USAGE), None
    try:
        records, extra = args.func(args)
    except (UsageError, configparser.Error, OSError) as exc:
        print(f"hybridbell: error: {exc}", file=sys.stderr)
        return EXIT_USAGE, None
    except (ParameterDomainError, ValueError) as exc:
        if isinstance(exc, (DegenerateFilterError, TruncationError)):
            print(f"hybridbell: numerical failure: {exc}", file=sys.stderr)
            return EXIT_NUMERICAL, None
        print(f"hybridbell: error: {exc}", file=sys.stderr)
        return EXIT_USAGE, None
    except (QuadratureError, RowError, ArithmeticError) as exc:
        if isinstance(exc, RowError) and type(exc.cause) is ParameterDomainError:
            print(f"hybridbell: error: {exc}", file=sys.stderr)
            return EXIT_USAGE, None
        print(f"hybridbell: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL, None

    parameters = {k: v for k, v in sorted(vars(args).items()) if k not in _NOT_PARAMETERS}
    document = {"command": args.command, "seed": args.seed, "parameters": parameters}
    document.update(extra)
    document["records"] = records
    text = encode(document, args.format)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    code = EXIT_OK
    if args.command == "validate" and not extra["passed"]:
        code = EXIT_VALIDATION
    return code, _plain(document)


def main(argv=None):
    code, _ = run(argv)
    return code


if __name__ == "__main__":
    sys.exit(main())
