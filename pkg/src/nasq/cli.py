"""``nasq`` command line.

Subcommands print one JSON document to stdout.  Exit codes:

    0  success
    2  input file missing or malformed (the message names the field)
    3  unsupported dimensions
    4  unsupported measure/mode combination
    5  output path not writable
    6  oracle failure or unknown oracle suite
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import oracles
from .as_geometry import DEFAULT_TOL, as_verdict, qudit_dim
from .errors import BadDimension, ConvergenceFailure, NasError, Unsupported
from .nas_distance import KIND_NAMES, Method, OptimizerConfig, nas_closed_form, nas_numeric, nas_werner
from .nas_distance import BURES, RELATIVE_ENTROPY
from .nas_witness import GridConfig, nas_witness_measure, nas_witness_werner
from .states import StateClass, StateFormatError, WernerParams, classify_werner, load_state

EXIT_PARSE = 2
EXIT_DIMS = 3
EXIT_COMBINATION = 4
EXIT_UNWRITABLE = 5
EXIT_ORACLE = 6

MAX_D = 4
CSV_HEADER = ["p", "n_relent", "n_bures", "n_witness", "classification"]


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _emit(obj) -> None:
    sys.stdout.write(json.dumps(obj, indent=2, default=_json_default) + "\n")


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not serialisable: {type(o).__name__}")


def _load(path):
    try:
        return load_state(path)
    except FileNotFoundError as exc:
        raise CliError(EXIT_PARSE, f"input file not found: {path}") from exc
    except StateFormatError as exc:
        raise CliError(EXIT_PARSE, f"{exc} (field: {exc.field})") from exc
    except OSError as exc:
        raise CliError(EXIT_PARSE, f"cannot read {path}: {exc}") from exc


def _check_2xd(rho):
    try:
        d = qudit_dim(rho.dims)
    except (Unsupported, BadDimension) as exc:
        raise CliError(EXIT_DIMS, f"field 'dims': {exc}") from exc
    if d > MAX_D:
        raise CliError(EXIT_DIMS, f"field 'dims': d={d} exceeds the supported maximum {MAX_D}")
    return d


def _flags(args, names) -> dict:
    return {n: getattr(args, n) for n in names}


# --------------------------------------------------------------------------
# classify

def cmd_classify(args) -> int:
    rho = _load(args.input)
    d = _check_2xd(rho)
    verdict = as_verdict(rho, args.tol)
    pt_min = rho.pt_min_eigenvalue()
    if verdict.is_as:
        label = StateClass.BOUNDARY if verdict.on_boundary else StateClass.AS
    elif pt_min < -args.tol:
        label = StateClass.ENTANGLED
    else:
        label = StateClass.NON_AS_SEPARABLE
    _emit(
        {
            "verdict": label.value,
            "criterion_value": verdict.criterion_value,
            "pt_min_eigenvalue": pt_min,
            "dims": list(rho.dims),
            # PPT implies separability only for d <= 3
            "separability_exact": d <= 3,
            "flags": _flags(args, ["input", "tol"]),
        }
    )
    return 0


# --------------------------------------------------------------------------
# measure

def _distance_measure(rho, args):
    kind = KIND_NAMES[args.measure]
    _check_2xd(rho)
    cfg = OptimizerConfig(tol=args.tol, seed=args.seed)
    if args.mode == "closed":
        res = nas_closed_form(rho, kind)
    else:
        res = nas_numeric(rho, kind, cfg, args.mode)
    cert = {"nearest_as_spectrum": res.nearest_spectrum.tolist()}
    return res.value, res.method.value, cert, res.gap_estimate


def _witness_measure(rho, args):
    if args.mode == "aligned":
        raise Unsupported("the witness measure has no aligned mode")
    method = "analytic" if args.mode == "closed" else "grid"
    m, n = rho.dims
    if method == "grid" and rho.dims != (2, 2):
        raise CliError(EXIT_DIMS, f"field 'dims': witness search supports 2x2, got {m}x{n}")
    if method == "analytic" and m != n:
        raise CliError(EXIT_DIMS, f"field 'dims': analytic witness path needs d x d, got {m}x{n}")
    res = nas_witness_measure(rho, GridConfig(tol=min(args.tol, 1e-10)), method=method)
    cert = {"unitary_params": None if res.params is None else res.params.as_array().tolist()}
    if res.placement is not None:
        cert["eigenvalue_placement"] = list(res.placement)
    return res.value, method, cert, None


def cmd_measure(args) -> int:
    rho = _load(args.input)
    start = time.perf_counter()
    try:
        if args.measure == "witness":
            value, method, cert, gap = _witness_measure(rho, args)
        else:
            value, method, cert, gap = _distance_measure(rho, args)
    except Unsupported as exc:
        raise CliError(EXIT_COMBINATION, str(exc)) from exc
    out = {
        "measure": args.measure,
        "mode": args.mode,
        "value": value,
        "method": method,
        "certificate": cert,
        "wall_time_s": time.perf_counter() - start,
        "flags": _flags(args, ["input", "measure", "mode", "tol", "seed"]),
    }
    if gap is not None:
        out["gap_estimate"] = gap
    _emit(out)
    return 0


# --------------------------------------------------------------------------
# sweep-werner

def parse_grid(text: str) -> tuple[float, float, int]:
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("grid must be start:stop:steps")
    try:
        start, stop, steps = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}: {exc}") from exc
    if steps < 1 or not (0.0 <= start <= 1.0 and 0.0 <= stop <= 1.0):
        raise argparse.ArgumentTypeError("grid needs 0 <= start, stop <= 1 and steps >= 1")
    return start, stop, steps


def sweep_row(p: float, gamma: float, phi: float, mode: str = "closed") -> list:
    params = WernerParams(p, gamma, phi)
    if mode == "closed":
        rel = nas_werner(params, RELATIVE_ENTROPY).value
        bures = nas_werner(params, BURES).value
        wit = nas_witness_werner(params)
    else:
        from .states import werner

        rho = werner(params)
        rel = nas_numeric(rho, RELATIVE_ENTROPY).value
        bures = nas_numeric(rho, BURES).value
        wit = nas_witness_measure(rho, method="grid").value
    return [p, rel, bures, wit, classify_werner(params).value]


def sweep_werner(gamma, phi, grid, mode="closed", workers=None) -> list:
    start, stop, steps = grid
    ps = np.linspace(start, stop, steps) if steps > 1 else np.array([start])
    ps = np.clip(ps, 0.0, 1.0)
    workers = workers or oracles.worker_count()
    if workers <= 1:
        return [sweep_row(float(p), gamma, phi, mode) for p in ps]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda p: sweep_row(float(p), gamma, phi, mode), ps))


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for p, rel, bures, wit, label in rows:
        writer.writerow([repr(float(p)), repr(float(rel)), repr(float(bures)), repr(float(wit)), label])
    return buf.getvalue()


def cmd_sweep_werner(args) -> int:
    try:
        WernerParams(0.0, args.gamma, args.phi)
    except NasError as exc:
        raise CliError(EXIT_PARSE, str(exc)) from exc
    rows = sweep_werner(args.gamma, args.phi, args.grid, args.mode)
    text = rows_to_csv(rows)
    try:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise CliError(EXIT_UNWRITABLE, f"cannot write {args.out}: {exc}") from exc
    cols = np.array([r[1:4] for r in rows], dtype=float)
    monotone = bool(np.all(np.diff(cols, axis=0) >= -1e-12)) if len(rows) > 1 else True
    _emit(
        {
            "rows": len(rows),
            "out": str(args.out),
            "monotone_nondecreasing": monotone,
            "last_row": rows[-1][:4],
            "flags": {
                "gamma": args.gamma,
                "phi": args.phi,
                "grid": list(args.grid),
                "mode": args.mode,
                "out": str(args.out),
            },
        }
    )
    return 0


# --------------------------------------------------------------------------
# oracle

def cmd_oracle(args) -> int:
    if args.suite not in oracles.SUITES:
        usage = f"unknown suite {args.suite!r}; choose one of: {', '.join(oracles.SUITES)}"
        raise CliError(EXIT_ORACLE, usage)
    if args.measure not in oracles.MEASURES:
        raise CliError(EXIT_COMBINATION, f"unknown measure {args.measure!r}")
    kw = {"p": args.p} if args.suite == "segment" else {}
    try:
        report = oracles.run_suite(args.suite, args.trials, args.seed, args.measure, **kw)
    except KeyError as exc:
        raise CliError(EXIT_COMBINATION, f"unsupported suite/measure combination: {exc}") from exc
    except (NasError, ConvergenceFailure) as exc:
        raise CliError(EXIT_ORACLE, f"oracle run aborted: {exc}") from exc
    summary = report.summary()
    summary["flags"] = _flags(args, ["suite", "measure", "seed", "trials", "p", "out"])
    code = 0
    if report.failures:
        path = Path(args.out or f"nasq-oracle-{args.suite}-seed{args.seed}-failures.json")
        try:
            path.write_text(json.dumps(report.failure_payload(), indent=2, default=_json_default) + "\n")
            summary["failure_file"] = str(path)
        except OSError as exc:
            summary["failure_file_error"] = str(exc)
        code = EXIT_ORACLE
    _emit(summary)
    return code


# --------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise CliError(EXIT_PARSE, message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="nasq", description="Absolute separability and NAS measures.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("classify", help="AS / separable / entangled verdict for a state file")
    p.add_argument("--input", required=True)
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("measure", help="evaluate one NAS measure")
    p.add_argument("--input", required=True)
    p.add_argument("--measure", choices=["relent", "bures", "trace", "hs", "witness"], default="relent")
    p.add_argument("--mode", choices=["closed", "aligned", "full"], default="full")
    p.add_argument("--tol", type=float, default=OptimizerConfig.tol)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_measure)

    p = sub.add_parser("sweep-werner", help="measures of Werner states along a grid of p")
    p.add_argument("--gamma", type=float, default=math.pi / 4)
    p.add_argument("--phi", type=float, default=0.0)
    p.add_argument("--grid", type=parse_grid, default=(0.0, 1.0, 101))
    p.add_argument("--mode", choices=["closed", "numeric"], default="closed")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sweep_werner)

    p = sub.add_parser("oracle", help="seeded randomized verification suites")
    p.add_argument("--suite", required=True, help=", ".join(oracles.SUITES))
    p.add_argument("--measure", default="relent", help=", ".join(oracles.MEASURES))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--p", type=int, default=1, help="metric exponent for the segment suite")
    p.add_argument("--out", default=None, help="where to write failing cases")
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except CliError as exc:
        sys.stderr.write(f"nasq: error: {exc}\n")
        if exc.code == EXIT_ORACLE and "unknown suite" in str(exc):
            parser.print_usage(sys.stderr)
        return exc.code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
