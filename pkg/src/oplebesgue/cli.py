"""Command-line surface.

Four subcommands: ``decompose`` and ``converge-report`` run the decomposition
engines on operator files, ``check-unique`` answers the uniqueness question
for a pair of functionals or representatives, and ``counterexample`` builds
the non-unique sequence pair over a given base sequence.

Exit codes separate mathematics from operations: 0 carries answers (including
"not unique" -- uniqueness status is data, not an error), 2 flags invalid
input with a single ``error:`` diagnostic on stderr naming the violated
invariant, and 3 flags a numerical failure (non-convergence or an internal
consistency breakdown).  Outputs are written atomically and rerunning with
identical inputs and flags reproduces byte-identical payloads; wall-clock
timing lives in a ``timing`` block excluded from that guarantee.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import os
import sys
import time

from .diagonal import (
    certificate_to_json,
    construct_unbounded_ratio,
    diag_decompose,
    diag_uniqueness,
    sequence_from_json,
    sequence_to_json,
    truncate_to_matrix,
)
from .errors import ConsistencyError, ConvergenceError, ValidationError
from .functionals import NormalFunctional, functional_from_json, functional_uniqueness
from .lebesgue import ac_part_iterative, decompose, uniqueness_certificate
from .psd_core import ToleranceConfig, matrix_to_json, psd_from_json

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_NUMERICAL = 3

DEFAULT_TRUNCATE = 32


def _fail(message: str, code: int) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def _config(args) -> ToleranceConfig:
    return ToleranceConfig(
        psd_tol=args.psd_tol,
        rank_cutoff=ToleranceConfig().rank_cutoff,
        conv_tol=args.tol,
        max_iters=args.max_iters,
    )


def _load_json(path: str):
    try:
        with open(path, "rb") as handle:
            payload = handle.read()
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc.strerror or exc}") from exc
    try:
        return json.loads(payload), hashlib.sha256(payload).hexdigest()
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path} is not valid JSON: {exc}") from exc


def _sniff_kind(obj) -> str:
    if isinstance(obj, dict):
        if "kind" in obj:
            return "functional"
        if "real" in obj or "dim" in obj:
            return "matrix"
        if "prefix" in obj:
            return "sequence"
    raise ValidationError("input JSON is neither a matrix, a sequence, nor a functional")


def _echo(obj, kind: str, digest: str) -> dict:
    if kind == "matrix":
        return {"sha256": digest, "kind": kind, "dim": obj.dim}
    return {
        "sha256": digest,
        "kind": kind,
        "prefix_len": obj.prefix_len,
        "infinite_support": obj.has_infinite_support,
    }


def _json_number(value):
    if value is None or not math.isfinite(value):
        return None
    return value


def _write_atomic(path: str, data: str):
    tmp = f"{path}.tmp-{os.getpid()}"
    with open(tmp, "w", encoding="utf-8") as handle:
        handle.write(data)
    os.replace(tmp, path)


def _write_report(path: str, report: dict, quiet: bool):
    _write_atomic(path, json.dumps(report, sort_keys=True, indent=2) + "\n")
    if not quiet:
        print(f"wrote {path}")


def _tolerance_block(args) -> dict:
    return {
        "psd_tol": args.psd_tol,
        "rank_cutoff": ToleranceConfig().rank_cutoff,
        "conv_tol": args.tol,
        "max_iters": args.max_iters,
        "truncate": args.truncate,
        "seed": args.seed,
    }


def _iterations_block(trace) -> list:
    return [{"k": step.k, "gap": step.gap} for step in trace.steps]


def cmd_decompose(args) -> int:
    cfg = _config(args)
    obj_s, digest_s = _load_json(args.s_path)
    obj_t, digest_t = _load_json(args.t_path)
    kind_s, kind_t = _sniff_kind(obj_s), _sniff_kind(obj_t)
    if kind_s != kind_t:
        raise ValidationError(f"input kinds do not match: {kind_s} vs {kind_t}")
    started = time.perf_counter()
    if kind_s == "matrix":
        s = psd_from_json(obj_s, cfg)
        t = psd_from_json(obj_t, cfg)
        dec = decompose(s, t, cfg)
        cert = uniqueness_certificate(s, t, cfg)
        body = {
            "ac": matrix_to_json(dec.ac),
            "sing": matrix_to_json(dec.sing),
            "unique": cert.unique,
            "c": _json_number(cert.c),
            "iterations": _iterations_block(dec.trace_of_iteration),
        }
    elif kind_s == "sequence":
        s = sequence_from_json(obj_s)
        t = sequence_from_json(obj_t)
        ac, sing = diag_decompose(s, t)
        unique, ratio_cert = diag_uniqueness(s, t)
        body = {
            "ac": sequence_to_json(ac),
            "sing": sequence_to_json(sing),
            "unique": unique,
            "c": _json_number(ratio_cert.c),
            "iterations": [],
        }
    else:
        raise ValidationError("decompose expects matrix or sequence inputs, not functionals")
    report = {
        "inputs": {"s": _echo(s, kind_s, digest_s), "t": _echo(t, kind_t, digest_t)},
        "tolerances": _tolerance_block(args),
        "decomposition": body,
        "timing": {"elapsed_seconds": time.perf_counter() - started},
    }
    _write_report(args.out_path, report, args.quiet)
    return EXIT_OK


def _as_functional(obj, cfg) -> NormalFunctional:
    kind = _sniff_kind(obj)
    if kind == "functional":
        return functional_from_json(obj, cfg)
    if kind == "matrix":
        return NormalFunctional(psd_from_json(obj, cfg))
    return NormalFunctional(sequence_from_json(obj))


def cmd_check_unique(args) -> int:
    cfg = _config(args)
    obj_g, _ = _load_json(args.g_path)
    obj_f, _ = _load_json(args.f_path)
    g = _as_functional(obj_g, cfg)
    f = _as_functional(obj_f, cfg)
    cert = functional_uniqueness(g, f, cfg)
    print(json.dumps({"unique": cert.unique, "c": _json_number(cert.c)}, sort_keys=True))
    return EXIT_OK


def cmd_counterexample(args) -> int:
    obj, digest = _load_json(args.lambda_path)
    if _sniff_kind(obj) != "sequence":
        raise ValidationError("counterexample input must be a sequence JSON")
    lam = sequence_from_json(obj)
    mu, certificate = construct_unbounded_ratio(lam, args.truncate_horizon)
    _, sing = diag_decompose(mu, lam)
    unique, _ = diag_uniqueness(mu, lam)
    if sing.total() != 0.0 or unique:
        raise ConsistencyError("constructed pair failed its own certificates")
    report = {
        "inputs": {"lambda": _echo(lam, "sequence", digest)},
        "t": sequence_to_json(lam),
        "s": sequence_to_json(mu),
        "certificate": certificate_to_json(certificate),
        "unique": False,
    }
    _write_report(args.out_path, report, args.quiet)
    return EXIT_OK


def cmd_converge_report(args) -> int:
    cfg = _config(args)
    obj_s, _ = _load_json(args.s_path)
    obj_t, _ = _load_json(args.t_path)
    kind_s, kind_t = _sniff_kind(obj_s), _sniff_kind(obj_t)
    if kind_s != kind_t:
        raise ValidationError(f"input kinds do not match: {kind_s} vs {kind_t}")
    if kind_s == "matrix":
        s = psd_from_json(obj_s, cfg)
        t = psd_from_json(obj_t, cfg)
    elif kind_s == "sequence":
        s = truncate_to_matrix(sequence_from_json(obj_s), args.truncate, cfg)
        t = truncate_to_matrix(sequence_from_json(obj_t), args.truncate, cfg)
    else:
        raise ValidationError("converge-report expects matrix or sequence inputs")
    _, trace = ac_part_iterative(s, t, cfg)
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["k", "n", "gap_trace", "c_bound"])
    for step in trace.steps:
        writer.writerow([step.k, int(step.scale), repr(step.gap), repr(step.c_bound)])
    _write_atomic(args.csv_path, buffer.getvalue())
    if not args.quiet:
        print(f"wrote {args.csv_path}")
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="oplebesgue",
        description="Lebesgue decompositions of PSD operators: certificates, "
        "uniqueness checks and counterexample construction.",
    )
    parser.add_argument("--tol", type=float, default=ToleranceConfig().conv_tol,
                        help="relative trace-norm stopping threshold for iterations")
    parser.add_argument("--psd-tol", type=float, default=ToleranceConfig().psd_tol,
                        help="relative tolerance band for PSD validation")
    parser.add_argument("--max-iters", type=int, default=ToleranceConfig().max_iters,
                        help="iteration budget for the monotone approximation")
    parser.add_argument("--truncate", type=int, default=DEFAULT_TRUNCATE,
                        help="sequence-to-matrix truncation horizon")
    parser.add_argument("--seed", type=int, default=0,
                        help="seed for any sampled verification panels")
    parser.add_argument("--quiet", action="store_true", help="suppress informational output")
    commands = parser.add_subparsers(dest="command", required=True)

    p = commands.add_parser("decompose", help="decompose S relative to T and write a report")
    p.add_argument("s_path")
    p.add_argument("t_path")
    p.add_argument("out_path")
    p.set_defaults(handler=cmd_decompose)

    p = commands.add_parser("check-unique", help="print the uniqueness verdict for (g, f)")
    p.add_argument("g_path")
    p.add_argument("f_path")
    p.set_defaults(handler=cmd_check_unique)

    p = commands.add_parser("counterexample",
                            help="build the non-unique pair over an infinite-support sequence")
    p.add_argument("lambda_path")
    p.add_argument("out_path")
    p.add_argument("--horizon", dest="truncate_horizon", type=int, default=10_000,
                   help="materialization horizon for the constructed sequence")
    p.set_defaults(handler=cmd_counterexample)

    p = commands.add_parser("converge-report",
                            help="CSV trace of the monotone approximants for (S, T)")
    p.add_argument("s_path")
    p.add_argument("t_path")
    p.add_argument("csv_path")
    p.set_defaults(handler=cmd_converge_report)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except ValidationError as exc:
        return _fail(str(exc), EXIT_INVALID)
    except ConvergenceError as exc:
        steps = len(exc.trace.steps) if exc.trace is not None else 0
        return _fail(f"{exc} [{steps} steps recorded]", EXIT_NUMERICAL)
    except ConsistencyError as exc:
        return _fail(str(exc), EXIT_NUMERICAL)


if __name__ == "__main__":
    sys.exit(main())
