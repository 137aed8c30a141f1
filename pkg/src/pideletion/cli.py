"""Command-line front end.

Exit status: 0 on success, 1 when a code fails its conditions or a
verification, 2 on usage, input or size-bound errors.
"""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .codes import (
    CodeSpec,
    GnuParams,
    check_conditions,
    gnu_code,
    search_symmetric,
    spec_from_dict,
    spec_to_dict,
    symmetric_single_deletion_code,
)
from .encdec import ConditionError, LogicalState, encode
from .statevec import DenseSizeError
from .verify import (
    PASS_THRESHOLD,
    combined_claim_check,
    default_probes,
    kl_check,
    verify_code,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


CODESPEC_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "CodeSpec",
    "type": "object",
    "required": ["N", "t", "levels", "f_sq"],
    "properties": {
        "N": {"type": "integer", "minimum": 2},
        "t": {"type": "integer", "minimum": 1},
        "levels": {
            "type": "array",
            "minItems": 2,
            "items": {"type": "array", "minItems": 1, "items": {"type": "integer", "minimum": 0}},
        },
        "f_sq": {
            "type": "object",
            "patternProperties": {"^[0-9]+$": {"type": "string", "pattern": "^[0-9]+/[0-9]+$"}},
            "additionalProperties": False,
        },
    },
}

REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "VerificationReport",
    "type": "object",
    "required": ["spec", "pass", "worst_fidelity", "records", "oracles", "kl", "seed", "elapsed_ms"],
    "properties": {
        "spec": {"$ref": "#/$defs/CodeSpec"},
        "pass": {"type": "boolean"},
        "worst_fidelity": {"type": "number"},
        "conditions": {"type": "object"},
        "records": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["probe", "positions", "outcome", "probability", "fidelity"],
                "properties": {
                    "probe": {"type": "integer"},
                    "positions": {"type": "array", "items": {"type": "integer"}},
                    "outcome": {"oneOf": [{"type": "integer"}, {"const": "empty"}]},
                    "probability": {"type": "number"},
                    "fidelity": {"type": "number"},
                },
            },
        },
        "oracles": {"type": "object"},
        "kl": {"type": ["object", "null"]},
        "seed": {"type": "integer"},
        "elapsed_ms": {"type": "integer"},
    },
    "$defs": {"CodeSpec": CODESPEC_SCHEMA},
}


def _parse_symmetric(text: str) -> list:
    # "0,8;4" -> [[0, 8], [4]]
    try:
        return [[int(w) for w in part.split(",")] for part in text.split(";")]
    except ValueError as exc:
        raise UsageError(f"--symmetric expects weight lists like '0,8;4', got {text!r}") from exc


def load_spec(args) -> CodeSpec:
    if args.spec:
        try:
            with open(args.spec, encoding="utf-8") as fh:
                data = json.load(fh)
        except OSError as exc:
            raise UsageError(f"cannot read {args.spec}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise UsageError(f"{args.spec}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc
        try:
            spec = spec_from_dict(data)
        except (ValueError, TypeError) as exc:
            raise UsageError(f"{args.spec}: {exc}") from exc
        return spec.with_t(args.t) if args.t is not None else spec
    if args.gnu:
        try:
            params = GnuParams.parse(args.gnu)
            t = args.t if args.t is not None else min(params.g, params.n) - 1
            return gnu_code(params, t)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
    if args.N is None:
        raise UsageError("--symmetric needs --N")
    try:
        spec = symmetric_single_deletion_code(args.N, _parse_symmetric(args.symmetric))
        return spec.with_t(args.t) if args.t is not None else spec
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _emit(payload: dict, out: Optional[str]) -> None:
    text = json.dumps(payload, indent=2) + "\n"
    if out:
        try:
            with open(out, "w", encoding="utf-8") as fh:
                fh.write(text)
        except OSError as exc:
            raise UsageError(f"cannot write {out}: {exc}") from exc
    else:
        sys.stdout.write(text)


def _parse_logical(text: str, L: int) -> LogicalState:
    try:
        amps = np.array([complex(p.strip().replace(" ", "")) for p in text.split(",")])
    except ValueError as exc:
        raise UsageError(f"--logical expects comma-separated complex amplitudes, got {text!r}") from exc
    if amps.size != L:
        raise UsageError(f"--logical has {amps.size} amplitudes, code has {L} levels")
    norm = np.linalg.norm(amps)
    if norm == 0:
        raise UsageError("--logical amplitudes are all zero")
    return LogicalState(amps / norm)


def cmd_check(args) -> int:
    spec = load_spec(args)
    report = check_conditions(spec)
    _emit({"spec": spec_to_dict(spec), "ok": report.ok, **report.to_dict()}, args.out)
    if not report.ok:
        print(f"condition violated: {json.dumps(report.witness)}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def cmd_build(args) -> int:
    spec = load_spec(args)
    _emit(spec_to_dict(spec), args.out)
    return EXIT_OK


def cmd_encode(args) -> int:
    spec = load_spec(args)
    psi = _parse_logical(args.logical, spec.L) if args.logical else LogicalState.basis(spec.L, 0)
    state = encode(spec, psi)
    _emit(
        {
            "spec": spec_to_dict(spec),
            "logical": [[a.real, a.imag] for a in psi.amps],
            "n_qubits": state.n_qubits,
            "coeffs": {str(w): [c.real, c.imag] for w, c in state.coeffs.items()},
            "norm_sq": state.norm_sq(),
        },
        args.out,
    )
    return EXIT_OK


def _finish_report(payload: dict, args, passed: bool) -> int:
    if args.no_timing:
        payload["elapsed_ms"] = 0
    _emit(payload, args.out)
    return EXIT_OK if passed else EXIT_FAIL


def cmd_verify(args) -> int:
    spec = load_spec(args)
    report = verify_code(
        spec,
        probes=default_probes(spec.L, args.probes, args.seed),
        positions=args.positions,
        samples=args.samples,
        seed=args.seed,
        threshold=args.tol,
    )
    return _finish_report(report.to_dict(), args, report.passed)


def cmd_kl(args) -> int:
    spec = load_spec(args)
    report = kl_check(spec, args.weight)
    _emit({"spec": spec_to_dict(spec), **report.to_dict()}, args.out)
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_combined(args) -> int:
    t = args.t if args.t is not None else 1
    report = combined_claim_check(t, Fraction(args.u), seed=args.seed, n_random=args.probes, threshold=args.tol)
    return _finish_report(report.to_dict(), args, report.passed)


def cmd_search(args) -> int:
    specs = search_symmetric(args.N, args.levels)
    _emit({"N": args.N, "levels": args.levels, "count": len(specs), "codes": [spec_to_dict(s) for s in specs]}, args.out)
    return EXIT_OK


def cmd_schema(args) -> int:
    _emit({"CodeSpec": CODESPEC_SCHEMA, "VerificationReport": REPORT_SCHEMA}, args.out)
    return EXIT_OK


def _add_spec_source(p: argparse.ArgumentParser) -> None:
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--spec", help="CodeSpec JSON file")
    src.add_argument("--gnu", help="(g,n,u) family parameters, e.g. 3,3,1")
    src.add_argument("--symmetric", help="reflection-closed levels for a single-deletion code, e.g. '0,8;4'")
    p.add_argument("--N", type=int, help="block length for --symmetric")
    p.add_argument("--t", type=int, help="deletion count (overrides the code file)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pideletion", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_, spec=True):
        p = sub.add_parser(name, help=help_)
        if spec:
            _add_spec_source(p)
        p.add_argument("--out", help="write JSON here instead of stdout")
        p.set_defaults(func=func)
        return p

    add("check", cmd_check, "check the deletion-correction conditions exactly")
    add("build", cmd_build, "emit a CodeSpec as JSON")
    p = add("encode", cmd_encode, "encode a logical state into weight coefficients")
    p.add_argument("--logical", help="comma-separated logical amplitudes (normalized on input)")

    def run_flags(p):
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--probes", type=int, default=8, help="number of random logical probes")
        p.add_argument("--tol", type=float, default=PASS_THRESHOLD, help="fidelity pass threshold 1 - tol")
        p.add_argument("--no-timing", action="store_true", help="report elapsed_ms as 0 for reproducible output")

    p = add("verify", cmd_verify, "decode after every deletion pattern and report fidelities")
    p.add_argument("--positions", choices=["all", "sampled"], default="all")
    p.add_argument("--samples", type=int, default=16)
    run_flags(p)

    p = add("kl-check", cmd_kl, "Knill-Laflamme check against Pauli errors")
    p.add_argument("--weight", type=int, default=1)

    p = add("combined", cmd_combined, "(2t+1,2t+1,u) code: 2t deletions plus t-qubit errors", spec=False)
    p.add_argument("--t", type=int, default=1, help="qubit-error weight")
    p.add_argument("--u", default="1")
    run_flags(p)

    p = add("search", cmd_search, "enumerate symmetric single-deletion codes", spec=False)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--levels", type=int, default=2)

    add("report-schema", cmd_schema, "print the JSON schemas", spec=False)
    return parser


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DenseSizeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConditionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        if exc.report is not None:
            _emit({"ok": False, **exc.report.to_dict()}, args.out)
        return EXIT_FAIL
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
