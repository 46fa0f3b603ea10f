"""Command-line front end: validate models, compute Cartesian stiffness, and
solve load cases with machine-readable output.

Exit codes:
    0  success
    1  model validation errors
    2  unreadable or malformed model file
    3  singular system (mechanism mobility or static indeterminacy)
    4  condition estimate beyond the gate with --strict
    5  singular Cartesian stiffness in --wrench mode
    6  usage error (conflicting flags, bad MSA_THREADS)

The environment variable MSA_THREADS (integer >= 1) caps the parallelism of
the multi-column solves.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .assembly import assemble, dump_system
from .errors import (
    EndEffectorMobilityError,
    ModelFormatError,
    ModelValidationError,
    SingularSystemError,
)
from .model import ManipulatorModel, load_model, validate
from .solver import (
    CONDITION_WARN,
    FullState,
    StiffnessResult,
    cartesian_stiffness,
    equilibrium_residual,
    solve_applied_wrench,
    solve_prescribed_deflection,
    support_reactions,
)

__all__ = ["main", "cmd_validate", "cmd_stiffness", "cmd_solve"]

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_PARSE = 2
EXIT_SINGULAR = 3
EXIT_ILL_CONDITIONED = 4
EXIT_SINGULAR_KC = 5
EXIT_USAGE = 6


def _threads() -> int:
    raw = os.environ.get("MSA_THREADS")
    if raw is None:
        return 1
    try:
        value = int(raw)
    except ValueError:
        raise _UsageError(f"MSA_THREADS must be an integer >= 1, got {raw!r}")
    if value < 1:
        raise _UsageError(f"MSA_THREADS must be an integer >= 1, got {raw!r}")
    return value


class _UsageError(Exception):
    pass


def _print_json(payload) -> None:
    print(json.dumps(payload, sort_keys=True))


def _matrix_lines(mat: np.ndarray) -> list[str]:
    return ["  " + "  ".join(f"{v: .9e}" for v in row) for row in np.atleast_2d(mat)]


def _model_summary(model: ManipulatorModel) -> dict:
    return {
        "nodes": len(model.nodes),
        "links": len(model.links),
        "joints": len(model.joints),
        "supports": len(model.supports),
        "loads": len(model.loads),
        "end_effector": model.end_effector,
    }


def cmd_validate(args) -> int:
    model = load_model(args.model)
    report = validate(model)
    for issue in report.errors:
        print(f"ERROR [{issue.code}] {issue.entity}: {issue.message}")
    for issue in report.warnings:
        print(f"WARNING [{issue.code}] {issue.entity}: {issue.message}")
    print(f"equations: {report.equation_count}, unknowns: {report.unknown_count}")
    return EXIT_OK if report.ok else EXIT_VALIDATION


def _stiffness_payload(model: ManipulatorModel, result: StiffnessResult) -> dict:
    return {
        "model": _model_summary(model),
        "kc": result.kc.tolist(),
        "w_offset": result.w_offset.vector().tolist(),
        "condition_estimate": result.condition,
        "warnings": list(result.warnings),
    }


def cmd_stiffness(args) -> int:
    model = load_model(args.model)
    if args.dump_system:
        dump_system(assemble(model), args.dump_system)
    result = cartesian_stiffness(model, threads=_threads())
    if args.strict and result.condition > CONDITION_WARN:
        print(
            f"condition estimate {result.condition:.3e} exceeds the "
            f"{CONDITION_WARN:.0e} gate",
            file=sys.stderr,
        )
        return EXIT_ILL_CONDITIONED
    if args.output == "json":
        _print_json(_stiffness_payload(model, result))
    else:
        print("cartesian stiffness [N/m, N/rad; N m/m, N m/rad]:")
        print("\n".join(_matrix_lines(result.kc)))
        print("offset wrench [N, N m]:")
        print("\n".join(_matrix_lines(result.w_offset.vector())))
        print(f"condition estimate: {result.condition:.6e}")
        for warning in result.warnings:
            print(f"warning: {warning}")
    return EXIT_OK


def _state_payload(model: ManipulatorModel, state: FullState) -> dict:
    reactions = support_reactions(state, model)
    return {
        "model": _model_summary(model),
        "nodes": {
            node: {
                "twist": state.twists[node].vector().tolist(),
                "wrench": state.wrenches[node].vector().tolist(),
            }
            for node in state.twists
        },
        "end_effector": {
            "id": state.end_effector,
            "twist": state.dt_e.vector().tolist(),
            "wrench": state.w_e.vector().tolist(),
        },
        "reactions": {node: wrench.vector().tolist() for node, wrench in reactions},
        "equilibrium_residual": equilibrium_residual(state, model),
    }


def cmd_solve(args) -> int:
    if (args.wrench is None) == (args.deflection is None):
        raise _UsageError("exactly one of --wrench or --deflection is required")
    model = load_model(args.model)
    threads = _threads()
    if args.wrench is not None:
        try:
            state = solve_applied_wrench(model, np.array(args.wrench), threads=threads)
        except EndEffectorMobilityError as exc:
            print(f"singular Cartesian stiffness: {exc}", file=sys.stderr)
            return EXIT_SINGULAR_KC
    else:
        state = solve_prescribed_deflection(model, np.array(args.deflection), threads=threads)
    if args.output == "json":
        _print_json(_state_payload(model, state))
    else:
        print(f"end effector {state.end_effector}:")
        print(f"  twist  [m, rad]: {'  '.join(f'{v: .9e}' for v in state.dt_e.vector())}")
        print(f"  wrench [N, N m]: {'  '.join(f'{v: .9e}' for v in state.w_e.vector())}")
        for node in state.twists:
            print(f"node {node}:")
            print(f"  twist : {'  '.join(f'{v: .9e}' for v in state.twists[node].vector())}")
            print(f"  wrench: {'  '.join(f'{v: .9e}' for v in state.wrenches[node].vector())}")
        for node, wrench in support_reactions(state, model):
            print(f"reaction at {node}: {'  '.join(f'{v: .9e}' for v in wrench.vector())}")
        print(f"equilibrium residual: {equilibrium_residual(state, model):.3e}")
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="msakit",
        description=(
            "Matrix structural analysis of manipulators: build the stiffness "
            "model of a serial or parallel mechanism from a JSON description "
            "and compute Cartesian stiffness, deflections, and reactions."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_validate = sub.add_parser("validate", help="check a model file")
    p_validate.add_argument("model", help="path to the model JSON file")
    p_validate.set_defaults(func=cmd_validate)

    p_stiff = sub.add_parser("stiffness", help="compute the Cartesian stiffness matrix")
    p_stiff.add_argument("model", help="path to the model JSON file")
    p_stiff.add_argument("--output", choices=("json", "text"), default="text")
    p_stiff.add_argument(
        "--dump-system", metavar="DIR",
        help="write the assembled system in Matrix Market format to DIR",
    )
    p_stiff.add_argument(
        "--strict", action="store_true",
        help="fail when the condition estimate exceeds the gate",
    )
    p_stiff.set_defaults(func=cmd_stiffness)

    p_solve = sub.add_parser("solve", help="solve one load or deflection case")
    p_solve.add_argument("model", help="path to the model JSON file")
    p_solve.add_argument(
        "--wrench", nargs=6, type=float, metavar=("FX", "FY", "FZ", "MX", "MY", "MZ"),
        help="apply this external wrench at the end effector",
    )
    p_solve.add_argument(
        "--deflection", nargs=6, type=float, metavar=("DX", "DY", "DZ", "RX", "RY", "RZ"),
        help="prescribe this end-effector deflection",
    )
    p_solve.add_argument("--output", choices=("json", "text"), default="text")
    p_solve.set_defaults(func=cmd_solve)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        print(f"cannot read model file: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ModelFormatError as exc:
        print(f"model format error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ModelValidationError as exc:
        for issue in exc.report.errors:
            print(f"ERROR [{issue.code}] {issue.entity}: {issue.message}", file=sys.stderr)
        return EXIT_VALIDATION
    except SingularSystemError as exc:
        print(f"singular system: {exc}", file=sys.stderr)
        return EXIT_SINGULAR


if __name__ == "__main__":
    raise SystemExit(main())
