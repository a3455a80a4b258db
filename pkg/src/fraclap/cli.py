"""Command-line entry point.

Subcommands: eig, solve-linear, solve-nonlinear, verify, convergence.
Each takes --config <path> (JSON run configuration), --out <dir>,
--seed <n> and --quiet.  The subcommand must match the config's problem
kind; ``verify`` may run without a config on a default square setup.
Output directory precedence: --out, then $FRACLAP_OUT, then the config's
"output" field, then ./fraclap_out.  Failures print one machine-readable
JSON line to stderr; exit status is 0 on success, 2 for configuration
errors, 1 otherwise.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from .config import ConfigError, RunConfig, parse_config
from .config import BasisSpec, DomainSpec, VerifySpec
from .runner import run

_KIND_BY_COMMAND = {
    "eig": "eig",
    "solve-linear": "linear",
    "solve-nonlinear": "nonlinear",
    "verify": "verify",
    "convergence": "convergence",
}


def _default_verify_config() -> RunConfig:
    import math

    return RunConfig(
        domain=DomainSpec(kind="box", lengths=(math.pi, math.pi)),
        basis=BasisSpec(source="analytic", J=16),
        w_terms=((1.0, 0.5),),
        problem=VerifySpec(),
        output=None,
        seed=0,
    )


def _error_json(exc: Exception, **extra) -> str:
    doc = {"error": type(exc).__name__, "message": str(exc), **extra}
    return json.dumps(doc, sort_keys=True)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fraclap",
        description="Spectral solver for bipolynomial fractional "
                    "Dirichlet-Laplace problems.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for command in _KIND_BY_COMMAND:
        p = sub.add_parser(command)
        p.add_argument("--config", type=Path,
                       required=(command != "verify"),
                       help="path to the JSON run configuration")
        p.add_argument("--out", type=Path, default=None,
                       help="output directory (overrides FRACLAP_OUT and config)")
        p.add_argument("--seed", type=int, default=None,
                       help="override the config seed")
        p.add_argument("--quiet", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    expected_kind = _KIND_BY_COMMAND[args.command]

    try:
        if args.config is not None:
            config = parse_config(args.config.read_text(encoding="utf-8"))
            config_dir = args.config.parent
        else:
            config = _default_verify_config()
            config_dir = Path.cwd()
        if config.problem_kind != expected_kind:
            raise ConfigError(
                "/problem/kind",
                f"subcommand '{args.command}' expects problem kind "
                f"'{expected_kind}', config declares '{config.problem_kind}'",
            )
        if args.seed is not None:
            config = dataclasses.replace(config, seed=args.seed)
    except OSError as exc:
        print(_error_json(exc), file=sys.stderr)
        return 2
    except ConfigError as exc:
        print(_error_json(exc, pointer=exc.pointer), file=sys.stderr)
        return 2

    try:
        bundle = run(config,
                     out_dir=str(args.out) if args.out else None,
                     quiet=args.quiet,
                     config_dir=config_dir)
    except Exception as exc:  # noqa: BLE001 - boundary: report and exit nonzero
        print(_error_json(exc), file=sys.stderr)
        return 1

    report = bundle.report
    if report.get("problem") == "verify" and not report.get("passed", False):
        return 1
    if report.get("problem") == "nonlinear" and not report.get("converged", False):
        print(_error_json(RuntimeError(
            f"minimizer did not converge (status {report.get('status')})")),
            file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
