"""Command-line interface: ``qextract {extract,sweep,verify,predict}``.

Exit codes: 0 success, 1 usage error, 2 numeric failure, 3 verification failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import pipeline
from .chebyshev import choose_M
from .estimation import MODES
from .expr import ExpressionSyntaxError

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_VERIFY = 0, 1, 2, 3
_BAD_INPUT = (KeyError, OSError, ExpressionSyntaxError)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _u64(raw: str) -> int:
    v = int(raw, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return v


def _add_config_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--function", default="cosine-bump",
                   help="builtin name (constant, cosine-bump[:a], gaussian[:alpha]), expr:<expression> or file:<path>")
    p.add_argument("--qubits", type=int, default=12, help="data qubits n")
    p.add_argument("--a-psi", type=float, default=1.0, help="sub-normalization of the preparation")
    p.add_argument("--eps-total", type=float, default=0.01)
    p.add_argument("--eps-psi", type=float, default=None, help="prefix-integral precision (default derived)")
    p.add_argument("--eps-cheb", type=float, default=None, help="interpolation target used to pick M")
    p.add_argument("--mode", choices=MODES, default="exact")
    p.add_argument("--seed", type=_u64, default=0)
    p.add_argument("--cheb-m", type=int, default=None, help="override the interpolation order M")
    p.add_argument("--lambda", dest="lam", type=float, default=None, help="override the derivative bound")
    p.add_argument("--shots", type=int, default=pipeline.DEFAULT_SHOTS, help="shots per Grover power")


def _config(args) -> pipeline.ExtractionConfig:
    return pipeline.ExtractionConfig(
        function=args.function,
        n=args.qubits,
        a_psi=args.a_psi,
        eps_total=args.eps_total,
        eps_psi=args.eps_psi,
        eps_cheb=args.eps_cheb,
        mode=args.mode,
        seed=args.seed,
        M=args.cheb_m,
        lam=args.lam,
        shots=args.shots,
    )


def _write(text: str, out) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qextract", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("extract", help="run one extraction and write a JSON report")
    _add_config_args(p)
    p.add_argument("--out", default=None, help="report path (default stdout)")

    p = sub.add_parser("sweep", help="run extractions along one parameter axis, CSV output")
    _add_config_args(p)
    p.add_argument("--axis", required=True, choices=pipeline.SWEEP_AXES)
    p.add_argument("--values", required=True, help="comma-separated axis values")
    p.add_argument("--out", default=None, help="CSV path (default stdout)")

    p = sub.add_parser("verify", help="run the invariant suites")
    _add_config_args(p)
    p.add_argument("--tamper-basis-scale", type=float, default=1.0, help=argparse.SUPPRESS)

    p = sub.add_parser("predict", help="print the predicted query cost")
    _add_config_args(p)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _config(args)
        values = None
        if args.command == "sweep":
            values = [pipeline.parse_axis_value(args.axis, v.strip()) for v in args.values.split(",") if v.strip()]
    except ValueError as exc:
        parser.exit(EXIT_USAGE, f"qextract: error: {exc}\n")

    try:
        if args.command == "extract":
            _write(pipeline.extract(cfg).to_json(), args.out)
        elif args.command == "sweep":
            _write(pipeline.sweep_csv(pipeline.sweep(cfg, args.axis, values)), args.out)
        elif args.command == "verify":
            results = pipeline.verify(cfg, tamper=args.tamper_basis_scale)
            print(pipeline.format_results(results))
            if not all(r.passed for r in results):
                return EXIT_VERIFY
        elif args.command == "predict":
            f = pipeline.prepare_function(cfg)
            M = cfg.M or choose_M(f.lam, min(cfg.eps_cheb or cfg.eps_psi or cfg.eps_total, 0.5))
            out = {
                "function": f.name,
                "lambda": f.lam,
                "min_psi": f.min_psi,
                "max_psi": f.max_psi,
                "M": M,
                "predicted_cost": pipeline.predicted_cost(cfg, f.lam, f.min_psi, f.max_psi),
            }
            print(json.dumps(out, indent=2))
    except pipeline.ExtractionError as exc:
        print(f"qextract: {exc}", file=sys.stderr)
        # a function spec that cannot even be read is the caller's mistake
        if exc.stage == "function" and isinstance(exc.cause, _BAD_INPUT):
            return EXIT_USAGE
        return EXIT_NUMERIC
    except _BAD_INPUT as exc:
        print(f"qextract: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ArithmeticError, RuntimeError, ValueError) as exc:
        print(f"qextract: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
