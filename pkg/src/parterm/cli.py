"""Command-line front end: run programs, sweep benchmarks, verify equivalence.

Exit codes: 0 success, 1 usage, 2 parse error, 3 verification mismatch,
4 runtime error.
"""

from __future__ import annotations

import argparse
import os
import sys
from typing import Optional, Sequence

from . import bench, workloads
from .engine import EngineError, RunConfig, run_program
from .parser import ParseError, format_expression, parse_program
from .transport import BACKENDS

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_PARSE = 2
EXIT_VERIFY = 3
EXIT_RUNTIME = 4


class _UsageError(Exception):
    pass


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message: str):  # exit 1 on usage errors, not argparse's 2
        self.print_usage(sys.stderr)
        raise _UsageError(message)


def _int_list(text: str) -> list[int]:
    try:
        values = [int(part) for part in text.split(",") if part]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated int list, got {text!r}")
    if not values or any(v < 1 for v in values):
        raise argparse.ArgumentTypeError(f"list entries must be >= 1: {text!r}")
    return values


def _backend_list(text: str) -> list[str]:
    values = [part for part in text.split(",") if part]
    for v in values:
        if v not in BACKENDS:
            raise argparse.ArgumentTypeError(
                f"unknown backend {v!r}; expected from {sorted(BACKENDS)}")
    if not values:
        raise argparse.ArgumentTypeError("backend list is empty")
    return values


def _default_slaves() -> int:
    return max(1, (os.cpu_count() or 2) - 1)


def _build_parser() -> _ArgumentParser:
    parser = _ArgumentParser(prog="parterm",
                             description="parallel term-rewriting engine")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a program and print its expressions")
    p_run.add_argument("file")
    p_run.add_argument("--slaves", type=int, default=_default_slaves())
    p_run.add_argument("--backend", choices=sorted(BACKENDS), default="sm")
    p_run.add_argument("--chunk", type=int, default=1000)
    p_run.add_argument("--master-computes", action="store_true")
    p_run.add_argument("--out", default=None)

    p_bench = sub.add_parser("bench", help="sweep slave counts/backends; emit CSV + .dat")
    p_bench.add_argument("file", nargs="?", default=None)
    p_bench.add_argument("--generate", default=None, metavar="KIND:SCALE[:SEED]")
    p_bench.add_argument("--slaves", type=_int_list, required=True)
    p_bench.add_argument("--backend", type=_backend_list, required=True)
    p_bench.add_argument("--chunk", type=_int_list, default=[1000])
    p_bench.add_argument("--repeat", type=int, default=5)
    p_bench.add_argument("--normalize", choices=bench.NORMALIZATIONS, default="two-proc")
    p_bench.add_argument("--csv", required=True)
    p_bench.add_argument("--quiet", action="store_true")

    p_verify = sub.add_parser("verify",
                              help="check parallel results against the sequential executor")
    p_verify.add_argument("file")
    p_verify.add_argument("--slaves", type=_int_list, default=[1, 2, 4])
    p_verify.add_argument("--chunk", type=_int_list, default=[1, 7, 1000])
    return parser


def _read_program(path: str) -> str:
    with open(path, "r") as fh:
        return fh.read()


def _cmd_run(args) -> int:
    text = _read_program(args.file)
    program = parse_program(text)
    cfg = RunConfig(nslaves=args.slaves, chunk_size=args.chunk, backend=args.backend,
                    master_computes=args.master_computes)
    result = run_program(program, cfg)
    lines = [f"{name} = {format_expression(expr, program.symtab)}"
             for name, expr in result.expressions.items()]
    output = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(output)
    else:
        sys.stdout.write(output)
    return EXIT_OK


def _workload_from_spec(spec: str) -> tuple[str, str]:
    parts = spec.split(":")
    if len(parts) not in (2, 3):
        raise _UsageError(f"--generate expects KIND:SCALE[:SEED], got {spec!r}")
    kind = parts[0]
    try:
        scale = int(parts[1])
        seed = int(parts[2]) if len(parts) == 3 else 0
    except ValueError:
        raise _UsageError(f"--generate expects integer scale/seed, got {spec!r}")
    try:
        return workloads.generate_workload(kind, scale, seed), f"{kind}:{scale}:{seed}"
    except ValueError as exc:
        raise _UsageError(str(exc))


def _cmd_bench(args) -> int:
    if (args.file is None) == (args.generate is None):
        raise _UsageError("bench needs exactly one of <file> or --generate")
    if args.repeat < 1:
        raise _UsageError("--repeat must be >= 1")
    if args.generate:
        text, name = _workload_from_spec(args.generate)
    else:
        text = _read_program(args.file)
        name = os.path.basename(args.file)
    progress = None if args.quiet else sys.stderr
    result = bench.run_sweep(text, name, args.slaves, args.backend, args.chunk,
                             repeats=args.repeat, progress=progress)
    bench.write_csv(args.csv, result.csv_rows)
    dat_path = os.path.splitext(args.csv)[0] + ".dat"
    bench.write_dat(dat_path, result, normalize=args.normalize)
    print(bench.format_report(result, normalize=args.normalize))
    print(f"wrote {args.csv} and {dat_path}")
    return EXIT_OK


def _cmd_verify(args) -> int:
    text = _read_program(args.file)
    program = parse_program(text)
    reference = run_program(program, RunConfig(nslaves=0)).expressions
    checked = 0
    for p in args.slaves:
        for chunk in args.chunk:
            for backend in sorted(BACKENDS):
                for master_computes in (False, True):
                    cfg = RunConfig(nslaves=p, chunk_size=chunk, backend=backend,
                                    master_computes=master_computes)
                    got = run_program(program, cfg).expressions
                    label = (f"nslaves={p} chunk={chunk} backend={backend} "
                             f"master_computes={str(master_computes).lower()}")
                    if got != reference:
                        print(f"MISMATCH {label}")
                        return EXIT_VERIFY
                    print(f"ok {label}")
                    checked += 1
    print(f"verified {checked} configurations against the sequential executor")
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "bench":
            return _cmd_bench(args)
        return _cmd_verify(args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (EngineError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
