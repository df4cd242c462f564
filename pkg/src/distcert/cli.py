"""Command-line interface.

Exit codes: 0 solved / validated, 1 not solved or rejected, 2 usage error,
3 internal error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import traceback
from fractions import Fraction
from typing import Optional, Sequence

from .atoms import AtomSyntaxError
from .automata import AutomatonError, parse_hoa, parse_spec
from .bench import DEFAULT_DAMPING, GRIDWORLD_3X3, gen_gridworld, gen_pagerank
from .certificate import CertificateError, read_certificate, write_certificate
from .mdp import MdpError, MdpSyntaxError, parse_mdp, parse_rational, parse_strategy, format_strategy
from .pipeline import ENCODINGS, Config, run
from .region import InitError, parse_init, parse_init_arg
from .smt import DEFAULT_SOLVER, SolverError, solver_available
from .templates import TemplateError
from .validate import DEFAULT_TOLERANCE, check_certificate, simulate_monitor

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_INTERNAL = 0, 1, 2, 3

USER_ERRORS = (
    MdpSyntaxError, MdpError, AtomSyntaxError, AutomatonError, InitError,
    CertificateError, TemplateError, ValueError, OSError,
)


class UsageError(Exception):
    pass


def _read(path: str) -> str:
    with open(path) as fh:
        return fh.read()


def _load_instance(args):
    mdp = parse_mdp(_read(args.mdp))
    if args.hoa:
        nba = parse_hoa(_read(args.hoa), mdp.n)
    elif args.spec_file:
        nba = parse_spec(_read(args.spec_file).strip(), mdp.n)
    elif args.spec:
        nba = parse_spec(args.spec, mdp.n)
    else:
        raise UsageError("one of --spec, --spec-file or --hoa is required")
    if os.path.isfile(args.init):
        init = parse_init(_read(args.init), mdp.n)
    else:
        init = parse_init_arg(args.init, mdp.n)
    return mdp, nba, init


def _config(args) -> Config:
    return Config(
        mode=args.mode,
        strategy_class=getattr(args, "strategy_class", "memoryless"),
        invariant_size=args.invariant_size,
        handelman_degree=args.handelman_degree,
        choice_budget=args.choice_budget,
        timeout=args.timeout,
        solver=args.solver,
        encoding=args.encoding,
        workers=args.workers,
        simplify=not getattr(args, "no_simplify", False),
    )


def _write_json(path: Optional[str], obj) -> None:
    if path:
        with open(path, "w") as fh:
            json.dump(obj, fh, indent=2)
            fh.write("\n")


def _emit(path: str, texts: Sequence[str]) -> list[str]:
    if len(texts) == 1:
        paths = [path]
    else:
        stem, ext = os.path.splitext(path)
        paths = [f"{stem}-{k}{ext or '.smt2'}" for k in range(len(texts))]
    for p, text in zip(paths, texts):
        with open(p, "w") as fh:
            fh.write(text)
    return paths


def _require_solver(name: str) -> None:
    if not solver_available(name):
        raise UsageError(f"solver {name!r} not found on PATH; install it or pass --solver")


def cmd_solve(args) -> int:
    mdp, nba, init = _load_instance(args)
    strategy = None
    if args.command == "verify":
        strategy = parse_strategy(_read(args.strategy), mdp)
    if not args.emit_smt:
        _require_solver(args.solver)
    result = run(mdp, nba, init, strategy, _config(args), emit_only=bool(args.emit_smt))
    if args.emit_smt:
        paths = _emit(args.emit_smt, result.emitted)
        print(f"wrote {len(paths)} SMT-LIB2 file(s): {', '.join(paths)}")
        return EXIT_OK
    sys.stdout.write(result.text())
    if result.solution is not None:
        if args.out:
            write_certificate(args.out, result.solution, mdp, nba)
            print(f"certificate written to {args.out}")
        if args.command == "synthesize":
            sys.stdout.write(format_strategy(result.solution.strategy, mdp))
    _write_json(args.report, result.to_json())
    return result.exit_code


def cmd_simulate(args) -> int:
    mdp, nba, init = _load_instance(args)
    strategy = parse_strategy(_read(args.strategy), mdp)
    if len(init.points) != 1:
        raise UsageError("simulate needs a single initial point (--init point:...)")
    report = simulate_monitor(mdp, strategy, init.points[0], nba, args.steps, parse_rational(args.tol))
    sys.stdout.write(report.text(nba))
    _write_json(args.report, report.to_json(nba))
    return EXIT_FAIL if report.verdict == "inconsistent" else EXIT_OK


def cmd_check(args) -> int:
    mdp, nba, init = _load_instance(args)
    _require_solver(args.solver)
    sol = read_certificate(args.cert, mdp, nba)
    report = check_certificate(sol, mdp, nba, init, args.mode or sol.mode, args.solver, args.timeout)
    sys.stdout.write(report.text())
    _write_json(args.report, report.to_json())
    return EXIT_OK if report.ok else EXIT_FAIL


def _cell(text: str) -> tuple[int, int]:
    try:
        r, c = (int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected ROW,COL, got {text!r}") from None
    return r, c


def _slip(text: str) -> tuple[tuple[int, int], Fraction]:
    try:
        r, c, p = text.split(",")
        return (int(r), int(c)), parse_rational(p)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected ROW,COL,PROB, got {text!r}") from None


def cmd_gridworld(args) -> int:
    if args.preset:
        layout = dict(GRIDWORLD_3X3)
    elif args.target is None:
        raise UsageError("--target is required without --preset")
    else:
        layout = {"n": args.size, "walls": args.wall or (), "slippery": args.slip or (),
                  "targets": [args.target]}
    inst = gen_gridworld(
        **layout,
        avoid=args.avoid,
        threshold=parse_rational(args.threshold),
        avoid_bound=parse_rational(args.avoid_bound),
    )
    os.makedirs(args.out_dir, exist_ok=True)
    base = os.path.join(args.out_dir, args.name)
    with open(base + ".mdp", "w") as fh:
        fh.write(inst.mdp.to_text())
    with open(base + ".spec", "w") as fh:
        fh.write(inst.spec + "\n")
    with open(base + ".init", "w") as fh:
        fh.write(inst.init + "\n")
    print(f"{base}.mdp ({inst.mdp.n} states), spec {inst.spec}")
    return EXIT_OK


def cmd_pagerank(args) -> int:
    mdp = gen_pagerank(_read(args.graph), parse_rational(args.damping))
    text = mdp.to_text()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
        print(f"{args.out} ({mdp.n} states)")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _instance_args(p: argparse.ArgumentParser, init_required: bool = True) -> None:
    p.add_argument("--mdp", required=True, help="MDP model file")
    p.add_argument("--spec", help='specification pattern, e.g. \'G F "V1>=0.249"\'')
    p.add_argument("--spec-file", help="file holding the specification pattern")
    p.add_argument("--hoa", help="Büchi automaton in the HOA subset")
    p.add_argument("--init", required=init_required, default="simplex",
                   help="point:1/3,1/3,1/3 | simplex | inline relations | init file")
    p.add_argument("--report", help="write the structured JSON report here")


def _solver_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--solver", default=DEFAULT_SOLVER, help="z3 | cvc5 | command with {file}")
    p.add_argument("--timeout", type=float, default=300.0, help="seconds per solver call")


def _solve_args(p: argparse.ArgumentParser) -> None:
    _solver_args(p)
    p.add_argument("--mode", choices=("universal", "existential"), default="universal")
    p.add_argument("--invariant-size", type=int, default=1)
    p.add_argument("--handelman-degree", type=int, default=2)
    p.add_argument("--choice-budget", type=int, default=256)
    p.add_argument("--encoding", choices=sorted(ENCODINGS), default="auto",
                   help="strengthened drops template rows from premises (linear for fixed strategies)")
    p.add_argument("--workers", type=int, default=1, help="parallel solver processes")
    p.add_argument("--emit-smt", metavar="PATH", help="write SMT-LIB2 and stop without solving")
    p.add_argument("--out", help="certificate output file")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="distcert", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="certify a given strategy")
    _instance_args(p)
    p.add_argument("--strategy", required=True, help="strategy file")
    _solve_args(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("synthesize", help="synthesize a strategy with a certificate")
    _instance_args(p)
    p.add_argument("--class", dest="strategy_class", choices=("memoryless", "distributional"),
                   default="memoryless")
    p.add_argument("--no-simplify", action="store_true",
                   help="keep the solver's strategy instead of trying its deterministic rounding")
    _solve_args(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("simulate", help="run the trajectory with an automaton monitor")
    _instance_args(p)
    p.add_argument("--strategy", required=True)
    p.add_argument("--steps", type=int, default=200)
    p.add_argument("--tol", default=str(DEFAULT_TOLERANCE), help="convergence tolerance")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("check-cert", help="validate a certificate file")
    _instance_args(p)
    p.add_argument("--cert", required=True)
    p.add_argument("--mode", choices=("universal", "existential"))
    _solver_args(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("gen-gridworld", help="write a gridworld benchmark")
    p.add_argument("--size", type=int, default=3)
    p.add_argument("--wall", type=_cell, action="append", metavar="ROW,COL")
    p.add_argument("--slip", type=_slip, action="append", metavar="ROW,COL,PROB")
    p.add_argument("--preset", choices=("3x3",), help="bundled layout; overrides size, walls, slips and target")
    p.add_argument("--target", type=_cell, metavar="ROW,COL")
    p.add_argument("--avoid", type=_cell, metavar="ROW,COL")
    p.add_argument("--threshold", default="0.9")
    p.add_argument("--avoid-bound", default="0.5")
    p.add_argument("--out-dir", default=".")
    p.add_argument("--name", default="grid")
    p.set_defaults(func=cmd_gridworld)

    p = sub.add_parser("gen-pagerank", help="random-surfer chain from an edge list")
    p.add_argument("--graph", required=True)
    p.add_argument("--damping", default=str(DEFAULT_DAMPING))
    p.add_argument("--out")
    p.set_defaults(func=cmd_pagerank)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except SolverError as e:
        print(f"solver error: {e}", file=sys.stderr)
        return EXIT_FAIL
    except USER_ERRORS as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except Exception:  # noqa: BLE001 - last-resort report
        traceback.print_exc()
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
