"""SMT-LIB2 emission, external solver processes and model parsing."""

from __future__ import annotations

import logging
import os
import re
import shlex
import shutil
import subprocess
import tempfile
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence

from .poly import Poly, Var

log = logging.getLogger(__name__)

SOLVER_PRESETS = {
    "z3": "z3 -smt2 {file}",
    "cvc5": "cvc5 --lang=smt2 --produce-models {file}",
}
DEFAULT_SOLVER = "z3"


class SolverError(RuntimeError):
    pass


class NonRationalModel(SolverError):
    pass


# ---------------------------------------------------------------------------
# emission

_SIMPLE_SYMBOL = re.compile(r"[A-Za-z_~!@$%^&*+=<>.?/-][0-9A-Za-z_~!@$%^&*+=<>.?/-]*$")


def symbol(name: str) -> str:
    return name if _SIMPLE_SYMBOL.match(name) else f"|{name}|"


def smt_rational(c: Fraction) -> str:
    c = Fraction(c)
    mag = abs(c)
    if mag.denominator == 1:
        body = str(mag.numerator)
    else:
        body = f"(/ {mag.numerator} {mag.denominator})"
    return f"(- {body})" if c < 0 else body


def smt_var(v: Var, mu_names: Optional[Sequence[str]] = None) -> str:
    if isinstance(v, int):
        if mu_names is None:
            raise ValueError("distribution variable in an existential relation")
        return symbol(mu_names[v])
    return symbol(v)


def smt_poly(p: Poly, mu_names: Optional[Sequence[str]] = None) -> str:
    terms = []
    for mono, c in p.sorted_terms():
        factors = []
        for v, e in mono:
            factors += [smt_var(v, mu_names)] * e
        if not factors:
            terms.append(smt_rational(c))
        elif c == 1 and len(factors) == 1:
            terms.append(factors[0])
        elif c == 1:
            terms.append(f"(* {' '.join(factors)})")
        else:
            terms.append(f"(* {smt_rational(c)} {' '.join(factors)})")
    if not terms:
        return "0"
    if len(terms) == 1:
        return terms[0]
    return f"(+ {' '.join(terms)})"


def system_logic(relations) -> str:
    return "QF_LRA" if all(r.poly.degree() <= 1 for r in relations) else "QF_NRA"


def emit_smtlib(sys, logic: Optional[str] = None) -> str:
    """Deterministic SMT-LIB2 text for an ExistentialSystem."""
    logic = logic or system_logic(sys.relations)
    out = ["; existential system", "(set-option :produce-models true)", f"(set-logic {logic})"]
    for v in sys.variables:
        out.append(f"(declare-const {symbol(v)} Real)")
    last = None
    for r in sys.relations:
        if r.label != last:
            out.append(f"; {r.label}")
            last = r.label
        op = ">=" if r.rel == "ge" else "="
        out.append(f"(assert ({op} {smt_poly(r.poly)} 0))")
    out.append("(check-sat)")
    if sys.variables:
        out.append("(get-model)")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# s-expressions

_SEXP_TOKEN = re.compile(r'\s*(?:(\()|(\))|("(?:[^"]|"")*")|(\|[^|]*\|)|([^\s()";|]+)|(;[^\n]*))')


def parse_sexps(text: str) -> list:
    """Parse a stream of s-expressions into nested lists of atoms (strings)."""
    stack: list[list] = [[]]
    pos = 0
    while pos < len(text):
        m = _SEXP_TOKEN.match(text, pos)
        if not m or m.end() == pos:
            if text[pos:].strip() == "":
                break
            raise SolverError(f"cannot parse solver output near {text[pos:pos + 40]!r}")
        pos = m.end()
        lp, rp, string, quoted, atom, comment = m.groups()
        if comment:
            continue
        if lp:
            stack.append([])
        elif rp:
            if len(stack) == 1:
                raise SolverError("unbalanced ')' in solver output")
            done = stack.pop()
            stack[-1].append(done)
        elif quoted:
            stack[-1].append(quoted[1:-1])
        elif string:
            stack[-1].append(string)
        elif atom:
            stack[-1].append(atom)
    if len(stack) != 1:
        raise SolverError("unbalanced '(' in solver output")
    return stack[0]


def sexp_value(e) -> Fraction:
    """Evaluate a rational value term from a model."""
    if isinstance(e, str):
        try:
            return Fraction(e)
        except ValueError:
            raise SolverError(f"unparseable value {e!r}") from None
    if not e:
        raise SolverError("empty value term")
    head = e[0]
    if head in ("root-obj", "root-of", "_") or (isinstance(head, str) and head.startswith("root")):
        raise NonRationalModel(
            "non-rational model; rerun with rational-model solver option "
            "or a different Handelman degree"
        )
    args = [sexp_value(x) for x in e[1:]]
    if head == "-":
        return -args[0] if len(args) == 1 else args[0] - sum(args[1:])
    if head == "+":
        return sum(args, Fraction(0))
    if head == "*":
        out = Fraction(1)
        for a in args:
            out *= a
        return out
    if head == "/":
        out = args[0]
        for a in args[1:]:
            out /= a
        return out
    if head == "to_real":
        return args[0]
    raise SolverError(f"unparseable value form ({head} ...)")


def parse_model(raw: str, variables: Iterable[str]) -> dict[str, Fraction]:
    """Rational values for ``variables`` from ``sat`` output with a model."""
    exprs = parse_sexps(raw)
    values: dict[str, Fraction] = {}
    for e in exprs:
        if not isinstance(e, list):
            continue
        items = e[1:] if e and e[0] == "model" else e
        for d in items:
            if isinstance(d, list) and len(d) == 5 and d[0] == "define-fun":
                values[d[1]] = sexp_value(d[4])
    out = {}
    for v in variables:
        if v not in values:
            raise SolverError(f"model is missing variable {v}")
        out[v] = values[v]
    return out


# ---------------------------------------------------------------------------
# processes


@dataclass
class SolverOutcome:
    status: str  # sat | unsat | unknown | timeout | solver-error
    model: Optional[dict[str, Fraction]]
    raw: str
    wall_time: float


def resolve_solver(solver_cmd: str) -> list[str]:
    cmd = SOLVER_PRESETS.get(solver_cmd, solver_cmd)
    return shlex.split(cmd)


def solver_available(solver_cmd: str = DEFAULT_SOLVER) -> bool:
    argv = resolve_solver(solver_cmd)
    return bool(argv) and shutil.which(argv[0]) is not None


def run_solver_text(text: str, solver_cmd: str, timeout: float) -> tuple[str, str, float]:
    """Run the solver on ``text``; returns (kind, output, seconds).

    ``kind`` is "ok", "timeout" or "error".  The script goes through a temp
    file when the command has a ``{file}`` placeholder, stdin otherwise.
    """
    argv = resolve_solver(solver_cmd)
    tmp = None
    stdin_data = None
    if any("{file}" in a for a in argv):
        fd, tmp = tempfile.mkstemp(suffix=".smt2", prefix="distcert-")
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        argv = [a.replace("{file}", tmp) for a in argv]
    else:
        stdin_data = text
    t0 = time.monotonic()
    try:
        try:
            proc = subprocess.Popen(
                argv,
                stdin=subprocess.PIPE if stdin_data is not None else subprocess.DEVNULL,
                stdout=subprocess.PIPE,
                stderr=subprocess.STDOUT,
                text=True,
            )
        except OSError as e:
            return "error", f"cannot start solver {argv[0]!r}: {e}", time.monotonic() - t0
        try:
            out, _ = proc.communicate(stdin_data, timeout=timeout)
        except subprocess.TimeoutExpired:
            proc.kill()
            out, _ = proc.communicate()
            return "timeout", out or "", time.monotonic() - t0
        elapsed = time.monotonic() - t0
        if proc.returncode not in (0, 1) and not out.strip():
            return "error", f"solver exited with status {proc.returncode}", elapsed
        return "ok", out, elapsed
    finally:
        if tmp is not None:
            os.unlink(tmp)


def _status_of(out: str) -> Optional[str]:
    for line in out.splitlines():
        s = line.strip()
        if s in ("sat", "unsat", "unknown"):
            return s
        if s.startswith("timeout"):
            return "timeout"
    return None


def invoke_solver(
    text: str,
    solver_cmd: str = DEFAULT_SOLVER,
    timeout: float = 300.0,
    variables: Optional[Sequence[str]] = None,
) -> SolverOutcome:
    kind, out, elapsed = run_solver_text(text, solver_cmd, timeout)
    if kind == "timeout":
        return SolverOutcome("timeout", None, out, elapsed)
    if kind == "error":
        return SolverOutcome("solver-error", None, out, elapsed)
    status = _status_of(out)
    if status is None:
        return SolverOutcome("solver-error", None, out, elapsed)
    model = None
    if status == "sat":
        if variables is None:
            variables = re.findall(r"\(declare-const (\S+) Real\)", text)
            variables = [v[1:-1] if v.startswith("|") else v for v in variables]
        body = out.split("sat", 1)[1]
        model = parse_model(body, variables)
    return SolverOutcome(status, model, out, elapsed)


# ---------------------------------------------------------------------------
# batched satisfiability queries over the distribution variables


@dataclass
class Query:
    """Is ``all(rows >= 0) and all(strict < 0)`` satisfiable over mu?"""

    rows: Sequence[Poly]
    negated: Poly  # asserted ``negated < 0``
    tag: str = ""


def emit_queries(queries: Sequence[Query], n: int, logic: str) -> str:
    names = [f"mu_{i}" for i in range(n)]
    out = ["; negation checks", "(set-option :produce-models true)", f"(set-logic {logic})"]
    for v in names:
        out.append(f"(declare-const {v} Real)")
    for q in queries:
        out.append(f"; {q.tag}")
        out.append("(push 1)")
        for r in q.rows:
            out.append(f"(assert (>= {smt_poly(r, names)} 0))")
        out.append(f"(assert (< {smt_poly(q.negated, names)} 0))")
        out.append("(check-sat)")
        out.append(f"(get-value ({' '.join(names)}))")
        out.append("(pop 1)")
    return "\n".join(out) + "\n"


@dataclass
class QueryResult:
    status: str  # sat | unsat | unknown | timeout | solver-error
    witness: Optional[tuple[Fraction, ...]] = None


def run_queries(
    queries: Sequence[Query], n: int, solver_cmd: str = DEFAULT_SOLVER,
    timeout: float = 300.0, logic: str = "QF_LRA",
) -> list[QueryResult]:
    if not queries:
        return []
    text = emit_queries(queries, n, logic)
    kind, out, _ = run_solver_text(text, solver_cmd, timeout)
    if kind == "error":
        raise SolverError(out)
    if kind == "timeout":
        return [QueryResult("timeout") for _ in queries]
    results: list[QueryResult] = []
    exprs = parse_sexps(out)
    i = 0
    while i < len(exprs) and len(results) < len(queries):
        e = exprs[i]
        if isinstance(e, str) and e in ("sat", "unsat", "unknown"):
            witness = None
            if i + 1 < len(exprs) and isinstance(exprs[i + 1], list):
                nxt = exprs[i + 1]
                if nxt and nxt[0] != "error":
                    if e == "sat":
                        try:
                            vals = {k: sexp_value(v) for k, v in nxt}
                            witness = tuple(vals[f"mu_{j}"] for j in range(n))
                        except (SolverError, KeyError, ValueError):
                            witness = None
                i += 1
            results.append(QueryResult(e, witness))
        i += 1
    while len(results) < len(queries):
        results.append(QueryResult("solver-error"))
    return results
