"""Büchi automata over affine atoms: HOA-subset parsing and a fixed LTL pattern table."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

from .atoms import DEFAULT_AP_CAP, AffineAtom, Letter, all_letters, parse_atom, parse_proposition

# Edge labels are small boolean ASTs over AP indices:
#   ("t",) ("f",) ("ap", i) ("not", x) ("and", x, y) ("or", x, y)
Label = tuple

TRUE: Label = ("t",)


class AutomatonError(ValueError):
    pass


class UnsupportedHoa(AutomatonError):
    pass


def eval_label(label: Label, letter: Letter) -> bool:
    tag = label[0]
    if tag == "t":
        return True
    if tag == "f":
        return False
    if tag == "ap":
        return label[1] in letter
    if tag == "not":
        return not eval_label(label[1], letter)
    if tag == "and":
        return eval_label(label[1], letter) and eval_label(label[2], letter)
    if tag == "or":
        return eval_label(label[1], letter) or eval_label(label[2], letter)
    raise ValueError(f"bad label {label!r}")


def format_label(label: Label) -> str:
    tag = label[0]
    if tag == "t":
        return "t"
    if tag == "f":
        return "f"
    if tag == "ap":
        return str(label[1])
    if tag == "not":
        inner = format_label(label[1])
        return "!" + (inner if label[1][0] in ("ap", "t", "f", "not") else f"({inner})")
    op = " & " if tag == "and" else " | "
    parts = []
    for sub in label[1:]:
        s = format_label(sub)
        if sub[0] in ("and", "or") and sub[0] != tag:
            s = f"({s})"
        parts.append(s)
    return op.join(parts)


def _and(*xs: Label) -> Label:
    out = xs[0]
    for x in xs[1:]:
        out = ("and", out, x)
    return out


def _or(*xs: Label) -> Label:
    out = xs[0]
    for x in xs[1:]:
        out = ("or", out, x)
    return out


def _not(x: Label) -> Label:
    if x[0] == "not":
        return x[1]
    return ("not", x)


@dataclass(frozen=True)
class Nba:
    states: tuple[str, ...]
    ap: tuple[AffineAtom, ...]
    delta: Mapping[tuple[str, Letter], tuple[str, ...]]
    q0: str
    accepting: frozenset
    edges: tuple[tuple[str, Label, str], ...] = ()
    index: Mapping[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "index", {q: i for i, q in enumerate(self.states)})
        if self.q0 not in self.index:
            raise AutomatonError(f"initial state {self.q0} not a state")
        if not self.accepting <= set(self.states):
            raise AutomatonError("accepting states must be states")
        for (q, _), targets in self.delta.items():
            if q not in self.index or any(t not in self.index for t in targets):
                raise AutomatonError("transition references unknown state")

    @classmethod
    def from_edges(
        cls,
        states: Sequence[str],
        ap: Sequence[AffineAtom],
        edges: Iterable[tuple[str, Label, str]],
        q0: str,
        accepting: Iterable[str],
        cap: int = DEFAULT_AP_CAP,
    ) -> "Nba":
        if len(ap) > cap:
            raise AutomatonError(f"{len(ap)} atomic propositions exceed the cap of {cap}")
        edges = tuple(edges)
        order = {q: i for i, q in enumerate(states)}
        delta: dict[tuple[str, Letter], tuple[str, ...]] = {}
        for q in states:
            for letter in all_letters(len(ap)):
                targets = {t for (s, lab, t) in edges if s == q and eval_label(lab, letter)}
                delta[(q, letter)] = tuple(sorted(targets, key=order.__getitem__))
        return cls(tuple(states), tuple(ap), delta, q0, frozenset(accepting), edges)

    def succ(self, q: str, letter: Letter) -> tuple[str, ...]:
        return self.delta.get((q, letter), ())

    def is_accepting(self, q: str) -> bool:
        return q in self.accepting

    def is_deterministic(self) -> bool:
        return all(len(t) <= 1 for t in self.delta.values())

    def post(self, current: Iterable[str], letter: Letter) -> frozenset:
        return frozenset(t for q in current for t in self.succ(q, letter))

    def to_hoa(self) -> str:
        lines = ["HOA: v1", f"States: {len(self.states)}", f"Start: {self.index[self.q0]}"]
        lines.append(
            f"AP: {len(self.ap)}" + "".join(f' "{_atom_hoa(a)}"' for a in self.ap)
        )
        lines += ["acc-name: Buchi", "Acceptance: 1 Inf(0)", "--BODY--"]
        for q in self.states:
            acc = " {0}" if q in self.accepting else ""
            lines.append(f'State: {self.index[q]} "{q}"{acc}')
            for (s, lab, t) in self.edges:
                if s == q:
                    lines.append(f"[{format_label(lab)}] {self.index[t]}")
        lines.append("--END--")
        return "\n".join(lines) + "\n"


def _atom_hoa(a: AffineAtom) -> str:
    if a.text:
        return a.text
    terms = [f"{c}*V{i}" for i, c in enumerate(a.coeffs) if c]
    terms.append(str(a.offset))
    return " + ".join(terms) + " >= 0"


# ---------------------------------------------------------------------------
# HOA subset

_LABEL_TOKEN = re.compile(r"\s*(\d+|t|f|!|&|\||\(|\))")


def parse_label(text: str, n_ap: int) -> Label:
    toks = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _LABEL_TOKEN.match(text, pos)
        if not m:
            raise AutomatonError(f"bad edge label {text!r}")
        toks.append(m.group(1))
        pos = m.end()
    i = 0

    def peek():
        return toks[i] if i < len(toks) else None

    def expr_or():
        nonlocal i
        x = expr_and()
        while peek() == "|":
            i += 1
            x = ("or", x, expr_and())
        return x

    def expr_and():
        nonlocal i
        x = unary()
        while peek() == "&":
            i += 1
            x = ("and", x, unary())
        return x

    def unary():
        nonlocal i
        tok = peek()
        if tok is None:
            raise AutomatonError(f"truncated edge label {text!r}")
        i += 1
        if tok == "!":
            return ("not", unary())
        if tok == "(":
            x = expr_or()
            if peek() != ")":
                raise AutomatonError(f"unbalanced parentheses in {text!r}")
            i += 1
            return x
        if tok == "t":
            return TRUE
        if tok == "f":
            return ("f",)
        if tok.isdigit():
            k = int(tok)
            if k >= n_ap:
                raise AutomatonError(f"AP index {k} out of range in label {text!r}")
            return ("ap", k)
        raise AutomatonError(f"unexpected {tok!r} in label {text!r}")

    lab = expr_or()
    if i != len(toks):
        raise AutomatonError(f"trailing input in label {text!r}")
    return lab


def _hoa_strings(text: str) -> list[str]:
    return re.findall(r'"((?:[^"\\]|\\.)*)"', text)


def parse_hoa(text: str, n_states: Optional[int] = None) -> Nba:
    """Parse the state-based Büchi subset of the HOA format.

    AP strings must be affine atoms over ``V0..V{n-1}``.  When ``n_states`` is
    omitted it is inferred from the largest ``Vi`` mentioned.
    """
    header, sep, rest = text.partition("--BODY--")
    if not sep:
        raise AutomatonError("missing --BODY--")
    body, sep, _ = rest.partition("--END--")
    if not sep:
        raise AutomatonError("missing --END--")

    n_q = None
    start = None
    ap_strings: list[str] = []
    acceptance = None
    acc_name = None
    for raw in header.splitlines():
        line = raw.strip()
        if not line:
            continue
        key, _, val = line.partition(":")
        key = key.strip()
        val = val.strip()
        if key == "HOA":
            if val != "v1":
                raise UnsupportedHoa(f"unsupported HOA version {val!r}")
        elif key == "States":
            n_q = int(val)
        elif key == "Start":
            if start is not None:
                raise UnsupportedHoa("unsupported: multiple initial states")
            if "&" in val:
                raise UnsupportedHoa("unsupported: alternation (conjunctive initial states)")
            start = int(val)
        elif key == "AP":
            parts = val.split(None, 1)
            k = int(parts[0])
            ap_strings = _hoa_strings(parts[1]) if len(parts) > 1 else []
            if len(ap_strings) != k:
                raise AutomatonError(f"AP declares {k} propositions, found {len(ap_strings)}")
        elif key == "Acceptance":
            acceptance = " ".join(val.split())
        elif key == "acc-name":
            acc_name = val.split()[0]
        elif key == "Alias":
            raise UnsupportedHoa("unsupported: aliases")
        elif key in ("name", "tool", "properties", "controllable-AP") or key.startswith("v"):
            if key == "properties" and "univ-branch" in val:
                raise UnsupportedHoa("unsupported: alternation (univ-branch)")
        else:
            # unknown headers are tolerated per the HOA convention for lowercase keys
            if key[:1].isupper():
                raise UnsupportedHoa(f"unsupported header {key!r}")

    if acceptance not in ("1 Inf(0)", "0 t"):
        raise UnsupportedHoa(f"unsupported acceptance {acceptance!r} (only Büchi: 1 Inf(0))")
    if acc_name is not None and acc_name not in ("Buchi", "all"):
        raise UnsupportedHoa(f"unsupported acceptance {acc_name!r} (only Büchi)")
    if n_q is None or start is None:
        raise AutomatonError("HOA header needs States: and Start:")

    if n_states is None:
        idx = [int(v) for s in ap_strings for v in re.findall(r"V(\d+)", s)]
        n_states = max(idx) + 1 if idx else 1
    ap = [parse_atom(s, n_states) for s in ap_strings]

    names = [f"q{i}" for i in range(n_q)]
    accepting: set[str] = set(names) if acceptance == "0 t" else set()
    edges: list[tuple[str, Label, str]] = []
    current = None
    for raw in body.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("State:"):
            m = re.match(r'State:\s*(\[[^\]]*\])?\s*(\d+)\s*("(?:[^"\\]|\\.)*")?\s*(\{[^}]*\})?\s*$', line)
            if not m:
                raise AutomatonError(f"bad state line {line!r}")
            if m.group(1):
                raise UnsupportedHoa("unsupported: state labels")
            sid = int(m.group(2))
            if sid >= n_q:
                raise AutomatonError(f"state {sid} out of range")
            current = names[sid]
            if m.group(4):
                marks = m.group(4)[1:-1].split()
                if marks and marks != ["0"]:
                    raise UnsupportedHoa(f"unsupported acceptance sets {m.group(4)}")
                if marks:
                    accepting.add(current)
            continue
        if current is None:
            raise AutomatonError(f"edge before any State: line: {line!r}")
        m = re.match(r"(\[[^\]]*\])?\s*([\d&\s]+?)\s*(\{[^}]*\})?\s*$", line)
        if not m:
            raise AutomatonError(f"bad edge line {line!r}")
        if m.group(3):
            raise UnsupportedHoa("unsupported: transition-based acceptance")
        if not m.group(1):
            raise UnsupportedHoa("unsupported: implicit edge labels")
        dest = m.group(2).strip()
        if "&" in dest:
            raise UnsupportedHoa("unsupported: alternation (universal branching)")
        t = int(dest)
        if t >= n_q:
            raise AutomatonError(f"edge target {t} out of range")
        edges.append((current, parse_label(m.group(1)[1:-1], len(ap)), names[t]))
    return Nba.from_edges(names, ap, edges, names[start], accepting)


# ---------------------------------------------------------------------------
# LTL pattern table

Literal = tuple  # (ap index, positive?)

PATTERN_STATES = {
    "G p": 1,
    "F p": 2,
    "G F p": 2,
    "F G p": 2,
    "p U q": 2,
    "G (p -> F q)": 2,
    "(G F p) & (G q)": 2,
}


def _lit(l: Literal) -> Label:
    idx, pos = l
    return ("ap", idx) if pos else ("not", ("ap", idx))


def _pattern_edges(name: str, p: Label, q: Optional[Label]):
    """(states, edges, accepting) for a named pattern over literal labels p, q."""
    if name == "G p":
        return ["q0"], [("q0", p, "q0")], ["q0"]
    if name == "F p":
        return ["q0", "q1"], [("q0", _not(p), "q0"), ("q0", p, "q1"), ("q1", TRUE, "q1")], ["q1"]
    if name == "G F p":
        return ["q0", "q1"], [("q0", _not(p), "q0"), ("q0", p, "q1"), ("q1", TRUE, "q0")], ["q1"]
    if name == "F G p":
        return ["q0", "q1"], [("q0", TRUE, "q0"), ("q0", p, "q1"), ("q1", p, "q1")], ["q1"]
    if name == "p U q":
        return (
            ["q0", "q1"],
            [("q0", _and(p, _not(q)), "q0"), ("q0", q, "q1"), ("q1", TRUE, "q1")],
            ["q1"],
        )
    if name == "G (p -> F q)":
        return (
            ["q0", "q1"],
            [
                ("q0", _or(_not(p), q), "q0"),
                ("q0", _and(p, _not(q)), "q1"),
                ("q1", _not(q), "q1"),
                ("q1", q, "q0"),
            ],
            ["q0"],
        )
    if name == "(G F p) & (G q)":
        return (
            ["q0", "q1"],
            [("q0", _and(q, _not(p)), "q0"), ("q0", _and(q, p), "q1"), ("q1", q, "q0")],
            ["q1"],
        )
    raise KeyError(name)


_LIT = r"(!?)([pq])"
_PATTERNS = [
    ("G p", re.compile(rf"^G{_LIT}$")),
    ("F p", re.compile(rf"^F{_LIT}$")),
    ("G F p", re.compile(rf"^GF{_LIT}$")),
    ("F G p", re.compile(rf"^FG{_LIT}$")),
    ("p U q", re.compile(rf"^{_LIT}U{_LIT}$")),
    ("G (p -> F q)", re.compile(rf"^G\({_LIT}->F{_LIT}\)$")),
    ("(G F p) & (G q)", re.compile(rf"^\(?GF{_LIT}\)?&\(?G{_LIT}\)?$")),
]


def _normalise(text: str) -> str:
    s = text.replace("→", "->").replace("¬", "!").replace("∧", "&")
    s = re.sub(r"\s+", "", s)
    while s.startswith("(") and s.endswith(")") and _balanced(s[1:-1]):
        s = s[1:-1]
    return s


def _balanced(s: str) -> bool:
    depth = 0
    for ch in s:
        depth += ch == "("
        depth -= ch == ")"
        if depth < 0:
            return False
    return depth == 0


def _match_pattern(text: str) -> tuple[str, list[Literal]]:
    """Pattern name and the (placeholder index, polarity) literals it uses."""
    s = _normalise(text)
    for name, rx in _PATTERNS:
        m = rx.match(s)
        if m:
            groups = m.groups()
            lits = [
                (0 if var == "p" else 1, neg != "!")
                for neg, var in zip(groups[0::2], groups[1::2])
            ]
            return name, lits
    raise AutomatonError(
        f"unrecognised specification {text!r}; supported patterns are "
        + ", ".join(PATTERN_STATES)
        + " (p, q atoms or negated atoms). Use HOA input for anything else."
    )


def _pattern_nba(name: str, lits: Sequence[Literal], props: Sequence[Label], ap) -> Nba:
    labels = [props[i] if pos else _not(props[i]) for i, pos in lits]
    p = labels[0]
    q = labels[1] if len(labels) > 1 else None
    states, edges, acc = _pattern_edges(name, p, q)
    return Nba.from_edges(states, ap, edges, states[0], acc)


def parse_ltl_pattern(text: str, ap_bindings: Sequence[AffineAtom]) -> Nba:
    """Build the NBA of a supported pattern.

    ``text`` uses the placeholders ``p`` and ``q`` (optionally negated with
    ``!``); ``ap_bindings`` supplies the atom for ``p`` then ``q``.
    """
    name, lits = _match_pattern(text)
    for i, _ in lits:
        if i >= len(ap_bindings):
            raise AutomatonError(
                f"pattern uses {'pq'[i]!r} but only {len(ap_bindings)} atoms bound"
            )
    used = sorted({i for i, _ in lits})
    ap = [ap_bindings[i] for i in used]
    props: list[Label] = [TRUE, TRUE]
    for new, old in enumerate(used):
        props[old] = ("ap", new)
    return _pattern_nba(name, lits, props, ap)


_QUOTED = re.compile(r'"([^"]*)"')


def parse_spec(text: str, n_states: int) -> Nba:
    """Parse a pattern written with quoted propositions, e.g. ``G F "V1>=0.249"``.

    A quoted proposition may be an equality or a comparison chain such as
    ``0.334>=V1>=0.332``; it then stands for the conjunction of its atoms.
    """
    atoms: list[AffineAtom] = []
    props: list[tuple[tuple, Label]] = []

    def atom_index(atom: AffineAtom) -> int:
        for i, a in enumerate(atoms):
            if a.key() == atom.key():
                return i
        atoms.append(atom)
        return len(atoms) - 1

    def repl(m: re.Match) -> str:
        parts = [atom_index(a) for a in parse_proposition(m.group(1), n_states)]
        key = tuple(sorted(set(parts)))
        for i, (k, _) in enumerate(props):
            if k == key:
                return " " + "pq"[i] + " "
        if len(props) == 2:
            raise AutomatonError(
                f"{text!r} uses more than two distinct propositions; use HOA input instead"
            )
        props.append((key, _and(*(("ap", j) for j in key))))
        return " " + "pq"[len(props) - 1] + " "

    pattern = _QUOTED.sub(repl, text)
    name, lits = _match_pattern(pattern)
    for i, _ in lits:
        if i >= len(props):
            raise AutomatonError(f"pattern uses {'pq'[i]!r} but only {len(props)} propositions given")
    return _pattern_nba(name, lits, [lab for _, lab in props], atoms)


# ---------------------------------------------------------------------------
# word acceptance on ultimately periodic words


def has_accepting_lasso(
    nba: Nba, starts: Iterable[str], stem: Sequence[Letter], loop: Sequence[Letter]
) -> bool:
    """Whether some run from ``starts`` on ``stem . loop^omega`` is accepting."""
    if not loop:
        raise ValueError("loop must be nonempty")
    word = list(stem) + list(loop)
    n = len(word)
    k = len(stem)

    def nxt(node):
        q, pos = node
        npos = pos + 1 if pos + 1 < n else k
        return [(t, npos) for t in nba.succ(q, word[pos])]

    seen = set()
    frontier = [(q, 0) for q in starts]
    seen.update(frontier)
    while frontier:
        node = frontier.pop()
        for m in nxt(node):
            if m not in seen:
                seen.add(m)
                frontier.append(m)
    for node in seen:
        q, pos = node
        if q not in nba.accepting or pos < k:
            continue
        # is node on a cycle?
        stack = list(nxt(node))
        visited = set(stack)
        while stack:
            m = stack.pop()
            if m == node:
                return True
            for x in nxt(m):
                if x not in visited:
                    visited.add(x)
                    stack.append(x)
    return False


def accepts_lasso(nba: Nba, stem: Sequence[Letter], loop: Sequence[Letter]) -> bool:
    return has_accepting_lasso(nba, [nba.q0], stem, loop)
