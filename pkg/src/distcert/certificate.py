"""Concrete certificates: extraction from solver models and the JSON file format."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Optional, Sequence

from .atoms import Letter
from .automata import Nba
from .mdp import AffineDistStrategy, Mdp, MdpError, MemorylessStrategy, Strategy
from .poly import Poly
from .templates import CertTemplate, StrategyTemplate

FORMAT_TAG = "distcert-certificate/1"

AffineRow = tuple[tuple[Fraction, ...], Fraction]


class CertificateError(ValueError):
    pass


@dataclass(frozen=True)
class CertificateSolution:
    ranking: Mapping[str, AffineRow]
    invariant: Mapping[str, tuple[AffineRow, ...]]
    strategy: Strategy
    strategy_given: bool
    choice: Mapping[tuple[str, Letter], str]
    mode: str = "universal"
    init_witness: Optional[tuple[Fraction, ...]] = None
    extra: dict = field(default_factory=dict, compare=False)

    def ranking_poly(self, q: str) -> Poly:
        coeffs, offset = self.ranking[q]
        return Poly.affine(coeffs, offset)

    def invariant_polys(self, q: str) -> list[Poly]:
        return [Poly.affine(c, d) for c, d in self.invariant[q]]

    def ranking_value(self, q: str, mu: Sequence[Fraction]) -> Fraction:
        coeffs, offset = self.ranking[q]
        return sum((c * x for c, x in zip(coeffs, mu)), Fraction(0)) + offset


def _row(model: Mapping[str, Fraction], coeffs: Sequence[str], offset: str) -> AffineRow:
    return tuple(model[c] for c in coeffs), model[offset]


def extract_solution(
    model: Mapping[str, Fraction],
    cert: CertTemplate,
    mdp: Mdp,
    strategy: Strategy | StrategyTemplate,
    choice: Mapping[tuple[str, Letter], str],
    mode: str = "universal",
    witness_vars: Sequence[str] = (),
) -> CertificateSolution:
    missing = [v for v in cert.variables() if v not in model]
    if missing:
        raise CertificateError(f"model is missing template variables: {', '.join(missing[:5])}")
    ranking = {q: _row(model, *cert.ranking[q]) for q in cert.nba.states}
    invariant = {
        q: tuple(_row(model, c, d) for c, d in cert.invariant[q]) for q in cert.nba.states
    }
    given = not isinstance(strategy, StrategyTemplate)
    if given:
        concrete = strategy
    elif strategy.kind == "memoryless":
        concrete = MemorylessStrategy({sa: model[v] for sa, v in strategy.probs.items()})
    else:
        concrete = AffineDistStrategy(
            {sa: _row(model, e, f) for sa, (e, f) in strategy.numerators.items()},
            strategy.eps_den,
        )
    try:
        concrete.validate(mdp)
    except MdpError as e:
        raise CertificateError(f"solver model violates the strategy class: {e}") from None
    witness = tuple(model[v] for v in witness_vars) if witness_vars else None
    return CertificateSolution(ranking, invariant, concrete, given, dict(choice), mode, witness)


# ---------------------------------------------------------------------------
# file format


def _q(x: Fraction) -> str:
    return str(Fraction(x))


def _row_json(row: AffineRow) -> dict:
    coeffs, offset = row
    return {"coeffs": [_q(c) for c in coeffs], "offset": _q(offset)}


def _row_from(obj: dict, n: int) -> AffineRow:
    coeffs = tuple(Fraction(c) for c in obj["coeffs"])
    if len(coeffs) != n:
        raise CertificateError(f"row has {len(coeffs)} coefficients, expected {n}")
    return coeffs, Fraction(obj["offset"])


def certificate_to_json(sol: CertificateSolution, mdp: Mdp, nba: Nba) -> dict:
    if isinstance(sol.strategy, MemorylessStrategy):
        strat = {
            "kind": "memoryless",
            "probs": {
                s: {a: _q(sol.strategy.at(s, a)) for a in mdp.available[s]} for s in mdp.states
            },
        }
    else:
        strat = {
            "kind": "affine",
            "eps_den": _q(sol.strategy.eps_den),
            "numerators": {
                s: {a: _row_json(sol.strategy.numerators[(s, a)]) for a in mdp.available[s]}
                for s in mdp.states
            },
        }
    strat["given"] = sol.strategy_given
    choice = [
        {"state": q, "letter": sorted(letter), "target": t}
        for (q, letter), t in sorted(
            sol.choice.items(), key=lambda kv: (nba.index[kv[0][0]], sorted(kv[0][1]))
        )
    ]
    return {
        "format": FORMAT_TAG,
        "mode": sol.mode,
        "states": list(mdp.states),
        "automaton_states": list(nba.states),
        "atoms": [a.text for a in nba.ap],
        "ranking": {q: _row_json(sol.ranking[q]) for q in nba.states},
        "invariant": {q: [_row_json(r) for r in sol.invariant[q]] for q in nba.states},
        "strategy": strat,
        "choice": choice,
        "init_witness": None if sol.init_witness is None else [_q(x) for x in sol.init_witness],
    }


def write_certificate(path: str, sol: CertificateSolution, mdp: Mdp, nba: Nba) -> None:
    with open(path, "w") as fh:
        json.dump(certificate_to_json(sol, mdp, nba), fh, indent=2)
        fh.write("\n")


def certificate_from_json(obj: dict, mdp: Mdp, nba: Nba) -> CertificateSolution:
    if obj.get("format") != FORMAT_TAG:
        raise CertificateError(f"not a certificate file (format {obj.get('format')!r})")
    if list(obj["states"]) != list(mdp.states):
        raise CertificateError("certificate states do not match the MDP")
    if list(obj["automaton_states"]) != list(nba.states):
        raise CertificateError("certificate automaton states do not match the specification")
    n = mdp.n
    ranking = {q: _row_from(obj["ranking"][q], n) for q in nba.states}
    invariant = {q: tuple(_row_from(r, n) for r in obj["invariant"][q]) for q in nba.states}
    s = obj["strategy"]
    if s["kind"] == "memoryless":
        strategy: Strategy = MemorylessStrategy(
            {(st, a): Fraction(p) for st, acts in s["probs"].items() for a, p in acts.items()}
        )
    elif s["kind"] == "affine":
        strategy = AffineDistStrategy(
            {(st, a): _row_from(r, n) for st, acts in s["numerators"].items() for a, r in acts.items()},
            Fraction(s["eps_den"]),
        )
    else:
        raise CertificateError(f"unknown strategy kind {s['kind']!r}")
    try:
        strategy.validate(mdp)
    except ValueError as e:
        raise CertificateError(f"invalid strategy in certificate: {e}") from None
    choice = {(c["state"], frozenset(c["letter"])): c["target"] for c in obj["choice"]}
    witness = obj.get("init_witness")
    return CertificateSolution(
        ranking,
        invariant,
        strategy,
        bool(s.get("given", False)),
        choice,
        obj.get("mode", "universal"),
        None if witness is None else tuple(Fraction(x) for x in witness),
    )


def read_certificate(path: str, mdp: Mdp, nba: Nba) -> CertificateSolution:
    with open(path) as fh:
        return certificate_from_json(json.load(fh), mdp, nba)
