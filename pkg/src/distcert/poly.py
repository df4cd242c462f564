"""Sparse exact polynomials over distribution variables and template unknowns.

A variable is either an ``int`` (index ``i`` of the distribution coordinate
mu_i) or a ``str`` (the name of a template unknown).  A monomial is a sorted
tuple of ``(variable, exponent)`` pairs; the empty tuple is the constant
monomial.  Coefficients are :class:`fractions.Fraction`.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping, Sequence, Union

Var = Union[int, str]
Monomial = tuple  # tuple[tuple[Var, int], ...]
Scalar = Union[int, Fraction]

ONE_MONO: Monomial = ()


def var_key(v: Var) -> tuple:
    # mu variables sort before template variables
    if isinstance(v, int):
        return (0, v, "")
    return (1, 0, v)


def _mono_mul(m1: Monomial, m2: Monomial) -> Monomial:
    if not m1:
        return m2
    if not m2:
        return m1
    exps: dict[Var, int] = dict(m1)
    for v, e in m2:
        exps[v] = exps.get(v, 0) + e
    return tuple(sorted(exps.items(), key=lambda ve: var_key(ve[0])))


def mono_degree(m: Monomial) -> int:
    return sum(e for _, e in m)


def mono_sort_key(m: Monomial) -> tuple:
    """Graded lexicographic order: higher total degree first, then by variables."""
    return (-mono_degree(m), tuple((var_key(v), -e) for v, e in m))


def split_monomial(m: Monomial) -> tuple[Monomial, Monomial]:
    """Split ``m`` into its (mu part, template part)."""
    mu = tuple((v, e) for v, e in m if isinstance(v, int))
    tv = tuple((v, e) for v, e in m if not isinstance(v, int))
    return mu, tv


class Poly:
    """Immutable sparse polynomial in canonical form (no zero coefficients)."""

    __slots__ = ("terms", "_hash")

    def __init__(self, terms: Mapping[Monomial, Scalar] | None = None):
        clean: dict[Monomial, Fraction] = {}
        if terms:
            for m, c in terms.items():
                if c:
                    clean[m] = Fraction(c)
        self.terms = clean
        self._hash = None

    # constructors -----------------------------------------------------------
    @classmethod
    def const(cls, c: Scalar) -> "Poly":
        return cls({ONE_MONO: c})

    @classmethod
    def var(cls, v: Var) -> "Poly":
        return cls({((v, 1),): 1})

    @classmethod
    def mu(cls, i: int) -> "Poly":
        return cls.var(i)

    @classmethod
    def affine(cls, coeffs: Sequence[Scalar], offset: Scalar = 0) -> "Poly":
        """``sum_i coeffs[i] * mu_i + offset`` with rational coefficients."""
        terms: dict[Monomial, Scalar] = {((i, 1),): c for i, c in enumerate(coeffs) if c}
        if offset:
            terms[ONE_MONO] = offset
        return cls(terms)

    @classmethod
    def _raw(cls, terms: dict) -> "Poly":
        p = cls.__new__(cls)
        p.terms = terms
        p._hash = None
        return p

    # arithmetic -------------------------------------------------------------
    @staticmethod
    def _coerce(other) -> "Poly":
        if isinstance(other, Poly):
            return other
        if isinstance(other, (int, Fraction)):
            return Poly.const(other)
        return NotImplemented

    def __add__(self, other) -> "Poly":
        other = Poly._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self.terms)
        for m, c in other.terms.items():
            v = out.get(m, 0) + c
            if v:
                out[m] = v
            else:
                out.pop(m, None)
        return Poly._raw(out)

    __radd__ = __add__

    def __neg__(self) -> "Poly":
        return Poly._raw({m: -c for m, c in self.terms.items()})

    def __sub__(self, other) -> "Poly":
        other = Poly._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other) -> "Poly":
        return Poly._coerce(other) - self

    def __mul__(self, other) -> "Poly":
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        if not isinstance(other, Poly):
            return NotImplemented
        out: dict[Monomial, Fraction] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = _mono_mul(m1, m2)
                out[m] = out.get(m, 0) + c1 * c2
        return Poly._raw({m: c for m, c in out.items() if c})

    __rmul__ = __mul__

    def scale(self, c: Scalar) -> "Poly":
        if not c:
            return Poly()
        c = Fraction(c)
        return Poly._raw({m: v * c for m, v in self.terms.items()})

    def __pow__(self, n: int) -> "Poly":
        out = Poly.const(1)
        for _ in range(n):
            out = out * self
        return out

    # comparison -------------------------------------------------------------
    def __eq__(self, other) -> bool:
        other = Poly._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    def __bool__(self) -> bool:
        return bool(self.terms)

    # inspection -------------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(not m for m in self.terms)

    def constant_term(self) -> Fraction:
        return self.terms.get(ONE_MONO, Fraction(0))

    def degree(self) -> int:
        return max((mono_degree(m) for m in self.terms), default=0)

    def mu_degree(self) -> int:
        return max(
            (sum(e for v, e in m if isinstance(v, int)) for m in self.terms), default=0
        )

    def template_degree(self) -> int:
        return max(
            (sum(e for v, e in m if not isinstance(v, int)) for m in self.terms),
            default=0,
        )

    def variables(self) -> set:
        return {v for m in self.terms for v, _ in m}

    def template_vars(self) -> set[str]:
        return {v for v in self.variables() if isinstance(v, str)}

    def has_template_vars(self) -> bool:
        return any(not isinstance(v, int) for m in self.terms for v, _ in m)

    def sorted_terms(self) -> list[tuple[Monomial, Fraction]]:
        return sorted(self.terms.items(), key=lambda mc: mono_sort_key(mc[0]))

    def by_mu_monomial(self) -> dict[Monomial, "Poly"]:
        """Group terms by their mu-monomial; values are polynomials in template vars."""
        out: dict[Monomial, dict] = {}
        for m, c in self.terms.items():
            mu, tv = split_monomial(m)
            out.setdefault(mu, {})[tv] = c
        return {mu: Poly._raw(t) for mu, t in out.items()}

    def affine_coeffs(self, n: int) -> tuple[list[Fraction], Fraction]:
        """Coefficients of a template-free affine polynomial in mu_0..mu_{n-1}."""
        coeffs = [Fraction(0)] * n
        offset = Fraction(0)
        for m, c in self.terms.items():
            if not m:
                offset = c
            elif len(m) == 1 and isinstance(m[0][0], int) and m[0][1] == 1:
                coeffs[m[0][0]] = c
            else:
                raise ValueError(f"not a template-free affine polynomial: {self}")
        return coeffs, offset

    # evaluation -------------------------------------------------------------
    def substitute_mu(self, images: Sequence["Poly"]) -> "Poly":
        """Replace each mu_i by ``images[i]``."""
        n = len(images)
        out = Poly()
        powers: dict[tuple[int, int], Poly] = {}
        for m, c in self.terms.items():
            term = Poly._raw({tuple((v, e) for v, e in m if not isinstance(v, int)): c})
            for v, e in m:
                if isinstance(v, int):
                    if v >= n:
                        raise ValueError(f"no image for mu_{v} (got {n} images)")
                    key = (v, e)
                    if key not in powers:
                        powers[key] = images[v] ** e
                    term = term * powers[key]
            out = out + term
        return out

    def subs(self, assignment: Mapping[Var, Scalar]) -> "Poly":
        """Partially evaluate: substitute the given variables, keep the rest."""
        out: dict[Monomial, Fraction] = {}
        for m, c in self.terms.items():
            coef = c
            rest = []
            for v, e in m:
                if v in assignment:
                    coef *= Fraction(assignment[v]) ** e
                else:
                    rest.append((v, e))
            if coef:
                key = tuple(rest)
                out[key] = out.get(key, 0) + coef
        return Poly._raw({m: c for m, c in out.items() if c})

    def eval(self, assignment: Mapping[Var, Scalar]) -> Fraction:
        total = Fraction(0)
        for m, c in self.terms.items():
            val = c
            for v, e in m:
                try:
                    val *= Fraction(assignment[v]) ** e
                except KeyError:
                    raise KeyError(f"unassigned variable {_fmt_var(v)}") from None
            total += val
        return total

    def eval_mu(self, mu: Sequence[Scalar]) -> Fraction:
        return self.eval(dict(enumerate(mu)))

    # display ----------------------------------------------------------------
    def __repr__(self) -> str:
        return f"Poly({self})"

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for m, c in self.sorted_terms():
            body = "*".join(
                _fmt_var(v) if e == 1 else f"{_fmt_var(v)}^{e}" for v, e in m
            )
            if not body:
                parts.append(str(c))
            elif c == 1:
                parts.append(body)
            elif c == -1:
                parts.append("-" + body)
            else:
                parts.append(f"{c}*{body}")
        return " + ".join(parts).replace("+ -", "- ")


def _fmt_var(v: Var) -> str:
    return f"mu{v}" if isinstance(v, int) else v


def poly_sum(polys: Iterable[Poly]) -> Poly:
    out: dict[Monomial, Fraction] = {}
    for p in polys:
        for m, c in p.terms.items():
            out[m] = out.get(m, 0) + c
    return Poly._raw({m: c for m, c in out.items() if c})


def simplex_rows(n: int) -> list[Poly]:
    """mu_i >= 0 for every i, then sum(mu) - 1 >= 0 and 1 - sum(mu) >= 0."""
    rows = [Poly.mu(i) for i in range(n)]
    total = Poly.affine([1] * n, -1)
    return rows + [total, -total]
