"""Reference implementations used only to cross-check the package.

They share no code with distcert: plain Gaussian elimination for stationary
distributions, direct LTL semantics on lasso words, and textbook formulas
for the hand-worked examples.
"""

from fractions import Fraction


def solve_linear(matrix, rhs):
    """Exact Gauss-Jordan solve of a square nonsingular system."""
    n = len(matrix)
    aug = [[Fraction(x) for x in row] + [Fraction(b)] for row, b in zip(matrix, rhs)]
    for col in range(n):
        pivot = next(r for r in range(col, n) if aug[r][col] != 0)
        aug[col], aug[pivot] = aug[pivot], aug[col]
        pv = aug[col][col]
        aug[col] = [x / pv for x in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[col])]
    return [row[-1] for row in aug]


def stationary(rows):
    """Stationary distribution of a row-stochastic matrix with a unique one."""
    n = len(rows)
    # (P^T - I) x = 0 with the last equation replaced by sum x = 1
    eqs = [[rows[j][i] - (1 if i == j else 0) for j in range(n)] for i in range(n)]
    eqs[-1] = [1] * n
    rhs = [0] * (n - 1) + [1]
    return solve_linear(eqs, rhs)


def running_update(mu):
    """The running example under b at A, written out by hand."""
    a, b, c = mu
    return (c / 2, a, b + c / 2)


# --- LTL on ultimately periodic words -------------------------------------
# A word is stem + loop^omega over valuations {"p": bool, "q": bool}.


def _positions(stem, loop):
    word = list(stem) + list(loop)
    k = len(stem)

    def nxt(i):
        return i + 1 if i + 1 < len(word) else k

    return word, k, nxt


def _reachable(i, word, nxt):
    seen = []
    j = i
    while j not in seen:
        seen.append(j)
        j = nxt(j)
    return seen


def ltl_holds(pattern, stem, loop):
    word, k, nxt = _positions(stem, loop)
    loop_pos = range(k, len(word))

    def lit(name, j):
        neg = name.startswith("!")
        v = word[j][name.lstrip("!")]
        return not v if neg else v

    kind, a, b = pattern
    if kind == "G":
        return all(lit(a, j) for j in _reachable(0, word, nxt))
    if kind == "F":
        return any(lit(a, j) for j in _reachable(0, word, nxt))
    if kind == "GF":
        return any(lit(a, j) for j in loop_pos)
    if kind == "FG":
        return all(lit(a, j) for j in loop_pos)
    if kind == "U":
        for j in _reachable(0, word, nxt):
            if lit(b, j):
                return True
            if not lit(a, j):
                return False
        return False
    if kind == "G->F":
        return all(
            not lit(a, j) or any(lit(b, m) for m in _reachable(j, word, nxt))
            for j in _reachable(0, word, nxt)
        )
    if kind == "GF&G":
        return any(lit(a, j) for j in loop_pos) and all(lit(b, j) for j in _reachable(0, word, nxt))
    raise KeyError(kind)


def pattern_text(pattern):
    kind, a, b = pattern
    return {
        "G": f"G {a}",
        "F": f"F {a}",
        "GF": f"G F {a}",
        "FG": f"F G {a}",
        "U": f"{a} U {b}",
        "G->F": f"G ({a} -> F {b})",
        "GF&G": f"(G F {a}) & (G {b})",
    }[kind]
