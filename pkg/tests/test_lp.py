from fractions import Fraction as F

import numpy as np
from hypothesis import given, settings, strategies as st
from scipy.optimize import linprog

from distcert.lp import is_feasible, solve_lp

coef = st.integers(-4, 4)


def test_simple_box():
    rows = [([1, 0], 0), ([-1, 0], 1), ([0, 1], 0), ([0, -1], 2)]
    res = solve_lp(rows, 2, [1, 1])
    assert res.status == "optimal" and res.value == 3 and res.point == (1, 2)


def test_infeasible():
    assert not is_feasible([([1], -2), ([-1], 1)], 1)


def test_unbounded():
    assert solve_lp([([1], 0)], 1, [1]).status == "unbounded"


def test_exact_fraction_optimum():
    # maximise x subject to 3x <= 1
    res = solve_lp([([-3], 1)], 1, [1])
    assert res.value == F(1, 3)


def _scipy(rows, n, obj):
    a_ub = np.array([[-float(c) for c in coeffs] for coeffs, _ in rows])
    b_ub = np.array([float(off) for _, off in rows])
    return linprog(-np.array(obj, dtype=float), A_ub=a_ub, b_ub=b_ub,
                   bounds=[(None, None)] * n, method="highs")


@settings(max_examples=120, deadline=None)
@given(st.lists(st.tuples(st.lists(coef, min_size=3, max_size=3), coef), min_size=1, max_size=6),
       st.lists(coef, min_size=3, max_size=3))
def test_agrees_with_float_lp(extra, obj):
    # a bounding box keeps both solvers away from unboundedness
    box = [([1 if j == i else 0 for j in range(3)], 5) for i in range(3)]
    box += [([-1 if j == i else 0 for j in range(3)], 5) for i in range(3)]
    rows = box + extra
    ours = solve_lp(rows, 3, obj)
    ref = _scipy(rows, 3, obj)
    if ref.status == 2:
        assert ours.status == "infeasible"
        return
    assert ref.status == 0
    assert ours.status == "optimal"
    assert abs(float(ours.value) + ref.fun) < 1e-6
    assert all(sum(F(c) * x for c, x in zip(coeffs, ours.point)) + off >= 0 for coeffs, off in rows)
