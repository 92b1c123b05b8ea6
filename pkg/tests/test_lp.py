from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import linprog

from optcert.errors import InputError
from optcert.lp import (LinearProgram, eq, ge, hull_membership, is_feasible_point, le,
                        left_kernel_vector, matrix_rank, solve_lp, verify_farkas)
from optcert.rational import fmt, fmt_vector, to_fraction

small = st.integers(-5, 5)


def test_to_fraction_accepts_rationals_only():
    assert to_fraction("3/4") == F(3, 4)
    assert to_fraction(2) == 2
    for bad in (0.5, True, "0.5", "1/0", "x"):
        with pytest.raises(InputError):
            to_fraction(bad)
    assert fmt(F(-1, 2)) == "-1/2" and fmt_vector((F(2), F(0))) == ["2", "0"]


def test_bounded_max():
    res = solve_lp(LinearProgram(1, (le([1], 3),), (1,)))
    assert res.status == "optimal" and res.solution == (3,) and res.value == 3


def test_contradictory_bounds_give_farkas():
    lp = LinearProgram(1, (ge([1], 1), le([1], 0)))
    res = solve_lp(lp)
    assert res.status == "infeasible"
    assert res.farkas == (1, 1)
    assert verify_farkas(lp, res.farkas)


def test_unbounded_ray():
    res = solve_lp(LinearProgram(1, (ge([1], 0),), (1,)))
    assert res.status == "unbounded" and res.ray == (1,)


def test_hull_membership_examples():
    m = hull_membership((0,), [(-1,), (1,)], "convex")
    assert m.inside and m.witness == (F(1, 2), F(1, 2))
    m = hull_membership((1, 1), [(1, 0), (0, 1)], "conic")
    assert m.inside and m.witness == (1, 1)
    m = hull_membership((-1, 0), [(1, 0), (0, 1)], "conic")
    assert not m.inside
    assert m.witness.normal == (-1, 0) and m.witness.offset == 0


def test_rank_examples():
    assert matrix_rank([[1, 0], [0, 1]]) == 2
    assert matrix_rank([[1, 2], [2, 4]]) == 1
    assert matrix_rank([[0, 0], [0, 0]]) == 0
    assert left_kernel_vector([[1, 0], [0, 1]]) is None
    mu = left_kernel_vector([[1, 2], [2, 4]])
    assert mu[0] * 1 + mu[1] * 2 == 0 and any(mu)


@st.composite
def lps(draw):
    n = draw(st.integers(1, 4))
    m = draw(st.integers(1, 5))
    rows = []
    for _ in range(m):
        coeffs = [draw(small) for _ in range(n)]
        rhs = draw(small)
        rows.append(eq(coeffs, rhs) if draw(st.integers(0, 4)) == 0 else le(coeffs, rhs))
    box = [le([1 if j == i else 0 for j in range(n)], 6) for i in range(n)]
    box += [ge([1 if j == i else 0 for j in range(n)], -6) for i in range(n)]
    obj = tuple(draw(small) for _ in range(n))
    return LinearProgram(n, tuple(rows + box), obj)


@settings(max_examples=150, deadline=None)
@given(lps())
def test_lp_against_scipy(lp):
    """Exact answers match an independent floating-point LP solver."""
    res = solve_lp(lp)
    a_ub = [[float(c) for c in r.coeffs] for r in lp.rows if r.sense == "<="]
    b_ub = [float(r.rhs) for r in lp.rows if r.sense == "<="]
    a_eq = [[float(c) for c in r.coeffs] for r in lp.rows if r.sense == "="] or None
    b_eq = [float(r.rhs) for r in lp.rows if r.sense == "="] or None
    ref = linprog([-float(c) for c in lp.objective], A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=b_eq,
                  bounds=[(None, None)] * lp.num_vars, method="highs")
    if res.status == "optimal":
        assert is_feasible_point(lp, res.solution)
        assert ref.status == 0
        assert abs(float(res.value) + ref.fun) < 1e-7
    else:
        assert res.status == "infeasible"
        assert verify_farkas(lp, res.farkas)
        assert ref.status == 2


@settings(max_examples=100, deadline=None)
@given(st.lists(st.lists(small, min_size=2, max_size=2), min_size=1, max_size=5),
       st.lists(small, min_size=2, max_size=2), st.sampled_from(["convex", "conic"]))
def test_membership_duplication_invariant(gens, point, mode):
    a = hull_membership(point, gens, mode)
    b = hull_membership(point, gens + gens[:1], mode)
    assert a.inside == b.inside
    if a.inside:
        total = [sum(l * g[c] for l, g in zip(a.witness, gens)) for c in range(2)]
        assert total == point
    else:
        sep = a.witness
        assert all(sum(s * g for s, g in zip(sep.normal, gv)) <= sep.offset for gv in gens)
        assert sum(s * p for s, p in zip(sep.normal, point)) > sep.offset


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 6).flatmap(lambda r: st.integers(1, 6).flatmap(
    lambda c: st.lists(st.lists(st.fractions(-3, 3, max_denominator=4), min_size=c, max_size=c),
                       min_size=r, max_size=r))))
def test_rank_transpose(m):
    t = [list(col) for col in zip(*m)]
    assert matrix_rank(m) == matrix_rank(t)
