import math
from fractions import Fraction as F

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import rng
from optcert.errors import InputError, NonsmoothPointError, UndefinedPointError
from optcert.expr import (Abs, Condition, Const, Exp, Guard, Max, Min, Piecewise, Power, Product,
                          Recip, Scale, Sum, Var, directional_derivative_numeric, evaluate,
                          float_tol, gradient, gradient_tagged, regularity_probe)

x, y = Var(0), Var(1)


def C(n, rhs, rel):
    return Condition(n, rhs, rel)


F1 = Piecewise((
    (Guard((C((1, 0), 0, ">="),)), y),
    (Guard((C((1, 0), 0, "<"), C((0, 1), 0, "<="))), y - x ** 2),
    (Guard((C((1, 0), 0, "<"), C((0, 1), 0, ">"))), y + x ** 2),
), differentiable_at=(((0, 0), (0, 1)),))
G1 = Piecewise((
    (Guard((C((0, 1), 0, ">="),)), x),
    (Guard((C((0, 1), 0, "<"), C((1, 0), 0, ">="))), Exp(x) + y ** 2 - 1),
    (Guard((C((0, 1), 0, "<"), C((1, 0), 0, "<"))), Exp(x) - y ** 2 - 1),
), differentiable_at=(((0, 0), (1, 0)),))


def test_eval_examples():
    assert evaluate(Abs(x), (-2,)).value == 2
    assert evaluate(F1, (-1, -1)).value == -2 and evaluate(F1, (-1, -1)).exact
    v = evaluate(Exp(x), (0,))
    assert not v.exact and v.value == pytest.approx(1.0)


def test_gradient_examples():
    assert gradient(x, (0, 0)) == (1, 0)
    assert gradient(F1, (0, 0)) == (0, 1)
    g = gradient_tagged(G1, (0, 0))
    assert tuple(float(c) for c in g.vector) == (1.0, 0.0)
    with pytest.raises(NonsmoothPointError):
        gradient(Abs(x), (0,))
    with pytest.raises(NonsmoothPointError):
        gradient(Max((x, Scale(F(2), x))), (0,))


def test_piecewise_without_annotation_refuses_at_junction():
    bare = Piecewise(F1.pieces)
    with pytest.raises(NonsmoothPointError):
        gradient(bare, (0, 0))
    assert gradient(bare, (1, 1)) == (0, 1)
    gap = Piecewise(((Guard((C((1,), 0, ">"),)), x),))
    with pytest.raises(UndefinedPointError):
        evaluate(gap, (0,))


def test_directional_examples():
    assert directional_derivative_numeric(Abs(x), (0,), (1,))[0] == pytest.approx(1)
    assert directional_derivative_numeric(Abs(x), (0,), (-1,))[0] == pytest.approx(1)
    assert directional_derivative_numeric(Max((x, Scale(F(2), x))), (0,), (1,))[0] == pytest.approx(2)


def test_regularity_example_one():
    rep = regularity_probe(F1, (0, 0))
    assert rep.frechet_ok and rep.candidate_gradient == (0, 1)
    assert rep.discontinuity_in_every_ball
    radii = sorted(w.radius_exp for w in rep.witnesses)
    assert radii == list(range(2, 21))
    for w in rep.witnesses:
        assert w.point[0] == -F(1, 2 ** w.radius_exp) and w.point[1] == 0


def test_regularity_example_two():
    rep = regularity_probe(G1, (0, 0))
    assert rep.frechet_ok and rep.candidate_gradient == (1, 0)
    assert rep.discontinuity_in_every_ball
    for w in rep.witnesses:
        assert w.point[0] == 0 and w.point[1] == -F(1, 2 ** w.radius_exp)


def test_regularity_affine_and_kink():
    rep = regularity_probe(Scale(F(2), x) + 3, (F(1, 3),))
    assert rep.frechet_ok and rep.continuous_at_x and not rep.witnesses
    assert not regularity_probe(Abs(x), (0,)).frechet_ok


def test_float_tolerance_env(monkeypatch):
    assert float_tol() == 1e-9
    monkeypatch.setenv("OPTCERT_FLOAT_TOL", "1e-6")
    assert float_tol() == 1e-6
    monkeypatch.setenv("OPTCERT_FLOAT_TOL", "nope")
    with pytest.raises(InputError):
        float_tol()


def test_power_exponent_validated():
    with pytest.raises(InputError):
        Power(x, 0)
    with pytest.raises(InputError):
        Var(-1)


def _random_smooth(r, depth=3):
    if depth == 0:
        return r.choice([x, y, Const(F(r.randint(-3, 3), r.choice((1, 2))))])
    k = r.choice(["sum", "scale", "mul", "pow", "recip", "exp"])
    if k == "sum":
        return Sum((_random_smooth(r, depth - 1), _random_smooth(r, depth - 1)))
    if k == "scale":
        return Scale(F(r.randint(-3, 3), 2), _random_smooth(r, depth - 1))
    if k == "mul":
        return Product(_random_smooth(r, depth - 1), _random_smooth(r, depth - 1))
    if k == "pow":
        return Power(_random_smooth(r, depth - 1), r.randint(1, 3))
    if k == "recip":
        return Recip(Sum((Power(_random_smooth(r, depth - 1), 2), Const(F(1)))))
    return Exp(Scale(F(1, 4), _random_smooth(r, depth - 1)))


def _to_sympy(e, syms):
    if isinstance(e, Const):
        return sympy.Rational(e.value.numerator, e.value.denominator)
    if isinstance(e, Var):
        return syms[e.index]
    if isinstance(e, Sum):
        return sympy.Add(*(_to_sympy(t, syms) for t in e.terms))
    if isinstance(e, Scale):
        return sympy.Rational(e.coef.numerator, e.coef.denominator) * _to_sympy(e.arg, syms)
    if isinstance(e, Product):
        return _to_sympy(e.left, syms) * _to_sympy(e.right, syms)
    if isinstance(e, Power):
        return _to_sympy(e.arg, syms) ** e.exponent
    if isinstance(e, Recip):
        return 1 / _to_sympy(e.arg, syms)
    if isinstance(e, Exp):
        return sympy.exp(_to_sympy(e.arg, syms))
    raise TypeError(type(e))


def test_gradient_against_symbolic_oracle():
    """Exact gradients equal sympy's; exp paths agree to 1e-9 relative."""
    r = rng(1)
    sx, sy = sympy.symbols("x y")
    for _ in range(200):
        e = _random_smooth(r)
        pt = (F(r.randint(-6, 6), 4), F(r.randint(-6, 6), 4))
        s = _to_sympy(e, (sx, sy))
        g = gradient_tagged(e, pt)
        subs = {sx: sympy.Rational(pt[0].numerator, pt[0].denominator),
                sy: sympy.Rational(pt[1].numerator, pt[1].denominator)}
        ref = [sympy.diff(s, v).subs(subs) for v in (sx, sy)]
        if g.exact:
            assert all(sympy.Rational(c.numerator, c.denominator) == rv for c, rv in zip(g.vector, ref))
        else:
            for c, rv in zip(g.vector, ref):
                rv = float(rv)
                assert math.isclose(float(c), rv, rel_tol=1e-9, abs_tol=1e-9)


def test_numeric_directional_matches_gradient():
    r = rng(2)
    for _ in range(200):
        e = _random_smooth(r, 2)
        pt = (F(r.randint(-6, 6), 4), F(r.randint(-6, 6), 4))
        d = (F(r.randint(-3, 3)), F(r.randint(-3, 3)))
        g = gradient_tagged(e, pt).vector
        est, _ = directional_derivative_numeric(e, pt, d)
        exact = sum(float(a) * float(b) for a, b in zip(g, d))
        assert abs(est - exact) <= 1e-6 * max(1.0, abs(exact))


@settings(max_examples=100, deadline=None)
@given(st.lists(st.fractions(-5, 5, max_denominator=7), min_size=3, max_size=6))
def test_sum_reassociation_is_exact(cs):
    terms = [Scale(c, x) for c in cs]
    left = Sum((Sum(tuple(terms[:2])),) + tuple(terms[2:]))
    right = Sum(tuple(terms[:-2]) + (Sum(tuple(terms[-2:])),))
    pt = (F(3, 7),)
    assert evaluate(left, pt).value == evaluate(right, pt).value == evaluate(Sum(tuple(terms)), pt).value


def test_min_tie_refuses():
    with pytest.raises(NonsmoothPointError):
        gradient(Min((x, Scale(F(-1), x))), (0,))
    assert gradient(Min((x, Scale(F(-1), x))), (1,)) == (-1,)
