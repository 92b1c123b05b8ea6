from fractions import Fraction as F

import pytest

from helpers import maxmin_expr, rng
from optcert.clarke import (INCLUSION_OVERAPPROX, REGULAR_EQUALITY, clarke_directional,
                            clarke_subdifferential, fo_numeric, fritz_john_lipschitz)
from optcert.errors import FragmentError
from optcert.expr import Abs, Const, Exp, Max, Scale, Sum, Var
from optcert.geometry import VPolytope, minkowski_sum, polytope_contains, same_polytope
from optcert.problem import Problem

x = Var(0)
neg = lambda e: Scale(F(-1), e)  # noqa: E731
SEG = VPolytope(((-1,), (1,)))


def test_generalized_gradient_examples():
    g = clarke_subdifferential(Max((x, neg(x))), (0,))
    assert same_polytope(g.set, SEG) and g.exactness == REGULAR_EQUALITY
    assert same_polytope(clarke_subdifferential(neg(Abs(x)), (0,)).set, SEG)
    g = clarke_subdifferential(Max((x * x, neg(x))), (0,))
    assert same_polytope(g.set, VPolytope(((-1,), (0,))))


def test_directional_examples():
    g = clarke_subdifferential(Abs(x), (0,))
    assert clarke_directional(g, (1,)) == 1
    assert clarke_directional(clarke_subdifferential(Const(F(2)), (0,)), (5,)) == 0
    assert clarke_directional(clarke_subdifferential(Max((x * x, neg(x))), (0,)), (-1,)) == 1


def test_fo_numeric_examples():
    assert fo_numeric(Abs(x), (0,), (1,))[0] == pytest.approx(1, abs=1e-6)
    assert fo_numeric(neg(Abs(x)), (0,), (1,))[0] == pytest.approx(1, abs=1e-6)
    assert fo_numeric(x * x, (1,), (1,))[0] == pytest.approx(2, abs=1e-6)


def test_sum_of_two_kinks_is_overapproximate():
    g = clarke_subdifferential(Sum((Abs(x), neg(Abs(x)))), (0,))
    assert g.exactness == INCLUSION_OVERAPPROX
    assert same_polytope(g.set, VPolytope(((-2,), (2,))))


def test_fragment_rejects_exp_gradients():
    with pytest.raises(FragmentError):
        clarke_subdifferential(Exp(x), (0,))


def test_fritz_john_examples():
    c = fritz_john_lipschitz(Problem(neg(Abs(x)), (Sum((x, Const(F(-1)))),), variables=("x",), point=(1,)))
    assert c.status == "holds" and c.multipliers == (F(1, 2), F(1, 2)) and c.verify()
    c = fritz_john_lipschitz(Problem(Abs(x), variables=("x",), point=(0,)))
    assert c.status == "holds" and c.multipliers == (1,)
    c = fritz_john_lipschitz(Problem(x, (Abs(x),), variables=("x",), point=(0,)))
    assert c.status == "holds" and c.multipliers[0] == 0


def test_overapproximate_success_is_inconclusive():
    f = Sum((Abs(x), neg(Abs(x))))
    c = fritz_john_lipschitz(Problem(f, variables=("x",), point=(0,)))
    assert c.status == "inconclusive"


def test_sum_rule_and_sampled_upper_bound():
    """Reduced-size sweep: sum containment and fo_numeric under the support function."""
    for k in range(15):
        r = rng(200 + k)
        p = (F(r.randint(-1, 1)), F(r.randint(-1, 1)))
        f, g = maxmin_expr(r, 2, p), maxmin_expr(r, 2, p)
        whole = clarke_subdifferential(Sum((f, g)), p).set
        parts = minkowski_sum(clarke_subdifferential(f, p).set, clarke_subdifferential(g, p).set)
        assert polytope_contains(parts, whole)[0]
        v = (F(r.randint(-2, 2)), F(r.randint(-2, 2)))
        est, _ = fo_numeric(f, p, v, seed=k)
        assert est <= float(clarke_directional(clarke_subdifferential(f, p), v)) + 1e-4
