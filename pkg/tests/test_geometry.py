from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from optcert.errors import PreconditionError
from optcert.geometry import (FinitelyGeneratedCone, HPolyhedron, VPolytope, hull_union,
                              minkowski_sum, poly_combine, polar_cone, polytope_contains,
                              same_polytope, scale, support_value, tangent_normal_cones,
                              tangent_via_distance_oracle)

SQUARE = VPolytope(((1, 1), (1, -1), (-1, 1), (-1, -1)))
DIAMOND = VPolytope(((1, 0), (-1, 0), (0, 1), (0, -1)))


def test_support_values():
    assert support_value(SQUARE, (1, 0)) == 1
    assert support_value(VPolytope.point((0, 0)), (5, -7)) == 0
    assert support_value(VPolytope(((2, 0), (0, 2))), (1, 1)) == 2


def test_combinations():
    seg = VPolytope(((-1,), (1,)))
    assert same_polytope(poly_combine("minkowski_sum", seg, seg), VPolytope(((-2,), (2,))))
    assert set(scale(-1, VPolytope(((1, 0), (0, 1)))).vertices) == {(-1, 0), (0, -1)}
    assert same_polytope(hull_union(VPolytope.point((0,)), VPolytope.point((1,))),
                         VPolytope(((0,), (1,))))


def test_containment_examples():
    seg = VPolytope(((-1,), (1,)))
    assert polytope_contains(seg, VPolytope.point((0,)))[0]
    ok, (v, sep) = polytope_contains(seg, VPolytope.point((2,)))
    assert not ok and v == (2,)
    ok, (v, sep) = polytope_contains(DIAMOND, SQUARE)
    assert not ok and v == (1, 1)
    assert all(sum(a * b for a, b in zip(sep.normal, w)) <= sep.offset for w in DIAMOND.vertices)
    assert sum(a * b for a, b in zip(sep.normal, v)) > sep.offset


def test_polar_cone():
    p = polar_cone(FinitelyGeneratedCone(2, ((1, 0), (0, 1))))
    assert p.contains((-1, -1)) and not p.contains((1, 0))
    p = polar_cone(FinitelyGeneratedCone(2, (), ((0, 1),)))
    assert p.contains((1, 0)) and not p.contains((0, 1))
    assert p.contains((0, 0))


def test_tangent_normal_cones():
    s = HPolyhedron(2, (((-1, 0), 0), ((0, -1), 0)))
    t, n = tangent_normal_cones(s, (0, 0))
    assert t.contains((1, 2)) and not t.contains((-1, 0))
    assert n.contains((-1, -3)) and not n.contains((1, 0))
    t, n = tangent_normal_cones(s, (1, 1))
    assert t.inequalities == () and n.contains((0, 0)) and not n.contains((-1, 0))
    t, n = tangent_normal_cones(HPolyhedron(2, (), (((0, 1), 0),)), (0, 0))
    assert t.contains((5, 0)) and not t.contains((0, 1))
    assert n.contains((0, -1)) and n.contains((0, 1))
    with pytest.raises(PreconditionError, match="inequality 0"):
        tangent_normal_cones(s, (-1, 0))


def test_normal_is_polar_of_tangent():
    """d in T iff <g, d> <= 0 for every generator g of N."""
    s = HPolyhedron(2, (((-1, 0), 0), ((1, 1), 2), ((0, -1), 0)))
    grid = [(a, b) for a in range(-2, 3) for b in range(-2, 3)]
    for x in [(0, 0), (0, 2), (1, 1), (F(1, 2), F(1, 2))]:
        t, n = tangent_normal_cones(s, x)
        for d in grid:
            in_polar = all(sum(a * b for a, b in zip(g, d)) <= 0 for g in n.generators())
            assert t.contains(d) == in_polar


def test_distance_oracle():
    seg = VPolytope(((0, 0), (1, 0)))
    assert tangent_via_distance_oracle(seg, (0, 0), (1, 0)) == "tangent"
    assert tangent_via_distance_oracle(seg, (0, 0), (0, 1)) == "not_tangent"
    assert tangent_via_distance_oracle(seg, (0, 0), (0, 0)) == "tangent"
    box4 = VPolytope(tuple(tuple(F((k >> i) & 1) for i in range(4)) for k in range(16)))
    assert tangent_via_distance_oracle(box4, (0, 0, 0, 0), (1, 0, 0, 0)) == "tangent"
    assert tangent_via_distance_oracle(box4, (0, 0, 0, 0), (-1, 0, 0, 0)) == "not_tangent"


points2 = st.lists(st.tuples(st.integers(-4, 4), st.integers(-4, 4)), min_size=1, max_size=6)
dirs2 = st.tuples(st.integers(-5, 5), st.integers(-5, 5))


@settings(max_examples=100, deadline=None)
@given(points2, points2, st.lists(dirs2, min_size=1, max_size=8))
def test_minkowski_support_additivity(a, b, ds):
    pa, pb = VPolytope(tuple(a)), VPolytope(tuple(b))
    s = minkowski_sum(pa, pb)
    for d in ds:
        assert support_value(s, d) == support_value(pa, d) + support_value(pb, d)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.integers(-3, 3), st.integers(-3, 3), st.integers(-3, 3)),
                min_size=2, max_size=5),
       st.tuples(st.integers(-3, 3), st.integers(-3, 3), st.integers(-3, 3)))
def test_cone_membership_matches_polar(gens, v):
    """Inside answers carry exact coefficients; outside answers a separator in the polar."""
    c = FinitelyGeneratedCone(3, tuple(gens))
    m = c.membership(v)
    if not m.inside:
        sep = m.witness
        assert polar_cone(c).contains(sep.normal)
        assert sum(a * b for a, b in zip(sep.normal, v)) > 0
    else:
        gens_all = c.generators()
        assert all(l >= 0 for l in m.witness)
        assert tuple(sum(l * g[k] for l, g in zip(m.witness, gens_all)) for k in range(3)) == v
