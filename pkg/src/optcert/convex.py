"""Exact subdifferentials of structurally convex expressions and convex Fritz-John checks.

The fragment: affine expressions, nonnegative multiples, sums, finite max, and
abs of an affine expression. Anything else is rejected rather than guessed.
"""
from __future__ import annotations

from fractions import Fraction

from .certificate import Certificate, certificate_from_search, multiplier_search
from .errors import FragmentError
from .expr import Abs, Const, Expr, Max, Scale, Sum, Var, evaluate, gradient
from .geometry import VPolytope, hull_union, minkowski_sum, scale
from .lp import hull_membership
from .problem import Problem
from .rational import as_vector


def is_affine(e: Expr) -> bool:
    if isinstance(e, (Const, Var)):
        return True
    if isinstance(e, Sum):
        return all(is_affine(t) for t in e.terms)
    if isinstance(e, Scale):
        return is_affine(e.arg)
    return False


def in_convex_fragment(e: Expr) -> bool:
    if is_affine(e):
        return True
    if isinstance(e, Sum):
        return all(in_convex_fragment(t) for t in e.terms)
    if isinstance(e, Scale):
        return e.coef >= 0 and in_convex_fragment(e.arg)
    if isinstance(e, Max):
        return all(in_convex_fragment(a) for a in e.args)
    if isinstance(e, Abs):
        return is_affine(e.arg)
    return False


def _require_fragment(e: Expr, what: str = "expression"):
    if not in_convex_fragment(e):
        raise FragmentError(f"{what} is not certified convex: outside the affine/sum/max/abs fragment")


def affine_gradient(e: Expr, n: int) -> tuple:
    # affine gradients are constant; any point works
    return gradient(e, (Fraction(0),) * n)


def _subdiff(e: Expr, x) -> VPolytope:
    n = len(x)
    if is_affine(e):
        return VPolytope.point(affine_gradient(e, n))
    if isinstance(e, Sum):
        return minkowski_sum(*(_subdiff(t, x) for t in e.terms))
    if isinstance(e, Scale):
        return scale(e.coef, _subdiff(e.arg, x))
    if isinstance(e, Max):
        vals = [evaluate(a, x).value for a in e.args]
        top = max(vals)
        return hull_union(*(_subdiff(a, x) for a, v in zip(e.args, vals) if v == top))
    if isinstance(e, Abs):
        g = affine_gradient(e.arg, n)
        u = evaluate(e.arg, x).value
        if u > 0:
            return VPolytope.point(g)
        if u < 0:
            return VPolytope.point(tuple(-c for c in g))
        return VPolytope((g, tuple(-c for c in g)))
    raise FragmentError(f"{type(e).__name__} node is not certified convex")


def convex_subdifferential(e: Expr, x) -> VPolytope:
    """The subdifferential at ``x`` as a vertex polytope (exact)."""
    _require_fragment(e)
    return _subdiff(e, as_vector(x))


def convex_stationarity(e: Expr, x) -> bool:
    """0 in the subdifferential, i.e. ``x`` is a global minimiser."""
    p = convex_subdifferential(e, x)
    return hull_membership((Fraction(0),) * p.dim, p.vertices, "convex").inside


def fritz_john_convex(problem: Problem, x=None) -> Certificate:
    """Search for multipliers with 0 in l0 df + sum l_i dg_i + sum mu_j dh_j."""
    x = problem.at(x)
    for label, e in problem.labelled():
        _require_fragment(e, label)
    problem.require_feasible(x)
    active = problem.active_set(x)
    sets = {"f": convex_subdifferential(problem.objective, x)}
    active_pairs = []
    for i in active:
        lab = f"g{i}"
        sets[lab] = convex_subdifferential(problem.inequalities[i - 1], x)
        active_pairs.append((lab, sets[lab]))
    eq_pairs = []
    for j, h in enumerate(problem.equalities, 1):
        lab = f"h{j}"
        sets[lab] = convex_subdifferential(h, x)
        eq_pairs.append((lab, sets[lab]))
    outcome = multiplier_search(sets["f"], active_pairs, eq_pairs)
    notes = [f"active inequalities: {[f'g{i}' for i in active]}"]
    if problem.equalities:
        notes.append("convex equality constraints enter with a free-sign multiplier")
    return certificate_from_search(outcome, "convex", len(problem.inequalities),
                                   {i: f"g{i}" for i in active},
                                   [f"h{j}" for j in range(1, len(problem.equalities) + 1)],
                                   sets, notes)
