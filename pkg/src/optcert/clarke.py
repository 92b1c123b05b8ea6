"""Clarke generalized gradients for finite max/min of smooth functions.

Sets are exact for a max (or min) of smooth branches, for scalar multiples,
and for sums where at most one summand is nonsmooth. A sum of two or more
nonsmooth parts only yields a superset, flagged ``inclusion_overapprox``.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction

from .certificate import (FAILS, HOLDS, INCONCLUSIVE, Certificate, certificate_from_search,
                          multiplier_search)
from .errors import FragmentError, InputError
from .expr import (Abs, Expr, Max, Min, Scale, Sum, _MP, _Ctx, _ev, evaluate, gradient_tagged,
                   is_smooth)
from .geometry import VPolytope, hull_union, minkowski_sum, scale, support_value
from .problem import Problem
from .rational import as_vector

REGULAR_EQUALITY = "regular_equality"
INCLUSION_OVERAPPROX = "inclusion_overapprox"


@dataclass(frozen=True)
class ClarkeGradient:
    set: VPolytope
    exactness: str

    @property
    def exact(self) -> bool:
        return self.exactness == REGULAR_EQUALITY


def _smooth_gradient(e: Expr, x) -> tuple:
    g = gradient_tagged(e, x)
    if not g.exact:
        raise FragmentError("smooth branch has an approximate (exp) gradient; Clarke sets need exact ones")
    return g.vector


def _clarke(e: Expr, x) -> ClarkeGradient:
    if is_smooth(e):
        return ClarkeGradient(VPolytope.point(_smooth_gradient(e, x)), REGULAR_EQUALITY)
    if isinstance(e, (Max, Min)):
        vals = [evaluate(a, x).value for a in e.args]
        best = max(vals) if isinstance(e, Max) else min(vals)
        parts = [_clarke(a, x) for a, v in zip(e.args, vals) if v == best]
        # nonsmooth active branches make the hull only an inclusion
        exact = (len(parts) == 1 and parts[0].exact) or all(
            p.exact and len(p.set.distinct().vertices) == 1 for p in parts)
        return ClarkeGradient(hull_union(*(p.set for p in parts)),
                              REGULAR_EQUALITY if exact else INCLUSION_OVERAPPROX)
    if isinstance(e, Abs):
        return _clarke(Max((e.arg, Scale(Fraction(-1), e.arg))), x)
    if isinstance(e, Scale):
        inner = _clarke(e.arg, x)
        return ClarkeGradient(scale(e.coef, inner.set), inner.exactness)
    if isinstance(e, Sum):
        parts = [_clarke(t, x) for t in e.terms]
        nonsmooth = sum(1 for p in parts if len(p.set.distinct().vertices) > 1)
        exact = nonsmooth <= 1 and all(p.exact for p in parts)
        return ClarkeGradient(minkowski_sum(*(p.set for p in parts)),
                              REGULAR_EQUALITY if exact else INCLUSION_OVERAPPROX)
    raise FragmentError(f"{type(e).__name__} node is not in the Clarke fragment")


def clarke_subdifferential(e: Expr, x) -> ClarkeGradient:
    x = as_vector(x)
    return _clarke(e, x)


def clarke_directional(g: ClarkeGradient, d) -> Fraction:
    """f°(x; d) as the support function of the generalized gradient."""
    return support_value(g.set, d)


FO_SCALES = tuple(range(8, 25))
FO_DIRECTIONS = 64


def _unit_directions(n, v, seed):
    dirs = []
    for i in range(n):
        for s in (1, -1):
            dirs.append(tuple(Fraction(s if j == i else 0) for j in range(n)))
    vn = math.sqrt(sum(float(c) ** 2 for c in v))
    if vn > 0:
        vh = tuple(Fraction(float(c) / vn).limit_denominator(10 ** 6) for c in v)
        dirs.append(vh)
        dirs.append(tuple(-c for c in vh))
    rng = random.Random(seed)
    while len(dirs) < FO_DIRECTIONS:
        u = [rng.gauss(0.0, 1.0) for _ in range(n)]
        un = math.sqrt(sum(c * c for c in u)) or 1.0
        dirs.append(tuple(Fraction(c / un).limit_denominator(10 ** 6) for c in u))
    return dirs[:FO_DIRECTIONS]


def fo_numeric(e: Expr, x, v, seed: int = 0):
    """(estimate, stability) of the generalized directional derivative.

    Maximises (f(y + t v) - f(y)) / t over y = x + t u for 64 unit directions u
    (plus y = x) at t = 2^-k, k = 8..24. Numeric evidence only.
    """
    x, v = as_vector(x), as_vector(v)
    if len(v) != len(x):
        raise InputError("direction dimension does not match point")
    dirs = [tuple(Fraction(0) for _ in x)] + _unit_directions(len(x), v, seed)
    per_scale = []
    for k in FO_SCALES:
        t = Fraction(1, 2 ** k)
        best = None
        for u in dirs:
            y = tuple(a + t * b for a, b in zip(x, u))
            yt = tuple(a + t * b for a, b in zip(y, v))
            ctx = _Ctx("mp")
            fy, fyt = ctx.norm(_ev(e, y, ctx), _ev(e, yt, ctx))
            q = (fyt - fy) / t
            if best is None or q > best:
                best = q
        per_scale.append(float(best))
    tail = per_scale[-8:]
    return per_scale[-1], max(tail) - min(tail)


def fritz_john_lipschitz(problem: Problem, x=None) -> Certificate:
    """Fritz-John search over Clarke generalized gradients.

    With exact sets both verdicts stand. When some set is only a superset, a
    failure still refutes (shrinking the sets cannot create a combination),
    but a success proves nothing and is reported inconclusive.
    """
    x = problem.at(x)
    grads = {}
    for label, e in problem.labelled():
        try:
            grads[label] = clarke_subdifferential(e, x)
        except FragmentError as err:
            raise FragmentError(f"{label}: {err}") from None
    problem.require_feasible(x)
    active = problem.active_set(x)
    sets = {lab: g.set for lab, g in grads.items()}
    used = ["f"] + [f"g{i}" for i in active] + [f"h{j}" for j in range(1, len(problem.equalities) + 1)]
    active_pairs = [(f"g{i}", sets[f"g{i}"]) for i in active]
    eq_labels = [f"h{j}" for j in range(1, len(problem.equalities) + 1)]
    eq_pairs = [(lab, sets[lab]) for lab in eq_labels]
    outcome = multiplier_search(sets["f"], active_pairs, eq_pairs)
    used_sets = {lab: sets[lab] for lab in used}
    cert = certificate_from_search(outcome, "clarke", len(problem.inequalities),
                                   {i: f"g{i}" for i in active}, eq_labels, used_sets,
                                   [f"active inequalities: {[f'g{i}' for i in active]}"])
    over = [lab for lab in used if not grads[lab].exact]
    if over:
        cert.notes.append(f"over-approximated sets: {over}")
        if cert.status == HOLDS:
            cert.status = INCONCLUSIVE
            cert.notes.append("multipliers found for supersets only; not a certificate")
    return cert
