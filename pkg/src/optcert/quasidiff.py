"""Quasidifferentials as pairs of polytopes [sub, sup] and the checks built on them.

f'(x; d) = max over sub of <u, d> + min over sup of <w, d>.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from .certificate import (FAILS, HOLDS, INCONCLUSIVE, Certificate, multiplier_search)
from .errors import FragmentError, InputError
from .expr import (Abs, Expr, Max, Min, Power, Product, Recip, Scale, Sum, evaluate,
                   gradient_tagged, is_smooth)
from .geometry import (VPolytope, hull_union, minkowski_sum, polytope_contains, scale,
                       support_value)
from .lp import LinearProgram, le, solve_lp
from .problem import Problem
from .rational import as_vector, fmt, fmt_vector, to_fraction

# w-tuple enumeration cap for the weakened Fritz-John check
MAX_WITNESS_TUPLES = 4096


@dataclass(frozen=True)
class QuasiDifferential:
    sub: VPolytope
    sup: VPolytope

    def __post_init__(self):
        if self.sub.dim != self.sup.dim:
            raise InputError("sub- and superdifferential dimensions differ")

    @property
    def dim(self) -> int:
        return self.sub.dim

    @classmethod
    def smooth(cls, grad) -> "QuasiDifferential":
        g = as_vector(grad)
        return cls(VPolytope.point(g), VPolytope.point((Fraction(0),) * len(g)))

    def to_json(self) -> dict:
        return {"sub": self.sub.to_json(), "sup": self.sup.to_json()}


def qd_add(*qs: QuasiDifferential) -> QuasiDifferential:
    return QuasiDifferential(minkowski_sum(*(q.sub for q in qs)),
                             minkowski_sum(*(q.sup for q in qs)))


def qd_scale(c, q: QuasiDifferential) -> QuasiDifferential:
    c = to_fraction(c)
    if c >= 0:
        return QuasiDifferential(scale(c, q.sub), scale(c, q.sup))
    return QuasiDifferential(scale(c, q.sup), scale(c, q.sub))


def qd_product(f1, q1: QuasiDifferential, f2, q2: QuasiDifferential) -> QuasiDifferential:
    """D(f1 f2) = f1 D f2 + f2 D f1 with the function values at x."""
    return qd_add(qd_scale(f1, q2), qd_scale(f2, q1))


def qd_reciprocal(f1, q1: QuasiDifferential) -> QuasiDifferential:
    """D(1/f1) = -(1/f1^2) D f1."""
    f1 = to_fraction(f1)
    if f1 == 0:
        raise InputError("reciprocal rule needs a nonzero function value")
    return qd_scale(-1 / (f1 * f1), q1)


def qd_max(values, qs) -> QuasiDifferential:
    """Max rule over the branches attaining the maximum value."""
    top = max(values)
    act = [q for v, q in zip(values, qs) if v == top]
    sup = minkowski_sum(*(q.sup for q in act))
    pieces = []
    for k, qk in enumerate(act):
        others = [q.sup for i, q in enumerate(act) if i != k]
        piece = qk.sub if not others else minkowski_sum(qk.sub, scale(-1, minkowski_sum(*others)))
        pieces.append(piece)
    return QuasiDifferential(hull_union(*pieces), sup)


def qd_combine(op: str, *args) -> QuasiDifferential:
    """'add' (q...), 'scale' (c, q), 'product' (f1, q1, f2, q2), 'reciprocal' (f1, q1)."""
    if op == "add":
        return qd_add(*args)
    if op == "scale":
        return qd_scale(*args)
    if op == "product":
        return qd_product(*args)
    if op == "reciprocal":
        return qd_reciprocal(*args)
    raise InputError(f"unknown quasidifferential operation {op!r}")


def _exact_value(e: Expr, x) -> Fraction:
    v = evaluate(e, x)
    if not v.exact:
        raise FragmentError("product/reciprocal rules need exact function values; exp poisons them")
    return v.value


def _canonical(q: QuasiDifferential) -> QuasiDifferential:
    """[U, {w}] and [U + w, {0}] have the same directional derivative; prefer the latter."""
    sup = q.sup.distinct()
    if len(sup.vertices) == 1:
        w = sup.vertices[0]
        if any(w):
            return QuasiDifferential(minkowski_sum(q.sub, sup), VPolytope.point((Fraction(0),) * len(w)))
    return q


def _qd(e: Expr, x) -> QuasiDifferential:
    return _canonical(_qd_raw(e, x))


def _qd_raw(e: Expr, x) -> QuasiDifferential:
    if is_smooth(e):
        g = gradient_tagged(e, x)
        vec = g.vector if g.exact else tuple(Fraction(v) for v in g.vector)
        return QuasiDifferential.smooth(vec)
    if isinstance(e, Sum):
        return qd_add(*(_qd(t, x) for t in e.terms))
    if isinstance(e, Scale):
        return qd_scale(e.coef, _qd(e.arg, x))
    if isinstance(e, Product):
        return qd_product(_exact_value(e.left, x), _qd(e.left, x),
                          _exact_value(e.right, x), _qd(e.right, x))
    if isinstance(e, Power):
        u = _exact_value(e.arg, x)
        return qd_scale(e.exponent * u ** (e.exponent - 1), _qd(e.arg, x))
    if isinstance(e, Recip):
        return qd_reciprocal(_exact_value(e.arg, x), _qd(e.arg, x))
    if isinstance(e, Max):
        return qd_max([_exact_value(a, x) for a in e.args], [_qd(a, x) for a in e.args])
    if isinstance(e, Min):
        # min f_i = -max(-f_i)
        vals = [-_exact_value(a, x) for a in e.args]
        return qd_scale(-1, qd_max(vals, [qd_scale(-1, _qd(a, x)) for a in e.args]))
    if isinstance(e, Abs):
        u = _exact_value(e.arg, x)
        q = _qd(e.arg, x)
        return qd_max([u, -u], [q, qd_scale(-1, q)])
    raise FragmentError(f"{type(e).__name__} node is not in the quasidifferential fragment")


def qd_of_expr(e: Expr, x) -> QuasiDifferential:
    return _qd(e, as_vector(x))


def qd_directional(q: QuasiDifferential, d) -> Fraction:
    d = as_vector(d)
    return support_value(q.sub, d) - support_value(q.sup, tuple(-c for c in d))


def qd_unconstrained_check(q: QuasiDifferential):
    """(-sup within sub, witness). Witness is (vertex, Separator) on failure."""
    ok, wit = polytope_contains(q.sub, scale(-1, q.sup))
    return ok, (None if ok else wit)


def _problem_qds(problem: Problem, x):
    qds = {}
    for label, e in problem.labelled():
        if label.startswith("h"):
            raise FragmentError("equality constraints are not supported by quasidifferential checks")
        try:
            qds[label] = qd_of_expr(e, x)
        except FragmentError as err:
            raise FragmentError(f"{label}: {err}") from None
    return qds


@dataclass
class InclusionResult:
    holds: bool
    lhs: VPolytope
    rhs: VPolytope
    witness: object = None  # (vertex, Separator) on failure

    def to_json(self) -> dict:
        out = {"status": HOLDS if self.holds else FAILS,
               "lhs": self.lhs.to_json(), "rhs": self.rhs.to_json()}
        if self.witness is not None:
            v, sep = self.witness
            out["witness_vertex"] = fmt_vector(v)
            out["separator"] = {"normal": fmt_vector(sep.normal), "offset": fmt(sep.offset)}
        return out


def qd_constrained_check(problem: Problem, x=None) -> InclusionResult:
    """-sum sup_i within co U_i (sub_i - sum_{j != i} sup_j), over the objective and active constraints."""
    x = problem.at(x)
    qds = _problem_qds(problem, x)
    problem.require_feasible(x)
    labels = ["f"] + [f"g{i}" for i in problem.active_set(x)]
    lhs = scale(-1, minkowski_sum(*(qds[lab].sup for lab in labels)))
    pieces = []
    for lab in labels:
        others = [qds[o].sup for o in labels if o != lab]
        piece = qds[lab].sub if not others else minkowski_sum(qds[lab].sub, scale(-1, minkowski_sum(*others)))
        pieces.append(piece)
    rhs = hull_union(*pieces)
    ok, wit = polytope_contains(rhs, lhs)
    return InclusionResult(ok, lhs, rhs, None if ok else wit)


def qd_weakened_fj(problem: Problem, x=None) -> Certificate:
    """For every tuple of superdifferential vertices w_i, look for l_i >= 0, sum 1,
    with 0 in sum l_i (sub_i + w_i). One failing tuple refutes; passing all
    enumerated tuples is evidence on a finite witness set."""
    x = problem.at(x)
    qds = _problem_qds(problem, x)
    problem.require_feasible(x)
    active = problem.active_set(x)
    labels = ["f"] + [f"g{i}" for i in active]
    vert_lists = [list(dict.fromkeys(qds[lab].sup.vertices)) for lab in labels]
    count = 1
    for vl in vert_lists:
        count *= len(vl)
    if count > MAX_WITNESS_TUPLES:
        raise InputError(f"{count} superdifferential witness tuples exceed the limit {MAX_WITNESS_TUPLES}")
    m = len(problem.inequalities)
    tuples_checked = []
    failures = []
    for ws in itertools.product(*vert_lists):
        shifted = {lab: minkowski_sum(qds[lab].sub, VPolytope.point(w)) for lab, w in zip(labels, ws)}
        outcome = multiplier_search(shifted["f"], [(lab, shifted[lab]) for lab in labels[1:]], [],
                                    objective_weight="max")
        if not outcome.found:
            failures.append((ws, outcome.patterns[0], shifted))
            continue
        lam = [Fraction(0)] * (m + 1)
        lam[0] = outcome.weights["f"][0]
        for i in active:
            lam[i] = outcome.weights[f"g{i}"][0]
        wit = tuple((lab, w, p) for lab, (w, p) in outcome.weights.items() if w)
        tuples_checked.append((ws, tuple(lam), wit, shifted))
    if failures:
        ws, pat, shifted = failures[0]
        return Certificate(FAILS, "quasidiff", refutation={
            "kind": "superdifferential witness tuple with no multipliers",
            "w": {lab: fmt_vector(w) for lab, w in zip(labels, ws)},
            "failing_w": [{lab: fmt_vector(w) for lab, w in zip(labels, f[0])} for f in failures],
            "patterns": [pat]}, sets=shifted,
            notes=[f"active inequalities: {[f'g{i}' for i in active]}"])
    first = tuples_checked[0]
    ws, lam, wit, shifted = first
    notes = [f"verified on finite witness set: {len(tuples_checked)} superdifferential vertex tuple(s)",
             f"active inequalities: {[f'g{i}' for i in active]}"]
    cert = Certificate(HOLDS, "quasidiff", lam, (), wit, None, notes=notes, sets=shifted)
    cert.extra["per_tuple"] = [{"w": {lab: fmt_vector(w) for lab, w in zip(labels, t[0])},
                                "multipliers": [fmt(v) for v in t[1]]} for t in tuples_checked]
    cert.extra["min_lambda0"] = fmt(min(t[1][0] for t in tuples_checked))
    return cert


@dataclass
class RCResult:
    holds: bool
    r: tuple
    t: Fraction
    lambda0_nonzero: bool = None

    def to_json(self) -> dict:
        out = {"status": HOLDS if self.holds else FAILS, "r": fmt_vector(self.r), "t": fmt(self.t)}
        if self.lambda0_nonzero is not None:
            out["lambda0_nonzero_on_all_tuples"] = self.lambda0_nonzero
        return out


def qd_regularity_rc(problem: Problem, x=None, check_multipliers: bool = True) -> RCResult:
    """Search r with max_sub <z, r> + max_sup <z, r> < 0 on every active constraint.

    LP: maximise t subject to |r_k| <= 1, t <= 1, <v, r> <= a_i, <w, r> <= b_i,
    a_i + b_i + t <= 0. RC holds iff the optimum t is positive.
    """
    x = problem.at(x)
    qds = _problem_qds(problem, x)
    problem.require_feasible(x)
    active = problem.active_set(x)
    n = problem.dim
    if not active:
        return RCResult(True, (Fraction(0),) * n, Fraction(1), None)
    k = len(active)
    nv = n + 2 * k + 1  # r, a_i, b_i, t
    tcol = nv - 1
    rows = []

    def row(coeffs, rhs):
        full = [0] * nv
        for j, c in coeffs.items():
            full[j] = c
        rows.append(le(full, rhs))

    for j in range(n):
        row({j: 1}, 1)
        row({j: -1}, 1)
    row({tcol: 1}, 1)
    for idx, i in enumerate(active):
        q = qds[f"g{i}"]
        acol, bcol = n + 2 * idx, n + 2 * idx + 1
        for v in dict.fromkeys(q.sub.vertices):
            row({**{j: v[j] for j in range(n)}, acol: -1}, 0)
        for w in dict.fromkeys(q.sup.vertices):
            row({**{j: w[j] for j in range(n)}, bcol: -1}, 0)
        row({acol: 1, bcol: 1, tcol: 1}, 0)
    obj = [0] * nv
    obj[tcol] = 1
    res = solve_lp(LinearProgram(nv, tuple(rows), tuple(obj), maximize=True))
    r = res.solution[:n]
    t = res.value
    out = RCResult(t > 0, r, t)
    if out.holds and check_multipliers:
        cert = qd_weakened_fj(problem, x)
        if cert.status == HOLDS:
            out.lambda0_nonzero = Fraction(cert.extra["min_lambda0"]) > 0
    return out
