"""Smooth KKT / Fritz-John certificates and constraint qualifications."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .certificate import FAILS, HOLDS, Certificate
from .convex import in_convex_fragment, is_affine
from .errors import FragmentError, InputError, PreconditionError
from .expr import Piecewise, evaluate, gradient_tagged, iter_nodes, regularity_probe
from .geometry import HPolyhedron, VPolytope, tangent_normal_cones
from .lp import LinearProgram, eq, le, left_kernel_vector, matrix_rank, solve_lp
from .problem import Problem
from .rational import as_vector, fmt, fmt_vector

# agreement required between an asserted gradient and the probe's estimate
ANNOTATION_TOL = 1e-6


@dataclass(frozen=True)
class SmoothProblemAtPoint:
    x: tuple
    grad_f: tuple
    active: tuple = ()  # (index, gradient), 1-based index into the inequalities
    eq_grads: tuple = ()
    num_inequalities: Optional[int] = None
    provenance: str = "user-supplied"
    exact: bool = True
    regularity: tuple = ()  # (label, RegularityReport) for asserted gradients

    def __post_init__(self):
        x = as_vector(self.x)
        n = len(x)
        object.__setattr__(self, "x", x)
        gf = as_vector(self.grad_f)
        if len(gf) != n:
            raise InputError("objective gradient dimension does not match the point")
        object.__setattr__(self, "grad_f", gf)
        act = tuple((int(i), as_vector(g)) for i, g in self.active)
        eqs = tuple(as_vector(g) for g in self.eq_grads)
        if any(len(g) != n for _, g in act) or any(len(g) != n for g in eqs):
            raise InputError("constraint gradient dimension does not match the point")
        object.__setattr__(self, "active", act)
        object.__setattr__(self, "eq_grads", eqs)
        if self.num_inequalities is None:
            object.__setattr__(self, "num_inequalities", max((i for i, _ in act), default=0))

    @property
    def dim(self) -> int:
        return len(self.x)

    def active_grads(self) -> list:
        return [g for _, g in self.active]

    def to_json(self) -> dict:
        return {"x": fmt_vector(self.x), "grad_f": fmt_vector(self.grad_f),
                "active": {f"g{i}": fmt_vector(g) for i, g in self.active},
                "eq_grads": {f"h{j}": fmt_vector(g) for j, g in enumerate(self.eq_grads, 1)},
                "provenance": self.provenance, "exact": self.exact}


def _has_annotation_at(e, x) -> bool:
    return any(isinstance(n, Piecewise) and n.annotation_at(x) is not None for n in iter_nodes(e))


def problem_at_point(problem: Problem, x=None) -> SmoothProblemAtPoint:
    """Gradients at ``x`` from the expressions, or from overrides.

    Asserted gradients (overrides and junction annotations) are cross-checked
    by the regularity probe; a disagreement is a precondition error.
    """
    x = problem.at(x)
    problem.require_feasible(x)
    grads = {}
    exact = True
    probes = []
    provenance = "computed-from-Expr"
    for label, e in problem.labelled():
        if label.startswith("g") and int(label[1:]) not in problem.active_set(x):
            continue
        override = problem.override(label)
        asserted = override is not None or _has_annotation_at(e, x)
        if override is not None:
            g = override
            provenance = "computed-from-Expr with user-supplied overrides"
        else:
            gt = gradient_tagged(e, x)
            exact = exact and gt.exact
            g = gt.vector if gt.exact else tuple(Fraction(v) for v in gt.vector)
        if asserted:
            if override is None:
                provenance = "computed-from-Expr with junction annotations"
            rep = regularity_probe(e, x)
            probes.append((label, rep))
            est = rep.candidate_gradient_float
            if not rep.frechet_ok or est is None or any(
                    abs(float(a) - b) > ANNOTATION_TOL for a, b in zip(g, est)):
                raise PreconditionError(
                    f"asserted gradient {fmt_vector(g)} for {label} is not supported by the "
                    f"regularity probe (frechet_ok={rep.frechet_ok}, estimate={est})")
        grads[label] = g
    active = tuple((i, grads[f"g{i}"]) for i in problem.active_set(x))
    eqs = tuple(grads[f"h{j}"] for j in range(1, len(problem.equalities) + 1))
    return SmoothProblemAtPoint(x, grads["f"], active, eqs, len(problem.inequalities),
                                provenance, exact, tuple(probes))


def _sets(p: SmoothProblemAtPoint) -> dict:
    sets = {"f": VPolytope.point(p.grad_f)}
    for i, g in p.active:
        sets[f"g{i}"] = VPolytope.point(g)
    for j, g in enumerate(p.eq_grads, 1):
        sets[f"h{j}"] = VPolytope.point(g)
    return sets


def _holds(p, mode, lam0, lams, mus, notes) -> Certificate:
    m = p.num_inequalities
    multipliers = [Fraction(0)] * (m + 1)
    multipliers[0] = lam0
    for (i, _), v in zip(p.active, lams):
        multipliers[i] = v
    total = lam0 + sum(lams) + sum(abs(u) for u in mus)
    wits = []
    sets = _sets(p)
    if lam0:
        wits.append(("f", lam0 / total, p.grad_f))
    for (i, g), v in zip(p.active, lams):
        if v:
            wits.append((f"g{i}", v / total, g))
    for j, (g, u) in enumerate(zip(p.eq_grads, mus), 1):
        if u:
            point = g if u > 0 else tuple(-c for c in g)
            if u < 0:
                sets[f"h{j}"] = VPolytope.point(point)
            wits.append((f"h{j}", abs(u) / total, point))
    norm = ("objective multiplier fixed to 1" if mode == "kkt"
            else "sum of objective and active-inequality multipliers = 1")
    cert = Certificate(HOLDS, "smooth", tuple(multipliers), tuple(mus), tuple(wits), None,
                       norm, list(notes), sets)
    cert.extra["mode"] = mode
    cert.extra["witness_weights"] = "witness weights are multipliers divided by their absolute sum"
    return cert


def kkt_fj_smooth(p: SmoothProblemAtPoint, mode: str = "fritz_john") -> Certificate:
    """Exact multiplier LP for lambda_0 grad f + sum lambda_i grad g_i + sum mu_j grad h_j = 0."""
    if mode in ("fj", "fritz-john"):
        mode = "fritz_john"
    if mode not in ("kkt", "fritz_john"):
        raise InputError(f"mode must be 'kkt' or 'fritz_john', got {mode!r}")
    n = p.dim
    k = len(p.active)
    q = len(p.eq_grads)
    notes = [f"active inequalities: {[f'g{i}' for i, _ in p.active]}", f"gradients: {p.provenance}"]
    if not p.exact:
        notes.append("gradients include float values from exp branches, taken at their binary value")

    if mode == "fritz_john" and q:
        mu = left_kernel_vector(p.eq_grads)
        if mu is not None:
            scale = sum(abs(c) for c in mu)
            mu = tuple(c / scale for c in mu)
            cert = _holds(p, mode, Fraction(0), [Fraction(0)] * k, mu,
                          notes + ["equality gradients are linearly dependent; multipliers from their kernel"])
            cert.normalization = "sum of |equality multipliers| = 1"
            return cert

    # columns: lambda_0 (fj only), lambda_i, mu_j
    cols = ([p.grad_f] if mode == "fritz_john" else []) + p.active_grads() + list(p.eq_grads)
    nl = (1 if mode == "fritz_john" else 0) + k
    nv = len(cols)
    rhs = [Fraction(0)] * n if mode == "fritz_john" else [-c for c in p.grad_f]
    rows = [eq([col[c] for col in cols], rhs[c]) for c in range(n)]
    obj = None
    if mode == "fritz_john":
        rows.append(eq([1] * nl + [0] * q, 1))
        obj = tuple([1] + [0] * (nv - 1))
    res = solve_lp(LinearProgram(nv, tuple(rows), obj, maximize=True, nonneg=frozenset(range(nl))))
    if res.optimal:
        sol = res.solution
        if mode == "fritz_john":
            lam0, lams, mus = sol[0], list(sol[1:nl]), sol[nl:]
        else:
            lam0, lams, mus = Fraction(1), list(sol[:nl]), sol[nl:]
        return _holds(p, mode, lam0, lams, tuple(mus), notes)

    y = res.farkas[:n]
    d = tuple(-c for c in y)
    strict = "<" if mode == "fritz_john" else "<="
    relations = {"f": "<"}
    labels = ["f"]
    for i, _ in p.active:
        relations[f"g{i}"] = strict
        labels.append(f"g{i}")
    for j in range(1, q + 1):
        relations[f"h{j}"] = "="
        labels.append(f"h{j}")
    kind = ("direction d with <grad f, d> < 0, <grad g_i, d> < 0, <grad h_j, d> = 0"
            if mode == "fritz_john" else
            "direction d with <grad f, d> < 0, <grad g_i, d> <= 0, <grad h_j, d> = 0")
    cert = Certificate(FAILS, "smooth", refutation={
        "kind": kind, "direction": d,
        "patterns": [{"signs": (), "direction": d, "labels": labels, "relations": relations}]},
        normalization=("objective multiplier fixed to 1" if mode == "kkt"
                       else "sum of objective and active-inequality multipliers = 1"),
        notes=notes, sets=_sets(p))
    cert.extra["mode"] = mode
    return cert


def linearizing_cone(p: SmoothProblemAtPoint) -> HPolyhedron:
    zero = Fraction(0)
    return HPolyhedron(p.dim, tuple((g, zero) for g in p.active_grads()),
                       tuple((g, zero) for g in p.eq_grads))


@dataclass
class CQResult:
    name: str
    holds: bool
    evidence: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"check": f"cq:{self.name}", "status": HOLDS if self.holds else FAILS,
                "evidence": self.evidence}


def _licq(p):
    rows = p.active_grads() + list(p.eq_grads)
    r = matrix_rank(rows) if rows else 0
    return CQResult("licq", r == len(rows), {"rank": r, "rows": len(rows)})


def _mfcq(p):
    n = p.dim
    eqs = list(p.eq_grads)
    r = matrix_rank(eqs) if eqs else 0
    if r < len(eqs):
        return CQResult("mfcq", False, {"reason": "equality gradients are linearly dependent",
                                        "rank": r, "rows": len(eqs)})
    # variables y (box |y_k| <= 1) and t <= 1; maximise t
    rows = []
    for k in range(n):
        e = [0] * (n + 1)
        e[k] = 1
        rows.append(le(e, 1))
        rows.append(le([-c for c in e], 1))
    rows.append(le([0] * n + [1], 1))
    for g in p.active_grads():
        rows.append(le(list(g) + [1], 0))
    for h in eqs:
        rows.append(eq(list(h) + [0], 0))
    obj = tuple([0] * n + [1])
    res = solve_lp(LinearProgram(n + 1, tuple(rows), obj, maximize=True))
    y, t = res.solution[:n], res.value
    return CQResult("mfcq", t > 0, {"y": fmt_vector(y), "slack": fmt(t)})


def _slater(p, problem):
    if problem is None:
        raise InputError("slater needs the problem expressions and a witness point")
    x0 = problem.slater_point
    if x0 is None:
        raise InputError("slater check: witness required (slater_point)")
    active = [i for i, _ in p.active]
    for i in active:
        if not in_convex_fragment(problem.inequalities[i - 1]):
            raise FragmentError(f"slater check: g{i} has no structural convexity certificate")
    for j, h in enumerate(problem.equalities, 1):
        if not is_affine(h):
            raise FragmentError(f"slater check: h{j} is not affine")
    vals = {f"g{i}": evaluate(problem.inequalities[i - 1], x0).value for i in active}
    eqv = {f"h{j}": evaluate(h, x0).value for j, h in enumerate(problem.equalities, 1)}
    ok = all(v < 0 for v in vals.values()) and all(v == 0 for v in eqv.values())
    return CQResult("slater", ok, {"x0": fmt_vector(x0),
                                   "g(x0)": {k: fmt(v) for k, v in vals.items()},
                                   "h(x0)": {k: fmt(v) for k, v in eqv.items()}})


def _cone_subset(a: HPolyhedron, b: HPolyhedron) -> bool:
    """a within b for homogeneous cones: every row of b is bounded by 0 on a (box-normalised LP)."""
    n = a.dim
    base = list(a.rows())
    for k in range(n):
        e = [0] * n
        e[k] = 1
        base.append(le(e, 1))
        base.append(le([-c for c in e], 1))
    targets = [(r, 1) for r, _ in b.inequalities] + [(r, s) for r, _ in b.equalities for s in (1, -1)]
    for r, s in targets:
        obj = tuple(s * c for c in r)
        res = solve_lp(LinearProgram(n, tuple(base), obj, maximize=True))
        if res.value > 0:
            return False
    return True


def _abadie(p, problem):
    if problem is None:
        raise InputError("abadie_polyhedral needs the problem expressions")
    from .convex import affine_gradient
    for label, e in problem.labelled():
        if label != "f" and not is_affine(e):
            raise FragmentError(
                f"abadie_polyhedral: {label} is not affine; undecidable here, use the sampling falsifier")
    n = problem.dim
    zero = (Fraction(0),) * n
    ineqs = []
    for g in problem.inequalities:
        a = affine_gradient(g, n)
        ineqs.append((a, -evaluate(g, zero).value))
    eqs = []
    for h in problem.equalities:
        a = affine_gradient(h, n)
        eqs.append((a, -evaluate(h, zero).value))
    feasible_set = HPolyhedron(n, tuple(ineqs), tuple(eqs))
    tangent, _ = tangent_normal_cones(feasible_set, p.x)
    lin = linearizing_cone(p)
    same = _cone_subset(tangent, lin) and _cone_subset(lin, tangent)
    return CQResult("abadie_polyhedral", same, {
        "note": "for a polyhedral feasible set the tangent cone equals the linearizing cone",
        "confirmed_by_lp": same})


def cq_check(p: SmoothProblemAtPoint, which: str, problem: Optional[Problem] = None) -> CQResult:
    which = which.lower().replace("-", "_")
    if which == "licq":
        return _licq(p)
    if which == "mfcq":
        return _mfcq(p)
    if which == "slater":
        return _slater(p, problem)
    if which in ("abadie", "abadie_polyhedral"):
        return _abadie(p, problem)
    if which == "guignard":
        raise InputError("guignard has no checker; for polyhedral constraints use abadie_polyhedral")
    raise InputError(f"unknown constraint qualification {which!r}")


def cq_implication_audit(instances: Sequence) -> dict:
    """Check LICQ => MFCQ and Slater => MFCQ on every instance.

    ``instances`` holds SmoothProblemAtPoint values or (SmoothProblemAtPoint,
    Problem) pairs; Slater is only tried when a Problem with a witness is given.
    A violation means a bug in one of the checkers.
    """
    report = {"instances": 0, "licq": 0, "mfcq": 0, "slater": 0, "violations": [],
              "notes": ["Abadie => Guignard holds by definition and is not computed",
                        "Slater => MFCQ is audited only when the equality gradients are independent"]}
    for k, item in enumerate(instances):
        p, problem = item if isinstance(item, tuple) else (item, None)
        report["instances"] += 1
        licq = _licq(p).holds
        mfcq = _mfcq(p).holds
        report["licq"] += licq
        report["mfcq"] += mfcq
        if licq and not mfcq:
            report["violations"].append({"instance": k, "arrow": "LICQ => MFCQ"})
        if problem is not None and problem.slater_point is not None:
            try:
                sl = _slater(p, problem).holds
            except (FragmentError, InputError):
                sl = False
            eqs = list(p.eq_grads)
            independent = not eqs or matrix_rank(eqs) == len(eqs)
            if sl:
                report["slater"] += 1
                if independent and not mfcq:
                    report["violations"].append({"instance": k, "arrow": "Slater => MFCQ"})
    return report
