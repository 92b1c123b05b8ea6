"""JSON problem files: tagged expression trees, rationals as "p/q" strings.

Structural errors name the JSON path of the offending node (``$.objective.args[1]``);
syntax errors carry the line and column reported by the JSON decoder.

Expression nodes::

    "3/2"                                  constant (or {"op": "const", "value": "3/2"})
    "x"                                    variable by name (or {"op": "var", "name": "x"})
    {"op": "add", "args": [...]}           also "sub" (a - b - ...) and "neg"
    {"op": "scale", "coef": "2", "args": [e]}
    {"op": "mul", "args": [a, b]}          {"op": "pow", "exponent": 2, "args": [e]}
    {"op": "exp" | "abs" | "recip", "args": [e]}
    {"op": "max" | "min", "args": [...]}
    {"op": "piecewise",
     "pieces": [{"guard": [{"normal": [...], "rhs": "0", "rel": "<="}], "expr": e}, ...],
     "differentiable_at": [{"point": [...], "gradient": [...]}]}
"""
from __future__ import annotations

import json
from fractions import Fraction

from .errors import InputError
from .expr import (Abs, Condition, Const, Exp, Expr, Guard, Max, Min, Piecewise, Power, Product,
                   Recip, Scale, Sum, Var)
from .problem import Problem
from .rational import fmt, fmt_vector, to_fraction

UNARY = {"exp": Exp, "abs": Abs, "recip": Recip}
NARY = {"max": Max, "min": Min}


class _Path:
    def __init__(self, path: str):
        self.path = path

    def key(self, k) -> "_Path":
        return _Path(f"{self.path}.{k}")

    def idx(self, i) -> "_Path":
        return _Path(f"{self.path}[{i}]")

    def error(self, msg: str) -> InputError:
        return InputError(f"{self.path}: {msg}")


def _rational(v, path: _Path) -> Fraction:
    if isinstance(v, float):
        raise path.error(f"floats are not accepted, write rationals as strings (got {v!r})")
    try:
        return to_fraction(v)
    except (InputError, ZeroDivisionError) as err:
        raise path.error(str(err) or f"bad rational {v!r}") from None


def _vector(v, path: _Path, dim=None) -> tuple:
    if not isinstance(v, list):
        raise path.error("expected a list of rationals")
    out = tuple(_rational(c, path.idx(i)) for i, c in enumerate(v))
    if dim is not None and len(out) != dim:
        raise path.error(f"dimension {len(out)}, expected {dim}")
    return out


def _args(node: dict, path: _Path, count=None) -> list:
    args = node.get("args")
    if not isinstance(args, list) or not args:
        raise path.key("args").error("expected a nonempty list")
    if count is not None and len(args) != count:
        raise path.key("args").error(f"expected {count} argument(s), found {len(args)}")
    return args


def parse_expr(node, variables, path: _Path | str = "$") -> Expr:
    if isinstance(path, str):
        path = _Path(path)
    names = {v: i for i, v in enumerate(variables)}
    n = len(variables)

    def rec(nd, p: _Path) -> Expr:
        if isinstance(nd, str):
            if nd in names:
                return Var(names[nd])
            return Const(_rational(nd, p))
        if isinstance(nd, bool) or isinstance(nd, float):
            raise p.error(f"unsupported literal {nd!r}")
        if isinstance(nd, int):
            return Const(Fraction(nd))
        if not isinstance(nd, dict):
            raise p.error("expected an expression object")
        op = nd.get("op")
        if op == "const":
            return Const(_rational(nd.get("value"), p.key("value")))
        if op == "var":
            if "name" in nd:
                if nd["name"] not in names:
                    raise p.key("name").error(f"unknown variable {nd['name']!r}")
                return Var(names[nd["name"]])
            idx = nd.get("index")
            if not isinstance(idx, int) or isinstance(idx, bool) or not 0 <= idx < n:
                raise p.key("index").error(f"variable index must be in 0..{n - 1}")
            return Var(idx)
        if op in ("add", "sub", "neg"):
            args = [rec(a, p.key("args").idx(i)) for i, a in enumerate(_args(nd, p, 1 if op == "neg" else None))]
            if op == "neg":
                return Scale(Fraction(-1), args[0])
            if op == "sub":
                if len(args) == 1:
                    return Scale(Fraction(-1), args[0])
                args = [args[0]] + [Scale(Fraction(-1), a) for a in args[1:]]
            return Sum(tuple(args))
        if op == "scale":
            (a,) = _args(nd, p, 1)
            return Scale(_rational(nd.get("coef"), p.key("coef")), rec(a, p.key("args").idx(0)))
        if op == "mul":
            a, b = _args(nd, p, 2)
            return Product(rec(a, p.key("args").idx(0)), rec(b, p.key("args").idx(1)))
        if op == "pow":
            (a,) = _args(nd, p, 1)
            k = nd.get("exponent")
            if not isinstance(k, int) or isinstance(k, bool) or k < 1:
                raise p.key("exponent").error("exponent must be a positive integer")
            return Power(rec(a, p.key("args").idx(0)), k)
        if op in UNARY:
            (a,) = _args(nd, p, 1)
            return UNARY[op](rec(a, p.key("args").idx(0)))
        if op in NARY:
            return NARY[op](tuple(rec(a, p.key("args").idx(i)) for i, a in enumerate(_args(nd, p))))
        if op == "piecewise":
            return _piecewise(nd, p, rec, n)
        raise p.key("op").error(f"unknown node kind {op!r}")

    return rec(node, path)


def _piecewise(nd, p: _Path, rec, n) -> Piecewise:
    pieces = nd.get("pieces")
    if not isinstance(pieces, list) or not pieces:
        raise p.key("pieces").error("expected a nonempty list")
    out = []
    for i, pc in enumerate(pieces):
        pp = p.key("pieces").idx(i)
        if not isinstance(pc, dict) or "expr" not in pc:
            raise pp.error("piece needs 'guard' and 'expr'")
        conds = []
        for k, c in enumerate(pc.get("guard", [])):
            cp = pp.key("guard").idx(k)
            if not isinstance(c, dict):
                raise cp.error("condition must be an object")
            normal = _vector(c.get("normal"), cp.key("normal"), n)
            try:
                conds.append(Condition(normal, _rational(c.get("rhs", "0"), cp.key("rhs")), c.get("rel")))
            except InputError as err:
                raise cp.error(str(err)) from None
        out.append((Guard(tuple(conds)), rec(pc["expr"], pp.key("expr"))))
    ann = []
    for i, a in enumerate(nd.get("differentiable_at", [])):
        ap = p.key("differentiable_at").idx(i)
        if not isinstance(a, dict):
            raise ap.error("expected {point, gradient}")
        ann.append((_vector(a.get("point"), ap.key("point"), n),
                    _vector(a.get("gradient"), ap.key("gradient"), n)))
    return Piecewise(tuple(out), tuple(ann))


def dump_expr(e: Expr, variables) -> object:
    if isinstance(e, Const):
        return fmt(e.value)
    if isinstance(e, Var):
        return {"op": "var", "name": variables[e.index]}
    if isinstance(e, Sum):
        return {"op": "add", "args": [dump_expr(t, variables) for t in e.terms]}
    if isinstance(e, Scale):
        return {"op": "scale", "coef": fmt(e.coef), "args": [dump_expr(e.arg, variables)]}
    if isinstance(e, Product):
        return {"op": "mul", "args": [dump_expr(e.left, variables), dump_expr(e.right, variables)]}
    if isinstance(e, Power):
        return {"op": "pow", "exponent": e.exponent, "args": [dump_expr(e.arg, variables)]}
    for op, cls in UNARY.items():
        if isinstance(e, cls):
            return {"op": op, "args": [dump_expr(e.arg, variables)]}
    for op, cls in NARY.items():
        if isinstance(e, cls):
            return {"op": op, "args": [dump_expr(a, variables) for a in e.args]}
    if isinstance(e, Piecewise):
        out = {"op": "piecewise", "pieces": [
            {"guard": [{"normal": fmt_vector(c.normal), "rhs": fmt(c.rhs), "rel": c.rel}
                       for c in g.conditions],
             "expr": dump_expr(x, variables)} for g, x in e.pieces]}
        if e.differentiable_at:
            out["differentiable_at"] = [{"point": fmt_vector(pt), "gradient": fmt_vector(gr)}
                                        for pt, gr in e.differentiable_at]
        return out
    raise InputError(f"cannot serialise {type(e).__name__}")


def load_json(text: str) -> dict:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as err:
        raise InputError(f"line {err.lineno}, column {err.colno}: {err.msg}") from None
    if not isinstance(data, dict):
        raise InputError("$: top level must be an object")
    return data


PROBLEM_KEYS = {"kind", "name", "variables", "objective", "inequalities", "equalities", "point",
                "gradient_overrides", "slater_point", "expected", "expected_values", "modes",
                "provenance", "notes"}


def problem_from_dict(data: dict) -> Problem:
    root = _Path("$")
    unknown = set(data) - PROBLEM_KEYS
    if unknown:
        raise root.error(f"unknown keys {sorted(unknown)}")
    variables = data.get("variables")
    if (not isinstance(variables, list) or not variables
            or not all(isinstance(v, str) and v for v in variables)):
        raise root.key("variables").error("expected a nonempty list of names")
    if len(set(variables)) != len(variables):
        raise root.key("variables").error("variable names must be distinct")
    for v in variables:
        try:
            to_fraction(v)
        except (InputError, ZeroDivisionError):
            continue
        raise root.key("variables").error(f"variable name {v!r} reads as a number")
    n = len(variables)
    if "objective" not in data:
        raise root.error("missing 'objective'")
    obj = parse_expr(data["objective"], variables, root.key("objective"))
    lists = {}
    for key in ("inequalities", "equalities"):
        items = data.get(key, [])
        if not isinstance(items, list):
            raise root.key(key).error("expected a list")
        lists[key] = tuple(parse_expr(e, variables, root.key(key).idx(i)) for i, e in enumerate(items))
    point = _vector(data["point"], root.key("point"), n) if "point" in data else None
    slater = _vector(data["slater_point"], root.key("slater_point"), n) if "slater_point" in data else None
    overrides = data.get("gradient_overrides", {})
    if not isinstance(overrides, dict):
        raise root.key("gradient_overrides").error("expected an object label -> gradient")
    ov = tuple((lab, _vector(g, root.key("gradient_overrides").key(lab), n)) for lab, g in overrides.items())
    expected = data.get("expected", {})
    if not isinstance(expected, dict):
        raise root.key("expected").error("expected an object check -> status")
    try:
        return Problem(obj, lists["inequalities"], lists["equalities"], tuple(variables), point,
                       str(data.get("name", "")), ov, slater, tuple(expected.items()),
                       str(data.get("provenance", "")))
    except InputError as err:
        raise root.error(str(err)) from None


def parse_problem(text: str) -> Problem:
    return problem_from_dict(load_json(text))


def problem_to_dict(p: Problem) -> dict:
    v = list(p.variables)
    out = {"kind": "problem", "name": p.name, "variables": v,
           "objective": dump_expr(p.objective, v),
           "inequalities": [dump_expr(g, v) for g in p.inequalities],
           "equalities": [dump_expr(h, v) for h in p.equalities]}
    if p.point is not None:
        out["point"] = fmt_vector(p.point)
    if p.gradient_overrides:
        out["gradient_overrides"] = {lab: fmt_vector(g) for lab, g in p.gradient_overrides}
    if p.slater_point is not None:
        out["slater_point"] = fmt_vector(p.slater_point)
    if p.expected:
        out["expected"] = dict(p.expected)
    if p.provenance:
        out["provenance"] = p.provenance
    return out


def print_problem(p: Problem) -> str:
    return json.dumps(problem_to_dict(p), indent=2) + "\n"


def _rows(items, path: _Path, dim: int) -> tuple:
    if not isinstance(items, list):
        raise path.error("expected a list of {a, b} rows")
    out = []
    for i, r in enumerate(items):
        rp = path.idx(i)
        if not isinstance(r, dict):
            raise rp.error("row must be an object {a, b}")
        out.append((_vector(r.get("a"), rp.key("a"), dim), _rational(r.get("b", "0"), rp.key("b"))))
    return tuple(out)


def _polyhedron(data, path: _Path, dim: int):
    from .geometry import HPolyhedron
    if not isinstance(data, dict):
        raise path.error("expected {inequalities, equalities}")
    return HPolyhedron(dim, _rows(data.get("inequalities", []), path.key("inequalities"), dim),
                       _rows(data.get("equalities", []), path.key("equalities"), dim))


def _ordering_cone(data, path: _Path, dim: int):
    from .setvalued import OrderingCone
    if not isinstance(data, dict):
        raise path.error("expected {rays}")
    rays = data.get("rays")
    if not isinstance(rays, list) or not rays:
        raise path.key("rays").error("expected a nonempty list")
    return OrderingCone.from_generators([_vector(r, path.key("rays").idx(i), dim)
                                         for i, r in enumerate(rays)], dim)


def setvalued_from_dict(data: dict):
    """A polyhedral instance: epigraph rows a.(x, y, z) <= b over nx + ny + nz coordinates."""
    from .setvalued import PolyhedralInstance
    root = _Path("$")
    dims = []
    for key in ("nx", "ny", "nz"):
        v = data.get(key)
        if not isinstance(v, int) or isinstance(v, bool) or v < 1:
            raise root.key(key).error("expected a positive integer")
        dims.append(v)
    nx, ny, nz = dims
    epi = _polyhedron(data.get("epigraph"), root.key("epigraph"), nx + ny + nz)
    base = data.get("base")
    if not isinstance(base, dict):
        raise root.key("base").error("expected {x, y, z}")
    x = _vector(base.get("x"), root.key("base").key("x"), nx)
    y = _vector(base.get("y"), root.key("base").key("y"), ny)
    z = _vector(base.get("z"), root.key("base").key("z"), nz)
    cy = _ordering_cone(data.get("cone_y"), root.key("cone_y"), ny)
    cz = _ordering_cone(data.get("cone_z"), root.key("cone_z"), nz)
    s_hat = _polyhedron(data["constraint_set"], root.key("constraint_set"), nx) \
        if "constraint_set" in data else None
    return PolyhedralInstance(epi, nx, ny, nz, x, y, z, cy, cz, s_hat)


def ekeland_from_dict(data: dict) -> dict:
    """Metric space, function values and parameters of an Ekeland run."""
    from .ekeland import FiniteMetricSpace
    root = _Path("$")
    dist = data.get("distances")
    if not isinstance(dist, list) or not dist:
        raise root.key("distances").error("expected a square matrix")
    n = len(dist)
    rows = [_vector(r, root.key("distances").idx(i), n) for i, r in enumerate(dist)]
    labels = data.get("labels")
    space = FiniteMetricSpace.from_matrix(rows, labels)
    return {"space": space, "f": _vector(data.get("f"), root.key("f"), n),
            "z": str(data.get("z")), "eps": _rational(data.get("eps"), root.key("eps")),
            "lambda": _rational(data.get("lambda", "1"), root.key("lambda"))}
