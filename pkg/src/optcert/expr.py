"""Expression trees for objectives and constraints.

Arithmetic is exact over Fractions until an ``Exp`` node is evaluated; from
then on the value is an approximation and is tagged as such. Numeric probes
(difference quotients, continuity and Frechet tests) run in a 50-digit
mpmath context so that exact-looking cancellations survive tiny steps.
"""
from __future__ import annotations

import math
import os
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import mpmath

from .errors import InputError, NonsmoothPointError, UndefinedPointError
from .rational import as_vector, dot, fmt_vector, to_fraction

DEFAULT_FLOAT_TOL = 1e-9

_MP = mpmath.MPContext()
_MP.dps = 50


def float_tol() -> float:
    """Tie/kink tolerance for float-valued paths; OPTCERT_FLOAT_TOL overrides."""
    raw = os.environ.get("OPTCERT_FLOAT_TOL")
    if raw is None:
        return DEFAULT_FLOAT_TOL
    try:
        tol = float(raw)
    except ValueError:
        raise InputError(f"OPTCERT_FLOAT_TOL is not a number: {raw!r}") from None
    if not tol >= 0:
        raise InputError("OPTCERT_FLOAT_TOL must be nonnegative")
    return tol


# --------------------------------------------------------------------------
# nodes

class Expr:
    """Base class. Nodes are immutable; combine them with + - * ** or the constructors."""

    __slots__ = ()

    def __add__(self, other):
        return Sum((self, _wrap(other)))

    def __radd__(self, other):
        return Sum((_wrap(other), self))

    def __sub__(self, other):
        return Sum((self, Scale(Fraction(-1), _wrap(other))))

    def __rsub__(self, other):
        return Sum((_wrap(other), Scale(Fraction(-1), self)))

    def __neg__(self):
        return Scale(Fraction(-1), self)

    def __mul__(self, other):
        if isinstance(other, Expr):
            return Product(self, other)
        return Scale(to_fraction(other), self)

    def __rmul__(self, other):
        if isinstance(other, Expr):
            return Product(other, self)
        return Scale(to_fraction(other), self)

    def __pow__(self, n):
        return Power(self, n)

    def children(self) -> tuple:
        return ()


def _wrap(v) -> Expr:
    return v if isinstance(v, Expr) else Const(v)


@dataclass(frozen=True)
class Const(Expr):
    value: Fraction

    def __post_init__(self):
        object.__setattr__(self, "value", to_fraction(self.value))


@dataclass(frozen=True)
class Var(Expr):
    index: int

    def __post_init__(self):
        if isinstance(self.index, bool) or not isinstance(self.index, int) or self.index < 0:
            raise InputError(f"variable index must be a nonnegative integer, got {self.index!r}")


@dataclass(frozen=True)
class Sum(Expr):
    terms: tuple

    def __post_init__(self):
        terms = tuple(self.terms)
        if not terms:
            raise InputError("sum needs at least one term")
        object.__setattr__(self, "terms", tuple(_wrap(t) for t in terms))

    def children(self):
        return self.terms


@dataclass(frozen=True)
class Scale(Expr):
    coef: Fraction
    arg: Expr

    def __post_init__(self):
        object.__setattr__(self, "coef", to_fraction(self.coef))

    def children(self):
        return (self.arg,)


@dataclass(frozen=True)
class Product(Expr):
    left: Expr
    right: Expr

    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True)
class Power(Expr):
    arg: Expr
    exponent: int

    def __post_init__(self):
        n = self.exponent
        if isinstance(n, bool) or not isinstance(n, int) or n < 1:
            raise InputError(f"power exponent must be a positive integer, got {n!r}")

    def children(self):
        return (self.arg,)


@dataclass(frozen=True)
class Exp(Expr):
    arg: Expr

    def children(self):
        return (self.arg,)


@dataclass(frozen=True)
class Abs(Expr):
    arg: Expr

    def children(self):
        return (self.arg,)


@dataclass(frozen=True)
class Max(Expr):
    args: tuple

    def __post_init__(self):
        args = tuple(_wrap(a) for a in self.args)
        if not args:
            raise InputError("max needs at least one argument")
        object.__setattr__(self, "args", args)

    def children(self):
        return self.args


@dataclass(frozen=True)
class Min(Expr):
    args: tuple

    def __post_init__(self):
        args = tuple(_wrap(a) for a in self.args)
        if not args:
            raise InputError("min needs at least one argument")
        object.__setattr__(self, "args", args)

    def children(self):
        return self.args


@dataclass(frozen=True)
class Recip(Expr):
    """1 / arg; undefined where arg vanishes."""
    arg: Expr

    def children(self):
        return (self.arg,)


RELATIONS = ("<=", "<", "=", ">=", ">")


@dataclass(frozen=True)
class Condition:
    normal: tuple
    rhs: Fraction
    rel: str

    def __post_init__(self):
        if self.rel not in RELATIONS:
            raise InputError(f"unknown relation {self.rel!r}")
        object.__setattr__(self, "normal", as_vector(self.normal))
        object.__setattr__(self, "rhs", to_fraction(self.rhs))

    def slack(self, x) -> Fraction:
        return dot(self.normal, x) - self.rhs

    def holds(self, x) -> bool:
        s = self.slack(x)
        return {"<=": s <= 0, "<": s < 0, "=": s == 0, ">=": s >= 0, ">": s > 0}[self.rel]

    def holds_closed(self, x) -> bool:
        s = self.slack(x)
        if self.rel in ("<=", "<"):
            return s <= 0
        if self.rel in (">=", ">"):
            return s >= 0
        return s == 0

    def tight(self, x) -> bool:
        return self.slack(x) == 0


@dataclass(frozen=True)
class Guard:
    conditions: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "conditions", tuple(self.conditions))

    def holds(self, x) -> bool:
        return all(c.holds(x) for c in self.conditions)

    def holds_closed(self, x) -> bool:
        return all(c.holds_closed(x) for c in self.conditions)

    def tight_at(self, x) -> bool:
        return any(c.tight(x) for c in self.conditions)


@dataclass(frozen=True)
class Piecewise(Expr):
    """First piece whose guard holds wins.

    ``differentiable_at`` lists (point, gradient) pairs asserting a derivative at
    guard junctions, where ``gradient`` would otherwise refuse.
    """
    pieces: tuple
    differentiable_at: tuple = ()

    def __post_init__(self):
        pieces = tuple((g, _wrap(e)) for g, e in self.pieces)
        if not pieces:
            raise InputError("piecewise needs at least one piece")
        object.__setattr__(self, "pieces", pieces)
        ann = tuple((as_vector(p), as_vector(g)) for p, g in self.differentiable_at)
        for p, g in ann:
            if len(p) != len(g):
                raise InputError("differentiable_at point and gradient differ in dimension")
        object.__setattr__(self, "differentiable_at", ann)

    def children(self):
        return tuple(e for _, e in self.pieces)

    def select(self, x) -> int:
        for i, (g, _) in enumerate(self.pieces):
            if g.holds(x):
                return i
        raise UndefinedPointError(f"no guard holds at point {fmt_vector(x)}")

    def annotation_at(self, x) -> Optional[tuple]:
        for p, g in self.differentiable_at:
            if p == tuple(x):
                return g
        return None


def iter_nodes(e: Expr):
    stack = [e]
    while stack:
        n = stack.pop()
        yield n
        stack.extend(reversed(n.children()))


def max_var_index(e: Expr) -> int:
    return max((n.index for n in iter_nodes(e) if isinstance(n, Var)), default=-1)


def is_smooth(e: Expr) -> bool:
    """True when the tree has no abs, max, min or piecewise node."""
    return not any(isinstance(n, (Abs, Max, Min, Piecewise)) for n in iter_nodes(e))


def has_exp(e: Expr) -> bool:
    return any(isinstance(n, Exp) for n in iter_nodes(e))


def guard_conditions(e: Expr) -> list:
    """Every guard condition of every piecewise node, in tree order, de-duplicated."""
    seen = {}
    for n in iter_nodes(e):
        if isinstance(n, Piecewise):
            for g, _ in n.pieces:
                for c in g.conditions:
                    seen.setdefault((c.normal, c.rhs), c)
    return list(seen.values())


def check_dimension(e: Expr, dim: int):
    if max_var_index(e) >= dim:
        raise InputError(f"expression uses variable {max_var_index(e)} but dimension is {dim}")
    for n in iter_nodes(e):
        if isinstance(n, Piecewise):
            for g, _ in n.pieces:
                for c in g.conditions:
                    if len(c.normal) != dim:
                        raise InputError(
                            f"guard has {len(c.normal)} coordinates on {dim} variables")
            for p, gr in n.differentiable_at:
                if len(p) != dim:
                    raise InputError("differentiable_at point has the wrong dimension")


# --------------------------------------------------------------------------
# evaluation

@dataclass(frozen=True)
class EvalValue:
    value: object  # Fraction when exact, float otherwise
    exact: bool

    def __float__(self):
        return float(self.value)


class _Ctx:
    """Arithmetic context: 'float' uses math.exp, 'mp' uses 50-digit mpmath."""

    def __init__(self, mode: str):
        self.mode = mode
        self.poisoned = False

    def lift(self, v):
        if self.mode == "mp" and isinstance(v, Fraction):
            return _MP.mpf(v.numerator) / v.denominator
        return v

    def approx(self, v) -> bool:
        return not isinstance(v, Fraction)

    def exp(self, v):
        self.poisoned = True
        if self.mode == "mp":
            return _MP.exp(self.lift(v))
        return math.exp(float(v))

    def norm(self, *vals):
        if any(self.approx(v) for v in vals):
            return tuple(self.lift(v) for v in vals)
        return vals


def _ev(e: Expr, x, ctx: _Ctx):
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Var):
        return x[e.index]
    if isinstance(e, Sum):
        vals = ctx.norm(*(_ev(t, x, ctx) for t in e.terms))
        acc = vals[0]
        for v in vals[1:]:
            acc = acc + v
        return acc
    if isinstance(e, Scale):
        a, c = ctx.norm(_ev(e.arg, x, ctx), e.coef)
        return c * a
    if isinstance(e, Product):
        a, b = ctx.norm(_ev(e.left, x, ctx), _ev(e.right, x, ctx))
        return a * b
    if isinstance(e, Power):
        return _ev(e.arg, x, ctx) ** e.exponent
    if isinstance(e, Exp):
        return ctx.exp(_ev(e.arg, x, ctx))
    if isinstance(e, Abs):
        return abs(_ev(e.arg, x, ctx))
    if isinstance(e, Max):
        return max(ctx.norm(*(_ev(a, x, ctx) for a in e.args)))
    if isinstance(e, Min):
        return min(ctx.norm(*(_ev(a, x, ctx) for a in e.args)))
    if isinstance(e, Recip):
        v = _ev(e.arg, x, ctx)
        if v == 0:
            raise UndefinedPointError(f"reciprocal of zero at point {fmt_vector(x)}")
        one, v = ctx.norm(Fraction(1), v)
        return one / v
    if isinstance(e, Piecewise):
        return _ev(e.pieces[e.select(x)][1], x, ctx)
    raise InputError(f"unknown expression node {type(e).__name__}")


def _point(e: Expr, x) -> tuple:
    x = as_vector(x)
    if max_var_index(e) >= len(x):
        raise InputError(
            f"expression uses variable {max_var_index(e)} but the point has dimension {len(x)}")
    return x


def evaluate(e: Expr, x) -> EvalValue:
    """Exact value at a rational point; float and tagged approximate once exp is involved."""
    x = _point(e, x)
    ctx = _Ctx("float")
    v = _ev(e, x, ctx)
    if ctx.poisoned:
        return EvalValue(float(v), False)
    return EvalValue(v, True)


def evaluate_mp(e: Expr, x):
    """Value in the 50-digit context (exact Fraction when no exp is hit)."""
    x = _point(e, x)
    return _ev(e, x, _Ctx("mp"))


# --------------------------------------------------------------------------
# gradients

def _is_zero(v, ctx) -> bool:
    if ctx.approx(v):
        return abs(float(v)) <= float_tol()
    return v == 0


def _ties(vals, ctx):
    best = max(vals)
    if ctx.approx(best) or any(ctx.approx(v) for v in vals):
        tol = float_tol()
        return [i for i, v in enumerate(vals) if float(best) - float(v) <= tol]
    return [i for i, v in enumerate(vals) if v == best]


def _jet(e: Expr, x, ctx):
    n = len(x)
    zero = [Fraction(0)] * n
    if isinstance(e, Const):
        return e.value, zero
    if isinstance(e, Var):
        g = list(zero)
        g[e.index] = Fraction(1)
        return x[e.index], g
    if isinstance(e, Sum):
        val, grad = _jet(e.terms[0], x, ctx)
        for t in e.terms[1:]:
            v, g = _jet(t, x, ctx)
            val = _add(val, v, ctx)
            grad = [_add(a, b, ctx) for a, b in zip(grad, g)]
        return val, grad
    if isinstance(e, Scale):
        v, g = _jet(e.arg, x, ctx)
        return _mul(e.coef, v, ctx), [_mul(e.coef, a, ctx) for a in g]
    if isinstance(e, Product):
        u, gu = _jet(e.left, x, ctx)
        v, gv = _jet(e.right, x, ctx)
        return _mul(u, v, ctx), [_add(_mul(u, b, ctx), _mul(v, a, ctx), ctx) for a, b in zip(gu, gv)]
    if isinstance(e, Power):
        u, gu = _jet(e.arg, x, ctx)
        k = e.exponent
        c = _mul(Fraction(k), u ** (k - 1), ctx)
        return u ** k, [_mul(c, a, ctx) for a in gu]
    if isinstance(e, Exp):
        u, gu = _jet(e.arg, x, ctx)
        ev = ctx.exp(u)
        return ev, [_mul(ev, a, ctx) for a in gu]
    if isinstance(e, Recip):
        u, gu = _jet(e.arg, x, ctx)
        if u == 0:
            raise UndefinedPointError(f"reciprocal of zero at point {fmt_vector(x)}")
        one, uu = ctx.norm(Fraction(1), u)
        inv = one / uu
        c = -(inv * inv)
        return inv, [_mul(c, a, ctx) for a in gu]
    if isinstance(e, Abs):
        u, gu = _jet(e.arg, x, ctx)
        if _is_zero(u, ctx):
            raise NonsmoothPointError(f"abs node has a kink at {fmt_vector(x)}")
        s = Fraction(1 if u > 0 else -1)
        return abs(u), [_mul(s, a, ctx) for a in gu]
    if isinstance(e, (Max, Min)):
        jets = [_jet(a, x, ctx) for a in e.args]
        vals = [j[0] for j in jets]
        key = vals if isinstance(e, Max) else [-v for v in vals]
        winners = _ties(key, ctx)
        if len(winners) > 1:
            kind = "max" if isinstance(e, Max) else "min"
            raise NonsmoothPointError(
                f"{kind} node has tied branches {winners} at {fmt_vector(x)}")
        return jets[winners[0]]
    if isinstance(e, Piecewise):
        k = e.select(x)
        guard, branch = e.pieces[k]
        junction = guard.tight_at(x) or any(g.holds_closed(x) for g, _ in e.pieces[:k])
        if junction:
            ann = e.annotation_at(x)
            if ann is None:
                raise NonsmoothPointError(
                    f"piecewise node at a guard junction at {fmt_vector(x)}")
            if len(ann) != n:
                raise InputError("differentiable_at gradient has the wrong dimension")
            return _ev(branch, x, ctx), list(ann)
        return _jet(branch, x, ctx)
    raise InputError(f"unknown expression node {type(e).__name__}")


def _add(a, b, ctx):
    a, b = ctx.norm(a, b)
    return a + b


def _mul(a, b, ctx):
    a, b = ctx.norm(a, b)
    return a * b


@dataclass(frozen=True)
class GradientValue:
    vector: tuple
    exact: bool


def gradient_tagged(e: Expr, x) -> GradientValue:
    x = _point(e, x)
    ctx = _Ctx("float")
    _, g = _jet(e, x, ctx)
    if ctx.poisoned:
        return GradientValue(tuple(float(v) for v in g), False)
    return GradientValue(tuple(g), True)


def gradient(e: Expr, x) -> tuple:
    """Gradient of the active smooth branch; raises NonsmoothPointError at kinks."""
    return gradient_tagged(e, x).vector


# --------------------------------------------------------------------------
# numeric probes

QUOTIENT_SCHEDULE = tuple(range(10, 41))


def _mp_value(e, x):
    return _MP.mpf(0) + _Ctx("mp").lift(_ev(e, x, _Ctx("mp")))


def _fdiff(e, x, d, t):
    xt = tuple(a + t * b for a, b in zip(x, d))
    ctx = _Ctx("mp")
    fx, fxt = ctx.norm(_ev(e, x, ctx), _ev(e, xt, ctx))
    return (fxt - fx) / t


def directional_derivative_numeric(e: Expr, x, d):
    """(estimate, stability) of f'(x; d) from quotients at t = 2^-k, k = 10..40."""
    x = _point(e, x)
    d = as_vector(d)
    if len(d) != len(x):
        raise InputError("direction dimension does not match point")
    qs = [float(_fdiff(e, x, d, Fraction(1, 2 ** k))) for k in QUOTIENT_SCHEDULE]
    tail = qs[-8:]
    return qs[-1], max(tail) - min(tail)


@dataclass(frozen=True)
class DiscontinuityWitness:
    radius_exp: int
    point: tuple
    normal: tuple
    jump: float


@dataclass(frozen=True)
class RegularityReport:
    continuous_at_x: bool
    discontinuity_in_every_ball: bool
    witnesses: tuple  # one entry per radius that produced a witness, largest jump first
    frechet_ok: bool
    candidate_gradient: Optional[tuple]  # rationalised estimate
    candidate_gradient_float: Optional[tuple]
    fit_residual: float
    remainder_ratios: tuple
    evidence: str = "numeric evidence"

    def to_json(self) -> dict:
        return {
            "evidence": self.evidence,
            "continuous_at_x": self.continuous_at_x,
            "discontinuity_in_every_ball": self.discontinuity_in_every_ball,
            "witnesses": [
                {"radius": f"2^-{w.radius_exp}", "point": fmt_vector(w.point),
                 "across_normal": fmt_vector(w.normal), "jump": w.jump}
                for w in self.witnesses
            ],
            "frechet_ok": self.frechet_ok,
            "candidate_gradient": None if self.candidate_gradient is None
            else fmt_vector(self.candidate_gradient),
            "fit_residual": self.fit_residual,
            "remainder_ratios": list(self.remainder_ratios),
        }


CONTINUITY_RADII = tuple(range(2, 21))
_JUMP_FLOOR_MP = 1e-30


def _safe_mp(e, x):
    try:
        return _mp_value(e, x)
    except UndefinedPointError:
        return None


def _hyperplane_samples(c: Condition, x, r):
    """Points on {<a, z> = b} within distance r of x: the foot of x and offsets along the plane."""
    a = c.normal
    aa = dot(a, a)
    if aa == 0:
        return []
    s = (dot(a, x) - c.rhs) / aa
    foot = tuple(xi - s * ai for xi, ai in zip(x, a))
    if s * s * aa > r * r:
        return []
    pts = [foot]
    n = len(x)
    for i in range(n):
        u = [-(a[i] / aa) * aj for aj in a]
        u[i] += 1
        l1 = sum(abs(v) for v in u)
        if l1 == 0:
            continue
        for sign in (1, -1):
            q = tuple(f + sign * r * v / l1 for f, v in zip(foot, u))
            diff = [qi - xi for qi, xi in zip(q, x)]
            if dot(diff, diff) <= r * r:
                pts.append(q)
    return list(dict.fromkeys(pts))


def _jump(e, c, q, delta):
    a = c.normal
    l1 = sum(abs(v) for v in a)
    step = [delta * v / l1 for v in a]
    plus = tuple(qi + si for qi, si in zip(q, step))
    minus = tuple(qi - si for qi, si in zip(q, step))
    fp, fm = _safe_mp(e, plus), _safe_mp(e, minus)
    if fp is None or fm is None:
        return None
    return abs(fp - fm)


def _discontinuity_scan(e: Expr, x):
    conds = guard_conditions(e)
    found = []
    for k in CONTINUITY_RADII:
        r = Fraction(1, 2 ** k)
        hits = []
        for c in conds:
            for q in _hyperplane_samples(c, x, r):
                j1 = _jump(e, c, q, r / 2 ** 20)
                j2 = _jump(e, c, q, r / 2 ** 40)
                if j1 is None or j2 is None:
                    continue
                if j2 > _JUMP_FLOOR_MP and j2 >= j1 / 2:
                    hits.append(DiscontinuityWitness(k, q, c.normal, float(j2)))
        if hits:
            hits.sort(key=lambda w: -w.jump)
            found.append(hits[0])
    return found


def _continuity_at(e: Expr, x) -> bool:
    fx = _safe_mp(e, x)
    if fx is None:
        return False
    n = len(x)
    dirs = [tuple(Fraction(1 if j == i else 0) * s for j in range(n)) for i in range(n) for s in (1, -1)]
    for c in guard_conditions(e):
        l1 = sum(abs(v) for v in c.normal)
        if l1:
            dirs.append(tuple(v / l1 for v in c.normal))
            dirs.append(tuple(-v / l1 for v in c.normal))

    def spread(k):
        r = Fraction(1, 2 ** k)
        pts = [tuple(xi + r * di for xi, di in zip(x, d)) for d in dirs]
        for c in guard_conditions(e):
            pts.extend(_hyperplane_samples(c, x, r))
        vals = [_safe_mp(e, p) for p in pts]
        return max((abs(v - fx) for v in vals if v is not None), default=_MP.mpf(0))

    m12, m20 = spread(12), spread(20)
    return m20 == 0 or m20 <= m12 / 16


def _probe_directions(n):
    dirs = []
    for i in range(n):
        for s in (1, -1):
            dirs.append(tuple(Fraction(s if j == i else 0) for j in range(n)))
    ones = tuple(Fraction(1) for _ in range(n))
    alt = tuple(Fraction(1 if j % 2 == 0 else -1) for j in range(n))
    for v in (ones, alt):
        dirs.append(v)
        dirs.append(tuple(-c for c in v))
    return dirs


FRECHET_TOL = 1e-6


def regularity_probe(e: Expr, x, seed: int = 0) -> RegularityReport:
    """Numeric continuity and Frechet evidence at ``x``. Never a proof."""
    x = _point(e, x)
    n = len(x)
    witnesses = _discontinuity_scan(e, x)
    every_ball = len(witnesses) == len(CONTINUITY_RADII)
    continuous = _continuity_at(e, x)

    try:
        dirs = _probe_directions(n)
        dvals = [directional_derivative_numeric(e, x, d)[0] for d in dirs]
    except UndefinedPointError:
        return RegularityReport(continuous, every_ball, tuple(witnesses), False,
                                None, None, float("inf"), ())
    g = [(dvals[2 * i] - dvals[2 * i + 1]) / 2 for i in range(n)]
    residual = max(abs(dv - sum(gi * float(di) for gi, di in zip(g, d))) for dv, d in zip(dvals, dirs))
    g_rat = tuple(Fraction(v).limit_denominator(10 ** 6) for v in g)

    rng = random.Random(seed)
    hs = [tuple(Fraction(rng.randint(-1000, 1000), 1000) for _ in range(n)) for _ in range(8)]
    hs = [h for h in hs if any(h)] or [tuple(Fraction(1) for _ in range(n))]
    fx = _safe_mp(e, x)
    ratios = []
    for k in (10, 20, 30):
        t = Fraction(1, 2 ** k)
        worst = _MP.mpf(0)
        for h in hs:
            th = tuple(t * c for c in h)
            fy = _safe_mp(e, tuple(a + b for a, b in zip(x, th)))
            if fy is None or fx is None:
                worst = _MP.inf
                break
            lin = _Ctx("mp").lift(dot(g_rat, th))
            norm = _MP.sqrt(_Ctx("mp").lift(dot(th, th)))
            worst = max(worst, abs(fy - fx - lin) / norm)
        ratios.append(float(worst))
    # below the mp noise floor a ratio counts as zero
    decreasing = all(b <= a or b <= _JUMP_FLOOR_MP for a, b in zip(ratios, ratios[1:]))
    frechet = residual <= FRECHET_TOL and ratios[-1] <= FRECHET_TOL and decreasing
    return RegularityReport(continuous, every_ball, tuple(witnesses), frechet,
                            g_rat, tuple(g), residual, tuple(ratios))
