"""Polytopes in vertex form, polyhedra in half-space form, and finitely generated cones."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .errors import InputError, PreconditionError
from .lp import (LinearProgram, Membership, Separator, eq, hull_membership, le,
                 solve_lp)
from .rational import add, as_vector, dot, fmt_vector, scale as vscale, sub, to_fraction

# Above this many vertices, Minkowski sums prune non-extreme points.
PRUNE_THRESHOLD = 64


@dataclass(frozen=True)
class VPolytope:
    """conv(vertices). Redundant points are allowed and change no answer."""
    vertices: tuple

    def __post_init__(self):
        verts = tuple(as_vector(v) for v in self.vertices)
        if not verts:
            raise InputError("a polytope needs at least one vertex")
        d = len(verts[0])
        if any(len(v) != d for v in verts):
            raise InputError("polytope vertices have mixed dimensions")
        object.__setattr__(self, "vertices", verts)

    @property
    def dim(self) -> int:
        return len(self.vertices[0])

    @classmethod
    def point(cls, v) -> "VPolytope":
        return cls((tuple(v),))

    def distinct(self) -> "VPolytope":
        return VPolytope(tuple(dict.fromkeys(self.vertices)))

    def pruned(self) -> "VPolytope":
        """Drop points that are convex combinations of the others."""
        verts = list(dict.fromkeys(self.vertices))
        i = 0
        while i < len(verts) and len(verts) > 1:
            others = verts[:i] + verts[i + 1:]
            if hull_membership(verts[i], others, "convex").inside:
                verts = others
            else:
                i += 1
        return VPolytope(tuple(verts))

    def to_json(self) -> list:
        return [fmt_vector(v) for v in self.vertices]


@dataclass(frozen=True)
class HPolyhedron:
    """{x : <a, x> <= b for each inequality, <c, x> = e for each equality}."""
    dim: int
    inequalities: tuple = ()
    equalities: tuple = ()

    def __post_init__(self):
        def norm(rows, kind):
            out = []
            for i, (a, b) in enumerate(rows):
                a = as_vector(a)
                if len(a) != self.dim:
                    raise InputError(f"{kind} row {i} has dimension {len(a)}, expected {self.dim}")
                out.append((a, to_fraction(b)))
            return tuple(out)
        object.__setattr__(self, "inequalities", norm(self.inequalities, "inequality"))
        object.__setattr__(self, "equalities", norm(self.equalities, "equality"))

    @classmethod
    def whole_space(cls, dim: int) -> "HPolyhedron":
        return cls(dim)

    def violated_row(self, x) -> Optional[str]:
        x = as_vector(x)
        if len(x) != self.dim:
            raise InputError(f"point has dimension {len(x)}, expected {self.dim}")
        for i, (a, b) in enumerate(self.inequalities):
            if dot(a, x) > b:
                return f"inequality {i}"
        for j, (a, b) in enumerate(self.equalities):
            if dot(a, x) != b:
                return f"equality {j}"
        return None

    def contains(self, x) -> bool:
        return self.violated_row(x) is None

    def rows(self) -> tuple:
        return tuple(le(a, b) for a, b in self.inequalities) + tuple(eq(a, b) for a, b in self.equalities)

    def to_json(self) -> dict:
        return {
            "inequalities": [{"normal": fmt_vector(a), "rhs": str(b)} for a, b in self.inequalities],
            "equalities": [{"normal": fmt_vector(a), "rhs": str(b)} for a, b in self.equalities],
        }


@dataclass(frozen=True)
class FinitelyGeneratedCone:
    """cone(rays) + span(lines). With no generators this is {0}."""
    dim: int
    rays: tuple = ()
    lines: tuple = ()

    def __post_init__(self):
        for name in ("rays", "lines"):
            vecs = tuple(as_vector(v) for v in getattr(self, name))
            if any(len(v) != self.dim for v in vecs):
                raise InputError(f"cone {name} must have dimension {self.dim}")
            object.__setattr__(self, name, vecs)

    def generators(self) -> list:
        gens = list(self.rays)
        for b in self.lines:
            gens.append(b)
            gens.append(tuple(-c for c in b))
        # the zero ray keeps the LP well-posed for the trivial cone
        gens.append((Fraction(0),) * self.dim)
        return gens

    def membership(self, v) -> Membership:
        v = as_vector(v)
        if len(v) != self.dim:
            raise InputError(f"vector has dimension {len(v)}, expected {self.dim}")
        return hull_membership(v, self.generators(), "conic")

    def contains(self, v) -> bool:
        return self.membership(v).inside

    def to_json(self) -> dict:
        return {"rays": [fmt_vector(r) for r in self.rays],
                "lines": [fmt_vector(b) for b in self.lines]}


def _check_dim(a: int, b: int):
    if a != b:
        raise InputError(f"dimension mismatch: {a} vs {b}")


def support_value(p: VPolytope, direction) -> Fraction:
    d = as_vector(direction)
    _check_dim(p.dim, len(d))
    return max(dot(v, d) for v in p.vertices)


def minkowski_sum(*polys: VPolytope) -> VPolytope:
    if not polys:
        raise InputError("minkowski_sum needs at least one polytope")
    acc = polys[0]
    for q in polys[1:]:
        _check_dim(acc.dim, q.dim)
        verts = tuple(dict.fromkeys(add(a, b) for a in acc.vertices for b in q.vertices))
        acc = VPolytope(verts)
        if len(acc.vertices) > PRUNE_THRESHOLD:
            acc = acc.pruned()
    return acc


def scale(c, p: VPolytope) -> VPolytope:
    c = to_fraction(c)
    return VPolytope(tuple(vscale(c, v) for v in p.vertices))


def hull_union(*polys: VPolytope) -> VPolytope:
    if not polys:
        raise InputError("hull_union needs at least one polytope")
    for q in polys[1:]:
        _check_dim(polys[0].dim, q.dim)
    return VPolytope(tuple(v for q in polys for v in q.vertices))


def poly_combine(op: str, *args) -> VPolytope:
    """Dispatch by name: 'minkowski_sum', 'scale' (c, polytope) or 'hull_union'."""
    if op == "minkowski_sum":
        return minkowski_sum(*args)
    if op == "scale":
        if len(args) != 2:
            raise InputError("scale takes a scalar and one polytope")
        c, p = args
        if isinstance(c, VPolytope):
            c, p = p, c
        return scale(c, p)
    if op == "hull_union":
        return hull_union(*args)
    raise InputError(f"unknown polytope operation {op!r}")


def polytope_contains(outer: VPolytope, inner: VPolytope):
    """Return (True, coefficient lists) or (False, (vertex, Separator))."""
    _check_dim(outer.dim, inner.dim)
    coeffs = []
    for v in dict.fromkeys(inner.vertices):
        m = hull_membership(v, outer.vertices, "convex")
        if not m.inside:
            return False, (v, m.witness)
        coeffs.append((v, m.witness))
    return True, coeffs


def same_polytope(a: VPolytope, b: VPolytope) -> bool:
    return polytope_contains(a, b)[0] and polytope_contains(b, a)[0]


def polar_cone(c: FinitelyGeneratedCone) -> HPolyhedron:
    zero = Fraction(0)
    return HPolyhedron(c.dim,
                       tuple((a, zero) for a in c.rays),
                       tuple((b, zero) for b in c.lines))


def tangent_normal_cones(s: HPolyhedron, x):
    """Tangent cone (H-form) and normal cone (generators) of ``s`` at a feasible ``x``."""
    x = as_vector(x)
    bad = s.violated_row(x)
    if bad is not None:
        raise PreconditionError(f"point {fmt_vector(x)} violates {bad}")
    zero = Fraction(0)
    active = [a for a, b in s.inequalities if dot(a, x) == b]
    tangent = HPolyhedron(s.dim,
                          tuple((a, zero) for a in active),
                          tuple((a, zero) for a, _ in s.equalities))
    normal = FinitelyGeneratedCone(s.dim, tuple(active), tuple(a for a, _ in s.equalities))
    return tangent, normal


def _affine_projection_sq(q, pts):
    """Squared distance from q to conv(pts) when the projection onto aff(pts) lands inside."""
    base = pts[0]
    dirs = [sub(p, base) for p in pts[1:]]
    r = sub(q, base)
    k = len(dirs)
    if k == 0:
        return dot(r, r)
    gram = [[dot(dirs[i], dirs[j]) for j in range(k)] for i in range(k)]
    rhs = [dot(dirs[i], r) for i in range(k)]
    sol = _solve_square(gram, rhs)
    if sol is None:
        return None  # affinely dependent subset
    if any(c < 0 for c in sol) or sum(sol) > 1:
        return None
    proj = base
    for c, dvec in zip(sol, dirs):
        proj = add(proj, vscale(c, dvec))
    diff = sub(q, proj)
    return dot(diff, diff)


def _solve_square(a, b):
    n = len(a)
    m = [list(row) + [bv] for row, bv in zip(a, b)]
    for c in range(n):
        piv = next((i for i in range(c, n) if m[i][c] != 0), None)
        if piv is None:
            return None
        m[c], m[piv] = m[piv], m[c]
        pv = m[c][c]
        m[c] = [v / pv for v in m[c]]
        for i in range(n):
            if i != c and m[i][c] != 0:
                f = m[i][c]
                m[i] = [u - f * w for u, w in zip(m[i], m[c])]
    return [m[i][n] for i in range(n)]


def distance_sq_exact(p: VPolytope, q) -> Fraction:
    """Exact squared Euclidean distance to a polytope by face enumeration (dim <= 3)."""
    verts = list(dict.fromkeys(p.vertices))
    best = None
    for size in range(1, min(len(verts), p.dim + 1) + 1):
        for subset in itertools.combinations(verts, size):
            d2 = _affine_projection_sq(q, subset)
            if d2 is not None and (best is None or d2 < best):
                best = d2
    return best


def distance_inf(p: VPolytope, q) -> Fraction:
    """Exact L-infinity distance to a polytope via one LP."""
    k, n = len(p.vertices), p.dim
    # variables: lambda_1..lambda_k, s
    rows = [eq([1] * k + [0], 1)]
    for c in range(n):
        coeffs = [v[c] for v in p.vertices]
        rows.append(le(coeffs + [-1], q[c]))
        rows.append(le([-a for a in coeffs] + [-1], -q[c]))
    obj = [0] * k + [1]
    res = solve_lp(LinearProgram(k + 1, tuple(rows), tuple(obj), maximize=False,
                                 nonneg=frozenset(range(k + 1))))
    return res.value


TANGENT_SCHEDULE = tuple(range(4, 25))
TANGENT_THRESHOLD = 1e-9


def distance_ratios(p: VPolytope, x, v) -> list:
    """d_P(x + t v) / t along t = 2^-k, k = 4..24 (Euclidean for dim <= 3, L-inf above)."""
    x, v = as_vector(x), as_vector(v)
    _check_dim(p.dim, len(x))
    _check_dim(p.dim, len(v))
    if not hull_membership(x, p.vertices, "convex").inside:
        raise PreconditionError(f"point {fmt_vector(x)} is not in the polytope")
    ratios = []
    for k in TANGENT_SCHEDULE:
        t = Fraction(1, 2 ** k)
        q = add(x, vscale(t, v))
        if p.dim <= 3:
            dist = math.sqrt(distance_sq_exact(p, q))
        else:
            dist = float(distance_inf(p, q))
        ratios.append(dist / float(t))
    return ratios


def tangent_via_distance_oracle(p: VPolytope, x, v) -> str:
    """Classify ``v`` as 'tangent', 'not_tangent' or 'inconclusive' at ``x``.

    Tangent when the ratio falls below 1e-9 somewhere on the schedule. Above
    dimension 3 the L-inf distance is only a lower bound on the Euclidean one,
    so a small-but-nonzero ratio there is inconclusive.
    """
    ratios = distance_ratios(p, x, v)
    if p.dim <= 3:
        return "tangent" if min(ratios) < TANGENT_THRESHOLD else "not_tangent"
    if min(ratios) == 0:
        return "tangent"
    if min(ratios) >= TANGENT_THRESHOLD:
        return "not_tangent"
    return "inconclusive"


__all__ = [
    "VPolytope", "HPolyhedron", "FinitelyGeneratedCone", "Separator",
    "support_value", "minkowski_sum", "scale", "hull_union", "poly_combine",
    "polytope_contains", "same_polytope", "polar_cone", "tangent_normal_cones",
    "distance_sq_exact", "distance_inf", "distance_ratios", "tangent_via_distance_oracle",
]
