"""Random instance generators shared by the property and acceptance suites."""
from __future__ import annotations

import itertools
import random
from fractions import Fraction

from optcert.corpus import load_seeds
from optcert.expr import Abs, Const, Max, Min, Scale, Sum, Var

SEEDS = load_seeds()


def rng(k: int = 0) -> random.Random:
    return random.Random(SEEDS[k % len(SEEDS)] * 1000 + k)


def rat(r: random.Random, lo=-4, hi=4, dens=(1, 2, 3, 4)) -> Fraction:
    return Fraction(r.randint(lo * 12, hi * 12), 12) if dens is None else \
        Fraction(r.randint(lo * 4, hi * 4), r.choice(dens))


def vec(r: random.Random, n: int, lo=-3, hi=3) -> tuple:
    return tuple(Fraction(r.randint(lo, hi)) for _ in range(n))


def rvec(r: random.Random, n: int) -> tuple:
    return tuple(rat(r) for _ in range(n))


def affine(r: random.Random, n: int, lo=-3, hi=3):
    terms = [Scale(Fraction(r.randint(lo, hi)), Var(i)) for i in range(n)]
    return Sum(tuple(terms) + (Const(Fraction(r.randint(lo, hi))),))


def affine_through(r: random.Random, n: int, p, value=0, lo=-3, hi=3):
    """Affine a.(x - p) + value with random integer a."""
    a = vec(r, n, lo, hi)
    c = Fraction(value) - sum(ai * pi for ai, pi in zip(a, p))
    return Sum(tuple(Scale(ai, Var(i)) for i, ai in enumerate(a)) + (Const(c),)), a


def convex_expr(r: random.Random, n: int, depth: int = 2, p=None):
    """Random member of the structural convex fragment.

    When ``p`` is given, leaves vanish at p so max and abs nodes kink there.
    """
    if depth == 0:
        kind = r.choice(["affine", "abs"])
    else:
        kind = r.choice(["affine", "abs", "max", "sum", "scale"])
    leaf = (lambda: affine_through(r, n, p)[0]) if p is not None else (lambda: affine(r, n))
    if kind == "affine":
        return leaf()
    if kind == "abs":
        return Abs(leaf())
    if kind == "max":
        return Max(tuple(convex_expr(r, n, depth - 1, p) for _ in range(r.randint(2, 3))))
    if kind == "sum":
        return Sum(tuple(convex_expr(r, n, depth - 1, p) for _ in range(2)))
    return Scale(Fraction(r.randint(0, 3), r.choice((1, 2))), convex_expr(r, n, depth - 1, p))


def maxmin_expr(r: random.Random, n: int, p=None, depth: int = 2):
    """Random max/min/sum/scale of affine pieces (quasidifferential and Clarke fragments).

    When ``p`` is given, leaves pass through 0 at p so many branches tie there.
    """
    if depth == 0 or r.random() < 0.25:
        if p is not None:
            return affine_through(r, n, p)[0]
        return affine(r, n)
    kind = r.choice(["max", "min", "sum", "scale"])
    if kind in ("max", "min"):
        args = tuple(maxmin_expr(r, n, p, depth - 1) for _ in range(r.randint(2, 3)))
        return Max(args) if kind == "max" else Min(args)
    if kind == "sum":
        return Sum(tuple(maxmin_expr(r, n, p, depth - 1) for _ in range(2)))
    return Scale(Fraction(r.choice([-2, -1, 1, 2, 3]), r.choice((1, 2))), maxmin_expr(r, n, p, depth - 1))


def unit_directions(n: int) -> list:
    return [tuple(Fraction(1 if j == i else 0) * s for j in range(n)) for i in range(n) for s in (1, -1)]


def candidate_normals(points) -> list:
    """Directions that include every facet normal of conv(points) (dim 1..3)."""
    pts = list(dict.fromkeys(tuple(p) for p in points))
    n = len(pts[0])
    dirs = set(unit_directions(n))
    for a, b in itertools.combinations(pts, 2):
        d = tuple(x - y for x, y in zip(a, b))
        dirs.add(d)
        dirs.add(tuple(-c for c in d))
        if n == 2:
            dirs.add((d[1], -d[0]))
            dirs.add((-d[1], d[0]))
    if n == 3:
        # e x u_i spans the orthogonal complement of a collinear set
        for a, b in itertools.combinations(pts, 2):
            e = tuple(x - y for x, y in zip(a, b))
            for u in unit_directions(3):
                c = (e[1] * u[2] - e[2] * u[1], e[2] * u[0] - e[0] * u[2], e[0] * u[1] - e[1] * u[0])
                if any(c):
                    dirs.add(c)
        normals = set()
        for a, b, c in itertools.combinations(pts, 3):
            u = tuple(x - y for x, y in zip(b, a))
            v = tuple(x - y for x, y in zip(c, a))
            w = (u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0])
            if any(w):
                normals.add(w)
                normals.add(tuple(-c for c in w))
        dirs |= normals
        for w in list(normals):
            for a, b in itertools.combinations(pts, 2):
                e = tuple(x - y for x, y in zip(a, b))
                c = (w[1] * e[2] - w[2] * e[1], w[2] * e[0] - w[0] * e[2], w[0] * e[1] - w[1] * e[0])
                if any(c):
                    dirs.add(c)
                    dirs.add(tuple(-x for x in c))
    return [d for d in dirs if any(d)]


def random_metric(r: random.Random, n: int) -> list:
    """Random positive rational weights repaired into a metric by shortest paths."""
    d = [[Fraction(0) if i == j else None for j in range(n)] for i in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            w = Fraction(r.randint(1, 20), r.choice((1, 2, 3)))
            d[i][j] = d[j][i] = w
    for k in range(n):
        for i in range(n):
            for j in range(n):
                if d[i][k] + d[k][j] < d[i][j]:
                    d[i][j] = d[i][k] + d[k][j]
    return d
