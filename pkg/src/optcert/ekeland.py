"""Constructive Ekeland variational principle on finite metric spaces."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .errors import InputError, PreconditionError
from .rational import fmt, to_fraction


@dataclass(frozen=True)
class FiniteMetricSpace:
    points: tuple
    dist: tuple  # rows of Fractions

    def __post_init__(self):
        n = len(self.dist)
        if any(len(row) != n for row in self.dist):
            raise InputError("distance matrix must be square")
        object.__setattr__(self, "dist", tuple(tuple(to_fraction(v) for v in row) for row in self.dist))
        pts = tuple(str(p) for p in self.points) if self.points else tuple(str(i) for i in range(n))
        if len(pts) != n:
            raise InputError(f"{len(pts)} labels for a {n}x{n} distance matrix")
        if len(set(pts)) != n:
            raise InputError("point labels must be distinct")
        object.__setattr__(self, "points", pts)

    @classmethod
    def from_matrix(cls, rows, labels: Optional[Sequence] = None) -> "FiniteMetricSpace":
        return cls(tuple(labels) if labels else (), tuple(tuple(r) for r in rows))

    @classmethod
    def parse(cls, text: str, labels: Optional[Sequence] = None) -> "FiniteMetricSpace":
        """First non-blank line n, then n rows of n rationals (whitespace or commas)."""
        lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
        numbered = [(k, ln) for k, ln in enumerate(lines, 1) if ln]
        if not numbered:
            raise InputError("empty metric-space file")
        k0, head = numbered[0]
        try:
            n = int(head)
        except ValueError:
            raise InputError(f"line {k0}: expected the number of points, got {head!r}") from None
        if n < 1:
            raise InputError(f"line {k0}: need at least one point")
        body = numbered[1:]
        if len(body) != n:
            raise InputError(f"expected {n} matrix rows after line {k0}, found {len(body)}")
        rows = []
        for k, ln in body:
            cells = ln.replace(",", " ").split()
            if len(cells) != n:
                raise InputError(f"line {k}: expected {n} entries, found {len(cells)}")
            try:
                rows.append(tuple(to_fraction(c) for c in cells))
            except InputError as err:
                raise InputError(f"line {k}: {err}") from None
        return cls.from_matrix(rows, labels)

    def __len__(self):
        return len(self.points)

    def index(self, label) -> int:
        try:
            return self.points.index(str(label))
        except ValueError:
            raise InputError(f"unknown point {label!r}") from None


def validate_metric_space(m: FiniteMetricSpace) -> None:
    """Raise InputError naming the first violating pair or triple."""
    d = m.dist
    n = len(d)
    for i in range(n):
        if d[i][i] != 0:
            raise InputError(f"nonzero diagonal at ({i},{i}): {fmt(d[i][i])}")
    for i in range(n):
        for j in range(i + 1, n):
            if d[i][j] != d[j][i]:
                raise InputError(f"asymmetric ({i},{j}): {fmt(d[i][j])} != {fmt(d[j][i])}")
            if d[i][j] <= 0:
                raise InputError(f"non-positive distance ({i},{j}): {fmt(d[i][j])}")
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(n):
                if k in (i, j):
                    continue
                if d[i][j] > d[i][k] + d[k][j]:
                    raise InputError(f"triangle ({i},{j}) via {k}: "
                                     f"{fmt(d[i][j])} > {fmt(d[i][k])}+{fmt(d[k][j])}")


@dataclass(frozen=True)
class EkelandResult:
    y: str
    iterates: tuple  # (z_i label, S_i labels)
    checks: dict

    @property
    def ok(self) -> bool:
        return all(self.checks.values())

    def to_json(self) -> dict:
        return {"y": self.y, "iterates": [{"z": z, "S": list(s)} for z, s in self.iterates],
                "checks": dict(self.checks)}


def ekeland_point(m: FiniteMetricSpace, f: Sequence, z, eps, lam=1) -> EkelandResult:
    """Iterate z_{i+1} = argmin f over S_i until a fixpoint.

    S_i = {x : f(x) + (eps/lam) d(x, z_i) <= f(z_i)}; ties go to the
    earlier point. Conclusions (i)-(iii), monotonicity and nestedness are
    checked exactly and returned in ``checks``.
    """
    validate_metric_space(m)
    n = len(m)
    f = tuple(to_fraction(v) for v in f)
    if len(f) != n:
        raise InputError(f"{len(f)} function values for {n} points")
    eps, lam = to_fraction(eps), to_fraction(lam)
    if eps <= 0 or lam <= 0:
        raise InputError("eps and lambda must be positive")
    z0 = m.index(z)
    d = m.dist
    fmin = min(f)
    if not f[z0] < fmin + eps:
        raise PreconditionError(f"f(z) = {fmt(f[z0])} is not below min f + eps = {fmt(fmin + eps)}")
    c = eps / lam

    iterates = []
    cur = z0
    prev_set = None
    monotone = nested = True
    while True:
        s = [x for x in range(n) if f[x] + c * d[x][cur] <= f[cur]]
        iterates.append((m.points[cur], tuple(m.points[x] for x in s)))
        if prev_set is not None and not set(s) <= prev_set:
            nested = False
        prev_set = set(s)
        nxt = min(s, key=lambda x: (f[x], x))
        if nxt == cur:
            break
        if not f[nxt] < f[cur]:
            monotone = False
        cur = nxt
    y = cur
    checks = {
        "i": d[z0][y] <= lam,
        "ii": f[y] + c * d[z0][y] <= f[z0],
        "iii": all(f[x] + c * d[x][y] >= f[y] for x in range(n)),
        "monotone": monotone,
        "nested": nested,
        "fixpoint_in_all_S": all(m.points[y] in s for _, s in iterates),
    }
    return EkelandResult(m.points[y], tuple(iterates), checks)
