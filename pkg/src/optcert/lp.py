"""Exact rational linear programming.

Two-phase primal simplex on a dense tableau of Fractions with Bland's
pivoting rule. Every answer carries a witness that can be re-checked with a
single matrix multiply: a feasible point when optimal, a Farkas combination of
the rows when infeasible, a recession ray when unbounded.

Variables are free unless listed in ``LinearProgram.nonneg``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from typing import NamedTuple, Optional, Sequence

from .errors import InputError
from .rational import as_vector, dot, to_fraction

LE = "<="
EQ = "="


@dataclass(frozen=True)
class Constraint:
    coeffs: tuple
    rhs: Fraction
    sense: str = LE

    def __post_init__(self):
        if self.sense not in (LE, EQ):
            raise InputError(f"constraint sense must be '<=' or '=', got {self.sense!r}")
        object.__setattr__(self, "coeffs", as_vector(self.coeffs))
        object.__setattr__(self, "rhs", to_fraction(self.rhs))

    def holds(self, x: Sequence) -> bool:
        lhs = dot(self.coeffs, x)
        return lhs <= self.rhs if self.sense == LE else lhs == self.rhs


def le(coeffs, rhs) -> Constraint:
    return Constraint(coeffs, rhs, LE)


def ge(coeffs, rhs) -> Constraint:
    return Constraint(tuple(-to_fraction(c) for c in coeffs), -to_fraction(rhs), LE)


def eq(coeffs, rhs) -> Constraint:
    return Constraint(coeffs, rhs, EQ)


@dataclass(frozen=True)
class LinearProgram:
    num_vars: int
    rows: tuple
    objective: Optional[tuple] = None
    maximize: bool = True
    nonneg: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if self.num_vars < 0:
            raise InputError("num_vars must be nonnegative")
        rows = tuple(self.rows)
        for i, row in enumerate(rows):
            if not isinstance(row, Constraint):
                raise InputError(f"row {i} is not a Constraint")
            if len(row.coeffs) != self.num_vars:
                raise InputError(
                    f"row {i} has {len(row.coeffs)} coefficients, expected {self.num_vars}")
        object.__setattr__(self, "rows", rows)
        if self.objective is not None:
            obj = as_vector(self.objective)
            if len(obj) != self.num_vars:
                raise InputError(
                    f"objective has {len(obj)} coefficients, expected {self.num_vars}")
            object.__setattr__(self, "objective", obj)
        nonneg = frozenset(self.nonneg)
        if any(not 0 <= j < self.num_vars for j in nonneg):
            raise InputError("nonneg index out of range")
        object.__setattr__(self, "nonneg", nonneg)


@dataclass(frozen=True)
class LPResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    solution: Optional[tuple] = None
    value: Optional[Fraction] = None
    farkas: Optional[tuple] = None
    ray: Optional[tuple] = None

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


def is_feasible_point(lp: LinearProgram, x: Sequence) -> bool:
    """Exact check that ``x`` satisfies every row and sign restriction."""
    if len(x) != lp.num_vars:
        return False
    if any(x[j] < 0 for j in lp.nonneg):
        return False
    return all(row.holds(x) for row in lp.rows)


def verify_farkas(lp: LinearProgram, y: Sequence) -> bool:
    """Check that ``y`` proves ``lp`` infeasible.

    Requirements: y_i >= 0 on '<=' rows; the combination sum_i y_i a_i is 0 on
    free variables and >= 0 on nonnegative ones; sum_i y_i b_i < 0. Adding up
    the rows then yields ``(nonnegative) <= (negative)``.
    """
    if len(y) != len(lp.rows):
        return False
    for yi, row in zip(y, lp.rows):
        if row.sense == LE and yi < 0:
            return False
    for j in range(lp.num_vars):
        comb = sum((yi * row.coeffs[j] for yi, row in zip(y, lp.rows)), Fraction(0))
        if j in lp.nonneg:
            if comb < 0:
                return False
        elif comb != 0:
            return False
    return sum((yi * row.rhs for yi, row in zip(y, lp.rows)), Fraction(0)) < 0


class _Tableau:
    """Dense simplex tableau; row ``obj`` holds reduced costs and -z in the last slot."""

    def __init__(self, rows, basis, ncols):
        self.rows = rows
        self.basis = basis
        self.ncols = ncols
        self.obj = [Fraction(0)] * (ncols + 1)

    def set_costs(self, costs):
        obj = list(costs) + [Fraction(0)]
        for i, b in enumerate(self.basis):
            cb = costs[b]
            if cb:
                row = self.rows[i]
                for j in range(self.ncols + 1):
                    if row[j]:
                        obj[j] -= cb * row[j]
        self.obj = obj

    def pivot(self, r, c):
        prow = self.rows[r]
        piv = prow[c]
        if piv != 1:
            prow = [v / piv for v in prow]
            self.rows[r] = prow
        nz = [j for j, v in enumerate(prow) if v]
        for i, row in enumerate(self.rows):
            if i != r:
                f = row[c]
                if f:
                    for j in nz:
                        row[j] -= f * prow[j]
        f = self.obj[c]
        if f:
            for j in nz:
                self.obj[j] -= f * prow[j]
        self.basis[r] = c

    def run(self, allowed):
        """Bland's rule; returns None at optimality or the unbounded column."""
        while True:
            enter = next((j for j in range(self.ncols) if allowed[j] and self.obj[j] < 0), None)
            if enter is None:
                return None
            best = None
            for i, row in enumerate(self.rows):
                a = row[enter]
                if a > 0:
                    ratio = row[-1] / a
                    key = (ratio, self.basis[i])
                    if best is None or key < best[0]:
                        best = (key, i)
            if best is None:
                return enter
            self.pivot(best[1], enter)


def solve_lp(lp: LinearProgram) -> LPResult:
    """Solve ``lp`` exactly. Deterministic for a fixed input."""
    n, m = lp.num_vars, len(lp.rows)
    # structural columns: (variable, sign) with x_var = x+ - x-
    cols = []
    for j in range(n):
        cols.append((j, 1))
        if j not in lp.nonneg:
            cols.append((j, -1))
    nstruct = len(cols)
    slack_col = {}
    for i, row in enumerate(lp.rows):
        if row.sense == LE:
            slack_col[i] = nstruct + len(slack_col)
    ncore = nstruct + len(slack_col)

    signs = []
    unit_col = []
    unit_cost = []
    artificial = []
    raw = []
    for i, row in enumerate(lp.rows):
        sgn = -1 if row.rhs < 0 else 1
        signs.append(sgn)
        vals = [sgn * row.coeffs[v] * s for v, s in cols]
        vals += [Fraction(0)] * len(slack_col)
        if i in slack_col:
            vals[slack_col[i]] = Fraction(sgn)
        raw.append((vals, sgn * row.rhs))
    ncols = ncore
    for i in range(m):
        if i in slack_col and signs[i] == 1:
            unit_col.append(slack_col[i])
            unit_cost.append(Fraction(0))
        else:
            unit_col.append(ncols)
            unit_cost.append(Fraction(1))
            artificial.append(ncols)
            ncols += 1
    rows = []
    for i, (vals, b) in enumerate(raw):
        full = vals + [Fraction(0)] * (ncols - ncore) + [b]
        if unit_col[i] >= ncore:
            full[unit_col[i]] = Fraction(1)
        rows.append(full)
    tab = _Tableau(rows, list(unit_col), ncols)

    is_art = [False] * ncols
    for a in artificial:
        is_art[a] = True

    if artificial:
        costs1 = [Fraction(1) if is_art[j] else Fraction(0) for j in range(ncols)]
        tab.set_costs(costs1)
        tab.run([True] * ncols)
        z = -tab.obj[-1]
        if z > 0:
            pi = [unit_cost[i] - tab.obj[unit_col[i]] for i in range(m)]
            y = [-pi[i] * signs[i] for i in range(m)]
            s = sum((yi * row.rhs for yi, row in zip(y, lp.rows)), Fraction(0))
            y = tuple(yi / -s for yi in y)
            return LPResult("infeasible", farkas=y)
        for i in range(m):
            if is_art[tab.basis[i]]:
                row = tab.rows[i]
                j = next((j for j in range(ncols) if not is_art[j] and row[j] != 0), None)
                if j is not None:
                    tab.pivot(i, j)

    costs2 = [Fraction(0)] * ncols
    if lp.objective is not None:
        for k, (v, s) in enumerate(cols):
            c = lp.objective[v] * s
            costs2[k] = -c if lp.maximize else c
    tab.set_costs(costs2)
    allowed = [not is_art[j] for j in range(ncols)]
    enter = tab.run(allowed)

    if enter is not None:
        d = [Fraction(0)] * ncols
        d[enter] = Fraction(1)
        for i, b in enumerate(tab.basis):
            d[b] -= tab.rows[i][enter]
        ray = [Fraction(0)] * n
        for k, (v, s) in enumerate(cols):
            ray[v] += s * d[k]
        return LPResult("unbounded", ray=tuple(ray))

    colval = [Fraction(0)] * ncols
    for i, b in enumerate(tab.basis):
        colval[b] = tab.rows[i][-1]
    x = [Fraction(0)] * n
    for k, (v, s) in enumerate(cols):
        x[v] += s * colval[k]
    x = tuple(x)
    value = dot(lp.objective, x) if lp.objective is not None else Fraction(0)
    return LPResult("optimal", solution=x, value=value)


@dataclass(frozen=True)
class Separator:
    """Hyperplane with ``<normal, v> <= offset`` on the generators and ``> offset`` at the point."""
    normal: tuple
    offset: Fraction


class Membership(NamedTuple):
    inside: bool
    witness: object  # coefficient tuple when inside, Separator otherwise


def hull_membership(point: Sequence, generators: Sequence[Sequence], mode: str = "convex") -> Membership:
    """Decide ``point`` in conv(generators) or cone(generators).

    On success the witness is the coefficient vector. On failure it is a
    Separator whose offset is 0 in conic mode; the point clears the
    separator by exactly 1.
    """
    if mode not in ("convex", "conic"):
        raise InputError(f"mode must be 'convex' or 'conic', got {mode!r}")
    if not generators:
        raise InputError("hull_membership needs at least one generator")
    p = as_vector(point)
    gens = [as_vector(g) for g in generators]
    dim = len(p)
    if any(len(g) != dim for g in gens):
        raise InputError("generator dimension does not match point")
    k = len(gens)
    rows = [eq([g[c] for g in gens], p[c]) for c in range(dim)]
    if mode == "convex":
        rows.append(eq([1] * k, 1))
    res = solve_lp(LinearProgram(k, tuple(rows), nonneg=frozenset(range(k))))
    if res.optimal:
        return Membership(True, res.solution)
    y = res.farkas
    z = y[:dim]
    offset = y[dim] if mode == "convex" else Fraction(0)
    return Membership(False, Separator(tuple(-v for v in z), offset))


def _integer_rows(rows):
    out = []
    for r in rows:
        r = as_vector(r)
        den = lcm(*(q.denominator for q in r)) if r else 1
        out.append([int(q * den) for q in r])
    return out


def matrix_rank(rows: Sequence[Sequence]) -> int:
    """Exact rank by fraction-free (Bareiss) elimination."""
    a = _integer_rows(rows)
    if not a or not a[0]:
        return 0
    nr, nc = len(a), len(a[0])
    if any(len(r) != nc for r in a):
        raise InputError("ragged matrix")
    rank = 0
    prev = 1
    for c in range(nc):
        piv = next((i for i in range(rank, nr) if a[i][c] != 0), None)
        if piv is None:
            continue
        a[rank], a[piv] = a[piv], a[rank]
        for i in range(rank + 1, nr):
            for j in range(c + 1, nc):
                a[i][j] = (a[rank][c] * a[i][j] - a[i][c] * a[rank][j]) // prev
            a[i][c] = 0
        prev = a[rank][c]
        rank += 1
        if rank == nr:
            break
    return rank


def left_kernel_vector(rows: Sequence[Sequence]) -> Optional[tuple]:
    """Nonzero ``mu`` with ``sum_j mu_j rows[j] = 0``, or None if the rows are independent."""
    vecs = [as_vector(r) for r in rows]
    k = len(vecs)
    if k == 0:
        return None
    dim = len(vecs[0])
    # reduce the dim x k system A^T mu = 0 to row echelon form
    mat = [[vecs[j][c] for j in range(k)] for c in range(dim)]
    pivots = []
    r = 0
    for c in range(k):
        piv = next((i for i in range(r, dim) if mat[i][c] != 0), None)
        if piv is None:
            continue
        mat[r], mat[piv] = mat[piv], mat[r]
        pv = mat[r][c]
        mat[r] = [v / pv for v in mat[r]]
        for i in range(dim):
            if i != r and mat[i][c] != 0:
                f = mat[i][c]
                mat[i] = [a - f * b for a, b in zip(mat[i], mat[r])]
        pivots.append(c)
        r += 1
    free = [c for c in range(k) if c not in pivots]
    if not free:
        return None
    f = free[0]
    mu = [Fraction(0)] * k
    mu[f] = Fraction(1)
    for i, c in enumerate(pivots):
        mu[c] = -mat[i][f]
    return tuple(mu)
