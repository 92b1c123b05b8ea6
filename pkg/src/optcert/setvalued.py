"""Cone orders, minimality notions and a polyhedral multiplier rule for set-valued maps.

Everything here is finite: maps are sampled on finitely many arguments, cones
are finitely generated, and the epigraph in the multiplier rule is a
polyhedron. Results are exact over those finite data.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .errors import InputError, PreconditionError
from .geometry import FinitelyGeneratedCone, HPolyhedron, tangent_normal_cones
from .lp import LinearProgram, eq, ge, le, matrix_rank, solve_lp
from .rational import add, as_vector, dot, fmt, fmt_vector, scale, sub, unit

STRONG, MINIMAL, WEAK, NONE = "strong", "minimal", "weak", "none"
# tried in this order so that the midpoint witness surfaces first
CONVEXITY_LAMBDAS = (Fraction(1, 2), Fraction(1, 4), Fraction(3, 4), Fraction(0), Fraction(1))


@dataclass(frozen=True)
class OrderingCone:
    cone: FinitelyGeneratedCone
    pointed: bool = False
    interior_nonempty: bool = False

    @classmethod
    def from_generators(cls, rays, dim: Optional[int] = None, lines=()) -> "OrderingCone":
        rays = tuple(as_vector(r) for r in rays)
        if dim is None:
            if not rays:
                raise InputError("dimension needed for a cone without rays")
            dim = len(rays[0])
        cone = FinitelyGeneratedCone(dim, rays, tuple(lines))
        return cls(cone, _is_pointed(cone), _spans(cone))

    @classmethod
    def nonnegative_orthant(cls, dim: int) -> "OrderingCone":
        return cls.from_generators([unit(dim, i) for i in range(dim)], dim)

    @property
    def dim(self) -> int:
        return self.cone.dim

    def generators(self) -> list:
        """Nonzero generators, lines split into both signs."""
        gens = [r for r in self.cone.rays if any(r)]
        for b in self.cone.lines:
            gens += [b, tuple(-c for c in b)]
        return gens

    def interior_point(self) -> tuple:
        if not self.interior_nonempty:
            raise PreconditionError("cone has empty interior")
        acc = (Fraction(0),) * self.dim
        for g in self.generators():
            acc = add(acc, g)
        return acc

    def contains(self, v) -> bool:
        return self.cone.contains(v)

    def strictly_contains(self, v) -> bool:
        """v in int C: a combination with every generator weight at least s > 0."""
        if not self.interior_nonempty:
            raise PreconditionError("cone has empty interior")
        v = as_vector(v)
        gens = self.generators()
        k = len(gens)
        # variables lambda_1..k, s ; lambda_i >= s, s <= 1
        rows = [eq([g[c] for g in gens] + [0], v[c]) for c in range(self.dim)]
        for i in range(k):
            rows.append(ge([1 if j == i else 0 for j in range(k)] + [-1], 0))
        rows.append(le([0] * k + [1], 1))
        res = solve_lp(LinearProgram(k + 1, tuple(rows), tuple([0] * k + [1]),
                                     nonneg=frozenset(range(k))))
        return res.optimal and res.value > 0

    def dual_rows(self) -> list:
        """Rows r with <t, r> >= 0 describing the dual cone C* (lines give both signs)."""
        return self.generators()

    def to_json(self) -> dict:
        return {"cone": self.cone.to_json(), "pointed": self.pointed,
                "interior_nonempty": self.interior_nonempty}


def _is_pointed(cone: FinitelyGeneratedCone) -> bool:
    if any(any(b) for b in cone.lines):
        return False
    for r in cone.rays:
        if any(r) and cone.contains(tuple(-c for c in r)):
            return False
    return True


def _spans(cone: FinitelyGeneratedCone) -> bool:
    # a finitely generated cone has interior iff its generators span the space
    gens = list(cone.rays) + list(cone.lines)
    return bool(gens) and matrix_rank(gens) == cone.dim


def leq_cone(a, b, c: OrderingCone) -> bool:
    """a <= b, i.e. b - a in C."""
    a, b = as_vector(a), as_vector(b)
    if len(a) != len(b) or len(a) != c.dim:
        raise InputError("dimension mismatch in cone order")
    return c.contains(sub(b, a))


def order_interval_member(p, a, b, c: OrderingCone) -> bool:
    if not leq_cone(a, b, c):
        raise PreconditionError(f"interval endpoints not ordered: {fmt_vector(as_vector(a))} !<= "
                                f"{fmt_vector(as_vector(b))}")
    return leq_cone(a, p, c) and leq_cone(p, b, c)


def _key(x) -> tuple:
    if isinstance(x, (list, tuple)):
        return as_vector(x)
    return as_vector([x])


@dataclass(frozen=True)
class SampledSetValuedMap:
    """Finite association from arguments to nonempty finite image sets."""
    entries: tuple  # ((x, (y, ...)), ...)
    image_dim: int = 0

    def __post_init__(self):
        norm = []
        dims = set()
        seen = set()
        for x, ys in (self.entries.items() if isinstance(self.entries, dict) else self.entries):
            kx = _key(x)
            if kx in seen:
                raise InputError(f"argument {fmt_vector(kx)} listed twice")
            seen.add(kx)
            ims = tuple(_key(y) for y in ys)
            if not ims:
                raise InputError(f"empty image at {fmt_vector(kx)}")
            dims.update(len(y) for y in ims)
            norm.append((kx, ims))
        if len(dims) > 1:
            raise InputError("image points must share one dimension")
        object.__setattr__(self, "entries", tuple(norm))
        object.__setattr__(self, "image_dim", dims.pop() if dims else self.image_dim)

    @classmethod
    def from_function(cls, fn, domain) -> "SampledSetValuedMap":
        return cls(tuple((x, fn(x)) for x in domain))

    def domain(self) -> list:
        return [x for x, _ in self.entries]

    def image(self, x) -> tuple:
        kx = _key(x)
        for k, ys in self.entries:
            if k == kx:
                return ys
        raise PreconditionError(f"{fmt_vector(kx)} is outside the sampled domain")

    def image_of(self, xs) -> list:
        out = []
        for x in xs:
            for y in self.image(x):
                if y not in out:
                    out.append(y)
        return out


@dataclass
class Classification:
    label: str
    strong: bool
    minimal: bool
    weak: Optional[bool]  # None when int C is empty
    witnesses: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"label": self.label, "strong": self.strong, "minimal": self.minimal,
                "weak": self.weak,
                "witnesses": {k: fmt_vector(v) for k, v in self.witnesses.items()}}


def classify_point(fmap: SampledSetValuedMap, feasible: Sequence, x_star, y_star,
                   c: OrderingCone) -> Classification:
    """Strongest of strong / minimal / weak for (x*, y*) over F(S).

    The three predicates are computed independently; the nesting
    strong => minimal => weak is asserted.
    """
    feasible = [_key(x) for x in feasible]
    xs, ys = _key(x_star), _key(y_star)
    if xs not in feasible:
        raise PreconditionError(f"x* = {fmt_vector(xs)} is not feasible")
    if ys not in fmap.image(xs):
        raise PreconditionError(f"y* = {fmt_vector(ys)} is not in F(x*)")
    images = fmap.image_of(feasible)
    wit = {}

    strong = True
    for y in images:
        if not leq_cone(ys, y, c):
            strong = False
            wit.setdefault("not_strong", y)
            break
    minimal = True
    for y in images:
        if leq_cone(y, ys, c) and not leq_cone(ys, y, c):
            minimal = False
            wit["not_minimal"] = y
            break
    weak: Optional[bool]
    if c.interior_nonempty:
        weak = True
        for y in images:
            if c.strictly_contains(sub(ys, y)):
                weak = False
                wit["not_weak"] = y
                break
    else:
        weak = None

    if strong and not minimal:
        raise AssertionError("strong but not minimal")
    if minimal and weak is False:
        raise AssertionError("minimal but not weakly minimal")
    label = STRONG if strong else MINIMAL if minimal else WEAK if weak else NONE
    if label == NONE and weak is None:
        label = "inconclusive"
    return Classification(label, strong, minimal, weak, wit)


def epi_member(fmap: SampledSetValuedMap, x, y, c: OrderingCone) -> bool:
    """(x, y) in epi F, i.e. y in F(x) + C."""
    return any(leq_cone(q, _key(y), c) for q in fmap.image(x))


@dataclass
class ConvexityResult:
    holds: bool
    counterexample: Optional[dict] = None
    skipped: int = 0
    notes: list = field(default_factory=list)

    def to_json(self) -> dict:
        out = {"holds": self.holds, "skipped_combinations": self.skipped, "notes": self.notes}
        if self.counterexample:
            out["counterexample"] = {k: (fmt(v) if isinstance(v, Fraction) else fmt_vector(v))
                                     for k, v in self.counterexample.items()}
        return out


def cone_convexity_check(fmap: SampledSetValuedMap, c: OrderingCone,
                         lambdas: Sequence = CONVEXITY_LAMBDAS) -> ConvexityResult:
    """Sampled C-convexity: l F(x1) + (1-l) F(x2) within F(l x1 + (1-l) x2) + C.

    A counterexample is exact; a pass only covers the sampled combinations.
    Pairs are scanned widest first.
    """
    dom = fmap.domain()
    pairs = [(a, b) for a in dom for b in dom]
    pairs.sort(key=lambda p: -sum(abs(u - v) for u, v in zip(*p)))
    skipped = 0
    domset = set(dom)
    for lam in lambdas:
        lam = Fraction(lam)
        for x1, x2 in pairs:
            xm = add(scale(lam, x1), scale(1 - lam, x2))
            if xm not in domset:
                skipped += 1
                continue
            targets = fmap.image(xm)
            for a in fmap.image(x1):
                for b in fmap.image(x2):
                    p = add(scale(lam, a), scale(1 - lam, b))
                    if not any(leq_cone(q, p, c) for q in targets):
                        return ConvexityResult(False, {"x1": x1, "x2": x2, "lambda": lam, "y1": a,
                                                       "y2": b, "combination": p}, skipped)
    notes = ["verified on sampled combinations only"]
    if skipped:
        notes.append(f"{skipped} combinations skipped: combined argument not sampled")
    return ConvexityResult(True, None, skipped, notes)


@dataclass(frozen=True)
class PolyhedralInstance:
    """epi(F, G) as a polyhedron in (x, y, z) space with a base point and the constraint set."""
    epi: HPolyhedron
    nx: int
    ny: int
    nz: int
    x_star: tuple
    y_star: tuple
    z_star: tuple
    cone_y: OrderingCone
    cone_z: OrderingCone
    s_hat: Optional[HPolyhedron] = None

    def __post_init__(self):
        for name in ("x_star", "y_star", "z_star"):
            object.__setattr__(self, name, as_vector(getattr(self, name)))
        if (len(self.x_star), len(self.y_star), len(self.z_star)) != (self.nx, self.ny, self.nz):
            raise InputError("base point dimensions do not match nx, ny, nz")
        if self.epi.dim != self.nx + self.ny + self.nz:
            raise InputError("epigraph dimension must be nx + ny + nz")
        if self.cone_y.dim != self.ny or self.cone_z.dim != self.nz:
            raise InputError("ordering cone dimensions do not match y and z")
        if self.s_hat is None:
            object.__setattr__(self, "s_hat", HPolyhedron.whole_space(self.nx))
        elif self.s_hat.dim != self.nx:
            raise InputError("constraint set dimension must be nx")

    @property
    def base(self) -> tuple:
        return self.x_star + self.y_star + self.z_star


@dataclass
class SVMultipliers:
    t: Optional[tuple]
    u: Optional[tuple]
    regularity: bool
    found: bool
    notes: list = field(default_factory=list)
    evidence: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        out = {"found": self.found, "regularity": self.regularity, "notes": self.notes,
               "evidence": self.evidence}
        if self.found:
            out["t"] = fmt_vector(self.t)
            out["u"] = fmt_vector(self.u)
            out["u(z*)"] = self.evidence["u_z_star"]
        return out


def _contingent_cone(inst: PolyhedralInstance) -> HPolyhedron:
    """Tangent cone of epi(F,G) at the base point, with x-directions in the tangent cone of S-hat."""
    tangent, _ = tangent_normal_cones(inst.epi, inst.base)
    ts, _ = tangent_normal_cones(inst.s_hat, inst.x_star)
    pad = (Fraction(0),) * (inst.ny + inst.nz)
    ineqs = tangent.inequalities + tuple((a + pad, b) for a, b in ts.inequalities)
    eqs = tangent.equalities + tuple((a + pad, b) for a, b in ts.equalities)
    return HPolyhedron(tangent.dim, ineqs, eqs)


def _regularity(inst: PolyhedralInstance, k: HPolyhedron) -> tuple:
    """z-parts of the cone plus cone(C_Z + {z*}) equal Z: each of +-e_i is reachable."""
    n = k.dim
    zoff = inst.nx + inst.ny
    zgens = inst.cone_z.generators() + [inst.z_star]
    m = len(zgens)
    reach = True
    for i in range(inst.nz):
        for s in (1, -1):
            target = unit(inst.nz, i, s)
            rows = [le(list(a) + [0] * m, 0) for a, _ in k.inequalities]
            rows += [eq(list(a) + [0] * m, 0) for a, _ in k.equalities]
            for c in range(inst.nz):
                coeffs = [1 if j == zoff + c else 0 for j in range(n)] + [g[c] for g in zgens]
                rows.append(eq(coeffs, target[c]))
            res = solve_lp(LinearProgram(n + m, tuple(rows), None,
                                         nonneg=frozenset(range(n, n + m))))
            if not res.optimal:
                reach = False
    return reach


def sv_fritz_john(inst: PolyhedralInstance) -> SVMultipliers:
    """Search (t, u) != 0 with t*y + u*z >= 0 on the contingent cone's (y, z) parts.

    Constraints: t in C_Y*, u in C_Z*, u(z*) = 0, and the normalisation
    <t, e_Y> + <u, e_Z> = 1 for interior points e_Y, e_Z, which rules out
    (t, u) = 0 exactly. Nonnegativity of t*y + u*z on the cone K = {A w <= 0,
    E w = 0} is encoded through its polar: -(0, t, u) = A^T a + E^T b, a >= 0.
    """
    for name, c in (("C_Y", inst.cone_y), ("C_Z", inst.cone_z)):
        if not c.pointed:
            raise PreconditionError(f"{name} is not pointed")
        if not c.interior_nonempty:
            raise PreconditionError(f"{name} has empty interior")
    bad = inst.epi.violated_row(inst.base)
    if bad is not None:
        raise PreconditionError(f"base point violates the epigraph ({bad})")
    if not inst.cone_z.contains(tuple(-v for v in inst.z_star)):
        raise PreconditionError("z* is not in -C_Z")
    bad = inst.s_hat.violated_row(inst.x_star)
    if bad is not None:
        raise PreconditionError(f"x* violates the constraint set ({bad})")

    k = _contingent_cone(inst)
    n = k.dim
    nx, ny, nz = inst.nx, inst.ny, inst.nz
    arows = [a for a, _ in k.inequalities]
    erows = [a for a, _ in k.equalities]
    na, ne = len(arows), len(erows)
    # variables: t (ny), u (nz), alpha (na, >= 0), beta (ne)
    nv = ny + nz + na + ne
    rows = []
    for c in range(n):
        tu = [0] * (ny + nz)
        if c >= nx:
            tu[c - nx] = 1
        rows.append(eq(tu + [a[c] for a in arows] + [b[c] for b in erows], 0))
    pad_after_t = [0] * (nz + na + ne)
    pad_after_u = [0] * (na + ne)
    for g in inst.cone_y.dual_rows():
        rows.append(ge(list(g) + pad_after_t, 0))
    for g in inst.cone_z.dual_rows():
        rows.append(ge([0] * ny + list(g) + pad_after_u, 0))
    rows.append(eq([0] * ny + list(inst.z_star) + pad_after_u, 0))
    ey, ez = inst.cone_y.interior_point(), inst.cone_z.interior_point()
    rows.append(eq(list(ey) + list(ez) + pad_after_u, 1))
    res = solve_lp(LinearProgram(nv, tuple(rows), None,
                                 nonneg=frozenset(range(ny + nz, ny + nz + na))))
    regular = _regularity(inst, k)
    notes = ["finite-dimensional polyhedral instantiation",
             "contingent cone of the polyhedral epigraph used as the epiderivative's epigraph"]
    evidence = {"cone_inequalities": [fmt_vector(a) for a in arows],
                "cone_equalities": [fmt_vector(b) for b in erows],
                "normalization": f"<t, {fmt_vector(ey)}> + <u, {fmt_vector(ez)}> = 1"}
    if not res.optimal:
        evidence["farkas"] = fmt_vector(res.farkas)
        if regular:
            raise AssertionError("regular instance without multipliers")
        return SVMultipliers(None, None, regular, False, notes + ["no multipliers exist"], evidence)
    t = tuple(res.solution[:ny])
    u = tuple(res.solution[ny:ny + nz])
    evidence["u_z_star"] = fmt(dot(u, inst.z_star))
    if not _verify(inst, k, t, u):
        raise AssertionError("multiplier LP returned an invalid pair")
    if regular and not any(t):
        raise AssertionError("regular instance with t = 0")
    if regular:
        notes.append("regularity holds, so t != 0 (checked)")
    return SVMultipliers(t, u, regular, True, notes, evidence)


def _verify(inst: PolyhedralInstance, k: HPolyhedron, t, u) -> bool:
    """Re-check t in C_Y*, u in C_Z*, u(z*) = 0 and the cone inequality via an LP bound."""
    if any(dot(t, g) < 0 for g in inst.cone_y.generators()):
        return False
    if any(dot(u, g) < 0 for g in inst.cone_z.generators()):
        return False
    if dot(u, inst.z_star) != 0:
        return False
    n = k.dim
    obj = tuple([Fraction(0)] * inst.nx + list(t) + list(u))
    box = [le(list(unit(n, i, s)), 1) for i in range(n) for s in (1, -1)]
    res = solve_lp(LinearProgram(n, tuple(k.rows()) + tuple(box), obj, maximize=False))
    return res.optimal and res.value >= 0

