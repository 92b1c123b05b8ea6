"""Multiplier certificates and the vertex-combination LP behind them.

Given convex compact sets S_0 (objective), S_i (active inequalities) and
T_j (equalities), the search looks for weights on the vertices of S_0, S_i
and sign_j * T_j that sum to one and whose weighted vertex sum is zero. The
per-set weight totals are the multipliers. Equality multipliers are free in
sign, so each sign pattern is its own LP; at most 10 equalities.

When every pattern is infeasible the Farkas dual of each LP is a direction
d with <v, d> < 0 for every vertex v of every set of that pattern.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .errors import InputError
from .geometry import VPolytope, scale as pscale
from .lp import LinearProgram, eq, hull_membership, solve_lp
from .rational import dot, fmt, fmt_vector, is_zero

MAX_EQUALITIES = 10

HOLDS = "holds"
FAILS = "fails"
INCONCLUSIVE = "inconclusive"

SUM_NORMALIZATION = "sum of objective, active-inequality and |equality| multipliers = 1"


@dataclass
class Certificate:
    status: str
    theory: str
    multipliers: Optional[tuple] = None  # lambda_0 .. lambda_m, inactive ones are 0
    eq_multipliers: Optional[tuple] = None  # mu_1 .. mu_n
    witnesses: tuple = ()  # (label, weight, point) with sum of weight * point = 0
    refutation: Optional[dict] = None
    normalization: str = SUM_NORMALIZATION
    notes: list = field(default_factory=list)
    sets: dict = field(default_factory=dict)  # label -> VPolytope used in the search
    extra: dict = field(default_factory=dict)  # JSON-ready supplementary evidence

    def verify(self) -> bool:
        """Exact re-check of the embedded witness or refutation."""
        if self.status == HOLDS:
            return verify_combination(self.witnesses, self.sets)
        if self.status == FAILS and self.refutation is not None:
            return verify_refutation(self.refutation, self.sets)
        return self.status in (FAILS, INCONCLUSIVE)

    def to_json(self) -> dict:
        out = {"status": self.status, "theory": self.theory, "normalization": self.normalization}
        if self.multipliers is not None:
            out["multipliers"] = [fmt(v) for v in self.multipliers]
        if self.eq_multipliers is not None:
            out["eq_multipliers"] = [fmt(v) for v in self.eq_multipliers]
        if self.witnesses:
            out["witnesses"] = [{"set": lab, "weight": fmt(w), "point": fmt_vector(p)}
                                for lab, w, p in self.witnesses]
        if self.sets:
            out["sets"] = {lab: [fmt_vector(v) for v in s.vertices] for lab, s in self.sets.items()}
        if self.refutation is not None:
            out["refutation"] = _refutation_json(self.refutation)
        if self.notes:
            out["notes"] = list(self.notes)
        out.update(self.extra)
        return out


def _refutation_json(ref: dict) -> dict:
    out = {}
    for k, v in ref.items():
        if k == "patterns":
            out[k] = [{"signs": list(p.get("signs", ())), "direction": fmt_vector(p["direction"]),
                       "relations": {lab: p.get("relations", {}).get(lab, "<") for lab in p["labels"]}}
                      for p in v]
        elif isinstance(v, tuple) and v and isinstance(v[0], Fraction):
            out[k] = fmt_vector(v)
        elif isinstance(v, Fraction):
            out[k] = fmt(v)
        else:
            out[k] = v
    return out


def verify_combination(witnesses, sets: dict) -> bool:
    """Weights nonnegative, summing to one, points in their sets, weighted sum zero."""
    if not witnesses:
        return False
    dim = len(witnesses[0][2])
    total = [Fraction(0)] * dim
    wsum = Fraction(0)
    for label, w, p in witnesses:
        if w < 0:
            return False
        if label in sets and not hull_membership(p, sets[label].vertices, "convex").inside:
            return False
        wsum += w
        total = [t + w * c for t, c in zip(total, p)]
    return wsum == 1 and is_zero(total)


def verify_refutation(ref: dict, sets: dict) -> bool:
    """Check each pattern's direction d against every vertex v of its sets.

    Default relation is <v, d> < 0; a pattern may relax a label to '<=' or
    demand '=' through its ``relations`` map.
    """
    for pat in ref.get("patterns", ()):
        d = pat["direction"]
        relations = pat.get("relations", {})
        for label in pat["labels"]:
            sign = pat.get("label_signs", {}).get(label, 1)
            rel = relations.get(label, "<")
            for v in sets[label].vertices:
                val = sign * dot(v, d)
                if (rel == "<" and val >= 0) or (rel == "<=" and val > 0) or (rel == "=" and val != 0):
                    return False
    return bool(ref.get("patterns"))


@dataclass(frozen=True)
class SearchOutcome:
    found: bool
    weights: Optional[dict] = None  # label -> (total weight, combined point)
    signs: Optional[tuple] = None
    patterns: tuple = ()  # Farkas directions, one per sign pattern, when not found


def multiplier_search(objective: Optional[VPolytope], active: Sequence, equalities: Sequence,
                      objective_weight: str = "min") -> SearchOutcome:
    """Find a zero convex combination across the sets.

    ``active`` and ``equalities`` are lists of (label, VPolytope). With
    ``objective_weight="min"`` a degenerate certificate (weight 0 on the
    objective) is preferred whenever one exists; ``"max"`` prefers the
    largest objective weight.
    """
    if objective_weight not in ("min", "max"):
        raise InputError("objective_weight must be 'min' or 'max'")
    if len(equalities) > MAX_EQUALITIES:
        raise InputError(f"{len(equalities)} equality constraints exceed the limit of {MAX_EQUALITIES}")
    fixed = ([("f", objective)] if objective is not None else []) + list(active)
    all_sets = fixed + list(equalities)
    if not all_sets:
        raise InputError("multiplier search needs at least one set")
    dim = all_sets[0][1].dim
    if any(s.dim != dim for _, s in all_sets):
        raise InputError("sets in a multiplier search must share one dimension")

    patterns = []
    for signs in itertools.product((1, -1), repeat=len(equalities)):
        sets = fixed + [(lab, s if sg == 1 else pscale(-1, s)) for (lab, s), sg in zip(equalities, signs)]
        columns = []  # (label, vertex)
        for lab, s in sets:
            for v in dict.fromkeys(s.vertices):
                columns.append((lab, v))
        k = len(columns)
        rows = [eq([v[c] for _, v in columns], 0) for c in range(dim)]
        rows.append(eq([1] * k, 1))
        obj = None
        if objective is not None:
            obj = tuple(1 if lab == "f" else 0 for lab, _ in columns)
        res = solve_lp(LinearProgram(k, tuple(rows), obj, maximize=objective_weight == "max",
                                     nonneg=frozenset(range(k))))
        if res.optimal:
            weights = {}
            for (lab, v), a in zip(columns, res.solution):
                w, acc = weights.get(lab, (Fraction(0), [Fraction(0)] * dim))
                weights[lab] = (w + a, [t + a * c for t, c in zip(acc, v)])
            combined = {}
            for lab, _ in sets:
                w, acc = weights.get(lab, (Fraction(0), [Fraction(0)] * dim))
                point = tuple(c / w for c in acc) if w else None
                combined[lab] = (w, point)
            return SearchOutcome(True, combined, signs)
        z = res.farkas[:dim]
        patterns.append({"signs": signs, "direction": tuple(-c for c in z),
                         "labels": [lab for lab, _ in sets],
                         "label_signs": {lab: sg for (lab, _), sg in zip(equalities, signs)}})
    return SearchOutcome(False, patterns=tuple(patterns))


def certificate_from_search(outcome: SearchOutcome, theory: str, m: int, active_labels: dict,
                            eq_labels: Sequence, sets: dict, notes=None) -> Certificate:
    """Assemble a Certificate.

    ``active_labels`` maps inequality index (1-based) to its label;
    ``eq_labels`` lists equality labels in order; ``sets`` maps each label to
    its (unsigned) polytope.
    """
    notes = list(notes or [])
    if not outcome.found:
        return Certificate(FAILS, theory, refutation={
            "kind": "strict descent direction per equality sign pattern",
            "patterns": list(outcome.patterns)}, notes=notes, sets=dict(sets))
    w = outcome.weights
    lam = [Fraction(0)] * (m + 1)
    if "f" in w:
        lam[0] = w["f"][0]
    for i, lab in active_labels.items():
        lam[i] = w[lab][0]
    mu = tuple(sg * w[lab][0] for lab, sg in zip(eq_labels, outcome.signs))
    witnesses = []
    signed_sets = dict(sets)
    for lab, (weight, point) in w.items():
        if weight == 0:
            continue
        witnesses.append((lab, weight, point))
    for lab, sg in zip(eq_labels, outcome.signs):
        if sg == -1:
            signed_sets[lab] = pscale(-1, sets[lab])
            notes.append(f"{lab} enters with sign -1; its witness point lies in -{lab}")
    cert = Certificate(HOLDS, theory, tuple(lam), mu, tuple(witnesses), None,
                       notes=notes, sets=signed_sets)
    return cert
