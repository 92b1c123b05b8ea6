"""Optimisation problems at a point: min f s.t. g_i <= 0, h_j = 0."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .errors import InputError, PreconditionError
from .expr import Expr, check_dimension, evaluate, float_tol
from .rational import as_vector, fmt, fmt_vector


@dataclass(frozen=True)
class Problem:
    objective: Expr
    inequalities: tuple = ()
    equalities: tuple = ()
    variables: tuple = ()
    point: Optional[tuple] = None
    name: str = ""
    gradient_overrides: tuple = ()  # (label, gradient) pairs; labels f, g1.., h1..
    slater_point: Optional[tuple] = None
    expected: tuple = ()  # (check, status) pairs
    provenance: str = ""

    def __post_init__(self):
        object.__setattr__(self, "inequalities", tuple(self.inequalities))
        object.__setattr__(self, "equalities", tuple(self.equalities))
        object.__setattr__(self, "variables", tuple(self.variables))
        if not self.variables:
            raise InputError("a problem needs at least one variable")
        n = len(self.variables)
        for label, e in self.labelled():
            try:
                check_dimension(e, n)
            except InputError as err:
                raise InputError(f"{label}: {err}") from None
        for attr in ("point", "slater_point"):
            v = getattr(self, attr)
            if v is not None:
                v = as_vector(v)
                if len(v) != n:
                    raise InputError(f"{attr} has dimension {len(v)}, expected {n}")
                object.__setattr__(self, attr, v)
        overrides = tuple((lab, as_vector(g)) for lab, g in dict(self.gradient_overrides).items())
        known = {lab for lab, _ in self.labelled()}
        for lab, g in overrides:
            if lab not in known:
                raise InputError(f"gradient override for unknown function {lab!r}")
            if len(g) != n:
                raise InputError(f"gradient override {lab} has dimension {len(g)}, expected {n}")
        object.__setattr__(self, "gradient_overrides", overrides)
        object.__setattr__(self, "expected", tuple(dict(self.expected).items()))

    @property
    def dim(self) -> int:
        return len(self.variables)

    def labelled(self):
        yield "f", self.objective
        for i, g in enumerate(self.inequalities, 1):
            yield f"g{i}", g
        for j, h in enumerate(self.equalities, 1):
            yield f"h{j}", h

    def override(self, label: str):
        return dict(self.gradient_overrides).get(label)

    def at(self, x=None) -> tuple:
        x = self.point if x is None else as_vector(x)
        if x is None:
            raise InputError("no point given and the problem has none")
        if len(x) != self.dim:
            raise InputError(f"point has dimension {len(x)}, expected {self.dim}")
        return x

    def violation(self, x) -> Optional[str]:
        """Name of the first violated constraint at ``x``, or None."""
        tol = float_tol()
        for i, g in enumerate(self.inequalities, 1):
            v = evaluate(g, x)
            if (v.exact and v.value > 0) or (not v.exact and v.value > tol):
                return f"g{i}(x) = {_show(v)} > 0"
        for j, h in enumerate(self.equalities, 1):
            v = evaluate(h, x)
            if (v.exact and v.value != 0) or (not v.exact and abs(v.value) > tol):
                return f"h{j}(x) = {_show(v)} != 0"
        return None

    def require_feasible(self, x) -> None:
        bad = self.violation(x)
        if bad is not None:
            raise PreconditionError(f"point {fmt_vector(x)} is infeasible: {bad}")

    def active_set(self, x) -> list:
        """1-based indices i with g_i(x) = 0 (within the float tolerance off the exact path)."""
        tol = float_tol()
        out = []
        for i, g in enumerate(self.inequalities, 1):
            v = evaluate(g, x)
            if (v.exact and v.value == 0) or (not v.exact and abs(v.value) <= tol):
                out.append(i)
        return out


def _show(v) -> str:
    return fmt(v.value) if v.exact else repr(v.value)
