"""Check dispatch and machine-readable reports.

A record is a JSON-ready dict with at least ``check``, ``theory`` and
``status``. Reports carry no timestamps, so reruns are byte-identical.
"""
from __future__ import annotations

import hashlib
import json

from . import __version__
from .certificate import FAILS, HOLDS, INCONCLUSIVE
from .errors import InputError, OptcertError
from .rational import fmt, fmt_vector

EXIT_HOLDS, EXIT_FAILS, EXIT_INCONCLUSIVE, EXIT_INPUT = 0, 1, 2, 3
EXIT_FOR_STATUS = {HOLDS: EXIT_HOLDS, FAILS: EXIT_FAILS, INCONCLUSIVE: EXIT_INCONCLUSIVE}

PROBLEM_CHECKS = ("kkt", "fj-smooth", "fj-convex", "fj-lipschitz", "fj-quasidiff", "qd-inclusion")
CQ_NAMES = ("licq", "mfcq", "slater", "abadie_polyhedral")
SUBDIFF_THEORIES = ("convex", "clarke", "quasidiff")


def _smooth_record(problem, mode):
    from .smooth import kkt_fj_smooth, problem_at_point
    p = problem_at_point(problem)
    cert = kkt_fj_smooth(p, mode)
    rec = cert.to_json()
    rec["gradients"] = p.to_json()
    rec["verified"] = cert.verify()
    if p.regularity:
        rec["regularity_probe"] = {lab: rep.to_json() for lab, rep in p.regularity}
    rec["numeric_evidence"] = bool(p.regularity) or not p.exact
    rec["assumptions"] = ["Guignard constraint qualification assumed, not verified"] if mode == "kkt" else []
    return rec


def _cert_record(cert):
    rec = cert.to_json()
    rec["verified"] = cert.verify()
    rec["numeric_evidence"] = False
    return rec


def _subdiff_record(problem, theory):
    from .lp import hull_membership
    x = problem.at()
    zero = (0,) * problem.dim
    if theory == "convex":
        from .convex import convex_subdifferential
        s = convex_subdifferential(problem.objective, x)
        rec = {"set": s.to_json(), "exactness": "exact"}
        rec["zero_in_set"] = hull_membership(zero, s.vertices, "convex").inside
    elif theory == "clarke":
        from .clarke import clarke_subdifferential
        g = clarke_subdifferential(problem.objective, x)
        rec = {"set": g.set.to_json(), "exactness": g.exactness}
        rec["zero_in_set"] = hull_membership(zero, g.set.vertices, "convex").inside
    elif theory == "quasidiff":
        from .quasidiff import qd_of_expr, qd_unconstrained_check
        q = qd_of_expr(problem.objective, x)
        ok, _ = qd_unconstrained_check(q)
        rec = {"quasidifferential": q.to_json(), "stationary": ok}
    else:
        raise InputError(f"unknown subdifferential theory {theory!r}; use one of {SUBDIFF_THEORIES}")
    rec.update({"status": HOLDS, "theory": theory, "point": fmt_vector(x), "numeric_evidence": False})
    return rec


def check_problem(problem, check: str, mode: str | None = None) -> dict:
    """Run one check on a Problem and return its record."""
    if check in ("kkt", "fj-smooth"):
        if mode is None:
            mode = "kkt" if check == "kkt" else "fritz_john"
        mode = {"fj": "fritz_john"}.get(mode, mode)
        rec = _smooth_record(problem, mode)
    elif check == "fj-convex":
        from .convex import fritz_john_convex
        rec = _cert_record(fritz_john_convex(problem))
    elif check == "fj-lipschitz":
        from .clarke import fritz_john_lipschitz
        rec = _cert_record(fritz_john_lipschitz(problem))
    elif check == "fj-quasidiff":
        from .quasidiff import qd_weakened_fj
        rec = _cert_record(qd_weakened_fj(problem))
    elif check == "qd-inclusion":
        from .quasidiff import qd_constrained_check
        res = qd_constrained_check(problem)
        rec = res.to_json()
        rec["theory"] = "quasidiff"
        rec["numeric_evidence"] = False
    elif check.startswith("cq:"):
        from .smooth import cq_check, problem_at_point
        which = check[3:]
        res = cq_check(problem_at_point(problem), which, problem)
        rec = res.to_json()
        rec["theory"] = "smooth"
        rec["numeric_evidence"] = False
    elif check.startswith("subdiff:"):
        rec = _subdiff_record(problem, check[8:])
    else:
        raise InputError(f"unknown check {check!r} for a problem file")
    rec["check"] = check
    return rec


def check_setvalued(inst, check: str) -> dict:
    if check != "fj-setvalued":
        raise InputError(f"check {check!r} does not apply to a set-valued instance; use fj-setvalued")
    from .setvalued import sv_fritz_john
    res = sv_fritz_john(inst)
    rec = res.to_json()
    rec.update({"check": check, "theory": "setvalued", "numeric_evidence": False,
                "status": HOLDS if res.found else FAILS})
    return rec


def check_ekeland(data: dict, check: str) -> dict:
    if check != "ekeland":
        raise InputError(f"check {check!r} does not apply to an Ekeland instance; use ekeland")
    from .ekeland import ekeland_point
    res = ekeland_point(data["space"], data["f"], data["z"], data["eps"], data["lambda"])
    rec = res.to_json()
    rec.update({"check": check, "theory": "metric", "status": HOLDS if res.ok else FAILS,
                "eps": fmt(data["eps"]), "lambda": fmt(data["lambda"]), "numeric_evidence": False})
    return rec


def load_instance(text: str):
    """(kind, parsed object, raw dict) for a problem, set-valued or Ekeland file."""
    from .serialize import ekeland_from_dict, load_json, problem_from_dict, setvalued_from_dict
    data = load_json(text)
    kind = data.get("kind", "problem")
    if kind == "problem":
        return kind, problem_from_dict(data), data
    body = {k: v for k, v in data.items() if k not in ("kind", "name", "expected", "provenance",
                                                      "expected_values", "modes", "notes")}
    if kind == "setvalued":
        return kind, setvalued_from_dict(body), data
    if kind == "ekeland":
        return kind, ekeland_from_dict(body), data
    raise InputError(f"$.kind: unknown instance kind {kind!r}")


def run_check(text: str, check: str, mode: str | None = None) -> dict:
    """Parse, dispatch and wrap one check into a report. Never raises OptcertError."""
    report = {"tool": "optcert", "version": __version__,
              "input_digest": "sha256:" + hashlib.sha256(text.encode("utf-8")).hexdigest()}
    try:
        kind, obj, _ = load_instance(text)
        if kind == "problem":
            rec = check_problem(obj, check, mode)
        elif kind == "setvalued":
            rec = check_setvalued(obj, check)
        else:
            rec = check_ekeland(obj, check)
        report["records"] = [rec]
        report["exit_status"] = EXIT_FOR_STATUS[rec["status"]]
    except OptcertError as err:
        report["records"] = [{"check": check, "status": "error", "error_type": type(err).__name__,
                              "message": str(err)}]
        report["exit_status"] = EXIT_INPUT
    return report


def dumps(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"
