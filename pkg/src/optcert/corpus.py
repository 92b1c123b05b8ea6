"""The shipped regression corpus and its runner."""
from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

from .report import EXIT_FAILS, EXIT_HOLDS, EXIT_INPUT, run_check


def corpus_dir() -> Path:
    return Path(str(resources.files("optcert") / "corpus"))


def corpus_files(directory: Path | None = None) -> list:
    d = corpus_dir() if directory is None else Path(directory)
    if not d.is_dir():
        raise FileNotFoundError(f"corpus directory {d} not found")
    return sorted(p for p in d.glob("*.json"))


def load_seeds(directory: Path | None = None) -> list:
    d = corpus_dir() if directory is None else Path(directory)
    return json.loads((d / "seeds.json").read_text())["seeds"]


def _matches(expected, actual) -> bool:
    if isinstance(expected, dict):
        return isinstance(actual, dict) and all(k in actual and _matches(v, actual[k])
                                                for k, v in expected.items())
    return expected == actual


def corpus_run(name_filter: str = "", directory: Path | None = None) -> dict:
    """Run every expected check of every instance whose file name contains ``name_filter``."""
    try:
        files = corpus_files(directory)
    except FileNotFoundError as err:
        return {"tool": "optcert", "instances": [], "mismatches": 0, "warnings": [str(err)],
                "exit_status": EXIT_INPUT}
    results = []
    mismatches = 0
    for path in files:
        if name_filter and name_filter not in path.stem:
            continue
        text = path.read_text(encoding="utf-8")
        data = json.loads(text)
        if data.get("kind") == "seeds":
            continue
        values = data.get("expected_values", {})
        modes = data.get("modes", {})
        for check, want in sorted(data.get("expected", {}).items()):
            report = run_check(text, check, modes.get(check))
            rec = report["records"][0]
            ok = rec["status"] == want and _matches(values.get(check, {}), rec)
            mismatches += not ok
            results.append({"instance": path.stem, "check": check, "expected": want,
                            "status": rec["status"], "match": ok,
                            "provenance": data.get("provenance", "")})
    out = {"tool": "optcert", "instances": results, "mismatches": mismatches, "warnings": []}
    if not results:
        out["warnings"].append(f"no corpus instance matches filter {name_filter!r}")
    out["exit_status"] = EXIT_FAILS if mismatches else EXIT_HOLDS
    return out
