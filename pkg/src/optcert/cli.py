"""Command-line entry point: ``optcert check | corpus run | ekeland``."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import __version__
from .errors import OptcertError
from .report import EXIT_FOR_STATUS, EXIT_INPUT, dumps, run_check


def _emit(report: dict, out: str | None) -> int:
    text = dumps(report)
    sys.stdout.write(text)
    if out:
        Path(out).write_text(text, encoding="utf-8")
    return report["exit_status"]


def _cmd_check(args) -> int:
    try:
        text = Path(args.file).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as err:
        sys.stderr.write(f"optcert: cannot read {args.file}: {err}\n")
        return EXIT_INPUT
    report = run_check(text, args.check, args.mode)
    if report["exit_status"] == EXIT_INPUT:
        sys.stderr.write(f"optcert: {report['records'][0]['message']}\n")
    return _emit(report, args.json)


def _cmd_corpus(args) -> int:
    from .corpus import corpus_run
    report = corpus_run(args.filter or "", args.dir)
    for w in report["warnings"]:
        sys.stderr.write(f"optcert: warning: {w}\n")
    return _emit(report, args.json)


def _cmd_ekeland(args) -> int:
    from .ekeland import FiniteMetricSpace, ekeland_point
    try:
        text = Path(args.space).read_text(encoding="utf-8")
        space = FiniteMetricSpace.parse(text)
        values = [v for v in args.f.replace(",", " ").split()]
        res = ekeland_point(space, values, args.z, args.eps, args.lam)
    except OSError as err:
        sys.stderr.write(f"optcert: cannot read {args.space}: {err}\n")
        return EXIT_INPUT
    except OptcertError as err:
        sys.stderr.write(f"optcert: {err}\n")
        return EXIT_INPUT
    status = "holds" if res.ok else "fails"
    rec = res.to_json()
    rec.update({"check": "ekeland", "theory": "metric", "status": status})
    report = {"tool": "optcert", "version": __version__, "records": [rec], "exit_status": EXIT_FOR_STATUS[status]}
    return _emit(report, args.json)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="optcert", description="Exact optimality certificates.")
    sub = parser.add_subparsers(dest="command", required=True)

    pc = sub.add_parser("check", help="run one check on a problem or instance file")
    pc.add_argument("file")
    pc.add_argument("--check", required=True,
                    help="kkt | fj-smooth | fj-convex | fj-lipschitz | fj-quasidiff | qd-inclusion | "
                         "fj-setvalued | cq:<licq|mfcq|slater|abadie_polyhedral> | "
                         "subdiff:<convex|clarke|quasidiff> | ekeland")
    pc.add_argument("--mode", choices=("kkt", "fj"), help="multiplier normalisation for smooth checks")
    pc.add_argument("--json", metavar="OUT", help="also write the report to OUT")
    pc.set_defaults(func=_cmd_check)

    pcor = sub.add_parser("corpus", help="regression corpus")
    csub = pcor.add_subparsers(dest="corpus_command", required=True)
    prun = csub.add_parser("run", help="run every corpus instance against its expected status")
    prun.add_argument("--filter", default="", help="substring of instance names")
    prun.add_argument("--dir", default=None, help=argparse.SUPPRESS)
    prun.add_argument("--json", metavar="OUT")
    prun.set_defaults(func=_cmd_corpus)

    pe = sub.add_parser("ekeland", help="Ekeland point on a finite metric space")
    pe.add_argument("space", help="file: first line n, then n rows of n rationals")
    pe.add_argument("--f", required=True, help="function values, comma separated rationals")
    pe.add_argument("--z", required=True, help="starting point label (row index)")
    pe.add_argument("--eps", required=True)
    pe.add_argument("--lambda", dest="lam", default="1")
    pe.add_argument("--json", metavar="OUT")
    pe.set_defaults(func=_cmd_ekeland)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse uses 2 for usage errors; that code means "inconclusive" here
        return EXIT_INPUT if exc.code else 0
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
